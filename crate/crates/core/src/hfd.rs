//! Pencilled hfd line sets `H = ⋃_{v ∈ D} L[v, f(v)]`, where `D` is a line of
//! PG(5), every plane `f(v)` is external to H₅ and contains `D`, and `f` takes
//! finitely many values: a default plane plus finitely many exceptions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, FieldSpec, Scalar};
use crate::forms::AnisotropyCertificate;
use crate::klein::{self, KleinError, SecancyClass};
use crate::proj::{self, LineParam, ProjError, Subspace, SubspaceJson};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HfdError {
    #[error("descriptor: {0}")]
    Malformed(String),
    #[error("plane {0} does not contain D")]
    PlaneNotThroughD(usize),
    #[error("plane {0} is not external to the Klein quadric")]
    PlaneNotExternal(usize),
    #[error("externality of plane {0} undecided without a certificate")]
    Undecided(usize),
    #[error("D is not a 0-secant")]
    DNotZeroSecant,
    #[error("point does not lie on D")]
    PointNotOnD,
    #[error("hyperplane is not tangent to the Klein quadric")]
    NotTangent,
    #[error("classification inconsistency: {0}")]
    ClassificationInconsistency(String),
    #[error(transparent)]
    Klein(#[from] KleinError),
    #[error(transparent)]
    Proj(#[from] ProjError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `f(v) = planes[plane]` for the point `[t0 : t1]` of D.
#[derive(Debug, Clone)]
pub struct Exception {
    pub param: LineParam,
    pub plane: usize,
}

#[derive(Debug, Clone)]
pub struct HfdDescriptor {
    pub d: Subspace,
    pub planes: Vec<Subspace>,
    pub default: usize,
    pub exceptions: Vec<Exception>,
    pub certificates: Vec<Option<AnisotropyCertificate>>,
}

/// The pencil `L[v, κ]` of lines through `v` in `κ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PencilRef {
    pub vertex: Subspace,
    pub carrier: Subspace,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExceptionJson {
    pub param: [String; 2],
    pub plane: usize,
}

fn default_field() -> String {
    "Q".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HfdJson {
    #[serde(default = "default_field")]
    pub field: String,
    #[serde(rename = "D")]
    pub d: SubspaceJson,
    pub planes: Vec<SubspaceJson>,
    pub default: usize,
    #[serde(default)]
    pub exceptions: Vec<ExceptionJson>,
    #[serde(default)]
    pub certificates: Vec<Option<AnisotropyCertificate>>,
}

impl HfdDescriptor {
    /// Structural checks only; see [`validate_descriptor`] for the geometry.
    pub fn new(
        d: Subspace,
        planes: Vec<Subspace>,
        default: usize,
        exceptions: Vec<Exception>,
        certificates: Vec<Option<AnisotropyCertificate>>,
    ) -> Result<Self, HfdError> {
        let bad = |m: &str| Err(HfdError::Malformed(m.into()));
        if d.ambient() != 5 || d.dim() != 1 {
            return bad("D must be a line of PG(5)");
        }
        if planes.is_empty() {
            return bad("at least one plane is required");
        }
        if planes.iter().any(|p| p.ambient() != 5 || p.dim() != 2 || p.field() != d.field()) {
            return bad("planes must be planes of PG(5) over the field of D");
        }
        if default >= planes.len() || exceptions.iter().any(|e| e.plane >= planes.len()) {
            return bad("plane index out of range");
        }
        if planes.len() == 1 && !exceptions.is_empty() {
            return bad("a single plane admits no exceptions");
        }
        for (i, e) in exceptions.iter().enumerate() {
            if e.param.line != d {
                return bad("exception parameter refers to another line");
            }
            if exceptions[..i].iter().any(|o| o.param.same_parameter(&e.param.t0, &e.param.t1)) {
                return bad("duplicate exception parameter");
            }
        }
        if !certificates.is_empty() && certificates.len() != planes.len() {
            return bad("certificates must be given for every plane or none");
        }
        Ok(Self {
            d,
            planes,
            default,
            exceptions,
            certificates,
        })
    }

    /// `f ≡ κ` for a plane `κ ⊃ D`.
    pub fn constant(d: Subspace, plane: Subspace, certificate: Option<AnisotropyCertificate>) -> Result<Self, HfdError> {
        let certs = if certificate.is_some() { vec![certificate] } else { Vec::new() };
        Self::new(d, vec![plane], 0, Vec::new(), certs)
    }

    /// `f = κ₁` on the listed parameters of `D = κ₁ ∩ κ₂` and `κ₂` elsewhere.
    pub fn two_plane(
        k1: Subspace,
        k2: Subspace,
        params: &[(Scalar, Scalar)],
        certificates: Vec<Option<AnisotropyCertificate>>,
    ) -> Result<Self, HfdError> {
        let d = k1.meet(&k2)?;
        if d.dim() != 1 {
            return Err(HfdError::Malformed("planes must meet in a line".into()));
        }
        let exceptions = params
            .iter()
            .map(|(t0, t1)| {
                Ok(Exception {
                    param: LineParam::new(d.clone(), t0.clone(), t1.clone())?,
                    plane: 0,
                })
            })
            .collect::<Result<Vec<_>, ProjError>>()?;
        Self::new(d, vec![k1, k2], 1, exceptions, certificates)
    }

    pub fn field(&self) -> FieldSpec {
        self.d.field()
    }

    pub fn certificate(&self, i: usize) -> Option<&AnisotropyCertificate> {
        self.certificates.get(i).and_then(Option::as_ref)
    }

    pub fn to_json(&self) -> HfdJson {
        HfdJson {
            field: self.field().short_name(),
            d: self.d.to_json(),
            planes: self.planes.iter().map(Subspace::to_json).collect(),
            default: self.default,
            exceptions: self
                .exceptions
                .iter()
                .map(|e| ExceptionJson {
                    param: [e.param.t0.to_string(), e.param.t1.to_string()],
                    plane: e.plane,
                })
                .collect(),
            certificates: self.certificates.clone(),
        }
    }

    pub fn from_json(json: &HfdJson) -> Result<Self, HfdError> {
        let field = FieldSpec::parse_name(&json.field)?;
        let d = Subspace::from_json(field, &json.d)?;
        let planes = json
            .planes
            .iter()
            .map(|p| Subspace::from_json(field, p))
            .collect::<Result<Vec<_>, _>>()?;
        if d.dim() != 1 {
            return Err(HfdError::Malformed("D must be a line of PG(5)".into()));
        }
        let exceptions = json
            .exceptions
            .iter()
            .map(|e| {
                let t0 = field.parse_scalar(&e.param[0])?;
                let t1 = field.parse_scalar(&e.param[1])?;
                Ok(Exception {
                    param: LineParam::new(d.clone(), t0, t1)?,
                    plane: e.plane,
                })
            })
            .collect::<Result<Vec<_>, HfdError>>()?;
        Self::new(d, planes, json.default, exceptions, json.certificates.clone())
    }

    /// Indices of the planes attained by `f`, default first.
    pub fn attained(&self) -> Vec<usize> {
        let mut out = vec![self.default];
        for e in &self.exceptions {
            if !out.contains(&e.plane) {
                out.push(e.plane);
            }
        }
        out
    }
}

/// Geometric validation: every plane contains D and is external; D is a
/// 0-secant.
pub fn validate_descriptor(d: &HfdDescriptor) -> Result<(), HfdError> {
    for (i, plane) in d.planes.iter().enumerate() {
        if !plane.contains(&d.d)? {
            return Err(HfdError::PlaneNotThroughD(i));
        }
        match klein::is_external_plane(plane, d.certificate(i)) {
            Ok(true) => {}
            Ok(false) => return Err(HfdError::PlaneNotExternal(i)),
            Err(KleinError::UndecidedWithoutCertificate) => return Err(HfdError::Undecided(i)),
            Err(e) => return Err(e.into()),
        }
    }
    if klein::classify_line(&d.d)? != SecancyClass::Secant0 {
        return Err(HfdError::DNotZeroSecant);
    }
    Ok(())
}

/// Index of `f(v)` for a point `v` of D.
pub fn f_index(d: &HfdDescriptor, v: &Subspace) -> Result<usize, HfdError> {
    if v.dim() != 0 || !d.d.contains(v)? {
        return Err(HfdError::PointNotOnD);
    }
    let lp = LineParam::of_point(&d.d, v)?;
    Ok(d.exceptions
        .iter()
        .find(|e| e.param.same_parameter(&lp.t0, &lp.t1))
        .map_or(d.default, |e| e.plane))
}

pub fn f_of<'a>(d: &'a HfdDescriptor, v: &Subspace) -> Result<&'a Subspace, HfdError> {
    Ok(&d.planes[f_index(d, v)?])
}

/// Membership of a line of PG(5) in H, with a pencil containing it.
pub fn hfd_membership(d: &HfdDescriptor, x: &Subspace) -> Result<Option<PencilRef>, HfdError> {
    if x.dim() != 1 {
        return Ok(None);
    }
    if *x == d.d {
        let vertex = Subspace::point(d.field(), d.d.rows()[0].clone())?;
        let carrier = f_of(d, &vertex)?.clone();
        return Ok(Some(PencilRef { vertex, carrier }));
    }
    let v = x.meet(&d.d)?;
    if v.dim() != 0 {
        return Ok(None);
    }
    let carrier = f_of(d, &v)?;
    Ok(carrier.contains(x)?.then(|| PencilRef {
        vertex: v,
        carrier: carrier.clone(),
    }))
}

fn tangent_pole(tau: &Subspace) -> Result<Subspace, HfdError> {
    if tau.ambient() != 5 || tau.dim() != 4 {
        return Err(HfdError::NotTangent);
    }
    let pole = klein::polar(tau)?;
    if !klein::on_quadric(&pole)? {
        return Err(HfdError::NotTangent);
    }
    Ok(pole)
}

/// The member line of H inside the tangent hyperplane `τ`: D if `D ⊂ τ`,
/// otherwise `τ ∩ f(p)` with `p = τ ∩ D`.
pub fn line_in_tangent_hyperplane(d: &HfdDescriptor, tau: &Subspace) -> Result<Subspace, HfdError> {
    tangent_pole(tau)?;
    if tau.contains(&d.d)? {
        return Ok(d.d.clone());
    }
    let p = tau.meet(&d.d)?;
    let line = tau.meet(f_of(d, &p)?)?;
    if line.dim() != 1 {
        return Err(HfdError::ClassificationInconsistency(format!(
            "tangent hyperplane contains the plane f(p) at p = {p:?}"
        )));
    }
    Ok(line)
}

/// Result of the exactly-one check at a point of H₅.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HfdCheck {
    pub pass: bool,
    pub candidates: usize,
    pub members: usize,
    pub detail: String,
}

/// The tangent hyperplane `π₅(x)` contains exactly one line of H.
pub fn verify_hfd_at(d: &HfdDescriptor, x: &Subspace) -> Result<HfdCheck, HfdError> {
    if !klein::on_quadric(x)? {
        return Err(HfdError::NotTangent);
    }
    let tau = klein::polar(x)?;
    let mut candidates: Vec<Subspace> = Vec::new();
    let mut detail = String::new();
    for (i, plane) in d.planes.iter().enumerate() {
        let c = tau.meet(plane)?;
        if c.dim() != 1 {
            detail = format!("plane {i} lies in the tangent hyperplane");
            continue;
        }
        if !candidates.contains(&c) {
            candidates.push(c);
        }
    }
    let mut members = Vec::new();
    for c in &candidates {
        if hfd_membership(d, c)?.is_some() {
            members.push(c.clone());
        }
    }
    let mut pass = detail.is_empty() && members.len() == 1;
    if pass {
        let expected = line_in_tangent_hyperplane(d, &tau)?;
        if members[0] != expected {
            pass = false;
            detail = "member differs from the tangent-hyperplane line".into();
        } else if klein::classify_line(&members[0])? != SecancyClass::Secant0 {
            pass = false;
            detail = "member line meets the Klein quadric".into();
        }
    } else if detail.is_empty() {
        detail = format!("{} member lines in the tangent hyperplane", members.len());
    }
    Ok(HfdCheck {
        pass,
        candidates: candidates.len(),
        members: members.len(),
        detail,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HfdCase {
    PlaneOfLines,
    CollinearVertices,
}

/// `h(v) = k[plane]` on the listed parameters of V, `k[default]` elsewhere.
#[derive(Debug, Clone, Serialize)]
pub struct Assignment {
    pub default: usize,
    pub exceptions: Vec<([String; 2], usize)>,
}

#[derive(Debug, Clone)]
pub struct HfdClassification {
    pub case: HfdCase,
    pub v: Subspace,
    pub k: Vec<Subspace>,
    pub h: Assignment,
    pub dimension: isize,
}

pub fn classify(d: &HfdDescriptor) -> Result<HfdClassification, HfdError> {
    let inconsistent = |m: String| Err(HfdError::ClassificationInconsistency(m));
    // Distinct planes attained by f.
    let mut k: Vec<Subspace> = Vec::new();
    let index_of = |i: usize, k: &mut Vec<Subspace>| -> usize {
        let p = &d.planes[i];
        match k.iter().position(|q| q == p) {
            Some(j) => j,
            None => {
                k.push(p.clone());
                k.len() - 1
            }
        }
    };
    let default = index_of(d.default, &mut k);
    let exceptions: Vec<([String; 2], usize)> = d
        .exceptions
        .iter()
        .map(|e| ([e.param.t0.to_string(), e.param.t1.to_string()], index_of(e.plane, &mut k)))
        .collect();
    for (i, plane) in k.iter().enumerate() {
        let idx = d.planes.iter().position(|p| p == plane).expect("attained");
        if !klein::is_external_plane(plane, d.certificate(idx))? {
            return inconsistent(format!("attained plane {i} is not external"));
        }
    }
    let parts: Vec<&Subspace> = k.iter().collect();
    let dimension = proj::span(&parts)?.dim();
    let mut meet = k[0].clone();
    for plane in &k[1..] {
        meet = meet.meet(plane)?;
    }
    let h = Assignment { default, exceptions };
    if k.len() == 1 {
        if dimension != 2 {
            return inconsistent(format!("single plane spans dimension {dimension}"));
        }
        return Ok(HfdClassification {
            case: HfdCase::PlaneOfLines,
            v: k[0].clone(),
            k,
            h,
            dimension,
        });
    }
    if meet != d.d {
        return inconsistent("intersection of the attained planes differs from D".into());
    }
    if hfd_membership(d, &d.d)?.is_none() {
        return inconsistent("D is not a member".into());
    }
    if !(3..=5).contains(&dimension) {
        return inconsistent(format!("dimension {dimension} out of range"));
    }
    Ok(HfdClassification {
        case: HfdCase::CollinearVertices,
        v: meet,
        k,
        h,
        dimension,
    })
}

pub fn is_clifford(d: &HfdDescriptor) -> Result<bool, HfdError> {
    Ok(classify(d)?.case == HfdCase::PlaneOfLines)
}
