//! The Klein correspondence between lines of PG(3,K) and points of the Klein
//! quadric H₅ ⊂ PG(5,K), and the geometry of H₅ under its polarity π₅.
//!
//! Plücker coordinates are ordered `(p01, p02, p03, p12, p13, p23)` and the
//! quadric is `Q(p) = p01·p23 − p02·p13 + p03·p12`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{F2Frac, FieldSpec, Poly2, Scalar};
use crate::forms::{self, AnisotropyCertificate, FormError, IsotropyVerdict, QuadraticForm};
use crate::linalg::{self, Vector};
use crate::proj::{ProjError, Subspace};

/// Height of random scalars used by the sampling helpers.
pub const SAMPLE_HEIGHT: i64 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KleinError {
    #[error("expected a line of PG(3), got a subspace of dimension {0}")]
    NotALine(isize),
    #[error("point is not on the Klein quadric")]
    NotOnQuadric,
    #[error("reflection centre lies on the Klein quadric")]
    CentreOnQuadric,
    #[error("plane is not external to the Klein quadric")]
    NotExternal,
    #[error("construction requires an infinite field, got {0}")]
    FiniteField(String),
    #[error("no suitable point found within {0} samples")]
    SearchExhausted(usize),
    #[error("isotropy undecided over GF(2)(s,t) and no certificate supplied")]
    UndecidedWithoutCertificate,
    #[error("anisotropy certificate does not verify")]
    InvalidCertificate,
    #[error("line section undecided over GF(2)(s,t)")]
    Undecided,
    #[error("point does not lie on the given line")]
    PointNotOnLine,
    #[error(transparent)]
    Proj(#[from] ProjError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Position of a line of PG(5) relative to H₅, or of a plane (plane classes
/// other than `External` are diagnostic).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SecancyClass {
    #[serde(rename = "secant_0")]
    Secant0,
    #[serde(rename = "secant_1_tangent")]
    Secant1Tangent,
    #[serde(rename = "secant_2")]
    Secant2,
    #[serde(rename = "contained_in_H5")]
    ContainedInH5,
    #[serde(rename = "external")]
    External,
    #[serde(rename = "tangent_cone_section")]
    TangentConeSection,
    #[serde(rename = "conic_section")]
    ConicSection,
    #[serde(rename = "degenerate_section")]
    DegenerateSection,
    #[serde(rename = "contains_lines")]
    ContainsLines,
}

/// How a plane meets its polar plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanePolarType {
    Skew,
    MeetsInPoint,
    /// Not possible for external planes; reported for other inputs.
    MeetsInLine,
    SelfPolar,
}

/// Plücker coordinates of the line `x ∨ y` (zero if `x`, `y` are dependent).
pub fn plucker(x: &[Scalar], y: &[Scalar]) -> Vector {
    const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    PAIRS
        .iter()
        .map(|&(i, j)| &x[i] * &y[j] - &x[j] * &y[i])
        .collect()
}

pub fn q_eval(p: &[Scalar]) -> Scalar {
    &p[0] * &p[5] - &p[1] * &p[4] + &p[2] * &p[3]
}

pub fn b_eval(p: &[Scalar], q: &[Scalar]) -> Scalar {
    &p[0] * &q[5] + &p[5] * &q[0] - &p[1] * &q[4] - &p[4] * &q[1] + &p[2] * &q[3] + &p[3] * &q[2]
}

/// The linear form `y ↦ B(p, y)` as a coefficient vector.
pub fn polar_row(p: &[Scalar]) -> Vector {
    vec![
        p[5].clone(),
        -&p[4],
        p[3].clone(),
        p[2].clone(),
        -&p[1],
        p[0].clone(),
    ]
}

pub fn klein_form(field: FieldSpec) -> QuadraticForm {
    let mut upper = vec![vec![field.zero(); 6]; 6];
    upper[0][5] = field.one();
    upper[1][4] = field.from_i64(-1);
    upper[2][3] = field.one();
    QuadraticForm::from_upper(field, upper)
}

/// Klein form restricted to the canonical basis of a subspace of PG(5).
pub fn restrict(s: &Subspace) -> QuadraticForm {
    let rows = s.rows();
    let k = rows.len();
    let field = s.field();
    let mut upper = vec![vec![field.zero(); k]; k];
    for i in 0..k {
        upper[i][i] = q_eval(&rows[i]);
        for j in i + 1..k {
            upper[i][j] = b_eval(&rows[i], &rows[j]);
        }
    }
    QuadraticForm::from_upper(field, upper)
}

fn check_pg5(s: &Subspace) -> Result<(), KleinError> {
    if s.ambient() != 5 {
        return Err(ProjError::DimensionMismatch {
            expected: 6,
            got: s.ambient() + 1,
        }
        .into());
    }
    Ok(())
}

fn point_vector(p: &Subspace) -> Result<&Vector, KleinError> {
    check_pg5(p)?;
    p.expect_dim(0)?;
    Ok(p.vector().expect("point"))
}

pub fn on_quadric(p: &Subspace) -> Result<bool, KleinError> {
    Ok(q_eval(point_vector(p)?).is_zero())
}

/// λ: the Klein image of a line of PG(3).
pub fn lambda(line: &Subspace) -> Result<Subspace, KleinError> {
    if line.ambient() != 3 || line.dim() != 1 {
        return Err(KleinError::NotALine(line.dim()));
    }
    let r = line.rows();
    Ok(Subspace::point(line.field(), plucker(&r[0], &r[1]))?)
}

/// λ⁻¹: the line of PG(3) with Plücker coordinates `p`.
pub fn lambda_inv(p: &Subspace) -> Result<Subspace, KleinError> {
    let v = point_vector(p)?;
    if !q_eval(v).is_zero() {
        return Err(KleinError::NotOnQuadric);
    }
    let field = p.field();
    let zero = field.zero();
    // Rows of the skew matrix x yᵀ − y xᵀ span the line.
    let skew = vec![
        vec![zero.clone(), v[0].clone(), v[1].clone(), v[2].clone()],
        vec![-&v[0], zero.clone(), v[3].clone(), v[4].clone()],
        vec![-&v[1], -&v[3], zero.clone(), v[5].clone()],
        vec![-&v[2], -&v[4], -&v[5], zero],
    ];
    let line = Subspace::from_rows(field, 3, skew)?;
    if line.dim() != 1 {
        return Err(KleinError::NotOnQuadric);
    }
    Ok(line)
}

/// π₅(S) = {y : B(x, y) = 0 for all x ∈ S}.
pub fn polar(s: &Subspace) -> Result<Subspace, KleinError> {
    check_pg5(s)?;
    let rows: Vec<Vector> = s.rows().iter().map(|r| polar_row(r)).collect();
    let kernel = linalg::nullspace(s.field(), &rows, 6);
    Ok(Subspace::from_rows(s.field(), 5, kernel)?)
}

/// Plane of H₅ formed by the images of all lines through a point of PG(3).
pub fn star_plane(point: &Subspace) -> Result<Subspace, KleinError> {
    let p = point.vector().ok_or(KleinError::NotALine(point.dim()))?;
    let field = point.field();
    let rows: Vec<Vector> = (0..4)
        .map(|k| plucker(p, &linalg::unit_vector(field, 4, k)))
        .collect();
    Ok(Subspace::from_rows(field, 5, rows)?)
}

/// Plane of H₅ formed by the images of all lines in a plane of PG(3).
pub fn ruled_plane(plane: &Subspace) -> Result<Subspace, KleinError> {
    plane.expect_dim(2)?;
    let r = plane.rows();
    let rows = vec![
        plucker(&r[0], &r[1]),
        plucker(&r[0], &r[2]),
        plucker(&r[1], &r[2]),
    ];
    Ok(Subspace::from_rows(plane.field(), 5, rows)?)
}

pub fn random_line3<R: Rng + ?Sized>(field: FieldSpec, rng: &mut R) -> Subspace {
    Subspace::whole(field, 3).random_subspace(rng, 1, SAMPLE_HEIGHT)
}

/// Random point of H₅, as the Klein image of a random line.
pub fn random_quadric_point<R: Rng + ?Sized>(field: FieldSpec, rng: &mut R) -> Subspace {
    lambda(&random_line3(field, rng)).expect("line")
}

/// Secancy class of a line of PG(5).
pub fn classify_line(g: &Subspace) -> Result<SecancyClass, KleinError> {
    check_pg5(g)?;
    g.expect_dim(1)?;
    let form = restrict(g);
    if form.is_zero() {
        return Ok(SecancyClass::ContainedInH5);
    }
    match forms::binary_anisotropic(&form)? {
        IsotropyVerdict::Anisotropic { .. } => Ok(SecancyClass::Secant0),
        IsotropyVerdict::Unknown => Err(KleinError::Undecided),
        IsotropyVerdict::Isotropic { .. } => {
            let a = form.coeff(0, 0);
            let b = form.coeff(0, 1);
            let c = form.coeff(1, 1);
            // One double root iff the restricted polar form is degenerate.
            let degenerate = if g.field().characteristic() == 2 {
                b.is_zero()
            } else {
                (b * b - g.field().from_i64(4) * a * c).is_zero()
            };
            Ok(if degenerate {
                SecancyClass::Secant1Tangent
            } else {
                SecancyClass::Secant2
            })
        }
    }
}

fn plane_form(eps: &Subspace) -> Result<QuadraticForm, KleinError> {
    check_pg5(eps)?;
    eps.expect_dim(2)?;
    Ok(restrict(eps))
}

/// `eps ∩ H₅ = ∅`. Over GF(2)(s,t) a plane is reported external only on the
/// strength of a verified certificate.
pub fn is_external_plane(
    eps: &Subspace,
    certificate: Option<&AnisotropyCertificate>,
) -> Result<bool, KleinError> {
    let form = plane_form(eps)?;
    match eps.field() {
        FieldSpec::F2RationalFunctions => {
            if let Some(IsotropyVerdict::Isotropic { .. }) = forms::additive_isotropy(&form) {
                return Ok(false);
            }
            if forms::bounded_zero_search(&form).is_some() {
                return Ok(false);
            }
            match certificate {
                Some(cert) if forms::verify_certificate(&form, cert) => Ok(true),
                Some(_) => Err(KleinError::InvalidCertificate),
                None => Err(KleinError::UndecidedWithoutCertificate),
            }
        }
        _ => Ok(!forms::ternary_isotropic(&form)?.is_isotropic()),
    }
}

/// Certificate for an external plane over GF(2)(s,t), when one applies.
pub fn external_plane_certificate(eps: &Subspace) -> Result<Option<AnisotropyCertificate>, KleinError> {
    Ok(forms::anisotropy_certificate(&plane_form(eps)?))
}

/// Diagnostic classification of a plane section of H₅.
pub fn classify_plane(eps: &Subspace) -> Result<SecancyClass, KleinError> {
    let form = plane_form(eps)?;
    if form.is_zero() {
        return Ok(SecancyClass::ContainsLines);
    }
    let verdict = forms::decide_isotropy(&form)?;
    match verdict {
        IsotropyVerdict::Anisotropic { .. } => return Ok(SecancyClass::External),
        IsotropyVerdict::Unknown => return Err(KleinError::Undecided),
        IsotropyVerdict::Isotropic { .. } => {}
    }
    let polar_rank = linalg::rank(form.polar_matrix());
    let class = if eps.field().characteristic() == 2 {
        if polar_rank == 0 {
            SecancyClass::DegenerateSection
        } else {
            let radical = linalg::nullspace(eps.field(), form.polar_matrix(), 3);
            if form.eval(&radical[0]).is_zero() {
                SecancyClass::TangentConeSection
            } else {
                SecancyClass::ConicSection
            }
        }
    } else {
        match polar_rank {
            3 => SecancyClass::ConicSection,
            2 => SecancyClass::TangentConeSection,
            _ => SecancyClass::DegenerateSection,
        }
    };
    Ok(class)
}

/// A tangent hyperplane `π₅(x)`, `x ∈ H₅`, containing a subspace `S`, with
/// a subspace `M ⊆ S ∩ H₅` of dimension at least `dim S − 2`.
#[derive(Debug, Clone)]
pub struct TangentHyperplane {
    pub pole: Subspace,
    pub hyperplane: Subspace,
    pub witness: Subspace,
}

fn first_plane_of_quadric(field: FieldSpec) -> Subspace {
    Subspace::from_rows(field, 5, (0..3).map(|i| linalg::unit_vector(field, 6, i)).collect())
        .expect("coordinate plane")
}

/// A tangent hyperplane containing `s`, or `None` if `π₅(s) ∩ H₅ = ∅`.
pub fn tangent_hyperplane_containing(s: &Subspace) -> Result<Option<TangentHyperplane>, KleinError> {
    check_pg5(s)?;
    let field = s.field();
    let ps = polar(s)?;
    let x = if s.dim() == 0 && q_eval(&s.rows()[0]).is_zero() {
        s.clone()
    } else if s.dim() <= 1 {
        // π₅(S) has dimension ≥ 3 and meets the plane p12 = p13 = p23 = 0 of H₅.
        let m = ps.meet(&first_plane_of_quadric(field))?;
        Subspace::point(field, m.rows()[0].clone())?
    } else {
        let form = restrict(&ps);
        match forms::decide_isotropy(&form)? {
            IsotropyVerdict::Isotropic { witness } => {
                let mut v = vec![field.zero(); 6];
                for (c, row) in witness.iter().zip(ps.rows()) {
                    v = linalg::add(&v, &linalg::scale(c, row));
                }
                Subspace::point(field, v)?
            }
            IsotropyVerdict::Anisotropic { .. } => return Ok(None),
            IsotropyVerdict::Unknown => return Err(KleinError::Undecided),
        }
    };
    let hyperplane = polar(&x)?;
    let line = lambda_inv(&x)?;
    let centre = Subspace::point(field, line.rows()[0].clone())?;
    let mu = star_plane(&centre)?;
    let witness = s.meet(&mu)?;
    Ok(Some(TangentHyperplane {
        pole: x,
        hyperplane,
        witness,
    }))
}

/// A point `x ∈ H₅` with `p ∈ π₅(x)` and `G ⊄ π₅(x)`, found by sampling the
/// section `π₅(p) ∩ H₅`.
pub fn tangent_through_point_avoiding<R: Rng + ?Sized>(
    p: &Subspace,
    g: &Subspace,
    rng: &mut R,
    budget: usize,
) -> Result<Subspace, KleinError> {
    let pv = point_vector(p)?;
    g.expect_dim(1)?;
    if q_eval(pv).is_zero() {
        return Err(KleinError::CentreOnQuadric);
    }
    if !g.contains(p)? {
        return Err(KleinError::PointNotOnLine);
    }
    let field = p.field();
    let pg3 = Subspace::whole(field, 3);
    for _ in 0..budget {
        let x = sample_complex_point(pv, &pg3, rng);
        let Some(x) = x else { continue };
        let xv = x.vector().expect("point");
        if g.rows().iter().any(|r| !b_eval(xv, r).is_zero()) {
            return Ok(x);
        }
    }
    Err(KleinError::SearchExhausted(budget))
}

/// Random point of `π₅(p) ∩ H₅`: `λ(P ∨ z)` with `z` chosen so that
/// `B(λ(P ∨ z), p) = 0`.
pub fn sample_complex_point<R: Rng + ?Sized>(
    p: &[Scalar],
    pg3: &Subspace,
    rng: &mut R,
) -> Option<Subspace> {
    let field = pg3.field();
    let a = pg3.random_vector(rng, SAMPLE_HEIGHT);
    let form: Vector = (0..4)
        .map(|k| b_eval(&plucker(&a, &linalg::unit_vector(field, 4, k)), p))
        .collect();
    let kernel = Subspace::from_rows(field, 3, linalg::nullspace(field, &[form], 4)).ok()?;
    let z = kernel.random_vector(rng, SAMPLE_HEIGHT);
    let pl = plucker(&a, &z);
    if linalg::is_zero_vector(&pl) {
        return None;
    }
    Subspace::point(field, pl).ok()
}

/// The involution `σ(x) = x − (B(x,q)/Q(q))·q` with centre `q ∉ H₅`.
pub fn reflect(q: &[Scalar], x: &[Scalar]) -> Result<Vector, KleinError> {
    let qq = q_eval(q);
    if qq.is_zero() {
        return Err(KleinError::CentreOnQuadric);
    }
    let c = b_eval(x, q) / qq;
    Ok(linalg::sub(x, &linalg::scale(&c, q)))
}

pub fn reflect_subspace(q: &[Scalar], s: &Subspace) -> Result<Subspace, KleinError> {
    let rows = s
        .rows()
        .iter()
        .map(|r| reflect(q, r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Subspace::from_rows(s.field(), 5, rows)?)
}

/// Output of [`second_external_plane`].
#[derive(Debug, Clone)]
pub struct SecondPlane {
    pub plane: Subspace,
    pub centre: Subspace,
    pub common_line: Subspace,
}

/// Scalars `c₁, c₂, …`, pairwise distinct and nonzero.
fn nonzero_sequence(field: FieldSpec, k: usize) -> Scalar {
    match field {
        FieldSpec::F2RationalFunctions => {
            // Distinct monomials s^a t^b, enumerated by total degree.
            let mut idx = k;
            let mut d = 0u32;
            while idx > d as usize {
                idx -= d as usize + 1;
                d += 1;
            }
            let a = idx as u32;
            Scalar::F2st(F2Frac::from_poly(Poly2::monomial(a, d - a)))
        }
        _ => field.from_i64(k as i64 + 1),
    }
}

/// A second external plane meeting `eps1` in a line: the image of `eps1`
/// under a reflection whose centre lies on a tangent line of H₅. `variant`
/// selects among the admissible centres.
pub fn second_external_plane(
    eps1: &Subspace,
    certificate: Option<&AnisotropyCertificate>,
    variant: usize,
) -> Result<SecondPlane, KleinError> {
    let field = eps1.field();
    if field.is_finite() {
        return Err(KleinError::FiniteField(field.to_string()));
    }
    if !is_external_plane(eps1, certificate)? {
        return Err(KleinError::NotExternal);
    }
    let polar1 = polar(eps1)?;
    // T = x ∨ y with x = e01 ∈ H₅ and y = e02 + e13 ∈ π₅(x), Q(y) ≠ 0.
    let x = linalg::unit_vector(field, 6, 0);
    let y = linalg::add(&linalg::unit_vector(field, 6, 1), &linalg::unit_vector(field, 6, 4));
    let mut admissible = 0;
    for k in 0..64 {
        let c = nonzero_sequence(field, k);
        let q = linalg::add(&x, &linalg::scale(&c, &y));
        if eps1.contains_vector(&q)? || polar1.contains_vector(&q)? {
            continue;
        }
        if admissible < variant {
            admissible += 1;
            continue;
        }
        let plane = reflect_subspace(&q, eps1)?;
        let common_line = eps1.meet(&plane)?;
        if plane == *eps1 || common_line.dim() != 1 || !is_external_plane(&plane, certificate)? {
            return Err(KleinError::NotExternal);
        }
        return Ok(SecondPlane {
            plane,
            centre: Subspace::point(field, q)?,
            common_line,
        });
    }
    Err(KleinError::SearchExhausted(64))
}

pub fn plane_polar_type(eps: &Subspace) -> Result<PlanePolarType, KleinError> {
    check_pg5(eps)?;
    eps.expect_dim(2)?;
    let meet = eps.meet(&polar(eps)?)?;
    Ok(match meet.dim() {
        -1 => PlanePolarType::Skew,
        0 => PlanePolarType::MeetsInPoint,
        1 => PlanePolarType::MeetsInLine,
        _ => PlanePolarType::SelfPolar,
    })
}

/// `N ⊆ π₅(N)`.
pub fn is_nucleus_line(n: &Subspace) -> Result<bool, KleinError> {
    check_pg5(n)?;
    n.expect_dim(1)?;
    Ok(polar(n)?.contains(n)?)
}

/// For a plane meeting its polar in a single point `q`: whether `G` is a
/// line of the pencil with vertex `q` in `eps`.
pub fn in_nucleus_pencil(eps: &Subspace, g: &Subspace) -> Result<Option<bool>, KleinError> {
    let meet = eps.meet(&polar(eps)?)?;
    if meet.dim() != 0 {
        return Ok(None);
    }
    Ok(Some(eps.contains(g)? && g.contains(&meet)?))
}

/// Exhaustive counts over GF(2) or GF(3).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteSearch {
    pub field: String,
    pub planes: u64,
    pub external_planes: u64,
    pub lines: u64,
    pub zero_secants: u64,
}

pub fn search_finite(field: FieldSpec) -> Result<FiniteSearch, KleinError> {
    let mut out = FiniteSearch {
        field: field.to_string(),
        planes: 0,
        external_planes: 0,
        lines: 0,
        zero_secants: 0,
    };
    for eps in crate::proj::enumerate_subspaces(field, 5, 2)? {
        out.planes += 1;
        if is_external_plane(&eps, None)? {
            out.external_planes += 1;
        }
    }
    for g in crate::proj::enumerate_subspaces(field, 5, 1)? {
        out.lines += 1;
        if classify_line(&g)? == SecancyClass::Secant0 {
            out.zero_secants += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proj::enumerate_subspaces;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q() -> FieldSpec {
        FieldSpec::Rationals
    }

    fn line(field: FieldSpec, a: &[i64], b: &[i64]) -> Subspace {
        Subspace::from_rows(
            field,
            3,
            vec![
                a.iter().map(|&x| field.from_i64(x)).collect(),
                b.iter().map(|&x| field.from_i64(x)).collect(),
            ],
        )
        .unwrap()
    }

    fn pt(field: FieldSpec, c: &[i64]) -> Subspace {
        Subspace::point_from_ints(field, c).unwrap()
    }

    #[test]
    fn lambda_examples() {
        let k = q();
        assert_eq!(lambda(&line(k, &[1, 0, 0, 0], &[0, 1, 0, 0])).unwrap(), pt(k, &[1, 0, 0, 0, 0, 0]));
        assert_eq!(lambda(&line(k, &[0, 0, 1, 0], &[0, 0, 0, 1])).unwrap(), pt(k, &[0, 0, 0, 0, 0, 1]));
        assert_eq!(lambda(&line(k, &[1, 0, 0, 0], &[0, 1, 1, 0])).unwrap(), pt(k, &[1, 1, 0, 0, 0, 0]));
        let p = Subspace::whole(k, 3);
        assert_eq!(lambda(&p), Err(KleinError::NotALine(3)));
    }

    #[test]
    fn lambda_inverse_round_trip() {
        let k = q();
        assert_eq!(lambda_inv(&pt(k, &[1, 0, 0, 0, 0, 0])).unwrap(), line(k, &[1, 0, 0, 0], &[0, 1, 0, 0]));
        assert_eq!(lambda_inv(&pt(k, &[0, 0, 0, 0, 0, 1])).unwrap(), line(k, &[0, 0, 1, 0], &[0, 0, 0, 1]));
        assert_eq!(lambda_inv(&pt(k, &[1, 0, 0, 0, 0, 1])), Err(KleinError::NotOnQuadric));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let l = random_line3(k, &mut rng);
            let p = lambda(&l).unwrap();
            assert!(on_quadric(&p).unwrap());
            assert_eq!(lambda_inv(&p).unwrap(), l);
        }
    }

    #[test]
    fn polar_examples() {
        let k = q();
        let e01 = pt(k, &[1, 0, 0, 0, 0, 0]);
        let h = polar(&e01).unwrap();
        assert_eq!(h.dim(), 4);
        for i in 0..5 {
            assert!(h.contains_vector(&linalg::unit_vector(k, 6, i)).unwrap());
        }
        assert!(!h.contains_vector(&linalg::unit_vector(k, 6, 5)).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let whole = Subspace::whole(k, 5);
        for _ in 0..50 {
            let d = rng.gen_range(-1..=5);
            let s = whole.random_subspace(&mut rng, d, 3);
            let p = polar(&s).unwrap();
            assert_eq!(p.dim(), 4 - s.dim());
            assert_eq!(polar(&p).unwrap(), s);
        }
    }

    #[test]
    fn form_and_polar_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for field in [q(), FieldSpec::prime(5).unwrap(), FieldSpec::F2RationalFunctions] {
            let form = klein_form(field);
            for _ in 0..20 {
                let x: Vector = (0..6).map(|_| field.random_scalar(&mut rng, 3)).collect();
                let y: Vector = (0..6).map(|_| field.random_scalar(&mut rng, 3)).collect();
                assert_eq!(form.eval(&x), q_eval(&x));
                assert_eq!(form.polar_eval(&x, &y), b_eval(&x, &y));
                assert_eq!(linalg::dot(&polar_row(&x), &y), b_eval(&x, &y));
                if field.characteristic() == 2 {
                    assert!(b_eval(&x, &x).is_zero());
                }
            }
        }
    }

    fn meets(a: &Subspace, b: &Subspace) -> bool {
        a.meet(b).unwrap().dim() >= 0
    }

    #[test]
    fn incidence_matches_polarity_exhaustively() {
        for p in [2u32, 3] {
            let k = FieldSpec::prime(p).unwrap();
            let lines: Vec<Subspace> = enumerate_subspaces(k, 3, 1).unwrap().collect();
            let images: Vec<Subspace> = lines.iter().map(|l| lambda(l).unwrap()).collect();
            let mut distinct = images.clone();
            distinct.sort_by_key(|s| format!("{s:?}"));
            distinct.dedup();
            assert_eq!(distinct.len(), lines.len());
            let quadric_points = enumerate_subspaces(k, 5, 0)
                .unwrap()
                .filter(|x| on_quadric(x).unwrap())
                .count();
            assert_eq!(quadric_points, lines.len());
            for i in 0..lines.len() {
                for j in i + 1..lines.len() {
                    let b = b_eval(images[i].vector().unwrap(), images[j].vector().unwrap());
                    assert_eq!(meets(&lines[i], &lines[j]), b.is_zero());
                }
            }
        }
    }

    #[test]
    fn classify_line_examples() {
        let k = q();
        let x = pt(k, &[1, 0, 0, 0, 0, 0]);
        let y = pt(k, &[0, 0, 0, 0, 0, 1]);
        assert_eq!(classify_line(&x.join(&y).unwrap()).unwrap(), SecancyClass::Secant2);
        let z = pt(k, &[0, 1, 0, 0, 0, 0]);
        assert_eq!(classify_line(&x.join(&z).unwrap()).unwrap(), SecancyClass::ContainedInH5);
        // x ∨ (e02 + e13) is tangent at x.
        let w = pt(k, &[0, 1, 0, 0, 1, 0]);
        assert_eq!(classify_line(&x.join(&w).unwrap()).unwrap(), SecancyClass::Secant1Tangent);
        // Q(e01 + e23) = 1, Q(e02 − e13) = 1: sum of squares, external.
        let a = pt(k, &[1, 0, 0, 0, 0, 1]);
        let b = pt(k, &[0, 1, 0, 0, -1, 0]);
        assert_eq!(classify_line(&a.join(&b).unwrap()).unwrap(), SecancyClass::Secant0);
    }

    #[test]
    fn no_external_planes_over_gf2() {
        let k = FieldSpec::prime(2).unwrap();
        let mut count = 0;
        for eps in enumerate_subspaces(k, 5, 2).unwrap() {
            assert!(!is_external_plane(&eps, None).unwrap());
            count += 1;
        }
        assert_eq!(count, 1395);
    }

    #[test]
    fn zero_secant_counts_match_point_enumeration() {
        for p in [2, 3] {
            let k = FieldSpec::prime(p).unwrap();
            let points: Vec<Subspace> = enumerate_subspaces(k, 5, 0).unwrap().collect();
            let mut oracle = 0;
            for g in enumerate_subspaces(k, 5, 1).unwrap() {
                let on = points
                    .iter()
                    .filter(|x| g.contains(x).unwrap() && q_eval(x.vector().unwrap()).is_zero())
                    .count();
                if on == 0 {
                    oracle += 1;
                }
            }
            let found = search_finite(k).unwrap();
            assert_eq!(found.zero_secants, oracle);
            assert!(oracle > 0);
            assert_eq!(found.external_planes, 0);
        }
    }

    fn sum_of_squares_plane() -> Subspace {
        // Q restricted to span(e01+e23, e02−e13, e03+e12) is x² + y² + z².
        Subspace::from_rows(
            q(),
            5,
            vec![
                pt(q(), &[1, 0, 0, 0, 0, 1]).rows()[0].clone(),
                pt(q(), &[0, 1, 0, 0, -1, 0]).rows()[0].clone(),
                pt(q(), &[0, 0, 1, 1, 0, 0]).rows()[0].clone(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn external_plane_tests() {
        let eps = sum_of_squares_plane();
        assert!(is_external_plane(&eps, None).unwrap());
        assert_eq!(classify_plane(&eps).unwrap(), SecancyClass::External);
        assert_eq!(plane_polar_type(&eps).unwrap(), PlanePolarType::Skew);
        assert!(is_external_plane(&polar(&eps).unwrap(), None).unwrap());
        let k = q();
        let star = star_plane(&pt(k, &[1, 0, 0, 0])).unwrap();
        assert!(!is_external_plane(&star, None).unwrap());
        assert_eq!(classify_plane(&star).unwrap(), SecancyClass::ContainsLines);
        assert!(tangent_hyperplane_containing(&eps).unwrap().is_none());
    }

    #[test]
    fn tangent_hyperplanes() {
        let k = q();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let whole = Subspace::whole(k, 5);
        let x = random_quadric_point(k, &mut rng);
        let t = tangent_hyperplane_containing(&x).unwrap().unwrap();
        assert_eq!(t.pole, x);
        assert_eq!(t.witness, x);
        for d in 0..=3 {
            for _ in 0..5 {
                let s = whole.random_subspace(&mut rng, d, 3);
                let Some(t) = tangent_hyperplane_containing(&s).unwrap() else {
                    assert!(d >= 2);
                    continue;
                };
                assert!(on_quadric(&t.pole).unwrap());
                assert!(t.hyperplane.contains(&s).unwrap());
                assert!(s.contains(&t.witness).unwrap());
                assert!(t.witness.dim() >= s.dim() - 2);
                assert!(restrict(&t.witness).is_zero());
                // The hyperplane contains a plane of H₅ through its pole.
                assert_eq!(polar(&t.hyperplane).unwrap(), t.pole);
            }
        }
        let g = sum_of_squares_plane().meet(&whole).unwrap().random_subspace(&mut rng, 1, 3);
        assert_eq!(classify_line(&g).unwrap(), SecancyClass::Secant0);
        let t = tangent_hyperplane_containing(&g).unwrap().unwrap();
        assert!(t.witness.is_empty());
    }

    #[test]
    fn tangent_avoiding_rationals() {
        let k = q();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let whole = Subspace::whole(k, 5);
        for _ in 0..10 {
            let p = loop {
                let p = whole.random_point(&mut rng, 3);
                if !on_quadric(&p).unwrap() {
                    break p;
                }
            };
            let g = p.join(&whole.random_point(&mut rng, 3)).unwrap();
            let x = tangent_through_point_avoiding(&p, &g, &mut rng, 100).unwrap();
            let xv = x.vector().unwrap();
            assert!(q_eval(xv).is_zero());
            assert!(b_eval(xv, p.vector().unwrap()).is_zero());
            assert!(!polar(&x).unwrap().contains(&g).unwrap());
        }
    }

    #[test]
    fn tangent_avoiding_gf3_exhaustive() {
        let k = FieldSpec::prime(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let points: Vec<Subspace> = enumerate_subspaces(k, 5, 0).unwrap().collect();
        let off: Vec<&Subspace> = points.iter().filter(|p| !on_quadric(p).unwrap()).collect();
        for p in off.iter().step_by(7) {
            for other in points.iter().step_by(13) {
                let g = p.join(other).unwrap();
                if g.dim() != 1 {
                    continue;
                }
                let x = tangent_through_point_avoiding(p, &g, &mut rng, 500).unwrap();
                assert!(b_eval(x.vector().unwrap(), p.vector().unwrap()).is_zero());
                assert!(!polar(&x).unwrap().contains(&g).unwrap());
            }
        }
    }

    #[test]
    fn reflections() {
        let k = q();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let qv: Vector = pt(k, &[1, 2, 0, 0, 1, 1]).rows()[0].clone();
        assert!(!q_eval(&qv).is_zero());
        let sigma_q = reflect(&qv, &qv).unwrap();
        assert!(linalg::proportional(&sigma_q, &qv));
        let axis = polar(&Subspace::point(k, qv.clone()).unwrap()).unwrap();
        for _ in 0..100 {
            let x: Vector = (0..6).map(|_| k.random_scalar(&mut rng, 5)).collect();
            let y = reflect(&qv, &x).unwrap();
            assert_eq!(q_eval(&y), q_eval(&x));
            assert_eq!(reflect(&qv, &y).unwrap(), x);
            let a = axis.random_vector(&mut rng, 4);
            assert_eq!(reflect(&qv, &a).unwrap(), a);
        }
        let on = pt(k, &[1, 0, 0, 0, 0, 0]).rows()[0].clone();
        assert_eq!(reflect(&on, &qv), Err(KleinError::CentreOnQuadric));
    }

    #[test]
    fn second_plane() {
        let eps1 = sum_of_squares_plane();
        let mut seen = Vec::new();
        for variant in 0..3 {
            let sp = second_external_plane(&eps1, None, variant).unwrap();
            assert!(is_external_plane(&sp.plane, None).unwrap());
            assert_eq!(sp.common_line.dim(), 1);
            assert_ne!(sp.plane, eps1);
            let axis = polar(&sp.centre).unwrap();
            assert_eq!(sp.common_line, eps1.meet(&axis).unwrap());
            seen.push(sp.plane);
        }
        assert_ne!(seen[0], seen[1]);
        let k = FieldSpec::prime(3).unwrap();
        let plane = Subspace::from_rows(k, 5, (0..3).map(|i| linalg::unit_vector(k, 6, i)).collect()).unwrap();
        assert!(matches!(second_external_plane(&plane, None, 0), Err(KleinError::FiniteField(_))));
        let star = star_plane(&pt(q(), &[1, 0, 0, 0])).unwrap();
        assert_eq!(second_external_plane(&star, None, 0).unwrap_err(), KleinError::NotExternal);
    }

    #[test]
    fn characteristic_two_polar_parity() {
        let k = FieldSpec::F2RationalFunctions;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let whole = Subspace::whole(k, 5);
        for _ in 0..20 {
            let d = rng.gen_range(0..=4);
            let s = whole.random_subspace(&mut rng, d, 1);
            let m = s.meet(&polar(&s).unwrap()).unwrap();
            assert_eq!((s.dim() - m.dim()) % 2, 0);
        }
        for p in [2u32] {
            let k = FieldSpec::prime(p).unwrap();
            for s in enumerate_subspaces(k, 5, 2).unwrap().step_by(5) {
                let m = s.meet(&polar(&s).unwrap()).unwrap();
                assert_eq!((s.dim() - m.dim()) % 2, 0);
            }
        }
    }

    #[test]
    fn additive_plane_over_f2st() {
        // span(e01+e23, s e02 + e13, t e03 + e12): Q = x² + s y² + t z², B ≡ 0.
        let k = FieldSpec::F2RationalFunctions;
        let (s, t) = k.indeterminates().unwrap();
        let (o, z) = (k.one(), k.zero());
        let eps = Subspace::from_rows(
            k,
            5,
            vec![
                vec![o.clone(), z.clone(), z.clone(), z.clone(), z.clone(), o.clone()],
                vec![z.clone(), s, z.clone(), z.clone(), o.clone(), z.clone()],
                vec![z.clone(), z.clone(), t, o.clone(), z.clone(), z.clone()],
            ],
        )
        .unwrap();
        assert_eq!(
            is_external_plane(&eps, None),
            Err(KleinError::UndecidedWithoutCertificate)
        );
        let cert = external_plane_certificate(&eps).unwrap().unwrap();
        assert!(is_external_plane(&eps, Some(&cert)).unwrap());
        assert_eq!(plane_polar_type(&eps).unwrap(), PlanePolarType::SelfPolar);
        let n = Subspace::from_rows(k, 5, eps.rows()[..2].to_vec()).unwrap();
        assert!(is_nucleus_line(&n).unwrap());
        assert_eq!(in_nucleus_pencil(&eps, &n).unwrap(), None);
        let sp = second_external_plane(&eps, Some(&cert), 0).unwrap();
        assert_eq!(sp.common_line.dim(), 1);
        assert_eq!(plane_polar_type(&sp.plane).unwrap(), PlanePolarType::SelfPolar);
    }

    #[test]
    fn nucleus_lines_in_odd_characteristic() {
        let eps = sum_of_squares_plane();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let n = eps.random_subspace(&mut rng, 1, 3);
            assert!(!is_nucleus_line(&n).unwrap());
            assert_eq!(n.meet(&polar(&n).unwrap()).unwrap().dim(), -1);
        }
    }
}
