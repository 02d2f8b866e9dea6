//! Regular spreads and parallelisms of PG(3,K).
//!
//! PG(3,K) is identified with the projective space of an algebra `H`
//! (coordinates on the basis `1, i, j, k` resp. `1, u, w, uw`). Spreads are
//! given either as cosets `{c·L}` of a two-dimensional subalgebra `L`, or as
//! `λ⁻¹(π₅(G) ∩ H₅)` for a 0-secant `G` of H₅; γ maps a spread to its
//! 0-secant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebras::{is_separable_quadratic, AlgebraError, AlgebraH};
use crate::field::Scalar;
use crate::forms::AnisotropyCertificate;
use crate::flocks::{self, FlockError};
use crate::hfd::HfdDescriptor;
use crate::klein::{self, KleinError, SecancyClass};
use crate::linalg::{self, Vector};
use crate::proj::{ProjError, Subspace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpreadError {
    #[error("λ-images of the sampled spread lines do not span a solid")]
    SpanDeficient,
    #[error("line is not a 0-secant of the Klein quadric")]
    NotZeroSecant,
    #[error("subspace is not a two-dimensional subalgebra containing 1")]
    NotSubfield,
    #[error("algebra is not a division algebra")]
    NotDivision,
    #[error("Clifford plane verification failed: {0}")]
    VerificationFailed(String),
    #[error(transparent)]
    Klein(#[from] KleinError),
    #[error(transparent)]
    Proj(#[from] ProjError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Parallelism(Box<FlockError>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpreadDescriptor {
    /// `{c·L : c ≠ 0}` (left) or `{L·c : c ≠ 0}` (right), `L` a line of PG(3).
    Coset {
        algebra: AlgebraH,
        subfield: Subspace,
        side: Side,
    },
    /// `λ⁻¹(π₅(G) ∩ H₅)` for a 0-secant `G`.
    Secant { g: Subspace },
}

#[derive(Debug, Clone)]
pub enum ParallelismDescriptor {
    Clifford { algebra: AlgebraH, side: Side },
    Hfd(HfdDescriptor),
}

fn side_mul(h: &AlgebraH, side: Side, c: &[Scalar], y: &[Scalar]) -> Vector {
    match side {
        Side::Left => h.mul(c, y),
        Side::Right => h.mul(y, c),
    }
}

/// `c·W` (left) or `W·c` (right) for a subspace `W` of PG(3).
pub fn translate(h: &AlgebraH, side: Side, c: &[Scalar], w: &Subspace) -> Result<Subspace, ProjError> {
    let rows = w.rows().iter().map(|y| side_mul(h, side, c, y)).collect();
    Subspace::from_rows(h.field(), 3, rows)
}

/// `span(1, x)` as a line of PG(3).
pub fn subalgebra_line(h: &AlgebraH, x: &[Scalar]) -> Result<Subspace, SpreadError> {
    let l = Subspace::from_rows(h.field(), 3, vec![h.one(), x.to_vec()])?;
    if l.dim() != 1 {
        return Err(SpreadError::NotSubfield);
    }
    Ok(l)
}

/// Whether a line of PG(3) is a subalgebra containing 1.
pub fn is_subfield_line(h: &AlgebraH, l: &Subspace) -> Result<bool, SpreadError> {
    if l.dim() != 1 || !l.contains_vector(&h.one())? {
        return Ok(false);
    }
    let r = l.rows();
    for a in r {
        for b in r {
            if !l.contains_vector(&h.mul(a, b))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

impl SpreadDescriptor {
    /// Coset spread of a subalgebra line; rejects lines that are not
    /// subalgebras.
    pub fn coset(algebra: AlgebraH, subfield: Subspace, side: Side) -> Result<Self, SpreadError> {
        if !is_subfield_line(&algebra, &subfield)? {
            return Err(SpreadError::NotSubfield);
        }
        Ok(Self::coset_unchecked(algebra, subfield, side))
    }

    /// Coset descriptor without the subalgebra check (for negative controls).
    pub fn coset_unchecked(algebra: AlgebraH, subfield: Subspace, side: Side) -> Self {
        SpreadDescriptor::Coset {
            algebra,
            subfield,
            side,
        }
    }

    pub fn field(&self) -> crate::field::FieldSpec {
        match self {
            SpreadDescriptor::Coset { algebra, .. } => algebra.field(),
            SpreadDescriptor::Secant { g } => g.field(),
        }
    }
}

/// Elements `1, i, j, 1+i, k, 1+j, 1+k, i+j, …` used to pick coset lines.
fn spanning_elements(h: &AlgebraH) -> Vec<Vector> {
    let b: Vec<Vector> = (0..4).map(|i| h.basis(i)).collect();
    let mut out = vec![b[0].clone(), b[1].clone(), b[2].clone(), linalg::add(&b[0], &b[1]), b[3].clone()];
    for i in 0..4 {
        for j in i + 1..4 {
            out.push(linalg::add(&b[i], &b[j]));
        }
    }
    out.push(linalg::add(&linalg::add(&b[0], &b[1]), &b[2]));
    out.push(linalg::add(&linalg::add(&b[1], &b[2]), &b[3]));
    out
}

/// γ: the 0-secant `π₅(span λ(C))` of a spread.
pub fn gamma(c: &SpreadDescriptor) -> Result<Subspace, SpreadError> {
    match c {
        SpreadDescriptor::Secant { g } => Ok(g.clone()),
        SpreadDescriptor::Coset {
            algebra,
            subfield,
            side,
        } => {
            let field = algebra.field();
            let mut solid = Subspace::empty(field, 5);
            for e in spanning_elements(algebra) {
                let line = translate(algebra, *side, &e, subfield)?;
                if line.dim() != 1 {
                    continue;
                }
                solid = solid.join(&klein::lambda(&line)?)?;
                if solid.dim() == 3 {
                    return Ok(klein::polar(&solid)?);
                }
            }
            Err(SpreadError::SpanDeficient)
        }
    }
}

pub fn spread_from_secant(g: &Subspace) -> Result<SpreadDescriptor, SpreadError> {
    if klein::classify_line(g)? != SecancyClass::Secant0 {
        return Err(SpreadError::NotZeroSecant);
    }
    Ok(SpreadDescriptor::Secant { g: g.clone() })
}

/// The spread line through a point of PG(3).
pub fn line_through_point(c: &SpreadDescriptor, p: &Subspace) -> Result<Subspace, SpreadError> {
    p.expect_dim(0)?;
    match c {
        SpreadDescriptor::Coset {
            algebra,
            subfield,
            side,
        } => Ok(translate(algebra, *side, p.vector().expect("point"), subfield)?),
        SpreadDescriptor::Secant { g } => {
            let meet = klein::star_plane(p)?.meet(&klein::polar(g)?)?;
            if meet.dim() != 0 {
                return Err(SpreadError::NotZeroSecant);
            }
            Ok(klein::lambda_inv(&meet)?)
        }
    }
}

/// Membership of a line of PG(3) in a spread.
pub fn spread_contains(c: &SpreadDescriptor, line: &Subspace) -> Result<bool, SpreadError> {
    if line.dim() != 1 {
        return Ok(false);
    }
    match c {
        SpreadDescriptor::Coset {
            algebra,
            subfield,
            side,
        } => {
            let w = &line.rows()[0];
            let Some(winv) = algebra.inverse(w) else {
                return Ok(false);
            };
            Ok(translate(algebra, *side, &winv, line)? == *subfield)
        }
        SpreadDescriptor::Secant { g } => {
            let x = klein::lambda(line)?;
            let xv = x.vector().expect("point");
            Ok(g.rows().iter().all(|r| klein::b_eval(xv, r).is_zero()))
        }
    }
}

/// The Clifford parallel class of a line: `{c·L}` with `L = w⁻¹·W` (left) or
/// `{L·c}` with `L = W·w⁻¹` (right), `w ∈ W` nonzero.
pub fn clifford_class(h: &AlgebraH, side: Side, line: &Subspace) -> Result<SpreadDescriptor, SpreadError> {
    line.expect_dim(1)?;
    let w = &line.rows()[0];
    let winv = h.inverse(w).ok_or(SpreadError::NotDivision)?;
    let l = translate(h, side, &winv, line)?;
    SpreadDescriptor::coset(h.clone(), l, side)
}

/// The plane of lines `γ(P)` of a Clifford parallelism, with a certificate
/// of externality when one is needed.
#[derive(Debug, Clone)]
pub struct CliffordPlane {
    pub plane: Subspace,
    pub certificate: Option<AnisotropyCertificate>,
    pub checked_classes: usize,
}

/// γ of three parallel classes spans the plane κ₁; verifies externality and
/// that γ of `samples` random further classes lies in κ₁.
pub fn clifford_hfd_plane<R: Rng + ?Sized>(
    h: &AlgebraH,
    side: Side,
    samples: usize,
    rng: &mut R,
) -> Result<CliffordPlane, SpreadError> {
    if !h.is_division()? {
        return Err(SpreadError::NotDivision);
    }
    let field = h.field();
    let mut plane = Subspace::empty(field, 5);
    for x in 1..4 {
        let class = clifford_class(h, side, &subalgebra_line(h, &h.basis(x))?)?;
        plane = plane.join(&gamma(&class)?)?;
    }
    if plane.dim() != 2 {
        return Err(SpreadError::VerificationFailed(format!(
            "classes span a subspace of dimension {}",
            plane.dim()
        )));
    }
    let certificate = klein::external_plane_certificate(&plane)?;
    if !klein::is_external_plane(&plane, certificate.as_ref())? {
        return Err(SpreadError::VerificationFailed("plane is not external".into()));
    }
    for _ in 0..samples {
        let line = klein::random_line3(field, rng);
        let g = gamma(&clifford_class(h, side, &line)?)?;
        if !plane.contains(&g)? {
            return Err(SpreadError::VerificationFailed(format!("class image {g:?} outside plane")));
        }
    }
    Ok(CliffordPlane {
        plane,
        certificate,
        checked_classes: samples,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionFailure {
    pub index: usize,
    pub reason: String,
    pub witness: String,
}

/// Outcome of a sampled partition check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionReport {
    pub checked: usize,
    pub failures: Vec<PartitionFailure>,
    pub seed: u64,
}

impl PartitionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Random points each lie on exactly one spread line.
pub fn verify_spread_partition(c: &SpreadDescriptor, samples: usize, seed: u64) -> Result<PartitionReport, SpreadError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pg3 = Subspace::whole(c.field(), 3);
    let mut failures = Vec::new();
    for index in 0..samples {
        let p = pg3.random_point(&mut rng, klein::SAMPLE_HEIGHT);
        let mut fail = |reason: &str, witness: String| {
            failures.push(PartitionFailure {
                index,
                reason: reason.into(),
                witness,
            })
        };
        let line = line_through_point(c, &p)?;
        if line.dim() != 1 || !line.contains(&p)? {
            fail("returned line does not contain the point", format!("{p:?}"));
            continue;
        }
        if !spread_contains(c, &line)? {
            fail("returned line is not a spread line", format!("{line:?}"));
            continue;
        }
        // Uniqueness: any other point of the line yields the same line.
        let other = line.random_point(&mut rng, klein::SAMPLE_HEIGHT);
        if other != p && line_through_point(c, &other)? != line {
            fail("spread lines overlap", format!("{other:?}"));
            continue;
        }
        if let SpreadDescriptor::Secant { g } = c {
            let meet = klein::star_plane(&p)?.meet(&klein::polar(g)?)?;
            if meet.dim() != 0 {
                fail("point lies on several spread lines", format!("{p:?}"));
            }
        }
    }
    Ok(PartitionReport {
        checked: samples,
        failures,
        seed,
    })
}

/// The parallel class of a line.
pub fn class_through_line(p: &ParallelismDescriptor, line: &Subspace) -> Result<SpreadDescriptor, SpreadError> {
    match p {
        ParallelismDescriptor::Clifford { algebra, side } => clifford_class(algebra, *side, line),
        ParallelismDescriptor::Hfd(d) => {
            flocks::parallelism_from_hfd(d, line).map_err(|e| SpreadError::Parallelism(Box::new(e)))
        }
    }
}

/// Random lines each lie in exactly one class: the class returned for the
/// line contains it, and no other sampled class does.
pub fn verify_parallelism_partition(
    p: &ParallelismDescriptor,
    samples: usize,
    seed: u64,
) -> Result<PartitionReport, SpreadError> {
    const CROSS_CHECKS: usize = 5;
    let field = match p {
        ParallelismDescriptor::Clifford { algebra, .. } => algebra.field(),
        ParallelismDescriptor::Hfd(d) => d.field(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut recent: Vec<(Subspace, SpreadDescriptor)> = Vec::new();
    for index in 0..samples {
        let line = klein::random_line3(field, &mut rng);
        let class = class_through_line(p, &line)?;
        if !spread_contains(&class, &line)? {
            failures.push(PartitionFailure {
                index,
                reason: "class does not contain its line".into(),
                witness: format!("{line:?}"),
            });
            continue;
        }
        let g = gamma(&class)?;
        for (other_g, other) in &recent {
            if *other_g != g && spread_contains(other, &line)? {
                failures.push(PartitionFailure {
                    index,
                    reason: "line lies in two classes".into(),
                    witness: format!("{line:?}"),
                });
            }
        }
        recent.push((g, class));
        if recent.len() > CROSS_CHECKS {
            recent.remove(0);
        }
    }
    Ok(PartitionReport {
        checked: samples,
        failures,
        seed,
    })
}

/// Outcome of comparing separability of `L` with `G ∩ π₅(G) = ∅`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GaloisCheck {
    pub separable: bool,
    pub skew_to_polar: bool,
    pub agree: bool,
}

/// For `G = γ({c·K[x]})`: `K[x]/K` is separable iff `G ∩ π₅(G) = ∅`.
pub fn galois_criterion_check(h: &AlgebraH, x: &[Scalar]) -> Result<GaloisCheck, SpreadError> {
    let l = h.intermediate_field(x)?;
    let spread = SpreadDescriptor::coset(h.clone(), subalgebra_line(h, x)?, Side::Left)?;
    let g = gamma(&spread)?;
    let skew_to_polar = g.meet(&klein::polar(&g)?)?.is_empty();
    let separable = is_separable_quadratic(&l);
    Ok(GaloisCheck {
        separable,
        skew_to_polar,
        agree: separable == skew_to_polar,
    })
}
