//! Back in PG(3): general linear complexes `G(p)`, linear flocks `F[p,ε]`,
//! the distinguished parallel class and the parallel class of a line under a
//! pencilled parallelism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::forms::AnisotropyCertificate;
use crate::hfd::{self, HfdCase, HfdDescriptor, HfdError};
use crate::klein::{self, KleinError, SAMPLE_HEIGHT};
use crate::proj::{self, LineParam, ProjError, Subspace};
use crate::spreads::{self, PartitionFailure, PartitionReport, SpreadDescriptor, SpreadError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlockError {
    #[error("pole lies on the Klein quadric")]
    PoleOnQuadric,
    #[error("pole does not lie in the carrier plane")]
    PoleNotInCarrier,
    #[error("carrier plane is not external")]
    NotExternal,
    #[error("line is not in the linear complex")]
    NotInComplex,
    #[error("a Clifford hfd line set has no distinguished line")]
    CliffordCase,
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error(transparent)]
    Klein(#[from] KleinError),
    #[error(transparent)]
    Hfd(#[from] HfdError),
    #[error(transparent)]
    Spread(#[from] SpreadError),
    #[error(transparent)]
    Proj(#[from] ProjError),
}

/// `G(p) = λ⁻¹(π₅(p) ∩ H₅)` for a pole off H₅.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearComplexRef {
    pole: Subspace,
}

impl LinearComplexRef {
    pub fn new(pole: Subspace) -> Result<Self, FlockError> {
        pole.expect_dim(0)?;
        if pole.ambient() != 5 {
            return Err(ProjError::DimensionMismatch { expected: 6, got: pole.ambient() + 1 }.into());
        }
        if klein::on_quadric(&pole)? {
            return Err(FlockError::PoleOnQuadric);
        }
        Ok(Self { pole })
    }

    pub fn pole(&self) -> &Subspace {
        &self.pole
    }
}

pub fn complex_contains(c: &LinearComplexRef, line: &Subspace) -> Result<bool, FlockError> {
    let x = klein::lambda(line)?;
    Ok(klein::b_eval(x.vector().expect("point"), c.pole.vector().expect("point")).is_zero())
}

/// A random line of `G(p)`: a line of H₅ in `π₅(p)` through a random plane of
/// stars, then a random point on it.
pub fn random_complex_line<R: Rng + ?Sized>(c: &LinearComplexRef, rng: &mut R) -> Result<Subspace, FlockError> {
    let field = c.pole.field();
    let pg3 = Subspace::whole(field, 3);
    let polar = klein::polar(&c.pole)?;
    let star = klein::star_plane(&pg3.random_point(rng, SAMPLE_HEIGHT))?;
    let m = star.meet(&polar)?;
    let x = m.random_point(rng, SAMPLE_HEIGHT);
    Ok(klein::lambda_inv(&x)?)
}

/// `F[p,ε] = {λ⁻¹(π₅(X) ∩ H₅) : X ∈ L[p,ε]}`.
#[derive(Debug, Clone)]
pub struct LinearFlockRef {
    complex: LinearComplexRef,
    carrier: Subspace,
}

impl LinearFlockRef {
    pub fn new(pole: Subspace, carrier: Subspace, certificate: Option<&AnisotropyCertificate>) -> Result<Self, FlockError> {
        let complex = LinearComplexRef::new(pole)?;
        carrier.expect_dim(2)?;
        if !carrier.contains(&complex.pole)? {
            return Err(FlockError::PoleNotInCarrier);
        }
        if !klein::is_external_plane(&carrier, certificate)? {
            return Err(FlockError::NotExternal);
        }
        Ok(Self { complex, carrier })
    }

    pub fn complex(&self) -> &LinearComplexRef {
        &self.complex
    }

    pub fn pole(&self) -> &Subspace {
        &self.complex.pole
    }

    pub fn carrier(&self) -> &Subspace {
        &self.carrier
    }

    /// A random line of the pencil `L[p,ε]`.
    pub fn random_member<R: Rng + ?Sized>(&self, rng: &mut R) -> Subspace {
        loop {
            let x = self.pole().join(&self.carrier.random_point(rng, SAMPLE_HEIGHT)).expect("same field");
            if x.dim() == 1 {
                return x;
            }
        }
    }
}

/// The pencil line `X ∈ L[p,ε]` whose spread contains `ℓ`, with that spread.
pub fn flock_spread_through(fl: &LinearFlockRef, line: &Subspace) -> Result<(Subspace, SpreadDescriptor), FlockError> {
    if !complex_contains(&fl.complex, line)? {
        return Err(FlockError::NotInComplex);
    }
    let x = klein::lambda(line)?;
    let solid = klein::polar(&fl.carrier)?.join(&x)?;
    if solid.dim() != 3 {
        return Err(FlockError::VerificationFailed("λ(ℓ) lies in the polar plane of the carrier".into()));
    }
    let member = klein::polar(&solid)?;
    if member.dim() != 1 || !member.contains(fl.pole())? || !fl.carrier.contains(&member)? {
        return Err(FlockError::VerificationFailed("polar line is not a pencil member".into()));
    }
    let spread = spreads::spread_from_secant(&member)?;
    if !spreads::spread_contains(&spread, line)? {
        return Err(FlockError::VerificationFailed("spread does not contain the line".into()));
    }
    Ok((member, spread))
}

/// Random lines of `G(p)` each claimed by their pencil member and by none of
/// `cross_checks` other random pencil members.
pub fn verify_flock_partition(
    fl: &LinearFlockRef,
    samples: usize,
    cross_checks: usize,
    seed: u64,
) -> Result<PartitionReport, FlockError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for index in 0..samples {
        let line = random_complex_line(&fl.complex, &mut rng)?;
        let (member, _) = match flock_spread_through(fl, &line) {
            Ok(r) => r,
            Err(FlockError::VerificationFailed(reason)) => {
                failures.push(PartitionFailure {
                    index,
                    reason,
                    witness: format!("{line:?}"),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let mut done = 0;
        while done < cross_checks {
            let other = fl.random_member(&mut rng);
            if other == member {
                continue;
            }
            done += 1;
            if spreads::spread_contains(&spreads::spread_from_secant(&other)?, &line)? {
                failures.push(PartitionFailure {
                    index,
                    reason: "line claimed by a second pencil member".into(),
                    witness: format!("{line:?}"),
                });
            }
        }
    }
    Ok(PartitionReport {
        checked: samples,
        failures,
        seed,
    })
}

/// `γ⁻¹(D)`, checked against `⋂ G(v)` over `vertices` random points `v ∈ D`:
/// spread lines lie in every sampled complex, and `lines` random lines of the
/// intersection lie in the spread.
pub fn verify_distinguished_class(
    d: &HfdDescriptor,
    vertices: usize,
    lines: usize,
    seed: u64,
) -> Result<(SpreadDescriptor, PartitionReport), FlockError> {
    if hfd::classify(d)?.case == HfdCase::PlaneOfLines {
        return Err(FlockError::CliffordCase);
    }
    let field = d.field();
    let spread = spreads::spread_from_secant(&d.d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut complexes = Vec::new();
    while complexes.len() < vertices {
        let lp = LineParam::new(d.d.clone(), field.random_scalar(&mut rng, SAMPLE_HEIGHT), field.random_scalar(&mut rng, SAMPLE_HEIGHT));
        if let Ok(lp) = lp {
            complexes.push(LinearComplexRef::new(proj::point_at(&lp)?)?);
        }
    }
    let poles: Vec<&Subspace> = complexes.iter().map(LinearComplexRef::pole).collect();
    let common = klein::polar(&proj::span(&poles)?)?;
    let pg3 = Subspace::whole(field, 3);
    let mut failures = Vec::new();
    for index in 0..lines {
        let p = pg3.random_point(&mut rng, SAMPLE_HEIGHT);
        let on_spread = spreads::line_through_point(&spread, &p)?;
        for c in &complexes {
            if !complex_contains(c, &on_spread)? {
                failures.push(PartitionFailure {
                    index,
                    reason: "spread line outside a sampled complex".into(),
                    witness: format!("{on_spread:?}"),
                });
            }
        }
        let x = klein::star_plane(&p)?.meet(&common)?;
        if x.dim() != 0 {
            failures.push(PartitionFailure {
                index,
                reason: format!("star plane meets the common polar in dimension {}", x.dim()),
                witness: format!("{p:?}"),
            });
            continue;
        }
        let line = klein::lambda_inv(&x)?;
        let in_all = complexes.iter().try_fold(true, |acc, c| Ok::<_, FlockError>(acc && complex_contains(c, &line)?))?;
        if !in_all || !spreads::spread_contains(&spread, &line)? {
            failures.push(PartitionFailure {
                index,
                reason: "line of the complex intersection outside the spread".into(),
                witness: format!("{line:?}"),
            });
        }
    }
    Ok((
        spread,
        PartitionReport {
            checked: lines,
            failures,
            seed,
        },
    ))
}

/// The distinguished parallel class `γ⁻¹(D)`, verified with 10 vertices and
/// 100 lines.
pub fn distinguished_class(d: &HfdDescriptor, seed: u64) -> Result<SpreadDescriptor, FlockError> {
    let (spread, report) = verify_distinguished_class(d, 10, 100, seed)?;
    match report.failures.first() {
        None => Ok(spread),
        Some(f) => Err(FlockError::VerificationFailed(f.reason.clone())),
    }
}

/// The parallel class of `ℓ`: `γ⁻¹(G)` for the member line `G` in the tangent
/// hyperplane `π₅(λ(ℓ))`.
pub fn parallelism_from_hfd(d: &HfdDescriptor, line: &Subspace) -> Result<SpreadDescriptor, FlockError> {
    let x = klein::lambda(line)?;
    let g = hfd::line_in_tangent_hyperplane(d, &klein::polar(&x)?)?;
    let spread = spreads::spread_from_secant(&g)?;
    if !spreads::spread_contains(&spread, line)? {
        return Err(FlockError::VerificationFailed("class does not contain its line".into()));
    }
    Ok(spread)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebras::AlgebraH;
    use crate::field::{FieldSpec, Scalar};
    use crate::spreads::{clifford_hfd_plane, Side};

    fn q() -> FieldSpec {
        FieldSpec::Rationals
    }

    fn kappa1() -> Subspace {
        let h = AlgebraH::quaternion_ints(q(), -1, -1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        clifford_hfd_plane(&h, Side::Left, 0, &mut rng).unwrap().plane
    }

    fn two_plane() -> HfdDescriptor {
        let k = q();
        let k1 = kappa1();
        let k2 = klein::second_external_plane(&k1, None, 0).unwrap().plane;
        let params: Vec<(Scalar, Scalar)> = vec![(k.one(), k.zero()), (k.zero(), k.one()), (k.one(), k.one())];
        HfdDescriptor::two_plane(k1, k2, &params, Vec::new()).unwrap()
    }

    fn off_quadric_point(plane: &Subspace, rng: &mut ChaCha8Rng) -> Subspace {
        loop {
            let p = plane.random_point(rng, SAMPLE_HEIGHT);
            if !klein::on_quadric(&p).unwrap() {
                return p;
            }
        }
    }

    #[test]
    fn complex_membership() {
        let k = q();
        // pole e01 + e23: B(x, pole) = x23 + x01.
        let c = LinearComplexRef::new(Subspace::point_from_ints(k, &[1, 0, 0, 0, 0, 1]).unwrap()).unwrap();
        let line = |a: [i64; 4], b: [i64; 4]| {
            Subspace::from_rows(k, 3, vec![a.iter().map(|&v| k.from_i64(v)).collect(), b.iter().map(|&v| k.from_i64(v)).collect()]).unwrap()
        };
        assert!(complex_contains(&c, &line([1, 0, 0, 0], [0, 0, 1, 0])).unwrap());
        assert!(!complex_contains(&c, &line([1, 0, 0, 0], [0, 1, 0, 0])).unwrap());
        assert!(!complex_contains(&c, &line([1, 0, 0, 1], [0, 1, -1, 0])).unwrap());
        assert!(complex_contains(&c, &line([1, 0, 0, 1], [0, 1, 1, 0])).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            assert!(complex_contains(&c, &random_complex_line(&c, &mut rng).unwrap()).unwrap());
        }
        let tangent = Subspace::point_from_ints(k, &[1, 0, 0, 0, 0, 0]).unwrap();
        assert_eq!(LinearComplexRef::new(tangent), Err(FlockError::PoleOnQuadric));
    }

    #[test]
    fn complex_size_over_gf3() {
        let k = FieldSpec::PrimeField { p: 3 };
        let c = LinearComplexRef::new(Subspace::point_from_ints(k, &[1, 0, 0, 0, 0, 1]).unwrap()).unwrap();
        let mut total = 0;
        let mut count = 0;
        for line in proj::enumerate_subspaces(k, 3, 1).unwrap() {
            total += 1;
            if complex_contains(&c, &line).unwrap() {
                count += 1;
            }
        }
        assert_eq!(total, 130);
        // A parabolic quadric of PG(4,3) has (3⁴ - 1)/(3 - 1) points.
        assert_eq!(count, 40);
    }

    #[test]
    fn flock_partition() {
        let k1 = kappa1();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = off_quadric_point(&k1, &mut rng);
        let fl = LinearFlockRef::new(p.clone(), k1.clone(), None).unwrap();
        let report = verify_flock_partition(&fl, 40, 5, 9).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        let outside = loop {
            let l = klein::random_line3(q(), &mut rng);
            if !complex_contains(fl.complex(), &l).unwrap() {
                break l;
            }
        };
        assert!(matches!(flock_spread_through(&fl, &outside), Err(FlockError::NotInComplex)));
        let off = Subspace::point_from_ints(q(), &[1, 0, 0, 0, 0, 1]).unwrap();
        if !k1.contains(&off).unwrap() {
            assert!(matches!(LinearFlockRef::new(off, k1, None), Err(FlockError::PoleNotInCarrier)));
        }
    }

    #[test]
    fn flock_member_round_trip() {
        let d = two_plane();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = loop {
            let v = d.d.random_point(&mut rng, SAMPLE_HEIGHT);
            if !klein::on_quadric(&v).unwrap() {
                break v;
            }
        };
        let fl = LinearFlockRef::new(p, d.planes[0].clone(), None).unwrap();
        let spread = spreads::spread_from_secant(&d.d).unwrap();
        let pg3 = Subspace::whole(q(), 3);
        for _ in 0..10 {
            let l = spreads::line_through_point(&spread, &pg3.random_point(&mut rng, SAMPLE_HEIGHT)).unwrap();
            assert_eq!(flock_spread_through(&fl, &l).unwrap().0, d.d);
        }
    }

    #[test]
    fn distinguished() {
        let d = two_plane();
        let (spread, report) = verify_distinguished_class(&d, 10, 30, 11).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(spread, SpreadDescriptor::Secant { g: d.planes[0].meet(&d.planes[1]).unwrap() });
        let k1 = kappa1();
        let line = Subspace::from_rows(q(), 5, k1.rows()[..2].to_vec()).unwrap();
        let constant = HfdDescriptor::constant(line, k1, None).unwrap();
        assert_eq!(distinguished_class(&constant, 0), Err(FlockError::CliffordCase));
    }

    #[test]
    fn classes_from_hfd() {
        let d = two_plane();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pg3 = Subspace::whole(q(), 3);
        for _ in 0..30 {
            let l = klein::random_line3(q(), &mut rng);
            let class = parallelism_from_hfd(&d, &l).unwrap();
            let other = spreads::line_through_point(&class, &pg3.random_point(&mut rng, SAMPLE_HEIGHT)).unwrap();
            assert_eq!(parallelism_from_hfd(&d, &other).unwrap(), class);
        }
        let dist = spreads::spread_from_secant(&d.d).unwrap();
        let l = spreads::line_through_point(&dist, &pg3.random_point(&mut rng, SAMPLE_HEIGHT)).unwrap();
        assert_eq!(parallelism_from_hfd(&d, &l).unwrap(), dist);
    }

    #[test]
    fn constant_descriptor_agrees_with_cosets() {
        let h = AlgebraH::quaternion_ints(q(), -1, -1).unwrap();
        let k1 = kappa1();
        let line = Subspace::from_rows(q(), 5, k1.rows()[..2].to_vec()).unwrap();
        let d = HfdDescriptor::constant(line, k1, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let l = klein::random_line3(q(), &mut rng);
            let from_hfd = parallelism_from_hfd(&d, &l).unwrap();
            let coset = spreads::clifford_class(&h, Side::Left, &l).unwrap();
            assert_eq!(spreads::gamma(&coset).unwrap(), spreads::gamma(&from_hfd).unwrap());
        }
    }
}
