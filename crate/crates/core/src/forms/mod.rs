//! Small quadratic forms and exact isotropy decisions.
//!
//! Forms are stored in every characteristic as an upper-triangular
//! coefficient matrix, `Q(x) = Σ_{i≤j} c_ij x_i x_j`, together with the polar
//! form `B(x,y) = Q(x+y) − Q(x) − Q(y)`. Isotropy is decided
//!
//! * over ℚ by diagonalisation and Hasse–Minkowski (Hilbert symbols at the
//!   places dividing the coefficients, 2 and ∞), with witnesses produced by
//!   Legendre descent;
//! * over GF(p) by exhaustive search;
//! * over GF(2)(s,t) exactly for additive forms (zero polar form), and by a
//!   bounded search otherwise, which may end in [`IsotropyVerdict::Unknown`].

pub mod arith;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{F2Frac, FieldSpec, Poly2, Scalar};
use crate::linalg::{self, Vector};
use crate::proj::Subspace;

pub use arith::{Place, DEFAULT_FACTOR_BOUND};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("place {0} is neither infinity nor a prime")]
    InvalidPlace(u64),
    #[error("Hilbert symbol needs nonzero arguments")]
    ZeroCoefficient,
    #[error("cannot factor {0} by trial division within the configured bound")]
    CannotFactor(String),
    #[error("form has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operation not supported over {0}")]
    UnsupportedField(String),
    #[error("witness is zero or not isotropic")]
    InvalidWitness,
    #[error("equation has no nontrivial solution")]
    NoSolution,
}

/// How an anisotropy verdict was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProofTag {
    BruteForce,
    HasseMinkowski,
    /// Nonsquare discriminant or nonsquare ratio (binary forms).
    SquareClass,
    Certificate,
    BoundedSearchExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum IsotropyVerdict {
    Isotropic { witness: Vec<Scalar> },
    Anisotropic { proof: ProofTag },
    Unknown,
}

impl IsotropyVerdict {
    /// Checked constructor: the witness must be nonzero with `Q(w) = 0`.
    pub fn isotropic(form: &QuadraticForm, witness: Vector) -> Result<Self, FormError> {
        if witness.len() != form.dim()
            || linalg::is_zero_vector(&witness)
            || !form.eval(&witness).is_zero()
        {
            return Err(FormError::InvalidWitness);
        }
        Ok(IsotropyVerdict::Isotropic { witness })
    }

    pub fn is_isotropic(&self) -> bool {
        matches!(self, IsotropyVerdict::Isotropic { .. })
    }

    pub fn is_anisotropic(&self) -> bool {
        matches!(self, IsotropyVerdict::Anisotropic { .. })
    }

    pub fn witness(&self) -> Option<&Vector> {
        match self {
            IsotropyVerdict::Isotropic { witness } => Some(witness),
            _ => None,
        }
    }
}

/// Certificate of anisotropy over GF(2)(s,t).
///
/// An additive form `Σ a_i x_i²` is anisotropic iff the `a_i` are linearly
/// independent over the subfield of squares. Writing each `a_i` (after
/// clearing denominators) as `Σ_e m_e P_{i,e}²` with `m_e ∈ {1, s, t, st}`,
/// independence is equivalent to the 4×n matrix `(P_{i,e})` having rank n.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnisotropyCertificate {
    AdditiveForm { rank: usize },
}

#[derive(Clone, PartialEq, Eq)]
pub struct QuadraticForm {
    field: FieldSpec,
    upper: Vec<Vector>,
    polar: Vec<Vector>,
}

impl std::fmt::Debug for QuadraticForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "QuadraticForm({:?})", self.upper)
    }
}

impl QuadraticForm {
    /// Form from upper-triangular coefficients; entries below the diagonal
    /// are ignored.
    pub fn from_upper(field: FieldSpec, upper: Vec<Vector>) -> Self {
        let n = upper.len();
        let mut u = vec![vec![field.zero(); n]; n];
        let mut polar = vec![vec![field.zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                u[i][j] = upper[i][j].clone();
                if i == j {
                    polar[i][i] = &upper[i][i] + &upper[i][i];
                } else {
                    polar[i][j] = upper[i][j].clone();
                    polar[j][i] = upper[i][j].clone();
                }
            }
        }
        Self {
            field,
            upper: u,
            polar,
        }
    }

    pub fn diagonal(field: FieldSpec, coeffs: &[Scalar]) -> Self {
        let n = coeffs.len();
        let upper = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { coeffs[i].clone() } else { field.zero() })
                    .collect()
            })
            .collect();
        Self::from_upper(field, upper)
    }

    pub fn from_int_upper(field: FieldSpec, upper: &[&[i64]]) -> Self {
        Self::from_upper(
            field,
            upper
                .iter()
                .map(|r| r.iter().map(|&c| field.from_i64(c)).collect())
                .collect(),
        )
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.upper.len()
    }

    /// Coefficient `c_ij` for `i ≤ j`.
    pub fn coeff(&self, i: usize, j: usize) -> &Scalar {
        &self.upper[i.min(j)][i.max(j)]
    }

    pub fn polar_matrix(&self) -> &[Vector] {
        &self.polar
    }

    /// Symmetric Gram matrix `G` with `Q(x) = xᵀGx` (characteristic ≠ 2).
    pub fn gram(&self) -> Option<Vec<Vector>> {
        if self.field.characteristic() == 2 {
            return None;
        }
        let half = self.field.from_i64(2).inv();
        Some(self.polar.iter().map(|r| linalg::scale(&half, r)).collect())
    }

    pub fn eval(&self, x: &[Scalar]) -> Scalar {
        let mut acc = self.field.zero();
        for i in 0..self.dim() {
            if x[i].is_zero() {
                continue;
            }
            for j in i..self.dim() {
                let c = &self.upper[i][j];
                if c.is_zero() || x[j].is_zero() {
                    continue;
                }
                acc = acc + c * &x[i] * &x[j];
            }
        }
        acc
    }

    pub fn polar_eval(&self, x: &[Scalar], y: &[Scalar]) -> Scalar {
        let mut acc = self.field.zero();
        for i in 0..self.dim() {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.dim() {
                let c = &self.polar[i][j];
                if c.is_zero() || y[j].is_zero() {
                    continue;
                }
                acc = acc + c * &x[i] * &y[j];
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().flatten().all(Scalar::is_zero)
    }

    pub fn has_zero_polar(&self) -> bool {
        self.polar.iter().flatten().all(Scalar::is_zero)
    }

    /// Pull the form back along the given basis vectors.
    pub fn restrict_to_basis(&self, basis: &[Vector]) -> Result<QuadraticForm, FormError> {
        for b in basis {
            if b.len() != self.dim() {
                return Err(FormError::DimensionMismatch {
                    expected: self.dim(),
                    got: b.len(),
                });
            }
        }
        let k = basis.len();
        let mut upper = vec![vec![self.field.zero(); k]; k];
        for i in 0..k {
            upper[i][i] = self.eval(&basis[i]);
            for j in i + 1..k {
                upper[i][j] = self.polar_eval(&basis[i], &basis[j]);
            }
        }
        Ok(QuadraticForm::from_upper(self.field, upper))
    }
}

/// The form pulled back along the canonical basis of `subspace`.
pub fn restrict_form(ambient: &QuadraticForm, subspace: &Subspace) -> Result<QuadraticForm, FormError> {
    if subspace.ambient() + 1 != ambient.dim() {
        return Err(FormError::DimensionMismatch {
            expected: ambient.dim(),
            got: subspace.ambient() + 1,
        });
    }
    ambient.restrict_to_basis(subspace.rows())
}

/// Classical Hilbert symbol `(a, b)_v` of nonzero rationals.
pub fn hilbert_symbol(a: &Scalar, b: &Scalar, place: Place) -> Result<i32, FormError> {
    let (Some(a), Some(b)) = (a.as_rational(), b.as_rational()) else {
        return Err(FormError::UnsupportedField(a.field().to_string()));
    };
    if a.is_zero() || b.is_zero() {
        return Err(FormError::ZeroCoefficient);
    }
    arith::hilbert_symbol_int(&(a.numer() * a.denom()), &(b.numer() * b.denom()), place)
}

/// Places relevant to `(a, b)` over ℚ.
pub fn relevant_places(a: &Scalar, b: &Scalar) -> Result<Vec<Place>, FormError> {
    let (Some(a), Some(b)) = (a.as_rational(), b.as_rational()) else {
        return Err(FormError::UnsupportedField(a.field().to_string()));
    };
    arith::relevant_places(
        &(a.numer() * a.denom()),
        &(b.numer() * b.denom()),
        DEFAULT_FACTOR_BOUND,
    )
}

/// Exhaustive search for a nonzero zero over a prime field.
fn brute_force(form: &QuadraticForm) -> IsotropyVerdict {
    let elems = form.field.elements().expect("finite field");
    let n = form.dim();
    let q = elems.len();
    let total = q.pow(n as u32);
    for idx in 1..total {
        let mut rest = idx;
        let v: Vector = (0..n)
            .map(|_| {
                let e = elems[rest % q].clone();
                rest /= q;
                e
            })
            .collect();
        if form.eval(&v).is_zero() {
            return IsotropyVerdict::Isotropic { witness: v };
        }
    }
    IsotropyVerdict::Anisotropic {
        proof: ProofTag::BruteForce,
    }
}

/// Orthogonal basis for a form in characteristic ≠ 2. Returns either an
/// isotropic vector found on the way (a radical vector) or the list of
/// `(Q(w_i), w_i)` with every `Q(w_i) ≠ 0`.
fn diagonalize(form: &QuadraticForm) -> Result<Vec<(Scalar, Vector)>, Vector> {
    let field = form.field;
    let n = form.dim();
    let mut rest: Vec<Vector> = (0..n).map(|i| linalg::unit_vector(field, n, i)).collect();
    let mut out = Vec::new();
    while !rest.is_empty() {
        let pick = rest.iter().position(|w| !form.eval(w).is_zero());
        let w = match pick {
            Some(i) => rest.remove(i),
            None => {
                // Q vanishes on every remaining basis vector.
                let mut found = None;
                'outer: for a in 0..rest.len() {
                    for b in a + 1..rest.len() {
                        if !form.polar_eval(&rest[a], &rest[b]).is_zero() {
                            found = Some((a, b));
                            break 'outer;
                        }
                    }
                }
                match found {
                    Some((a, b)) => {
                        let sum = linalg::add(&rest[a], &rest[b]);
                        rest.remove(a);
                        sum
                    }
                    None => return Err(rest.swap_remove(0)),
                }
            }
        };
        let qw = form.eval(&w);
        let two_qw = &qw + &qw;
        rest = rest
            .into_iter()
            .map(|v| {
                let c = form.polar_eval(&v, &w) / &two_qw;
                linalg::sub(&v, &linalg::scale(&c, &w))
            })
            .collect();
        out.push((qw, w));
    }
    Ok(out)
}

fn rational_square_class(x: &BigRational) -> Result<(BigInt, BigRational), FormError> {
    // x = core · r² with core a squarefree integer; returns (core, r).
    let n = x.numer() * x.denom();
    let (core, m) = arith::squarefree_decomposition(&n, DEFAULT_FACTOR_BOUND)?;
    // x = n / den² = core·m² / den²
    Ok((core, BigRational::new(m, x.denom().clone())))
}

fn q(x: BigRational) -> Scalar {
    Scalar::Q(x)
}

/// Isotropy of a nondegenerate diagonal ternary form over ℚ.
fn rational_ternary(form: &QuadraticForm) -> Result<IsotropyVerdict, FormError> {
    let diag = match diagonalize(form) {
        Ok(d) => d,
        Err(radical) => return IsotropyVerdict::isotropic(form, radical),
    };
    let a: Vec<&BigRational> = diag.iter().map(|(c, _)| c.as_rational().expect("Q")).collect();
    // a0 x² + a1 y² + a2 z² = 0  ⇔  z² = (−a0/a2) x² + (−a1/a2) y².
    let alpha = -(a[0] / a[2]);
    let beta = -(a[1] / a[2]);
    let (ca, ra) = rational_square_class(&alpha)?;
    let (cb, rb) = rational_square_class(&beta)?;
    let places = arith::relevant_places(&ca, &cb, DEFAULT_FACTOR_BOUND)?;
    for place in places {
        if arith::hilbert_symbol_int(&ca, &cb, place)? == -1 {
            return Ok(IsotropyVerdict::Anisotropic {
                proof: ProofTag::HasseMinkowski,
            });
        }
    }
    let (x, y, z) = arith::solve_legendre(&ca, &cb, DEFAULT_FACTOR_BOUND)?;
    // alpha = ca·ra², so alpha·(x/ra)² = ca·x².
    let cx = BigRational::from_integer(x) / &ra;
    let cy = BigRational::from_integer(y) / &rb;
    let cz = BigRational::from_integer(z);
    let mut w = vec![form.field.zero(); 3];
    for (coef, (_, basis)) in [cx, cy, cz].into_iter().zip(&diag) {
        w = linalg::add(&w, &linalg::scale(&q(coef), basis));
    }
    IsotropyVerdict::isotropic(form, w)
}

/// Isotropy of a ternary form over ℚ or GF(p).
pub fn ternary_isotropic(form: &QuadraticForm) -> Result<IsotropyVerdict, FormError> {
    if form.dim() != 3 {
        return Err(FormError::DimensionMismatch {
            expected: 3,
            got: form.dim(),
        });
    }
    match form.field {
        FieldSpec::Rationals => rational_ternary(form),
        FieldSpec::PrimeField { .. } => Ok(brute_force(form)),
        FieldSpec::F2RationalFunctions => Err(FormError::UnsupportedField(form.field.to_string())),
    }
}

/// Isotropy of a binary form `a x² + b xy + c y²` over any supported field.
pub fn binary_anisotropic(form: &QuadraticForm) -> Result<IsotropyVerdict, FormError> {
    if form.dim() != 2 {
        return Err(FormError::DimensionMismatch {
            expected: 2,
            got: form.dim(),
        });
    }
    let field = form.field;
    if field.is_finite() {
        return Ok(brute_force(form));
    }
    let a = form.coeff(0, 0).clone();
    let b = form.coeff(0, 1).clone();
    let c = form.coeff(1, 1).clone();
    let one = field.one();
    if a.is_zero() {
        return IsotropyVerdict::isotropic(form, vec![one, field.zero()]);
    }
    // Q(x, 1) = a x² + b x + c.
    if field.characteristic() != 2 {
        let disc = &b * &b - field.from_i64(4) * &a * &c;
        return match disc.sqrt() {
            Some(r) => {
                let x = (r - &b) / (field.from_i64(2) * &a);
                IsotropyVerdict::isotropic(form, vec![x, one])
            }
            None => Ok(IsotropyVerdict::Anisotropic {
                proof: ProofTag::SquareClass,
            }),
        };
    }
    if b.is_zero() {
        return match (&c / &a).sqrt() {
            Some(x) => IsotropyVerdict::isotropic(form, vec![x, one]),
            None => Ok(IsotropyVerdict::Anisotropic {
                proof: ProofTag::SquareClass,
            }),
        };
    }
    // Artin–Schreier case: x = (b/a)·y with y² + y = ac/b².
    let r = &a * &c / (&b * &b);
    match artin_schreier_root(&r) {
        Some(y) => {
            let x = &b / &a * y;
            IsotropyVerdict::isotropic(form, vec![x, one])
        }
        None => Ok(IsotropyVerdict::Unknown),
    }
}

fn small_polys(max_degree: u32) -> Vec<Poly2> {
    let monos: Vec<(u32, u32)> = (0..=max_degree)
        .flat_map(|d| (0..=d).map(move |i| (i, d - i)))
        .collect();
    (0u32..(1 << monos.len()))
        .map(|mask| {
            Poly2::from_monomials(
                monos
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, m)| *m),
            )
        })
        .collect()
}

/// Bounded search for `y` with `y² + y = r` in GF(2)(s,t): numerators of
/// total degree ≤ 2 over denominators of total degree ≤ 1.
fn artin_schreier_root(r: &Scalar) -> Option<Scalar> {
    let nums = small_polys(2);
    let dens: Vec<Poly2> = small_polys(1).into_iter().filter(|p| !p.is_zero()).collect();
    for den in &dens {
        for num in &nums {
            let y = Scalar::F2st(F2Frac::new(num.clone(), den.clone()).expect("nonzero"));
            if &(&y * &y + &y) == r {
                return Some(y);
            }
        }
    }
    None
}

/// Rank of the square-class component matrix of an additive form over
/// GF(2)(s,t); `None` if the form is not additive or not over GF(2)(s,t).
fn additive_component_rank(form: &QuadraticForm) -> Option<(usize, Vec<Vector>)> {
    if form.field != FieldSpec::F2RationalFunctions || !form.has_zero_polar() {
        return None;
    }
    let n = form.dim();
    let diag: Vec<F2Frac> = (0..n)
        .map(|i| form.coeff(i, i).as_f2frac().expect("f2st").clone())
        .collect();
    // Multiply through by the product of denominators.
    let polys: Vec<Poly2> = (0..n)
        .map(|i| {
            let mut p = diag[i].numerator().clone();
            for (j, d) in diag.iter().enumerate() {
                if j != i {
                    p = p.mul(d.denominator());
                }
            }
            p
        })
        .collect();
    let components: Vec<[Poly2; 4]> = polys.iter().map(Poly2::parity_components).collect();
    let matrix: Vec<Vector> = (0..4)
        .map(|e| {
            components
                .iter()
                .map(|c| Scalar::F2st(F2Frac::from_poly(c[e].clone())))
                .collect()
        })
        .collect();
    Some((linalg::rank(&matrix), matrix))
}

/// Exact isotropy decision for additive forms over GF(2)(s,t).
pub fn additive_isotropy(form: &QuadraticForm) -> Option<IsotropyVerdict> {
    let (rank, matrix) = additive_component_rank(form)?;
    if rank == form.dim() {
        return Some(IsotropyVerdict::Anisotropic {
            proof: ProofTag::Certificate,
        });
    }
    let kernel = linalg::nullspace(form.field, &matrix, form.dim());
    let w = kernel.into_iter().next().expect("rank deficient");
    Some(IsotropyVerdict::isotropic(form, w).expect("kernel vector is a zero"))
}

/// Produce an anisotropy certificate if one applies.
pub fn anisotropy_certificate(form: &QuadraticForm) -> Option<AnisotropyCertificate> {
    let (rank, _) = additive_component_rank(form)?;
    (rank == form.dim()).then_some(AnisotropyCertificate::AdditiveForm { rank })
}

pub fn verify_certificate(form: &QuadraticForm, cert: &AnisotropyCertificate) -> bool {
    match cert {
        AnisotropyCertificate::AdditiveForm { rank } => {
            *rank == form.dim()
                && additive_component_rank(form).is_some_and(|(r, _)| r == form.dim())
        }
    }
}

/// Bounded search for a zero of a form over GF(2)(s,t): coordinates are
/// polynomials of total degree ≤ 1.
pub fn bounded_zero_search(form: &QuadraticForm) -> Option<Vector> {
    let polys: Vec<Scalar> = small_polys(1)
        .into_iter()
        .map(|p| Scalar::F2st(F2Frac::from_poly(p)))
        .collect();
    let n = form.dim();
    let q = polys.len();
    for idx in 1..q.pow(n as u32) {
        let mut rest = idx;
        let v: Vector = (0..n)
            .map(|_| {
                let e = polys[rest % q].clone();
                rest /= q;
                e
            })
            .collect();
        if form.eval(&v).is_zero() {
            return Some(v);
        }
    }
    None
}

/// Isotropy of a form of dimension ≤ 3 over any supported field, using the
/// strongest available procedure.
pub fn decide_isotropy(form: &QuadraticForm) -> Result<IsotropyVerdict, FormError> {
    match form.dim() {
        0 => Ok(IsotropyVerdict::Anisotropic {
            proof: ProofTag::BruteForce,
        }),
        1 => {
            let one = vec![form.field.one()];
            if form.coeff(0, 0).is_zero() {
                IsotropyVerdict::isotropic(form, one)
            } else {
                Ok(IsotropyVerdict::Anisotropic {
                    proof: ProofTag::BruteForce,
                })
            }
        }
        2 => binary_anisotropic(form),
        3 => match form.field {
            FieldSpec::F2RationalFunctions => {
                if let Some(v) = additive_isotropy(form) {
                    return Ok(v);
                }
                match bounded_zero_search(form) {
                    Some(w) => IsotropyVerdict::isotropic(form, w),
                    None => Ok(IsotropyVerdict::Unknown),
                }
            }
            _ => ternary_isotropic(form),
        },
        n => Err(FormError::DimensionMismatch { expected: 3, got: n }),
    }
}
