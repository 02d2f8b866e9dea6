//! Four-dimensional algebras over the base field: quaternion algebras
//! `(a,b)_K` (characteristic ≠ 2) on the basis `1, i, j, k`, and the purely
//! inseparable tower `K(√s, √t)` over `K = GF(2)(s,t)` on `1, u, w, uw`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, FieldSpec, Scalar};
use crate::forms::{self, FormError, IsotropyVerdict, Place, QuadraticForm};
use crate::linalg::{self, Vector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("quaternion algebras need characteristic different from 2")]
    CharacteristicTwo,
    #[error("quaternion parameters must be nonzero")]
    ZeroParameter,
    #[error("element has {0} coordinates, expected 4")]
    BadLength(usize),
    #[error("division test not available over {0}")]
    UnsupportedBaseField(String),
    #[error("element lies in the centre K·1")]
    CentralElement,
    #[error("algebra JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Form(#[from] FormError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgebraH {
    /// `i² = a`, `j² = b`, `k = ij = −ji`.
    Quaternion { a: Scalar, b: Scalar },
    /// `u² = s`, `w² = t`, `uw = wu`, over GF(2)(s,t).
    Tower,
}

/// Wire form `{"kind":"quaternion","a":"-1","b":"-1"}` or `{"kind":"tower"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgebraJson {
    Quaternion { a: String, b: String },
    Tower,
}

impl AlgebraH {
    pub fn quaternion(a: Scalar, b: Scalar) -> Result<Self, AlgebraError> {
        if a.field() != b.field() {
            return Err(FieldError::FieldMismatch(a.field().to_string(), b.field().to_string()).into());
        }
        if a.field().characteristic() == 2 {
            return Err(AlgebraError::CharacteristicTwo);
        }
        if a.is_zero() || b.is_zero() {
            return Err(AlgebraError::ZeroParameter);
        }
        Ok(AlgebraH::Quaternion { a, b })
    }

    pub fn quaternion_ints(field: FieldSpec, a: i64, b: i64) -> Result<Self, AlgebraError> {
        Self::quaternion(field.from_i64(a), field.from_i64(b))
    }

    pub fn tower() -> Self {
        AlgebraH::Tower
    }

    pub fn field(&self) -> FieldSpec {
        match self {
            AlgebraH::Quaternion { a, .. } => a.field(),
            AlgebraH::Tower => FieldSpec::F2RationalFunctions,
        }
    }

    pub fn to_json(&self) -> AlgebraJson {
        match self {
            AlgebraH::Quaternion { a, b } => AlgebraJson::Quaternion {
                a: a.to_string(),
                b: b.to_string(),
            },
            AlgebraH::Tower => AlgebraJson::Tower,
        }
    }

    pub fn from_json(field: FieldSpec, json: &AlgebraJson) -> Result<Self, AlgebraError> {
        match json {
            AlgebraJson::Quaternion { a, b } => {
                Self::quaternion(field.parse_scalar(a)?, field.parse_scalar(b)?)
            }
            AlgebraJson::Tower if field == FieldSpec::F2RationalFunctions => Ok(AlgebraH::Tower),
            AlgebraJson::Tower => Err(AlgebraError::Json(format!("tower algebra requires f2st, got {field}"))),
        }
    }

    /// Squares of the generators: `(a, b)` resp. `(s, t)`.
    fn generator_squares(&self) -> (Scalar, Scalar) {
        match self {
            AlgebraH::Quaternion { a, b } => (a.clone(), b.clone()),
            AlgebraH::Tower => self.field().indeterminates().expect("f2st"),
        }
    }

    pub fn one(&self) -> Vector {
        self.basis(0)
    }

    pub fn basis(&self, i: usize) -> Vector {
        linalg::unit_vector(self.field(), 4, i)
    }

    pub fn scalar(&self, c: &Scalar) -> Vector {
        linalg::scale(c, &self.one())
    }

    /// Product of basis elements `e_i e_j = coeff · e_index`.
    fn basis_product(&self, i: usize, j: usize) -> (Scalar, usize) {
        let field = self.field();
        let (a, b) = self.generator_squares();
        let one = field.one();
        let ab = &a * &b;
        if i == 0 {
            return (one, j);
        }
        if j == 0 {
            return (one, i);
        }
        match self {
            AlgebraH::Quaternion { .. } => match (i, j) {
                (1, 1) => (a, 0),
                (2, 2) => (b, 0),
                (3, 3) => (-ab, 0),
                (1, 2) => (one, 3),
                (2, 1) => (-one, 3),
                (1, 3) => (a, 2),
                (3, 1) => (-a, 2),
                (2, 3) => (-b, 1),
                (3, 2) => (b, 1),
                _ => unreachable!(),
            },
            AlgebraH::Tower => match (i.min(j), i.max(j)) {
                (1, 1) => (a, 0),
                (2, 2) => (b, 0),
                (3, 3) => (ab, 0),
                (1, 2) => (one, 3),
                (1, 3) => (a, 2),
                (2, 3) => (b, 1),
                _ => unreachable!(),
            },
        }
    }

    fn check(&self, x: &[Scalar]) -> Result<(), AlgebraError> {
        if x.len() != 4 {
            return Err(AlgebraError::BadLength(x.len()));
        }
        if let Some(c) = x.iter().find(|c| c.field() != self.field()) {
            return Err(FieldError::FieldMismatch(self.field().to_string(), c.field().to_string()).into());
        }
        Ok(())
    }

    pub fn try_mul(&self, x: &[Scalar], y: &[Scalar]) -> Result<Vector, AlgebraError> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.mul(x, y))
    }

    pub fn mul(&self, x: &[Scalar], y: &[Scalar]) -> Vector {
        let mut out = vec![self.field().zero(); 4];
        for i in 0..4 {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..4 {
                if y[j].is_zero() {
                    continue;
                }
                let (c, k) = self.basis_product(i, j);
                out[k] = &out[k] + c * &x[i] * &y[j];
            }
        }
        out
    }

    /// Standard involution (the identity for the commutative tower).
    pub fn conj(&self, x: &[Scalar]) -> Vector {
        match self {
            AlgebraH::Quaternion { .. } => vec![x[0].clone(), -&x[1], -&x[2], -&x[3]],
            AlgebraH::Tower => x.to_vec(),
        }
    }

    /// Quaternion norm `x·conj(x)`, or `x²` for the tower; both lie in K.
    pub fn norm(&self, x: &[Scalar]) -> Scalar {
        let (a, b) = self.generator_squares();
        let ab = &a * &b;
        let sq = |c: &Scalar| c * c;
        match self {
            AlgebraH::Quaternion { .. } => sq(&x[0]) - a * sq(&x[1]) - b * sq(&x[2]) + ab * sq(&x[3]),
            AlgebraH::Tower => sq(&x[0]) + a * sq(&x[1]) + b * sq(&x[2]) + ab * sq(&x[3]),
        }
    }

    pub fn norm_form(&self) -> QuadraticForm {
        let field = self.field();
        let basis: Vec<Scalar> = (0..4).map(|i| self.norm(&self.basis(i))).collect();
        QuadraticForm::diagonal(field, &basis)
    }

    /// Two-sided inverse, if `x` is invertible.
    pub fn inverse(&self, x: &[Scalar]) -> Option<Vector> {
        let n = self.norm(x);
        if n.is_zero() {
            return None;
        }
        let ninv = n.inv();
        Some(linalg::scale(&ninv, &self.conj(x)))
    }

    pub fn is_central(&self, x: &[Scalar]) -> bool {
        x[1..].iter().all(Scalar::is_zero)
    }

    /// Whether the algebra is a skew field (quaternion kind) or a field
    /// (tower kind).
    pub fn is_division(&self) -> Result<bool, AlgebraError> {
        match self {
            AlgebraH::Quaternion { a, b } => match a.field() {
                FieldSpec::Rationals => {
                    for place in forms::relevant_places(a, b)? {
                        if forms::hilbert_symbol(a, b, place)? == -1 {
                            return Ok(true);
                        }
                    }
                    Ok(false)
                }
                FieldSpec::PrimeField { .. } => {
                    // A zero of the norm form is a zero divisor.
                    let form = self.norm_form();
                    let elems = a.field().elements().expect("finite");
                    let q = elems.len();
                    let zero_found = (1..q.pow(4)).any(|mut idx| {
                        let v: Vector = (0..4)
                            .map(|_| {
                                let e = elems[idx % q].clone();
                                idx /= q;
                                e
                            })
                            .collect();
                        form.eval(&v).is_zero()
                    });
                    Ok(!zero_found)
                }
                f => Err(AlgebraError::UnsupportedBaseField(f.to_string())),
            },
            AlgebraH::Tower => {
                let (s, t) = self.generator_squares();
                let nonsquares = !s.is_square() && !t.is_square() && !(&s * &t).is_square();
                let anisotropic = matches!(
                    forms::additive_isotropy(&self.norm_form()),
                    Some(IsotropyVerdict::Anisotropic { .. })
                );
                Ok(nonsquares && anisotropic)
            }
        }
    }

    /// The places at which `(a, b)` ramifies (quaternion algebras over ℚ).
    pub fn ramified_places(&self) -> Result<Vec<Place>, AlgebraError> {
        match self {
            AlgebraH::Quaternion { a, b } if a.field() == FieldSpec::Rationals => {
                let mut out = Vec::new();
                for place in forms::relevant_places(a, b)? {
                    if forms::hilbert_symbol(a, b, place)? == -1 {
                        out.push(place);
                    }
                }
                Ok(out)
            }
            _ => Err(AlgebraError::UnsupportedBaseField(self.field().to_string())),
        }
    }

    /// The subalgebra `K[x] = span(1, x)` with `x² = c0 + c1·x`.
    pub fn intermediate_field(&self, x: &[Scalar]) -> Result<SubfieldL, AlgebraError> {
        self.check(x)?;
        if self.is_central(x) {
            return Err(AlgebraError::CentralElement);
        }
        let x2 = self.mul(x, x);
        let coeffs = linalg::solve_in_span(self.field(), &[self.one(), x.to_vec()], &x2)
            .expect("quadratic over the centre");
        Ok(SubfieldL {
            generator: x.to_vec(),
            c0: coeffs[0].clone(),
            c1: coeffs[1].clone(),
        })
    }
}

/// A two-dimensional subalgebra `span(1, x)` with minimal equation
/// `x² = c0 + c1·x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubfieldL {
    pub generator: Vector,
    pub c0: Scalar,
    pub c1: Scalar,
}

impl SubfieldL {
    pub fn basis(&self, h: &AlgebraH) -> [Vector; 2] {
        [h.one(), self.generator.clone()]
    }

    pub fn contains(&self, h: &AlgebraH, y: &[Scalar]) -> bool {
        linalg::solve_in_span(h.field(), &self.basis(h), y).is_some()
    }

    /// `(α + βx)(γ + δx)` in coordinates `(α, β)`.
    pub fn mul_coords(&self, p: &[Scalar; 2], q: &[Scalar; 2]) -> [Scalar; 2] {
        let bd = &p[1] * &q[1];
        [
            &p[0] * &q[0] + &bd * &self.c0,
            &p[0] * &q[1] + &p[1] * &q[0] + bd * &self.c1,
        ]
    }
}

/// Separability of `L/K`: the minimal polynomial `X² − c1 X − c0` has a
/// nonzero linear term or the characteristic is not 2.
pub fn is_separable_quadratic(l: &SubfieldL) -> bool {
    l.c0.field().characteristic() != 2 || !l.c1.is_zero()
}
