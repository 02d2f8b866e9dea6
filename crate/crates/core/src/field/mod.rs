//! Exact scalar fields: the rationals, small prime fields and the rational
//! function field GF(2)(s, t).
//!
//! All three live behind the single [`Scalar`] enum so that geometry code can
//! be written once and the field can be chosen at run time. Mixing scalars
//! from different fields is a programming error: the operator impls panic,
//! while [`arith`] and the `checked_*` methods report [`FieldError`].

mod poly2;

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use poly2::{Monomial, Poly2};

/// Largest prime accepted for [`FieldSpec::PrimeField`].
pub const MAX_PRIME: u32 = 13;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields: {0} vs {1}")]
    FieldMismatch(String, String),
    #[error("missing second operand for binary operation")]
    MissingOperand,
    #[error("cannot parse scalar literal `{literal}`: {reason}")]
    Parse { literal: String, reason: String },
    #[error("unsupported prime {0} (must be a prime <= {MAX_PRIME})")]
    UnsupportedPrime(u32),
}

/// The active ground field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    Rationals,
    PrimeField { p: u32 },
    F2RationalFunctions,
}

fn is_prime_u32(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl FieldSpec {
    pub fn prime(p: u32) -> Result<Self, FieldError> {
        if p > MAX_PRIME || !is_prime_u32(p) {
            return Err(FieldError::UnsupportedPrime(p));
        }
        Ok(FieldSpec::PrimeField { p })
    }

    pub fn characteristic(&self) -> u32 {
        match self {
            FieldSpec::Rationals => 0,
            FieldSpec::PrimeField { p } => *p,
            FieldSpec::F2RationalFunctions => 2,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, FieldSpec::PrimeField { .. })
    }

    /// Number of elements for finite fields.
    pub fn order(&self) -> Option<u32> {
        match self {
            FieldSpec::PrimeField { p } => Some(*p),
            _ => None,
        }
    }

    /// Short name used on the command line (`Q`, `gf3`, `f2st`).
    pub fn short_name(&self) -> String {
        match self {
            FieldSpec::Rationals => "Q".into(),
            FieldSpec::PrimeField { p } => format!("gf{p}"),
            FieldSpec::F2RationalFunctions => "f2st".into(),
        }
    }

    pub fn parse_name(name: &str) -> Result<Self, FieldError> {
        let lower = name.to_ascii_lowercase();
        match lower.as_str() {
            "q" | "rationals" => Ok(FieldSpec::Rationals),
            "f2st" | "f2(s,t)" => Ok(FieldSpec::F2RationalFunctions),
            _ => match lower.strip_prefix("gf").map(str::parse::<u32>) {
                Some(Ok(p)) => FieldSpec::prime(p),
                _ => Err(FieldError::Parse {
                    literal: name.into(),
                    reason: "expected Q, gfP or f2st".into(),
                }),
            },
        }
    }

    pub fn zero(&self) -> Scalar {
        self.from_i64(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match self {
            FieldSpec::Rationals => Scalar::Q(BigRational::from_integer(BigInt::from(v))),
            FieldSpec::PrimeField { p } => Scalar::Fp(Fp::new(v, *p)),
            FieldSpec::F2RationalFunctions => {
                if v.rem_euclid(2) == 0 {
                    Scalar::F2st(F2Frac::zero())
                } else {
                    Scalar::F2st(F2Frac::one())
                }
            }
        }
    }

    /// `s` and `t` of GF(2)(s, t); `None` for other fields.
    pub fn indeterminates(&self) -> Option<(Scalar, Scalar)> {
        match self {
            FieldSpec::F2RationalFunctions => Some((
                Scalar::F2st(F2Frac::from_poly(Poly2::s())),
                Scalar::F2st(F2Frac::from_poly(Poly2::t())),
            )),
            _ => None,
        }
    }

    /// All field elements, for finite fields only.
    pub fn elements(&self) -> Option<Vec<Scalar>> {
        let p = self.order()?;
        Some((0..p as i64).map(|v| self.from_i64(v)).collect())
    }

    pub fn parse_scalar(&self, literal: &str) -> Result<Scalar, FieldError> {
        let err = |reason: &str| FieldError::Parse {
            literal: literal.into(),
            reason: reason.into(),
        };
        let trimmed = literal.trim();
        match self {
            FieldSpec::Rationals => BigRational::from_str(trimmed)
                .map(Scalar::Q)
                .map_err(|_| err("expected `a/b` or `a`")),
            FieldSpec::PrimeField { p } => trimmed
                .parse::<i64>()
                .map(|v| Scalar::Fp(Fp::new(v, *p)))
                .map_err(|_| err("expected a decimal integer")),
            FieldSpec::F2RationalFunctions => F2Frac::parse(trimmed)
                .map(Scalar::F2st)
                .map_err(|reason| err(&reason)),
        }
    }

    /// A random element of small height.
    ///
    /// Rationals: an integer in `[-height, height]`, occasionally divided by a
    /// small denominator. Prime fields: uniform. GF(2)(s,t): a random
    /// polynomial supported on the monomials of total degree at most two.
    pub fn random_scalar<R: Rng + ?Sized>(&self, rng: &mut R, height: i64) -> Scalar {
        match self {
            FieldSpec::Rationals => {
                let num = rng.gen_range(-height..=height);
                let den = if rng.gen_ratio(1, 4) {
                    rng.gen_range(1..=3)
                } else {
                    1
                };
                Scalar::Q(BigRational::new(BigInt::from(num), BigInt::from(den)))
            }
            FieldSpec::PrimeField { p } => Scalar::Fp(Fp::new(rng.gen_range(0..*p as i64), *p)),
            FieldSpec::F2RationalFunctions => {
                const MONOMIALS: [Monomial; 6] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
                let mask: u8 = rng.gen_range(0..64);
                let poly = Poly2::from_monomials(
                    MONOMIALS
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, m)| *m),
                );
                Scalar::F2st(F2Frac::from_poly(poly))
            }
        }
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R, height: i64) -> Scalar {
        loop {
            let x = self.random_scalar(rng, height);
            if !x.is_zero() {
                return x;
            }
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "Q"),
            FieldSpec::PrimeField { p } => write!(f, "GF({p})"),
            FieldSpec::F2RationalFunctions => write!(f, "GF(2)(s,t)"),
        }
    }
}

/// Residue modulo a small prime, always kept in `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    value: u32,
    p: u32,
}

impl Fp {
    pub fn new(v: i64, p: u32) -> Self {
        Self {
            value: v.rem_euclid(p as i64) as u32,
            p,
        }
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    fn inv(&self) -> Option<Self> {
        if self.value == 0 {
            return None;
        }
        // p <= 13, so a linear scan is as cheap as extended Euclid.
        (1..self.p)
            .find(|c| (c * self.value) % self.p == 1)
            .map(|c| Self { value: c, p: self.p })
    }
}

/// Element of GF(2)(s, t) as a reduced fraction of polynomials. The only
/// unit of GF(2)[s, t] is 1, so the reduced form is unique.
#[derive(Clone)]
pub struct F2Frac {
    num: Poly2,
    den: Poly2,
}

impl F2Frac {
    pub fn zero() -> Self {
        Self {
            num: Poly2::zero(),
            den: Poly2::one(),
        }
    }

    pub fn one() -> Self {
        Self::from_poly(Poly2::one())
    }

    pub fn from_poly(p: Poly2) -> Self {
        Self {
            num: p,
            den: Poly2::one(),
        }
    }

    /// Builds `num/den`; returns `None` when `den` is zero.
    pub fn new(num: Poly2, den: Poly2) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        Some(Self { num, den }.normalized())
    }

    pub fn numerator(&self) -> &Poly2 {
        &self.num
    }

    pub fn denominator(&self) -> &Poly2 {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Reduced form: numerator and denominator coprime.
    fn normalized(mut self) -> Self {
        if self.num.is_zero() {
            return Self::zero();
        }
        if let (Some(a), Some(b)) = (self.num.monomial_content(), self.den.monomial_content()) {
            let common = (a.0.min(b.0), a.1.min(b.1));
            if common != (0, 0) {
                self.num = self.num.div_monomial(common);
                self.den = self.den.div_monomial(common);
            }
        }
        if self.den.is_one() {
            return self;
        }
        let g = self.num.gcd(&self.den);
        if !g.is_one() {
            self.num = self.num.exact_div(&g).expect("gcd divides");
            self.den = self.den.exact_div(&g).expect("gcd divides");
        }
        self
    }

    fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Self {
                num: self.num.add(&o.num),
                den: self.den.clone(),
            }
            .normalized();
        }
        Self {
            num: self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
        .normalized()
    }

    fn mul(&self, o: &Self) -> Self {
        Self {
            num: self.num.mul(&o.num),
            den: self.den.mul(&o.den),
        }
        .normalized()
    }

    fn inv(&self) -> Option<Self> {
        if self.num.is_zero() {
            return None;
        }
        Some(Self {
            num: self.den.clone(),
            den: self.num.clone(),
        })
    }

    /// `a/b` is a square iff `a·b` has only even exponents.
    fn sqrt(&self) -> Option<Self> {
        let root = self.num.mul(&self.den).sqrt()?;
        Some(
            Self {
                num: root,
                den: self.den.clone(),
            }
            .normalized(),
        )
    }

    pub fn parse(src: &str) -> Result<Self, String> {
        let src: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        let (num, den) = split_fraction(&src)?;
        let num = Poly2::parse(num)?;
        let den = match den {
            Some(d) => Poly2::parse(d)?,
            None => Poly2::one(),
        };
        F2Frac::new(num, den).ok_or_else(|| "zero denominator".to_string())
    }
}

/// Split `"(a)/(b)"` or `"a"` at the top-level slash.
fn split_fraction(src: &str) -> Result<(&str, Option<&str>), String> {
    let mut depth = 0i32;
    for (i, c) in src.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '/' if depth == 0 => return Ok((&src[..i], Some(&src[i + 1..]))),
            _ => {}
        }
        if depth < 0 {
            return Err("unbalanced parentheses".into());
        }
    }
    if depth != 0 {
        return Err("unbalanced parentheses".into());
    }
    Ok((src, None))
}

impl PartialEq for F2Frac {
    fn eq(&self, o: &Self) -> bool {
        self.num == o.num && self.den == o.den
    }
}

impl Eq for F2Frac {}

impl fmt::Display for F2Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            if self.num.len() > 1 {
                write!(f, "({})", self.num)
            } else {
                write!(f, "{}", self.num)
            }
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for F2Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// An element of one of the supported fields.
#[derive(Clone, PartialEq, Eq)]
pub enum Scalar {
    Q(BigRational),
    Fp(Fp),
    F2st(F2Frac),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Inv,
}

/// Checked field arithmetic. Unary operations ignore `y`.
pub fn arith(op: ArithOp, x: &Scalar, y: Option<&Scalar>) -> Result<Scalar, FieldError> {
    match op {
        ArithOp::Neg => Ok(-x),
        ArithOp::Inv => x.checked_inv(),
        _ => {
            let y = y.ok_or(FieldError::MissingOperand)?;
            match op {
                ArithOp::Add => x.checked_add(y),
                ArithOp::Sub => x.checked_sub(y),
                ArithOp::Mul => x.checked_mul(y),
                ArithOp::Div => x.checked_div(y),
                ArithOp::Neg | ArithOp::Inv => unreachable!(),
            }
        }
    }
}

impl Scalar {
    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Q(_) => FieldSpec::Rationals,
            Scalar::Fp(x) => FieldSpec::PrimeField { p: x.p },
            Scalar::F2st(_) => FieldSpec::F2RationalFunctions,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Q(x) => x.is_zero(),
            Scalar::Fp(x) => x.value == 0,
            Scalar::F2st(x) => x.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Q(x) => x.is_one(),
            Scalar::Fp(x) => x.value == 1,
            Scalar::F2st(x) => x.num == x.den,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Q(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_f2frac(&self) -> Option<&F2Frac> {
        match self {
            Scalar::F2st(x) => Some(x),
            _ => None,
        }
    }

    /// Rough size measure used for pivot selection (number of terms, or
    /// bit length for rationals).
    pub fn weight(&self) -> usize {
        match self {
            Scalar::Q(x) => (x.numer().bits() + x.denom().bits()) as usize,
            Scalar::Fp(_) => 1,
            Scalar::F2st(x) => x.num.len() + x.den.len(),
        }
    }

    fn mismatch(&self, o: &Scalar) -> FieldError {
        FieldError::FieldMismatch(self.field().to_string(), o.field().to_string())
    }

    pub fn checked_add(&self, o: &Scalar) -> Result<Scalar, FieldError> {
        match (self, o) {
            (Scalar::Q(a), Scalar::Q(b)) => Ok(Scalar::Q(a + b)),
            (Scalar::Fp(a), Scalar::Fp(b)) if a.p == b.p => {
                Ok(Scalar::Fp(Fp::new(a.value as i64 + b.value as i64, a.p)))
            }
            (Scalar::F2st(a), Scalar::F2st(b)) => Ok(Scalar::F2st(a.add(b))),
            _ => Err(self.mismatch(o)),
        }
    }

    pub fn checked_sub(&self, o: &Scalar) -> Result<Scalar, FieldError> {
        self.checked_add(&-o)
    }

    pub fn checked_mul(&self, o: &Scalar) -> Result<Scalar, FieldError> {
        match (self, o) {
            (Scalar::Q(a), Scalar::Q(b)) => Ok(Scalar::Q(a * b)),
            (Scalar::Fp(a), Scalar::Fp(b)) if a.p == b.p => {
                Ok(Scalar::Fp(Fp::new(a.value as i64 * b.value as i64, a.p)))
            }
            (Scalar::F2st(a), Scalar::F2st(b)) => Ok(Scalar::F2st(a.mul(b))),
            _ => Err(self.mismatch(o)),
        }
    }

    pub fn checked_inv(&self) -> Result<Scalar, FieldError> {
        match self {
            Scalar::Q(a) if !a.is_zero() => Ok(Scalar::Q(a.recip())),
            Scalar::Fp(a) => a.inv().map(Scalar::Fp).ok_or(FieldError::DivisionByZero),
            Scalar::F2st(a) => a.inv().map(Scalar::F2st).ok_or(FieldError::DivisionByZero),
            _ => Err(FieldError::DivisionByZero),
        }
    }

    pub fn checked_div(&self, o: &Scalar) -> Result<Scalar, FieldError> {
        if self.field() != o.field() {
            return Err(self.mismatch(o));
        }
        self.checked_mul(&o.checked_inv()?)
    }

    pub fn inv(&self) -> Scalar {
        self.checked_inv().expect("inverse of zero")
    }

    pub fn square(&self) -> Scalar {
        self * self
    }

    /// Square root if one exists in the field.
    pub fn sqrt(&self) -> Option<Scalar> {
        match self {
            Scalar::Q(x) => {
                if x.is_negative() {
                    return None;
                }
                let n = x.numer().sqrt();
                let d = x.denom().sqrt();
                (&n * &n == *x.numer() && &d * &d == *x.denom())
                    .then(|| Scalar::Q(BigRational::new(n, d)))
            }
            Scalar::Fp(x) => (0..x.p)
                .find(|y| (y * y) % x.p == x.value)
                .map(|y| Scalar::Fp(Fp { value: y, p: x.p })),
            Scalar::F2st(x) => x.sqrt().map(Scalar::F2st),
        }
    }

    pub fn is_square(&self) -> bool {
        self.sqrt().is_some()
    }
}

/// Integer square root test used by the rational Hilbert-symbol code.
pub fn is_square_integer(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Q(x) => write!(f, "{x}"),
            Scalar::Fp(x) => write!(f, "{}", x.value),
            Scalar::F2st(x) => write!(f, "{x}"),
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Q(x) => Scalar::Q(-x),
            Scalar::Fp(x) => Scalar::Fp(Fp::new(-(x.value as i64), x.p)),
            Scalar::F2st(x) => Scalar::F2st(x.clone()),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                match self.$checked(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{}", e),
                }
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}
