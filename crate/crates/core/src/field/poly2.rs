//! Polynomials over GF(2) in the two indeterminates `s` and `t`.

use std::collections::BTreeSet;
use std::fmt;

use num::{BigUint, One, Zero};

/// Exponent pair `(deg_s, deg_t)` of a monomial `s^a t^b`.
pub type Monomial = (u32, u32);

/// Sparse polynomial in GF(2)[s, t]. Every coefficient is 1, so the
/// polynomial is just its set of monomials; addition is symmetric difference.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly2 {
    terms: BTreeSet<Monomial>,
}

/// Graded lexicographic order on monomials: total degree first, then `s`.
fn grlex_key(m: &Monomial) -> (u32, u32, u32) {
    (m.0 + m.1, m.0, m.1)
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, 0)
    }

    pub fn s() -> Self {
        Self::monomial(1, 0)
    }

    pub fn t() -> Self {
        Self::monomial(0, 1)
    }

    pub fn monomial(a: u32, b: u32) -> Self {
        let mut terms = BTreeSet::new();
        terms.insert((a, b));
        Self { terms }
    }

    pub fn from_monomials<I: IntoIterator<Item = Monomial>>(iter: I) -> Self {
        let mut p = Self::zero();
        for m in iter {
            p.toggle(m);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.contains(&(0, 0))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.iter().map(|m| m.0 + m.1).max()
    }

    fn toggle(&mut self, m: Monomial) {
        if !self.terms.remove(&m) {
            self.terms.insert(m);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            terms: self
                .terms
                .symmetric_difference(&other.terms)
                .copied()
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for a in &self.terms {
            for b in &other.terms {
                out.toggle((a.0 + b.0, a.1 + b.1));
            }
        }
        out
    }

    pub fn square(&self) -> Self {
        // Frobenius: cross terms cancel in characteristic 2.
        Self {
            terms: self.terms.iter().map(|m| (2 * m.0, 2 * m.1)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: Monomial) -> Self {
        Self {
            terms: self.terms.iter().map(|a| (a.0 + m.0, a.1 + m.1)).collect(),
        }
    }

    /// Largest monomial dividing every term (the monomial content).
    pub fn monomial_content(&self) -> Option<Monomial> {
        let a = self.terms.iter().map(|m| m.0).min()?;
        let b = self.terms.iter().map(|m| m.1).min()?;
        Some((a, b))
    }

    /// Divide every term by `m`; caller guarantees divisibility.
    pub fn div_monomial(&self, m: Monomial) -> Self {
        Self {
            terms: self.terms.iter().map(|a| (a.0 - m.0, a.1 - m.1)).collect(),
        }
    }

    fn leading(&self) -> Option<Monomial> {
        self.terms.iter().copied().max_by_key(grlex_key)
    }

    /// Exact quotient `self / divisor` if `divisor` divides `self`.
    pub fn exact_div(&self, divisor: &Self) -> Option<Self> {
        let lead_d = divisor.leading()?;
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some(lead_r) = rem.leading() {
            if lead_r.0 < lead_d.0 || lead_r.1 < lead_d.1 {
                return None;
            }
            let q = (lead_r.0 - lead_d.0, lead_r.1 - lead_d.1);
            quot.toggle(q);
            rem = rem.add(&divisor.mul_monomial(q));
        }
        Some(quot)
    }

    /// True iff every exponent is even, i.e. the polynomial is a square.
    pub fn is_square(&self) -> bool {
        self.terms.iter().all(|m| m.0 % 2 == 0 && m.1 % 2 == 0)
    }

    /// Square root of a square polynomial.
    pub fn sqrt(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        Some(Self {
            terms: self.terms.iter().map(|m| (m.0 / 2, m.1 / 2)).collect(),
        })
    }

    /// Split into parity components: `self = Σ_e s^e0 t^e1 · P_e²`.
    /// Returns the roots `P_e` indexed by `e = (0,0), (1,0), (0,1), (1,1)`.
    pub fn parity_components(&self) -> [Poly2; 4] {
        let mut parts: [Poly2; 4] = Default::default();
        for m in &self.terms {
            let idx = (m.0 % 2 + 2 * (m.1 % 2)) as usize;
            parts[idx].toggle((m.0 / 2, m.1 / 2));
        }
        parts
    }

    /// Greatest common divisor, by a primitive remainder sequence in `s`
    /// over GF(2)[t].
    pub fn gcd(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() || self.is_one() || other.is_one() {
            return if other.is_zero() { self.clone() } else { Self::one() };
        }
        let mut a = to_s_coeffs(self);
        let mut b = to_s_coeffs(other);
        let c = t_gcd(&content(&a), &content(&b));
        a = primitive_part(&a);
        b = primitive_part(&b);
        if a.len() < b.len() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_empty() {
            let r = pseudo_remainder(a, &b);
            a = b;
            b = primitive_part(&r);
        }
        let g = primitive_part(&a);
        from_s_coeffs(&g.iter().map(|x| t_mul(x, &c)).collect::<Vec<_>>())
    }

    pub fn parse(src: &str) -> Result<Self, String> {
        let src: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        let src = strip_parens(&src);
        if src.is_empty() {
            return Err("empty polynomial".into());
        }
        let mut out = Self::zero();
        for term in src.split('+') {
            if term.is_empty() {
                return Err(format!("empty term in `{src}`"));
            }
            let mut mono = (0u32, 0u32);
            let mut coeff_zero = false;
            for factor in term.split('*') {
                let (base, exp) = match factor.split_once('^') {
                    Some((b, e)) => (
                        b,
                        e.parse::<u32>()
                            .map_err(|_| format!("bad exponent in `{factor}`"))?,
                    ),
                    None => (factor, 1),
                };
                match base {
                    "s" => mono.0 += exp,
                    "t" => mono.1 += exp,
                    "1" => {}
                    "0" => coeff_zero = true,
                    _ => return Err(format!("unknown factor `{factor}`")),
                }
            }
            if !coeff_zero {
                out.toggle(mono);
            }
        }
        Ok(out)
    }
}

// Univariate polynomials in t over GF(2), as bit vectors.

fn t_deg(a: &BigUint) -> Option<u64> {
    a.bits().checked_sub(1)
}

fn t_mul(a: &BigUint, b: &BigUint) -> BigUint {
    let mut acc = BigUint::zero();
    for i in 0..a.bits() {
        if a.bit(i) {
            acc ^= b << i;
        }
    }
    acc
}

fn t_divrem(a: &BigUint, d: &BigUint) -> (BigUint, BigUint) {
    let dd = t_deg(d).expect("nonzero divisor");
    let mut q = BigUint::zero();
    let mut r = a.clone();
    while let Some(dr) = t_deg(&r) {
        if dr < dd {
            break;
        }
        q.set_bit(dr - dd, true);
        r ^= d << (dr - dd);
    }
    (q, r)
}

fn t_gcd(a: &BigUint, b: &BigUint) -> BigUint {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = t_divrem(&a, &b).1;
        a = b;
        b = r;
    }
    a
}

/// Coefficients in GF(2)[t] of the powers of `s`, trailing zeros trimmed.
fn to_s_coeffs(p: &Poly2) -> Vec<BigUint> {
    let deg = p.terms.iter().map(|m| m.0).max().map_or(0, |d| d as usize + 1);
    let mut out = vec![BigUint::zero(); deg];
    for m in &p.terms {
        out[m.0 as usize].set_bit(m.1 as u64, true);
    }
    out
}

fn from_s_coeffs(c: &[BigUint]) -> Poly2 {
    let mut out = Poly2::zero();
    for (a, coeff) in c.iter().enumerate() {
        for b in 0..coeff.bits() {
            if coeff.bit(b) {
                out.terms.insert((a as u32, b as u32));
            }
        }
    }
    out
}

fn trim(mut v: Vec<BigUint>) -> Vec<BigUint> {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
    v
}

fn content(v: &[BigUint]) -> BigUint {
    v.iter().fold(BigUint::zero(), |g, c| t_gcd(&g, c))
}

fn primitive_part(v: &[BigUint]) -> Vec<BigUint> {
    let v = trim(v.to_vec());
    if v.is_empty() {
        return v;
    }
    let c = content(&v);
    if c.is_one() {
        return v;
    }
    v.iter().map(|x| t_divrem(x, &c).0).collect()
}

fn pseudo_remainder(mut a: Vec<BigUint>, b: &[BigUint]) -> Vec<BigUint> {
    let lb = b.last().expect("nonzero").clone();
    while a.len() >= b.len() {
        let la = a.last().expect("nonzero").clone();
        let shift = a.len() - b.len();
        for x in a.iter_mut() {
            *x = t_mul(x, &lb);
        }
        for (i, y) in b.iter().enumerate() {
            let term = t_mul(y, &la);
            a[i + shift] ^= term;
        }
        a = trim(a);
    }
    a
}

fn strip_parens(s: &str) -> &str {
    if s.starts_with('(') && s.ends_with(')') {
        &s[1..s.len() - 1]
    } else {
        s
    }
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut ordered: Vec<&Monomial> = self.terms.iter().collect();
        ordered.sort_by_key(|m| std::cmp::Reverse(grlex_key(m)));
        let mut first = true;
        for m in ordered {
            if !first {
                write!(f, "+")?;
            }
            first = false;
            let mut factors = Vec::new();
            match m.0 {
                0 => {}
                1 => factors.push("s".to_string()),
                e => factors.push(format!("s^{e}")),
            }
            match m.1 {
                0 => {}
                1 => factors.push("t".to_string()),
                e => factors.push(format!("t^{e}")),
            }
            if factors.is_empty() {
                write!(f, "1")?;
            } else {
                write!(f, "{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
