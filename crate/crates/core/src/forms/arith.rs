//! Integer number theory backing the rational isotropy tests: trial-division
//! factorisation, Hilbert symbols and a Legendre-equation solver.

use num::bigint::{BigInt, Sign};
use num::{Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::FormError;

/// Default trial-division bound.
pub const DEFAULT_FACTOR_BOUND: u64 = 1_000_000;

/// A place of ℚ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Place {
    Infinity,
    Prime(u64),
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Place {
    pub fn prime(p: u64) -> Result<Self, FormError> {
        if is_prime_u64(p) {
            Ok(Place::Prime(p))
        } else {
            Err(FormError::InvalidPlace(p))
        }
    }
}

/// Prime factorisation of `|n|` by trial division up to `bound`.
///
/// Fails if a cofactor remains that is not provably prime, i.e. one that is
/// at least `bound²`.
pub fn factor(n: &BigInt, bound: u64) -> Result<Vec<(BigInt, u32)>, FormError> {
    let mut rem = n.abs();
    if rem.is_zero() {
        return Err(FormError::ZeroCoefficient);
    }
    let mut out = Vec::new();
    let mut d = 2u64;
    while d <= bound {
        let dd = BigInt::from(d);
        if &dd * &dd > rem {
            break;
        }
        let mut e = 0u32;
        while (&rem % &dd).is_zero() {
            rem /= &dd;
            e += 1;
        }
        if e > 0 {
            out.push((dd, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if !rem.is_one() {
        let b = BigInt::from(bound);
        if d > bound && rem >= &b * &b {
            return Err(FormError::CannotFactor(rem.to_string()));
        }
        out.push((rem, 1));
    }
    Ok(out)
}

/// Split `n = sign · core · m²` with `core` squarefree and positive.
/// Returns `(sign · core, m)`.
pub fn squarefree_decomposition(n: &BigInt, bound: u64) -> Result<(BigInt, BigInt), FormError> {
    let mut core = BigInt::one();
    let mut root = BigInt::one();
    for (p, e) in factor(n, bound)? {
        if e % 2 == 1 {
            core *= &p;
        }
        root *= p.pow(e / 2);
    }
    if n.sign() == Sign::Minus {
        core = -core;
    }
    Ok((core, root))
}

fn valuation(n: &BigInt, p: &BigInt) -> (u32, BigInt) {
    let mut e = 0;
    let mut u = n.clone();
    while (&u % p).is_zero() {
        u /= p;
        e += 1;
    }
    (e, u)
}

fn mod_u64(n: &BigInt, p: u64) -> u64 {
    n.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits")
}

fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u128;
    let mut b = (base % m) as u128;
    let m128 = m as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

/// Legendre symbol `(u | p)` for an odd prime `p` not dividing `u`.
fn legendre(u: &BigInt, p: u64) -> i32 {
    let r = pow_mod(mod_u64(u, p), (p - 1) / 2, p);
    if r == 1 {
        1
    } else {
        -1
    }
}

/// Hilbert symbol `(a, b)_v` for nonzero integers.
pub fn hilbert_symbol_int(a: &BigInt, b: &BigInt, place: Place) -> Result<i32, FormError> {
    if a.is_zero() || b.is_zero() {
        return Err(FormError::ZeroCoefficient);
    }
    match place {
        Place::Infinity => Ok(if a.is_negative() && b.is_negative() { -1 } else { 1 }),
        Place::Prime(p) => {
            if !is_prime_u64(p) {
                return Err(FormError::InvalidPlace(p));
            }
            let pb = BigInt::from(p);
            let (alpha, u) = valuation(a, &pb);
            let (beta, v) = valuation(b, &pb);
            if p == 2 {
                let eps = |x: &BigInt| u64::from(mod_u64(x, 4) == 3);
                let omega = |x: &BigInt| {
                    let r = mod_u64(x, 8);
                    u64::from(r == 3 || r == 5)
                };
                let e = eps(&u) * eps(&v) + alpha as u64 * omega(&v) + beta as u64 * omega(&u);
                Ok(if e.is_multiple_of(2) { 1 } else { -1 })
            } else {
                let mut s = if (alpha as u64 * beta as u64 * ((p - 1) / 2)).is_multiple_of(2) {
                    1
                } else {
                    -1
                };
                if beta % 2 == 1 {
                    s *= legendre(&u, p);
                }
                if alpha % 2 == 1 {
                    s *= legendre(&v, p);
                }
                Ok(s)
            }
        }
    }
}

/// Places at which `(a, b)_v` can be −1: infinity, 2 and odd primes
/// dividing `a·b`.
pub fn relevant_places(a: &BigInt, b: &BigInt, bound: u64) -> Result<Vec<Place>, FormError> {
    let mut places = vec![Place::Infinity, Place::Prime(2)];
    for n in [a, b] {
        for (p, _) in factor(n, bound)? {
            let p = p
                .to_u64()
                .ok_or_else(|| FormError::CannotFactor(p.to_string()))?;
            if p != 2 && !places.contains(&Place::Prime(p)) {
                places.push(Place::Prime(p));
            }
        }
    }
    places.sort();
    Ok(places)
}

fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 || p == 2 {
        return Some(a);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    // Tonelli–Shanks.
    let mut q = p - 1;
    let mut s = 0;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mulm = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mulm(tt, tt);
            i += 1;
        }
        let mut b = c;
        for _ in 0..(m - i - 1) {
            b = mulm(b, b);
        }
        m = i;
        c = mulm(b, b);
        t = mulm(t, c);
        r = mulm(r, b);
    }
    Some(r)
}

/// Square root of `a` modulo a squarefree modulus `m`, via CRT.
fn sqrt_mod_squarefree(a: &BigInt, m: &BigInt, bound: u64) -> Result<Option<BigInt>, FormError> {
    let m = m.abs();
    if m.is_one() {
        return Ok(Some(BigInt::zero()));
    }
    let mut x = BigInt::zero();
    let mut modulus = BigInt::one();
    for (p, e) in factor(&m, bound)? {
        debug_assert_eq!(e, 1);
        let pu = p
            .to_u64()
            .ok_or_else(|| FormError::CannotFactor(p.to_string()))?;
        let Some(r) = sqrt_mod_prime(mod_u64(a, pu), pu) else {
            return Ok(None);
        };
        // Combine x mod `modulus` with r mod p.
        let r = BigInt::from(r);
        let inv = modinv(&modulus, &p);
        let k = ((&r - &x) * inv).mod_floor(&p);
        x += &modulus * k;
        modulus *= &p;
    }
    Ok(Some(x.mod_floor(&modulus)))
}

fn modinv(a: &BigInt, m: &BigInt) -> BigInt {
    let g = a.extended_gcd(m);
    debug_assert!(g.gcd.is_one());
    g.x.mod_floor(m)
}

/// Nontrivial integer solution of `z² = a·x² + b·y²` for squarefree nonzero
/// `a`, `b`, by Legendre descent. Fails with `NoSolution` when the equation
/// has only the trivial solution.
pub fn solve_legendre(a: &BigInt, b: &BigInt, bound: u64) -> Result<(BigInt, BigInt, BigInt), FormError> {
    if crate::field::is_square_integer(a) {
        return Ok((BigInt::one(), BigInt::zero(), a.sqrt()));
    }
    if crate::field::is_square_integer(b) {
        return Ok((BigInt::zero(), BigInt::one(), b.sqrt()));
    }
    if a.abs() > b.abs() {
        let (x, y, z) = solve_legendre(b, a, bound)?;
        return Ok((y, x, z));
    }
    if b.abs().is_one() {
        // a, b ∈ {−1}: z² = −x² − y² has no nontrivial solution.
        return Err(FormError::NoSolution);
    }
    let bb = b.abs();
    let t = sqrt_mod_squarefree(a, &bb, bound)?.ok_or(FormError::NoSolution)?;
    let half = &bb / 2;
    let t = if t > half { t - &bb } else { t };
    let k = (&t * &t - a) / b;
    debug_assert!(!k.is_zero());
    let (k_core, m) = squarefree_decomposition(&k, bound)?;
    let (x1, y1, z1) = solve_legendre(a, &k_core, bound)?;
    let z = &z1 * &t + a * &x1;
    let x = &z1 + &x1 * &t;
    let y = &k_core * &y1 * &m;
    Ok((x, y, z))
}
