//! Subspaces of PG(n, K) in canonical (reduced row echelon) form.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, FieldSpec, Scalar};
use crate::linalg::{self, Vector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjError {
    #[error("ambient mismatch: PG({0}) over {1} vs PG({2}) over {3}")]
    AmbientMismatch(usize, String, usize, String),
    #[error("coordinate vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the zero vector does not represent a point")]
    ZeroVector,
    #[error("line parameter [0:0] is not allowed")]
    ZeroParameter,
    #[error("expected a subspace of dimension {expected}, got {got}")]
    WrongDimension { expected: isize, got: isize },
    #[error("enumeration requires GF(2) or GF(3), got {0}")]
    InfiniteField(String),
    #[error("enumeration supports n <= 5 and d <= 3")]
    EnumerationTooLarge,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A subspace of PG(n, K), stored as the reduced row echelon basis of the
/// corresponding vector subspace of K^(n+1). Equal subspaces have equal
/// representations.
#[derive(Clone, PartialEq, Eq)]
pub struct Subspace {
    field: FieldSpec,
    n: usize,
    rows: Vec<Vector>,
}

impl Subspace {
    pub fn empty(field: FieldSpec, n: usize) -> Self {
        Self {
            field,
            n,
            rows: Vec::new(),
        }
    }

    pub fn whole(field: FieldSpec, n: usize) -> Self {
        let rows = (0..=n).map(|i| linalg::unit_vector(field, n + 1, i)).collect();
        Self { field, n, rows }
    }

    /// Subspace spanned by `rows` (not necessarily independent).
    pub fn from_rows(field: FieldSpec, n: usize, rows: Vec<Vector>) -> Result<Self, ProjError> {
        for r in &rows {
            if r.len() != n + 1 {
                return Err(ProjError::DimensionMismatch {
                    expected: n + 1,
                    got: r.len(),
                });
            }
            if let Some(x) = r.iter().find(|x| x.field() != field) {
                return Err(FieldError::FieldMismatch(field.to_string(), x.field().to_string()).into());
            }
        }
        if rows.is_empty() {
            return Ok(Self::empty(field, n));
        }
        let (rows, _) = linalg::rref(rows);
        Ok(Self { field, n, rows })
    }

    /// The point represented by a nonzero coordinate vector.
    pub fn point(field: FieldSpec, coords: Vector) -> Result<Self, ProjError> {
        if linalg::is_zero_vector(&coords) {
            return Err(ProjError::ZeroVector);
        }
        let n = coords.len() - 1;
        Self::from_rows(field, n, vec![coords])
    }

    pub fn point_from_ints(field: FieldSpec, coords: &[i64]) -> Result<Self, ProjError> {
        Self::point(field, coords.iter().map(|&c| field.from_i64(c)).collect())
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    /// Projective dimension of the ambient space.
    pub fn ambient(&self) -> usize {
        self.n
    }

    /// Projective dimension; -1 for the empty subspace.
    pub fn dim(&self) -> isize {
        self.rows.len() as isize - 1
    }

    pub fn rows(&self) -> &[Vector] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Representative vector of a point.
    pub fn vector(&self) -> Option<&Vector> {
        (self.rows.len() == 1).then(|| &self.rows[0])
    }

    pub fn expect_dim(&self, d: isize) -> Result<(), ProjError> {
        if self.dim() != d {
            return Err(ProjError::WrongDimension {
                expected: d,
                got: self.dim(),
            });
        }
        Ok(())
    }

    fn check_ambient(&self, other: &Subspace) -> Result<(), ProjError> {
        if self.n != other.n || self.field != other.field {
            return Err(ProjError::AmbientMismatch(
                self.n,
                self.field.to_string(),
                other.n,
                other.field.to_string(),
            ));
        }
        Ok(())
    }

    fn check_vector(&self, v: &[Scalar]) -> Result<(), ProjError> {
        if v.len() != self.n + 1 {
            return Err(ProjError::DimensionMismatch {
                expected: self.n + 1,
                got: v.len(),
            });
        }
        Ok(())
    }

    pub fn join(&self, other: &Subspace) -> Result<Subspace, ProjError> {
        span(&[self, other])
    }

    pub fn join_vector(&self, v: &[Scalar]) -> Result<Subspace, ProjError> {
        self.check_vector(v)?;
        let mut rows = self.rows.clone();
        rows.push(v.to_vec());
        Subspace::from_rows(self.field, self.n, rows)
    }

    /// Vectors `y` with `y·x = 0` for all `x` in the subspace (standard dot
    /// product, not the Klein polarity).
    pub fn annihilator(&self) -> Subspace {
        let rows = linalg::nullspace(self.field, &self.rows, self.n + 1);
        Subspace {
            field: self.field,
            n: self.n,
            rows: linalg::rref(rows).0,
        }
    }

    pub fn meet(&self, other: &Subspace) -> Result<Subspace, ProjError> {
        self.check_ambient(other)?;
        let mut dual = self.annihilator().rows;
        dual.extend(other.annihilator().rows);
        let rows = linalg::nullspace(self.field, &dual, self.n + 1);
        Subspace::from_rows(self.field, self.n, rows)
    }

    /// Incidence: `other ⊆ self`.
    pub fn contains(&self, other: &Subspace) -> Result<bool, ProjError> {
        self.check_ambient(other)?;
        if other.rows.len() > self.rows.len() {
            return Ok(false);
        }
        Ok(other.rows.iter().all(|v| self.contains_vector_unchecked(v)))
    }

    pub fn contains_vector(&self, v: &[Scalar]) -> Result<bool, ProjError> {
        self.check_vector(v)?;
        Ok(self.contains_vector_unchecked(v))
    }

    fn contains_vector_unchecked(&self, v: &[Scalar]) -> bool {
        if linalg::is_zero_vector(v) {
            return true;
        }
        // Reduce v against the echelon basis.
        let mut r = v.to_vec();
        for row in &self.rows {
            let pc = row.iter().position(|x| !x.is_zero()).expect("nonzero row");
            if r[pc].is_zero() {
                continue;
            }
            let c = r[pc].clone();
            r = linalg::sub(&r, &linalg::scale(&c, row));
        }
        linalg::is_zero_vector(&r)
    }

    /// Coordinates of `v` with respect to the canonical basis rows.
    pub fn coordinates_of(&self, v: &[Scalar]) -> Option<Vector> {
        linalg::solve_in_span(self.field, &self.rows, v)
    }

    /// Random vector of the subspace (random combination of basis rows).
    pub fn random_vector<R: Rng + ?Sized>(&self, rng: &mut R, height: i64) -> Vector {
        loop {
            let mut v = vec![self.field.zero(); self.n + 1];
            for row in &self.rows {
                let c = self.field.random_scalar(rng, height);
                v = linalg::add(&v, &linalg::scale(&c, row));
            }
            if !linalg::is_zero_vector(&v) {
                return v;
            }
        }
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R, height: i64) -> Subspace {
        let v = self.random_vector(rng, height);
        Subspace::point(self.field, v).expect("nonzero")
    }

    /// Random `d`-dimensional subspace inside `self` (requires d <= dim).
    pub fn random_subspace<R: Rng + ?Sized>(&self, rng: &mut R, d: isize, height: i64) -> Subspace {
        assert!(d <= self.dim());
        loop {
            let rows: Vec<Vector> = (0..=d).map(|_| self.random_vector(rng, height)).collect();
            let s = Subspace::from_rows(self.field, self.n, rows).expect("same ambient");
            if s.dim() == d {
                return s;
            }
        }
    }

    pub fn to_json(&self) -> SubspaceJson {
        SubspaceJson {
            n: self.n,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(ToString::to_string).collect())
                .collect(),
        }
    }

    pub fn from_json(field: FieldSpec, json: &SubspaceJson) -> Result<Self, ProjError> {
        let rows = json
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|lit| field.parse_scalar(lit))
                    .collect::<Result<Vector, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Subspace::from_rows(field, json.n, rows)
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(PG({}), d={}, {:?})", self.n, self.dim(), self.rows)
    }
}

/// Wire form `{"n": 5, "rows": [[scalar literals]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceJson {
    pub n: usize,
    pub rows: Vec<Vec<String>>,
}

/// Smallest subspace containing all inputs.
pub fn span(parts: &[&Subspace]) -> Result<Subspace, ProjError> {
    let first = parts.first().expect("span of nothing");
    let mut rows = Vec::new();
    for p in parts {
        first.check_ambient(p)?;
        rows.extend(p.rows.iter().cloned());
    }
    Subspace::from_rows(first.field, first.n, rows)
}

/// Incidence predicate `p ⊆ s`.
pub fn incident(p: &Subspace, s: &Subspace) -> Result<bool, ProjError> {
    s.contains(p)
}

/// A point of a line given by homogeneous parameters `[t0 : t1]` with
/// respect to the line's canonical basis `(b0, b1)`.
#[derive(Debug, Clone)]
pub struct LineParam {
    pub line: Subspace,
    pub t0: Scalar,
    pub t1: Scalar,
}

impl LineParam {
    pub fn new(line: Subspace, t0: Scalar, t1: Scalar) -> Result<Self, ProjError> {
        line.expect_dim(1)?;
        if t0.is_zero() && t1.is_zero() {
            return Err(ProjError::ZeroParameter);
        }
        Ok(Self { line, t0, t1 })
    }

    /// Same projective parameter, i.e. `t0·u1 = t1·u0`.
    pub fn same_parameter(&self, t0: &Scalar, t1: &Scalar) -> bool {
        &self.t0 * t1 == &self.t1 * t0
    }

    /// Parameter of a point on `line`, normalised to `[1 : c]` or `[0 : 1]`.
    pub fn of_point(line: &Subspace, p: &Subspace) -> Result<Self, ProjError> {
        line.expect_dim(1)?;
        p.expect_dim(0)?;
        let coeffs = line
            .coordinates_of(p.vector().expect("point"))
            .ok_or(ProjError::WrongDimension {
                expected: 0,
                got: -1,
            })?;
        let (t0, t1) = if coeffs[0].is_zero() {
            (line.field().zero(), line.field().one())
        } else {
            let inv = coeffs[0].inv();
            (line.field().one(), &coeffs[1] * &inv)
        };
        LineParam::new(line.clone(), t0, t1)
    }
}

pub fn point_at(lp: &LineParam) -> Result<Subspace, ProjError> {
    if lp.t0.is_zero() && lp.t1.is_zero() {
        return Err(ProjError::ZeroParameter);
    }
    let b = lp.line.rows();
    let v = linalg::combine(&lp.t0, &b[0], &lp.t1, &b[1]);
    Subspace::point(lp.line.field(), v)
}

/// Iterator over all `d`-dimensional subspaces of PG(n, q), q ∈ {2, 3},
/// produced directly in reduced row echelon form.
pub struct SubspaceEnumerator {
    field: FieldSpec,
    q: u32,
    n: usize,
    k: usize,
    pivots: Option<Vec<usize>>,
    free: Vec<(usize, usize)>,
    counter: Vec<u32>,
    fresh: bool,
}

pub fn enumerate_subspaces(field: FieldSpec, n: usize, d: isize) -> Result<SubspaceEnumerator, ProjError> {
    let q = match field {
        FieldSpec::PrimeField { p } if p == 2 || p == 3 => p,
        _ => return Err(ProjError::InfiniteField(field.to_string())),
    };
    if n > 5 || !(-1..=3).contains(&d) || d > n as isize {
        return Err(ProjError::EnumerationTooLarge);
    }
    let k = (d + 1) as usize;
    let pivots: Vec<usize> = (0..k).collect();
    let mut e = SubspaceEnumerator {
        field,
        q,
        n,
        k,
        pivots: Some(pivots),
        free: Vec::new(),
        counter: Vec::new(),
        fresh: true,
    };
    e.reset_free();
    Ok(e)
}

impl SubspaceEnumerator {
    fn reset_free(&mut self) {
        let Some(piv) = &self.pivots else { return };
        self.free = piv
            .iter()
            .enumerate()
            .flat_map(|(r, &pc)| {
                (pc + 1..=self.n)
                    .filter(|c| !piv.contains(c))
                    .map(move |c| (r, c))
            })
            .collect();
        self.counter = vec![0; self.free.len()];
        self.fresh = true;
    }

    fn next_pivots(&mut self) {
        let cols = self.n + 1;
        let Some(piv) = &mut self.pivots else { return };
        let k = self.k;
        let mut i = k;
        loop {
            if i == 0 {
                self.pivots = None;
                return;
            }
            i -= 1;
            if piv[i] < cols - k + i {
                piv[i] += 1;
                for j in i + 1..k {
                    piv[j] = piv[j - 1] + 1;
                }
                break;
            }
        }
        self.reset_free();
    }

    fn advance_counter(&mut self) -> bool {
        for c in self.counter.iter_mut() {
            *c += 1;
            if *c < self.q {
                return true;
            }
            *c = 0;
        }
        false
    }

    fn build(&self) -> Subspace {
        let piv = self.pivots.as_ref().expect("active");
        let mut rows: Vec<Vector> = piv
            .iter()
            .map(|&pc| linalg::unit_vector(self.field, self.n + 1, pc))
            .collect();
        for (&(r, c), &v) in self.free.iter().zip(&self.counter) {
            rows[r][c] = self.field.from_i64(v as i64);
        }
        Subspace {
            field: self.field,
            n: self.n,
            rows,
        }
    }
}

impl Iterator for SubspaceEnumerator {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        self.pivots.as_ref()?;
        if self.fresh {
            self.fresh = false;
        } else if !self.advance_counter() {
            self.next_pivots();
            self.pivots.as_ref()?;
            self.fresh = false;
        }
        Some(self.build())
    }
}

/// Gaussian binomial coefficient [n choose k]_q.
pub fn gaussian_binomial(n: u32, k: u32, q: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..k {
        num *= q.pow(n - i) - 1;
        den *= q.pow(i + 1) - 1;
    }
    num / den
}
