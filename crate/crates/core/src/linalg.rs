//! Dense exact linear algebra on rows of [`Scalar`]s.

use crate::field::{FieldSpec, Scalar};

pub type Vector = Vec<Scalar>;

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = a[0].field().zero();
    for (x, y) in a.iter().zip(b) {
        if x.is_zero() || y.is_zero() {
            continue;
        }
        acc = acc + x * y;
    }
    acc
}

pub fn scale(c: &Scalar, v: &[Scalar]) -> Vector {
    v.iter().map(|x| c * x).collect()
}

pub fn add(a: &[Scalar], b: &[Scalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Scalar], b: &[Scalar]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a·u + b·v`.
pub fn combine(a: &Scalar, u: &[Scalar], b: &Scalar, v: &[Scalar]) -> Vector {
    u.iter().zip(v).map(|(x, y)| a * x + b * y).collect()
}

pub fn is_zero_vector(v: &[Scalar]) -> bool {
    v.iter().all(Scalar::is_zero)
}

pub fn unit_vector(field: FieldSpec, len: usize, i: usize) -> Vector {
    (0..len)
        .map(|j| if i == j { field.one() } else { field.zero() })
        .collect()
}

/// Scale so that the first nonzero coordinate is 1.
pub fn normalize_projective(v: &[Scalar]) -> Vector {
    match v.iter().find(|x| !x.is_zero()) {
        Some(lead) => {
            let inv = lead.inv();
            scale(&inv, v)
        }
        None => v.to_vec(),
    }
}

/// True iff `u` and `v` are nonzero and proportional.
pub fn proportional(u: &[Scalar], v: &[Scalar]) -> bool {
    if is_zero_vector(u) || is_zero_vector(v) {
        return false;
    }
    normalize_projective(u) == normalize_projective(v)
}

/// Reduced row echelon form. Returns the nonzero rows and their pivot
/// columns. Pivots within a column are chosen by smallest
/// [`Scalar::weight`], which keeps GF(2)(s,t) expressions small; the reduced
/// form itself does not depend on that choice.
pub fn rref(mut rows: Vec<Vector>) -> (Vec<Vector>, Vec<usize>) {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let best = (r..rows.len())
            .filter(|&i| !rows[i][c].is_zero())
            .min_by_key(|&i| rows[i][c].weight());
        let Some(best) = best else { continue };
        rows.swap(r, best);
        let inv = rows[r][c].inv();
        let pivot_row: Vector = rows[r].iter().map(|x| x * &inv).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x = &*x - &factor * p;
                }
            }
        }
        rows[r] = pivot_row;
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

pub fn rank(rows: &[Vector]) -> usize {
    rref(rows.to_vec()).1.len()
}

/// Basis of `{x : row·x = 0 for every row}` in `field^ncols`.
pub fn nullspace(field: FieldSpec, rows: &[Vector], ncols: usize) -> Vec<Vector> {
    let (reduced, pivots) = rref(rows.to_vec());
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![field.zero(); ncols];
            v[f] = field.one();
            for (row, &pc) in reduced.iter().zip(&pivots) {
                v[pc] = -&row[f];
            }
            v
        })
        .collect()
}

/// Coefficients expressing `target` in the span of the independent `basis`
/// rows, if it lies there.
pub fn solve_in_span(field: FieldSpec, basis: &[Vector], target: &[Scalar]) -> Option<Vector> {
    let k = basis.len();
    let n = target.len();
    // Columns are basis vectors; augmented with the target.
    let rows: Vec<Vector> = (0..n)
        .map(|i| {
            let mut row: Vector = basis.iter().map(|b| b[i].clone()).collect();
            row.push(target[i].clone());
            row
        })
        .collect();
    if rows.is_empty() {
        return Some(Vec::new());
    }
    let (reduced, pivots) = rref(rows);
    if pivots.contains(&k) {
        return None;
    }
    let mut coeffs = vec![field.zero(); k];
    for (row, &pc) in reduced.iter().zip(&pivots) {
        coeffs[pc] = row[k].clone();
    }
    Some(coeffs)
}

/// Matrix product of row vectors `m` (r×n) with a square matrix `g` (n×n).
pub fn mat_mul(m: &[Vector], g: &[Vector]) -> Vec<Vector> {
    m.iter()
        .map(|row| {
            (0..g[0].len())
                .map(|j| {
                    let col: Vector = g.iter().map(|gr| gr[j].clone()).collect();
                    dot(row, &col)
                })
                .collect()
        })
        .collect()
}
