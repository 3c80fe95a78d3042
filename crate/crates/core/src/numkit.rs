//! Minimal dense linear algebra: vectors, small row-major matrices,
//! rank-revealing QR, minimum-norm least squares, and orthogonal projectors.
//!
//! Fixture dimensions stay below ~100, so everything is dense and direct.
//! Numerical rank is decided at `RANK_TOL` relative to the largest pivot.

// index loops mirror the factorization formulas
#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Relative tolerance for numerical-rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Dense vector of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Panics on non-finite entries; untrusted input goes through [`Vector::try_new`].
    pub fn new(entries: Vec<f64>) -> Self {
        assert!(
            entries.iter().all(|v| v.is_finite()),
            "vector entries must be finite"
        );
        Vector(entries)
    }

    pub fn try_new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().all(|v| v.is_finite()) {
            Ok(Vector(entries))
        } else {
            Err(Error::NonFinite("vector construction"))
        }
    }

    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Vector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn entries_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * s).collect())
    }

    /// self + s * other
    pub fn axpy(&self, s: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    pub fn normalized(&self) -> Option<Vector> {
        let n = self.norm();
        if n > 0.0 {
            Some(self.scale(1.0 / n))
        } else {
            None
        }
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.len() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                got: self.len(),
            })
        }
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, s: f64) -> Vector {
        self.scale(s)
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(rows * cols, data.len(), "rows*cols must match entry count");
        assert!(data.iter().all(|v| v.is_finite()), "entries must be finite");
        DenseMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vector]) -> Self {
        assert!(!rows.is_empty());
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols);
            data.extend_from_slice(r.entries());
        }
        DenseMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// n x k matrix whose columns are the given vectors. `n` must be passed
    /// explicitly so zero-column matrices keep their row count.
    pub fn from_columns(n: usize, cols: &[Vector]) -> Self {
        let mut m = Self::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), n);
            for i in 0..n {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vector {
        Vector((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matvec(&self, x: &Vector) -> Vector {
        debug_assert_eq!(self.cols, x.len());
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            out[i] = row.iter().zip(x.entries()).map(|(a, b)| a * b).sum();
        }
        Vector(out)
    }

    /// A^T x without materializing the transpose.
    pub fn matvec_t(&self, x: &Vector) -> Vector {
        debug_assert_eq!(self.rows, x.len());
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for j in 0..self.cols {
                out[j] += self[(i, j)] * xi;
            }
        }
        Vector(out)
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Column-pivoted Householder factorization A P = Q R.
pub struct PivotedQr {
    /// Full square orthogonal factor (m x m).
    pub q: DenseMatrix,
    /// Upper-trapezoidal factor (m x n) of the permuted matrix.
    pub r: DenseMatrix,
    /// Column permutation: factored column `k` is original column `perm[k]`.
    pub perm: Vec<usize>,
    /// Numerical rank at `RANK_TOL` relative to the largest pivot.
    pub rank: usize,
}

/// Householder QR with column pivoting.
pub fn pivoted_qr(a: &DenseMatrix) -> PivotedQr {
    let (m, n) = (a.rows(), a.cols());
    let mut r = a.clone();
    let mut q = DenseMatrix::identity(m);
    let mut perm: Vec<usize> = (0..n).collect();

    let steps = m.min(n);
    if steps == 0 {
        return PivotedQr {
            q,
            r,
            perm,
            rank: 0,
        };
    }
    for k in 0..steps {
        // pivot: bring the column with the largest remaining norm to position k
        let mut best = k;
        let mut best_norm = 0.0;
        for j in k..n {
            let norm2: f64 = (k..m).map(|i| r[(i, j)] * r[(i, j)]).sum();
            if norm2 > best_norm {
                best_norm = norm2;
                best = j;
            }
        }
        if best != k {
            for i in 0..m {
                let tmp = r[(i, k)];
                r[(i, k)] = r[(i, best)];
                r[(i, best)] = tmp;
            }
            perm.swap(k, best);
        }
        let xnorm = best_norm.sqrt();
        if xnorm == 0.0 {
            break;
        }
        // Householder vector for column k below the diagonal
        let mut v: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        let alpha = if v[0] >= 0.0 { -xnorm } else { xnorm };
        v[0] -= alpha;
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= vnorm;
        }
        // apply H = I - 2 v v^T to the trailing block of R
        for j in k..n {
            let dot: f64 = (k..m).map(|i| v[i - k] * r[(i, j)]).sum();
            for i in k..m {
                r[(i, j)] -= 2.0 * dot * v[i - k];
            }
        }
        // clean the annihilated part
        r[(k, k)] = alpha;
        for i in k + 1..m {
            r[(i, k)] = 0.0;
        }
        // accumulate Q <- Q H (apply H to Q's rows from the right)
        for i in 0..m {
            let dot: f64 = (k..m).map(|j| q[(i, j)] * v[j - k]).sum();
            for j in k..m {
                q[(i, j)] -= 2.0 * dot * v[j - k];
            }
        }
    }

    let pivot0 = r[(0, 0)].abs();
    let mut rank = 0;
    for k in 0..steps {
        if r[(k, k)].abs() > RANK_TOL * pivot0 && r[(k, k)] != 0.0 {
            rank = k + 1;
        } else {
            break;
        }
    }
    PivotedQr { q, r, perm, rank }
}

/// Minimum-norm least-squares solution of `A x ~ b`.
///
/// Rank-revealing: pivot magnitudes below `RANK_TOL` relative to the largest
/// pivot are truncated, so rank-deficient systems get the pseudoinverse
/// solution. On square nonsingular systems this is the exact solve.
pub fn least_squares_solve(a: &DenseMatrix, b: &Vector) -> Result<Vector> {
    b.check_dim(a.rows())?;
    let n = a.cols();
    let fac = pivoted_qr(a);
    let r = fac.rank;
    if r == 0 {
        // A ~ 0: the minimum-norm least-squares solution is the zero vector
        return Ok(Vector::zeros(n));
    }
    let c = fac.q.matvec_t(b);

    // R1 = leading r x n block; min-norm y solves R1 y = c1 via the thin QR
    // of R1^T = V S, giving y = V S^{-T} c1.
    let mut r1t = DenseMatrix::zeros(n, r);
    for i in 0..r {
        for j in 0..n {
            r1t[(j, i)] = fac.r[(i, j)];
        }
    }
    let inner = pivoted_qr(&r1t);
    if inner.rank < r {
        return Err(Error::RankDeficient {
            rank: inner.rank,
            required: r,
        });
    }
    // undo the inner pivoting: R1^T P2 = V S  =>  columns of R1^T are V S P2^T
    // Solve S^T w' = P2^T c1, then w = w' reordered back.
    let mut c1p = vec![0.0; r];
    for k in 0..r {
        c1p[k] = c[inner.perm[k]];
    }
    // forward substitution with S^T (S upper triangular r x r)
    let mut w = vec![0.0; r];
    for i in 0..r {
        let mut s = c1p[i];
        for j in 0..i {
            s -= inner.r[(j, i)] * w[j];
        }
        let d = inner.r[(i, i)];
        if d.abs() == 0.0 {
            return Err(Error::RankDeficient {
                rank: i,
                required: r,
            });
        }
        w[i] = s / d;
    }
    // y = V w
    let mut y = vec![0.0; n];
    for j in 0..n {
        let mut s = 0.0;
        for k in 0..r {
            s += inner.q[(j, k)] * w[k];
        }
        y[j] = s;
    }
    // undo the outer column permutation
    let mut x = vec![0.0; n];
    for k in 0..n {
        x[fac.perm[k]] = y[k];
    }
    Vector::try_new(x)
}

/// Solve `A x = b` requiring full numerical rank (square or overdetermined).
pub fn solve_full_rank(a: &DenseMatrix, b: &Vector) -> Result<Vector> {
    let fac = pivoted_qr(a);
    let need = a.rows().min(a.cols());
    if fac.rank < need {
        return Err(Error::RankDeficient {
            rank: fac.rank,
            required: need,
        });
    }
    least_squares_solve(a, b)
}

/// Orthonormal basis of range(A) and of its orthogonal complement in R^m.
pub fn range_and_complement(a: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let m = a.rows();
    if a.cols() == 0 {
        return (DenseMatrix::zeros(m, 0), DenseMatrix::identity(m));
    }
    let fac = pivoted_qr(a);
    let r = fac.rank;
    let mut range = DenseMatrix::zeros(m, r);
    let mut comp = DenseMatrix::zeros(m, m - r);
    for i in 0..m {
        for j in 0..r {
            range[(i, j)] = fac.q[(i, j)];
        }
        for j in r..m {
            comp[(i, j - r)] = fac.q[(i, j)];
        }
    }
    (range, comp)
}

/// Projector onto the null space of B (the orthogonal complement of its row
/// space): P = I - B^T (B B^T)^{-1} B, computed as I - V V^T from the thin QR
/// of B^T. Requires full row rank.
pub fn orthogonal_projector(b: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, n) = (b.rows(), b.cols());
    let bt = b.transpose();
    let fac = pivoted_qr(&bt);
    if fac.rank < m {
        return Err(Error::RankDeficient {
            rank: fac.rank,
            required: m,
        });
    }
    let mut p = DenseMatrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..m {
                s += fac.q[(i, k)] * fac.q[(j, k)];
            }
            p[(i, j)] -= s;
        }
    }
    Ok(p)
}

/// Cholesky factor L (lower) of a symmetric positive-definite matrix.
pub fn cholesky(a: &DenseMatrix) -> Option<DenseMatrix> {
    let n = a.rows();
    if a.cols() != n {
        return None;
    }
    let mut l = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[(i, i)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Some(l)
}

/// Least-squares slope of a straight-line fit through (x, y) points.
/// Used for empirical order-of-convergence estimates on log-log data.
pub fn fit_line_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Solve A x = b for symmetric positive-definite A via Cholesky.
pub fn solve_spd(a: &DenseMatrix, b: &Vector) -> Option<Vector> {
    let l = cholesky(a)?;
    let n = a.rows();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Some(Vector::new(x))
}
