//! Dense real-matrix kernel.
//!
//! Everything here is sized for desk-scale networks: matrices of order up to
//! a few dozen, and Lyapunov systems with up to about 900 unknowns. No general
//! nonsymmetric eigensolver is provided; positive stability is certified
//! through the Lyapunov criterion instead ([`positive_stable_lyapunov_test`]).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Pivot magnitude (relative to `max(1, max|a_ij|)`) below which a matrix is
/// treated as singular.
pub const EPS_PIVOT: f64 = 1e-12;
/// Solve residual bound factor: `|Ax - b|_inf <= EPS_SOLVE * (1 + |b|_inf)`.
pub const EPS_SOLVE: f64 = 1e-9;
/// Admissible asymmetry of inputs to the symmetric eigensolver.
pub const EPS_SYM: f64 = 1e-9;
/// Jacobi stopping threshold on the off-diagonal Frobenius norm.
pub const EPS_JACOBI: f64 = 1e-12;
/// Smallest eigenvalue a positive definite matrix must exceed.
pub const EPS_PD: f64 = 1e-10;
/// Residual bound for Lyapunov solutions.
pub const EPS_LYAP: f64 = 1e-8;
/// Residual bound for normalized left null vectors.
pub const EPS_NULL: f64 = 1e-8;
/// Cap on cyclic Jacobi sweeps.
pub const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is singular (pivot {pivot} below threshold)")]
    SingularMatrix { pivot: usize },
    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps")]
    ConvergenceFailure { sweeps: usize },
    #[error("non-finite entry encountered")]
    NonFinite,
    #[error("left null space is not one-dimensional (residual {residual:e})")]
    NullSpace { residual: f64 },
}

/// Row-major dense matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
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

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row slices.
    ///
    /// Panics if the rows are ragged.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// A single column vector.
    pub fn column(v: &[f64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// Assembles `[[a, b], [c, d]]` from four blocks with compatible shapes.
    pub fn from_blocks(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Self {
        assert_eq!(a.rows, b.rows);
        assert_eq!(c.rows, d.rows);
        assert_eq!(a.cols, c.cols);
        assert_eq!(b.cols, d.cols);
        let mut m = Self::zeros(a.rows + c.rows, a.cols + b.cols);
        m.set_block(0, 0, a);
        m.set_block(0, a.cols, b);
        m.set_block(a.rows, 0, c);
        m.set_block(a.rows, a.cols, d);
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `v^T A` as a vector.
    pub fn vec_mul(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "vector-matrix dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += vi * a;
            }
        }
        out
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        let mut b = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                b[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        b
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Induced infinity norm (largest absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    /// Largest entry of `|A - A^T|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn symmetrized(&self) -> Matrix {
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Entrywise comparison within an absolute tolerance.
    pub fn approx_eq(&self, other: &Matrix, tol: f64) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        self.scale(-1.0)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Infinity norm of a vector.
pub fn vec_norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn require_square(a: &Matrix) -> Result<usize, LinalgError> {
    if a.is_square() {
        Ok(a.rows)
    } else {
        Err(LinalgError::NotSquare {
            rows: a.rows,
            cols: a.cols,
        })
    }
}

fn pivot_floor(a: &Matrix) -> f64 {
    EPS_PIVOT * a.max_abs().max(1.0)
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    // unit-lower L below the diagonal, U on and above
    factors: Matrix,
    perm: Vec<usize>,
    parity: f64,
}

enum Elimination {
    Complete(Lu),
    Singular(usize),
}

fn eliminate(a: &Matrix) -> Result<Elimination, LinalgError> {
    let n = require_square(a)?;
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let floor = pivot_floor(a);
    let mut f = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut parity = 1.0;
    for col in 0..n {
        let (p, mag) = (col..n)
            .map(|r| (r, f[(r, col)].abs()))
            .fold(
                (col, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if mag <= floor {
            return Ok(Elimination::Singular(col));
        }
        if p != col {
            for j in 0..n {
                f.data.swap(p * n + j, col * n + j);
            }
            perm.swap(p, col);
            parity = -parity;
        }
        let pivot = f[(col, col)];
        for r in (col + 1)..n {
            let factor = f[(r, col)] / pivot;
            f[(r, col)] = factor;
            if factor != 0.0 {
                for j in (col + 1)..n {
                    let u = f[(col, j)];
                    f[(r, j)] -= factor * u;
                }
            }
        }
    }
    Ok(Elimination::Complete(Lu {
        n,
        factors: f,
        perm,
        parity,
    }))
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Self, LinalgError> {
        match eliminate(a)? {
            Elimination::Complete(lu) => Ok(lu),
            Elimination::Singular(pivot) => Err(LinalgError::SingularMatrix { pivot }),
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if b.len() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                found: b.len(),
            });
        }
        let n = self.n;
        let f = &self.factors;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= f[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= f[(i, j)] * x[j];
            }
            x[i] = s / f[(i, i)];
        }
        Ok(x)
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Result<Matrix, LinalgError> {
        if b.rows != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                found: b.rows,
            });
        }
        let mut out = Matrix::zeros(b.rows, b.cols);
        let mut col = vec![0.0; b.rows];
        for j in 0..b.cols {
            for (i, c) in col.iter_mut().enumerate() {
                *c = b[(i, j)];
            }
            let x = self.solve(&col)?;
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }

    pub fn determinant(&self) -> f64 {
        self.factors.diagonal().iter().product::<f64>() * self.parity
    }
}

/// Solves `A x = b` with partial pivoting.
pub fn lu_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    Lu::factor(a)?.solve(b)
}

pub fn inverse(a: &Matrix) -> Result<Matrix, LinalgError> {
    let n = require_square(a)?;
    Lu::factor(a)?.solve_matrix(&Matrix::identity(n))
}

/// Determinant via LU with pivot sign tracking. Returns exactly `0.0` when a
/// pivot falls below the singularity threshold.
///
/// Panics on non-square input.
pub fn determinant(a: &Matrix) -> f64 {
    if a.rows == 0 {
        return 1.0;
    }
    match eliminate(a) {
        Ok(Elimination::Complete(lu)) => lu.determinant(),
        Ok(Elimination::Singular(_)) => 0.0,
        Err(LinalgError::NonFinite) => f64::NAN,
        Err(e) => panic!("determinant: {e}"),
    }
}

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
pub fn symmetric_eigenvalues(s: &Matrix) -> Result<Vec<f64>, LinalgError> {
    let n = require_square(s)?;
    if !s.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let asymmetry = s.asymmetry();
    if asymmetry > EPS_SYM * s.max_abs().max(1.0) {
        return Err(LinalgError::NotSymmetric { asymmetry });
    }
    let mut a = s.symmetrized();
    let target = EPS_JACOBI * a.norm_frobenius().max(1.0);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > target {
        return Err(LinalgError::ConvergenceFailure { sweeps: MAX_SWEEPS });
    }
    let mut eig = a.diagonal();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let mut s = 0.0;
    for i in 0..a.rows {
        for j in (i + 1)..a.cols {
            s += 2.0 * a[(i, j)] * a[(i, j)];
        }
    }
    libm::sqrt(s)
}

// One Jacobi rotation annihilating a[p][q]; a <- J^T a J.
fn rotate(a: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.rows;
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let t = 1.0 / (theta.abs() + libm::sqrt(theta * theta + 1.0));
        if theta < 0.0 {
            -t
        } else {
            t
        }
    };
    let c = 1.0 / libm::sqrt(t * t + 1.0);
    let s = t * c;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
}

pub fn lambda_max(s: &Matrix) -> Result<f64, LinalgError> {
    symmetric_eigenvalues(s)?
        .last()
        .copied()
        .ok_or(LinalgError::DimensionMismatch {
            expected: 1,
            found: 0,
        })
}

pub fn lambda_min(s: &Matrix) -> Result<f64, LinalgError> {
    symmetric_eigenvalues(s)?
        .first()
        .copied()
        .ok_or(LinalgError::DimensionMismatch {
            expected: 1,
            found: 0,
        })
}

pub fn is_positive_definite(s: &Matrix) -> bool {
    matches!(lambda_min(s), Ok(l) if l > EPS_PD)
}

/// Solves `A^T X + X A = I` through the Kronecker-vectorized system
/// `(I ⊗ A^T + A^T ⊗ I) vec(X) = vec(I)`, followed by one step of iterative
/// refinement. The result is symmetrized.
pub fn lyapunov_solve(a: &Matrix) -> Result<Matrix, LinalgError> {
    let n = require_square(a)?;
    let size = n * n;
    // unknown X[p][q] lives at p * n + q; equation (i, j) reads
    //   sum_m A[m][i] X[m][j] + sum_m X[i][m] A[m][j] = delta_ij
    let mut k = Matrix::zeros(size, size);
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for m in 0..n {
                k[(row, m * n + j)] += a[(m, i)];
                k[(row, i * n + m)] += a[(m, j)];
            }
        }
    }
    let rhs: Vec<f64> = (0..size)
        .map(|idx| if idx / n == idx % n { 1.0 } else { 0.0 })
        .collect();
    let lu = Lu::factor(&k)?;
    let mut x = lu.solve(&rhs)?;
    let kx = k.mul_vec(&x);
    let r: Vec<f64> = rhs.iter().zip(&kx).map(|(b, v)| b - v).collect();
    let dx = lu.solve(&r)?;
    for (xi, d) in x.iter_mut().zip(dx) {
        *xi += d;
    }
    let sol = Matrix::from_vec(n, n, x)?;
    Ok(sol.symmetrized())
}

/// `|A^T X + X A - I|_inf`.
pub fn lyapunov_residual(a: &Matrix, x: &Matrix) -> f64 {
    let lhs = &(&a.transpose() * x) + &(x * a);
    (&lhs - &Matrix::identity(a.rows)).norm_inf()
}

/// Left null vector `nu` of `l`, normalized so that its entries sum to one.
///
/// Solves `L^T nu = 0` with the last equation replaced by `1^T nu = 1`.
pub fn left_null_unit(l: &Matrix) -> Result<Vec<f64>, LinalgError> {
    let n = require_square(l)?;
    if n == 0 {
        return Err(LinalgError::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    let mut m = l.transpose();
    for j in 0..n {
        m[(n - 1, j)] = 1.0;
    }
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;
    let mut nu = lu_solve(&m, &rhs)?;
    let total: f64 = nu.iter().sum();
    if total.abs() <= f64::EPSILON {
        return Err(LinalgError::NullSpace {
            residual: f64::INFINITY,
        });
    }
    for v in nu.iter_mut() {
        *v /= total;
    }
    let residual = vec_norm_inf(&l.vec_mul(&nu));
    if residual > EPS_NULL * l.max_abs().max(1.0) {
        return Err(LinalgError::NullSpace { residual });
    }
    Ok(nu)
}

/// `A` is positive stable iff `A^T X + X A = I` has a positive definite
/// solution. Solver failure counts as "not positive stable".
pub fn positive_stable_lyapunov_test(a: &Matrix) -> bool {
    match lyapunov_solve(a) {
        Ok(x) => is_positive_definite(&x),
        Err(_) => false,
    }
}
