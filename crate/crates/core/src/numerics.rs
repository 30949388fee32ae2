//! Dense real vectors and matrices, plus the scalar analysis kernels used
//! by the rest of the crate: norms, the matrix exponential, spectral radius
//! of nonnegative matrices, symmetric eigenvalues and a fixed-step RK4.
//!
//! Matrices are small (state dimension plus a handful), so everything is
//! row-major `Vec<f64>` with no blocking or SIMD.

use std::fmt;
use std::ops::{Add, Deref, DerefMut, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Real column vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        Self(vec![value; dim])
    }

    /// `i`-th canonical basis vector of dimension `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Infinity norm: `max_i |v_i|`.
    pub fn inf_norm(&self) -> f64 {
        inf_norm_vec(self)
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|x| x * s).collect())
    }

    pub fn abs(&self) -> Vector {
        Vector(self.0.iter().map(|x| x.abs()).collect())
    }

    /// `self + s * other`, used heavily by the integrator.
    pub fn axpy(&self, s: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl From<&[f64]> for Vector {
    fn from(v: &[f64]) -> Self {
        Self(v.to_vec())
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(v: [f64; N]) -> Self {
        Self(v.to_vec())
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), rhs.dim());
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
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

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                context: "matrix entries",
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("matrix entry"));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a list of equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::Dimension {
                context: "matrix row length",
                expected: c,
                found: bad.len(),
            });
        }
        Self::from_row_major(r, c, rows.concat())
    }

    /// Builds an `n x 1` matrix from a column.
    pub fn column(v: &Vector) -> Self {
        Self {
            rows: v.dim(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn col(&self, j: usize) -> Vector {
        Vector((0..self.rows).map(|i| self[(i, j)]).collect())
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
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// Entrywise absolute value.
    pub fn abs(&self) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.abs()).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn try_mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension {
                context: "matrix product",
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn try_mul_vec(&self, v: &[f64]) -> Result<Vector> {
        if self.cols != v.len() {
            return Err(Error::Dimension {
                context: "matrix-vector product",
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(self.mul_vec_unchecked(v))
    }

    fn mul_vec_unchecked(&self, v: &[f64]) -> Vector {
        Vector(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    pub fn try_add(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Shape {
                context: "matrix sum",
                expected: (self.rows, self.cols),
                found: (rhs.rows, rhs.cols),
            });
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// `(M + Mᵀ)/2`.
    pub fn symmetrized(&self) -> Result<Matrix> {
        ensure_square(self)?;
        let t = self.transpose();
        Ok(self.try_add(&t)?.scale(0.5))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    /// Assembles `[[a, b], [c, d]]` from four blocks with compatible shapes.
    pub fn block2x2(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Result<Matrix> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(Error::Shape {
                context: "block matrix",
                expected: (a.rows, a.cols),
                found: (d.rows, d.cols),
            });
        }
        let rows = a.rows + c.rows;
        let cols = a.cols + b.cols;
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = match (i < a.rows, j < a.cols) {
                    (true, true) => a[(i, j)],
                    (true, false) => b[(i, j - a.cols)],
                    (false, true) => c[(i - a.rows, j)],
                    (false, false) => d[(i - a.rows, j - a.cols)],
                };
            }
        }
        Ok(m)
    }

    /// Solves `self * X = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        ensure_square(self)?;
        if rhs.rows != self.rows {
            return Err(Error::Dimension {
                context: "linear solve right-hand side",
                expected: self.rows,
                found: rhs.rows,
            });
        }
        let n = self.rows;
        let m = rhs.cols;
        let mut a = self.clone();
        let mut b = rhs.clone();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()))
                .unwrap_or(col);
            if a[(pivot, col)].abs() <= 1e-14 * scale {
                return Err(Error::Singular);
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                }
                for j in 0..m {
                    b.data.swap(pivot * m + j, col * m + j);
                }
            }
            for i in col + 1..n {
                let f = a[(i, col)] / a[(col, col)];
                if f == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[(i, j)] -= f * a[(col, j)];
                }
                for j in 0..m {
                    b[(i, j)] -= f * b[(col, j)];
                }
            }
        }
        let mut x = Matrix::zeros(n, m);
        for j in 0..m {
            for i in (0..n).rev() {
                let s: f64 = (i + 1..n).map(|k| a[(i, k)] * x[(k, j)]).sum();
                x[(i, j)] = (b[(i, j)] - s) / a[(i, i)];
            }
        }
        Ok(x)
    }

    /// Numerical rank by Gaussian elimination with full pivoting.
    pub fn rank(&self, tol: f64) -> usize {
        let mut a = self.clone();
        let (r, c) = (a.rows, a.cols);
        let mut rank = 0;
        for col in 0..c {
            if rank == r {
                break;
            }
            let pivot = (rank..r).max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()));
            let Some(p) = pivot else { break };
            if a[(p, col)].abs() <= tol {
                continue;
            }
            for j in 0..c {
                a.data.swap(p * c + j, rank * c + j);
            }
            for i in rank + 1..r {
                let f = a[(i, col)] / a[(rank, col)];
                for j in col..c {
                    a[(i, j)] -= f * a[(rank, j)];
                }
            }
            rank += 1;
        }
        rank
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Panics on shape mismatch; use [`Matrix::try_mul`] for fallible products.
impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Mul<&Vector> for &Matrix {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        assert_eq!(self.cols, rhs.dim(), "matrix-vector shape mismatch");
        self.mul_vec_unchecked(rhs)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", Vector::from(self.row(i)))?;
        }
        write!(f, "]")
    }
}

fn ensure_square(m: &Matrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        })
    }
}

/// `max_i |v_i|`; zero for an empty slice.
pub fn inf_norm_vec(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximum absolute column sum. This is the column-sum definition; the
/// bound computations use [`induced_inf_norm`] instead.
pub fn max_column_sum_norm(m: &Matrix) -> Result<f64> {
    ensure_square(m)?;
    Ok((0..m.cols)
        .map(|j| (0..m.rows).map(|i| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max))
}

/// Maximum absolute row sum, the operator norm induced by the vector
/// infinity norm. Defined for rectangular matrices as well.
pub fn induced_inf_norm(m: &Matrix) -> f64 {
    (0..m.rows)
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential `e^{M t}` by scaling and squaring a truncated Taylor
/// series. The scaling exponent brings `|M t|` down to at most 0.5.
pub fn mat_exp(m: &Matrix, t: f64) -> Result<Matrix> {
    ensure_square(m)?;
    if !t.is_finite() {
        return Err(Error::NonFinite("exponential time argument"));
    }
    let n = m.rows;
    let a = m.scale(t);
    let norm = induced_inf_norm(&a);
    if !norm.is_finite() {
        return Err(Error::Range("matrix exponential argument overflows"));
    }
    if norm == 0.0 {
        return Ok(Matrix::identity(n));
    }
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    if squarings > 1000 {
        return Err(Error::Range("matrix exponential argument too large"));
    }
    let scaled = a.scale(0.5f64.powi(squarings as i32));

    // Taylor terms shrink at least by 0.5/k per step.
    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=40 {
        term = (&term * &scaled).scale(1.0 / k as f64);
        sum = sum.try_add(&term)?;
        if induced_inf_norm(&term) <= 1e-18 * induced_inf_norm(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
        if !sum.is_finite() {
            return Err(Error::Range("matrix exponential overflowed while squaring"));
        }
    }
    Ok(sum)
}

/// Spectral radius of an entrywise nonnegative matrix via the Gelfand
/// sequence `|M^(2^j)|^(1/2^j)`, renormalising each square so the powers
/// neither overflow nor underflow.
pub fn spectral_radius_nonneg(m: &Matrix) -> Result<f64> {
    ensure_square(m)?;
    if m.as_slice().iter().any(|&x| x < 0.0) {
        return Err(Error::NegativeEntry);
    }
    let s0 = induced_inf_norm(m);
    if s0 == 0.0 {
        return Ok(0.0);
    }
    let mut b = m.scale(1.0 / s0);
    let mut log_norm = s0.ln();
    let mut estimate = s0;
    let mut exponent = 1.0f64;
    for _ in 1..=48 {
        b = &b * &b;
        let s = induced_inf_norm(&b);
        if s == 0.0 {
            // nilpotent
            return Ok(0.0);
        }
        b = b.scale(1.0 / s);
        log_norm = 2.0 * log_norm + s.ln();
        exponent *= 2.0;
        let next = (log_norm / exponent).exp();
        let converged = (next - estimate).abs() < 1e-9 * next;
        estimate = next;
        if converged {
            break;
        }
    }
    Ok(estimate)
}

/// All eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi
/// rotations. The input is symmetrised first.
pub fn symmetric_eigenvalues(s: &Matrix) -> Result<Vec<f64>> {
    let mut a = s.symmetrized()?;
    let n = a.rows;
    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

pub fn max_eig_symmetric(s: &Matrix) -> Result<f64> {
    Ok(*symmetric_eigenvalues(s)?.last().expect("non-empty matrix"))
}

pub fn min_eig_symmetric(s: &Matrix) -> Result<f64> {
    Ok(symmetric_eigenvalues(s)?[0])
}

/// One classical fourth-order Runge-Kutta step of `dz/dt = f(t, z)`.
pub fn rk4_step<F>(f: F, t: f64, z: &Vector, h: f64) -> Result<Vector>
where
    F: Fn(f64, &Vector) -> Vector,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument("integration step must be positive"));
    }
    let k1 = f(t, z);
    let k2 = f(t + 0.5 * h, &z.axpy(0.5 * h, &k1));
    let k3 = f(t + 0.5 * h, &z.axpy(0.5 * h, &k2));
    let k4 = f(t + h, &z.axpy(h, &k3));
    if ![&k1, &k2, &k3, &k4].iter().all(|k| k.is_finite()) {
        return Err(Error::Divergence { t });
    }
    let next = Vector(
        (0..z.dim())
            .map(|i| z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect(),
    );
    if !next.is_finite() {
        return Err(Error::Divergence { t: t + h });
    }
    Ok(next)
}
