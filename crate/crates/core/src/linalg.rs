//! Dense row-major matrices and the handful of factorizations the solver
//! needs: Cholesky-based log-determinants and eigenvalue bounds for step
//! sizes.
//!
//! Every reduction in this module accumulates sequentially in row-major
//! order, so results are bit-reproducible for a given input.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Result, VolNmfError};

/// Relative tolerance used when checking that a Gram matrix is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITER: usize = 1000;
const INVERSE_SHIFT: f64 = 1e-12;

/// Dense real matrix stored in row-major order.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data, rejecting empty shapes, length
    /// mismatches and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(VolNmfError::ShapeMismatch(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(VolNmfError::ShapeMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(VolNmfError::InvalidArgument(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
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

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n_cols {
                return Err(VolNmfError::ShapeMismatch(format!(
                    "row {i} has {} entries, expected {n_cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(n_rows, n_cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, values: &[f64]) {
        assert_eq!(values.len(), self.rows);
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(VolNmfError::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (p, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[p * other.cols..(p + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `out = self * other`, reusing `out`'s storage. Shapes must agree.
    pub fn matmul_into(&self, other: &Matrix, out: &mut Matrix) {
        assert_eq!(self.cols, other.rows);
        assert_eq!(out.shape(), (self.rows, other.cols));
        out.data.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.rows {
            let a_row = &self.data[i * self.cols..(i + 1) * self.cols];
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (p, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[p * other.cols..(p + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
    }

    /// `selfᵀ * other` without materializing the transpose.
    pub fn t_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(VolNmfError::ShapeMismatch(format!(
                "cannot multiply ({}x{})ᵀ by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.cols, other.cols);
        for p in 0..self.rows {
            let a_row = self.row(p);
            let b_row = other.row(p);
            for (i, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * otherᵀ` without materializing the transpose.
    pub fn matmul_t(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(VolNmfError::ShapeMismatch(format!(
                "cannot multiply {}x{} by ({}x{})ᵀ",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix::from_fn(self.rows, other.rows, |i, j| {
            dot(self.row(i), other.row(j))
        }))
    }

    /// Column Gram matrix `selfᵀ self`, exactly symmetric.
    pub fn gram(&self) -> Matrix {
        let n = self.cols;
        let mut g = Matrix::zeros(n, n);
        for p in 0..self.rows {
            let r = self.row(p);
            for i in 0..n {
                let ri = r[i];
                if ri == 0.0 {
                    continue;
                }
                for j in i..n {
                    g.data[i * n + j] += ri * r[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g.data[i * n + j] = g.data[j * n + i];
            }
        }
        g
    }

    /// Row Gram matrix `self selfᵀ`, exactly symmetric.
    pub fn gram_rows(&self) -> Matrix {
        let n = self.rows;
        let mut g = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = dot(self.row(i), self.row(j));
                g.data[i * n + j] = v;
                g.data[j * n + i] = v;
            }
        }
        g
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(VolNmfError::ShapeMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `self + shift * I` for a square matrix.
    pub fn shifted(&self, shift: f64) -> Matrix {
        debug_assert!(self.is_square());
        let mut out = self.clone();
        for i in 0..self.rows {
            out[(i, i)] += shift;
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Sum of all entries.
    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (acc, &v) in s.iter_mut().zip(self.row(i)) {
                *acc += v;
            }
        }
        s
    }

    /// Frobenius inner product `Σ a(i,j) b(i,j)`.
    pub fn inner(&self, other: &Matrix) -> f64 {
        debug_assert_eq!(self.shape(), other.shape());
        dot(&self.data, &other.data)
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(VolNmfError::ShapeMismatch(format!(
                "cannot stack {} columns over {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Returns a copy with columns reordered so that column `j` of the
    /// result is column `perm[j]` of `self`.
    pub fn permute_cols(&self, perm: &[usize]) -> Matrix {
        assert_eq!(perm.len(), self.cols);
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, perm[j])])
    }

    pub fn permute_rows(&self, perm: &[usize]) -> Matrix {
        assert_eq!(perm.len(), self.rows);
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(perm[i], j)])
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..i {
                let a = self[(i, j)];
                let b = self[(j, i)];
                if (a - b).abs() > rel_tol * a.abs().max(b.abs()).max(1.0) {
                    return false;
                }
            }
        }
        true
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

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Sequential dot product.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Squared Frobenius norm, accumulated row by row.
pub fn frobenius_norm_sq(a: &Matrix) -> f64 {
    let mut s = 0.0;
    for &v in &a.data {
        s += v * v;
    }
    s
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = g`.
pub fn cholesky(g: &Matrix) -> Result<Matrix> {
    if !g.is_square() {
        return Err(VolNmfError::ShapeMismatch(format!(
            "Cholesky needs a square matrix, got {}x{}",
            g.rows, g.cols
        )));
    }
    let n = g.rows;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = g[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(VolNmfError::NotPositiveDefinite { pivot: j, value: d });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ x = b` in place given the Cholesky factor.
pub fn cholesky_solve_in_place(l: &Matrix, b: &mut [f64]) {
    let n = l.rows;
    debug_assert_eq!(b.len(), n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[(k, i)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Inverse of a symmetric positive definite matrix, by Cholesky solves
/// against the identity. The result is symmetrized.
pub fn spd_inverse(g: &Matrix) -> Result<Matrix> {
    let l = cholesky(g)?;
    let n = g.rows;
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        cholesky_solve_in_place(&l, &mut e);
        inv.set_col(j, &e);
    }
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (inv[(i, j)] + inv[(j, i)]);
            inv[(i, j)] = v;
            inv[(j, i)] = v;
        }
    }
    Ok(inv)
}

/// `log det(g + delta I)` for a symmetric positive semidefinite `g`.
pub fn logdet_shifted_gram(g: &Matrix, delta: f64) -> Result<f64> {
    if !g.is_square() {
        return Err(VolNmfError::ShapeMismatch(format!(
            "Gram matrix must be square, got {}x{}",
            g.rows, g.cols
        )));
    }
    if !(delta >= 0.0) {
        return Err(VolNmfError::InvalidArgument(format!(
            "delta must be nonnegative, got {delta}"
        )));
    }
    if !g.is_symmetric(SYMMETRY_TOL) {
        return Err(VolNmfError::InvalidArgument(
            "Gram matrix is not symmetric".into(),
        ));
    }
    let l = cholesky(&g.shifted(delta))?;
    let mut s = 0.0;
    for i in 0..l.rows {
        s += l[(i, i)].ln();
    }
    Ok(2.0 * s)
}

/// Largest and smallest eigenvalues of a symmetric PSD matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub l_max: f64,
    pub l_min: f64,
}

/// Power iteration for the top eigenvalue and inverse power iteration on
/// `g + 1e-12 I` for the bottom one.
pub fn spectral_bounds(g: &Matrix) -> Result<SpectralBounds> {
    if !g.is_square() {
        return Err(VolNmfError::ShapeMismatch(format!(
            "spectral bounds need a square matrix, got {}x{}",
            g.rows, g.cols
        )));
    }
    let n = g.rows;
    if n == 1 {
        let v = g[(0, 0)].max(0.0);
        return Ok(SpectralBounds { l_max: v, l_min: v });
    }

    let l_max = power_iteration(n, |x, y| matvec(g, x, y))?;
    if l_max <= 0.0 {
        return Ok(SpectralBounds {
            l_max: 0.0,
            l_min: 0.0,
        });
    }

    let l_min = match cholesky(&g.shifted(INVERSE_SHIFT)) {
        Ok(chol) => {
            let inv_top = power_iteration(n, |x, y| {
                y.copy_from_slice(x);
                cholesky_solve_in_place(&chol, y);
            })?;
            if inv_top > 0.0 {
                1.0 / inv_top - INVERSE_SHIFT
            } else {
                0.0
            }
        }
        // Numerically singular: the bottom eigenvalue is below the shift.
        Err(VolNmfError::NotPositiveDefinite { .. }) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(SpectralBounds {
        l_max,
        l_min: l_min.clamp(0.0, l_max),
    })
}

fn matvec(a: &Matrix, x: &[f64], y: &mut [f64]) {
    for (i, yi) in y.iter_mut().enumerate() {
        *yi = dot(a.row(i), x);
    }
}

/// Dominant eigenvalue of a symmetric PSD operator via Rayleigh quotients.
fn power_iteration(n: usize, apply: impl Fn(&[f64], &mut [f64])) -> Result<f64> {
    // Unequal start weights keep the start vector off any symmetric
    // eigenspace.
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut y = vec![0.0; n];
    let mut prev = f64::NAN;
    for _ in 0..POWER_MAX_ITER {
        apply(&x, &mut y);
        let rq = dot(&x, &y);
        let ny = norm2(&y);
        if ny == 0.0 || !ny.is_finite() {
            return Ok(0.0);
        }
        for (xi, &yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
        if (rq - prev).abs() <= POWER_TOL * rq.abs() {
            // One more application sharpens the final Rayleigh quotient.
            apply(&x, &mut y);
            return Ok(dot(&x, &y).max(rq));
        }
        prev = rq;
    }
    Err(VolNmfError::ConvergenceFailure {
        iterations: POWER_MAX_ITER,
    })
}
