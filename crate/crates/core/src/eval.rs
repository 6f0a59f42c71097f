//! Recovery and reporting metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VolNmfError};
use crate::linalg::{dot, frobenius_norm_sq, logdet_shifted_gram, Matrix};

/// Shift used when reporting `logdet(MᵀM + δI)`. The published volume tables
/// are reproduced by the same shift the solver uses by default.
pub const DEFAULT_DELTA_METRIC: f64 = 0.1;

pub const SPARSITY_TOL: f64 = 1e-4;

const MAX_ALIGN_K: usize = 8;
const COLLAPSE_NORM: f64 = 1e-12;
const SCALE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    /// Column `k` of the aligned estimate is `scaling[k]` times estimated
    /// column `permutation[k]`.
    pub permutation: Vec<usize>,
    pub scaling: Vec<f64>,
    pub mean_abs_error: f64,
    pub per_column_error: Vec<f64>,
}

impl AlignmentResult {
    pub fn aligned_basis(&self, m_est: &Matrix) -> Matrix {
        let p = m_est.permute_cols(&self.permutation);
        Matrix::from_fn(p.rows(), p.cols(), |i, k| p[(i, k)] * self.scaling[k])
    }

    /// Applies the inverse transform to the coefficients so the product
    /// `aligned_basis · aligned_coefficients` is unchanged.
    pub fn aligned_coefficients(&self, h_est: &Matrix) -> Matrix {
        let p = h_est.permute_rows(&self.permutation);
        Matrix::from_fn(p.rows(), p.cols(), |k, j| p[(k, j)] / self.scaling[k])
    }
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..k).collect();
    let mut out = vec![p.clone()];
    loop {
        let Some(i) = (1..k).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..k).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
        out.push(p.clone());
    }
}

fn check_pair(m_est: &Matrix, m_true: &Matrix) -> Result<()> {
    if m_est.shape() != m_true.shape() {
        return Err(VolNmfError::ShapeMismatch(format!(
            "estimate {:?} vs truth {:?}",
            m_est.shape(),
            m_true.shape()
        )));
    }
    if m_est.cols() > MAX_ALIGN_K {
        return Err(VolNmfError::InvalidArgument(format!(
            "exhaustive alignment supports k <= {MAX_ALIGN_K}, got {}",
            m_est.cols()
        )));
    }
    Ok(())
}

fn best_scale(est: &[f64], truth: &[f64]) -> f64 {
    (dot(est, truth) / dot(est, est)).max(SCALE_FLOOR)
}

/// Total squared error of the best positive scaling under a fixed
/// permutation.
pub fn alignment_sq_error(m_est: &Matrix, m_true: &Matrix, permutation: &[usize]) -> Result<f64> {
    check_pair(m_est, m_true)?;
    let est: Vec<Vec<f64>> = (0..m_est.cols()).map(|k| m_est.col(k)).collect();
    Ok(permutation
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let t = m_true.col(k);
            let s = best_scale(&est[p], &t);
            est[p]
                .iter()
                .zip(&t)
                .map(|(e, t)| (s * e - t).powi(2))
                .sum::<f64>()
        })
        .sum())
}

/// Matches estimated basis columns to the truth up to permutation and
/// positive scaling by exhaustive search.
pub fn align_basis(m_est: &Matrix, m_true: &Matrix) -> Result<AlignmentResult> {
    check_pair(m_est, m_true)?;
    let k = m_est.cols();
    let est: Vec<Vec<f64>> = (0..k).map(|c| m_est.col(c)).collect();
    let truth: Vec<Vec<f64>> = (0..k).map(|c| m_true.col(c)).collect();
    if let Some(c) = est.iter().position(|v| dot(v, v).sqrt() < COLLAPSE_NORM) {
        return Err(VolNmfError::ColumnCollapse(c));
    }

    // scales[p][t] and errors[p][t]: estimated column p against true column t
    let mut scales = vec![vec![0.0; k]; k];
    let mut errors = vec![vec![0.0; k]; k];
    for p in 0..k {
        for t in 0..k {
            let s = best_scale(&est[p], &truth[t]);
            scales[p][t] = s;
            errors[p][t] = est[p]
                .iter()
                .zip(&truth[t])
                .map(|(e, v)| (s * e - v).powi(2))
                .sum();
        }
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in permutations(k) {
        let total: f64 = perm.iter().enumerate().map(|(t, &p)| errors[p][t]).sum();
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, perm));
        }
    }
    let (_, permutation) = best.expect("at least one permutation");
    let scaling: Vec<f64> = permutation
        .iter()
        .enumerate()
        .map(|(t, &p)| scales[p][t])
        .collect();

    let rows = m_est.rows() as f64;
    let per_column_error: Vec<f64> = permutation
        .iter()
        .enumerate()
        .map(|(t, &p)| {
            est[p]
                .iter()
                .zip(&truth[t])
                .map(|(e, v)| (scaling[t] * e - v).abs())
                .sum::<f64>()
                / rows
        })
        .collect();
    let mean_abs_error = per_column_error.iter().sum::<f64>() / k as f64;
    Ok(AlignmentResult {
        permutation,
        scaling,
        mean_abs_error,
        per_column_error,
    })
}

/// `logdet(MᵀM + δI)`.
pub fn volume_logdet(m: &Matrix, delta_metric: f64) -> Result<f64> {
    logdet_shifted_gram(&m.gram(), delta_metric)
}

/// Number of entries with magnitude below `tol`.
pub fn sparsity_count(a: &Matrix, tol: f64) -> usize {
    a.as_slice().iter().filter(|v| v.abs() < tol).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub fit_rel: f64,
    pub volume_logdet: f64,
    pub volume_logdet_h: f64,
    pub sparsity_m: usize,
    pub sparsity_h: usize,
    pub delta_metric: f64,
}

pub fn metrics_report(x: &Matrix, m: &Matrix, h: &Matrix, delta_metric: f64) -> Result<MetricsReport> {
    let residual = x.sub(&m.matmul(h)?)?;
    let norm_x = frobenius_norm_sq(x).sqrt();
    let fit_rel = if norm_x > 0.0 {
        frobenius_norm_sq(&residual).sqrt() / norm_x
    } else {
        frobenius_norm_sq(&residual).sqrt()
    };
    Ok(MetricsReport {
        fit_rel,
        volume_logdet: volume_logdet(m, delta_metric)?,
        volume_logdet_h: logdet_shifted_gram(&h.gram_rows(), delta_metric)?,
        sparsity_m: sparsity_count(m, SPARSITY_TOL),
        sparsity_h: sparsity_count(h, SPARSITY_TOL),
        delta_metric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth() -> Matrix {
        Matrix::from_rows(&[[0.9, 0.1, 0.0], [0.1, 0.8, 0.2], [0.0, 0.1, 0.8], [0.3, 0.3, 0.3]]).unwrap()
    }

    #[test]
    fn permutations_lexicographic() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], [0, 1, 2]);
        assert_eq!(p[1], [0, 2, 1]);
        assert_eq!(p[5], [2, 1, 0]);
        assert_eq!(permutations(1), vec![vec![0]]);
    }

    #[test]
    fn exact_match() {
        let a = align_basis(&truth(), &truth()).unwrap();
        assert_eq!(a.permutation, [0, 1, 2]);
        for s in &a.scaling {
            assert!((s - 1.0).abs() < 1e-15);
        }
        assert!(a.mean_abs_error < 1e-15);
    }

    #[test]
    fn swapped_columns() {
        let est = truth().permute_cols(&[1, 0, 2]);
        let a = align_basis(&est, &truth()).unwrap();
        assert_eq!(a.permutation, [1, 0, 2]);
        assert!(a.mean_abs_error < 1e-15);
    }

    #[test]
    fn scaled_columns_absorbed() {
        let t = truth();
        let est = Matrix::from_fn(4, 3, |i, k| t[(i, k)] * [2.0, 0.5, 7.0][k]);
        let a = align_basis(&est, &t).unwrap();
        assert_eq!(a.permutation, [0, 1, 2]);
        assert!((a.scaling[0] - 0.5).abs() < 1e-14);
        assert!(a.mean_abs_error < 1e-14);
        let back = a.aligned_basis(&est);
        assert!(back.sub(&t).unwrap().as_slice().iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn coefficients_preserve_product() {
        let t = truth();
        let est = Matrix::from_fn(4, 3, |i, k| t[(i, k)] * [2.0, 0.5, 7.0][k]).permute_cols(&[2, 0, 1]);
        let h = Matrix::from_fn(3, 5, |k, j| (k + j) as f64 * 0.1 + 0.05);
        let a = align_basis(&est, &t).unwrap();
        let lhs = a.aligned_basis(&est).matmul(&a.aligned_coefficients(&h)).unwrap();
        let rhs = est.matmul(&h).unwrap();
        assert!(lhs.sub(&rhs).unwrap().as_slice().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn collapsed_column() {
        let mut est = truth();
        for i in 0..4 {
            est.row_mut(i)[1] = 0.0;
        }
        assert_eq!(align_basis(&est, &truth()), Err(VolNmfError::ColumnCollapse(1)));
    }

    #[test]
    fn volume_and_sparsity_basics() {
        assert!(volume_logdet(&Matrix::identity(3), 0.0).unwrap().abs() < 1e-15);
        assert_eq!(sparsity_count(&Matrix::zeros(3, 3), SPARSITY_TOL), 9);
        assert_eq!(sparsity_count(&Matrix::identity(3), SPARSITY_TOL), 6);
    }

    #[test]
    fn report_of_exact_factorization() {
        let m = truth();
        let h = Matrix::from_fn(3, 6, |k, j| ((k * 7 + j * 3) % 5) as f64 / 4.0 + 0.1);
        let x = m.matmul(&h).unwrap();
        let r = metrics_report(&x, &m, &h, 0.1).unwrap();
        assert!(r.fit_rel < 1e-9);
        assert_eq!(r.volume_logdet, volume_logdet(&m, 0.1).unwrap());
        assert_eq!(r.sparsity_m, 2);
    }
}
