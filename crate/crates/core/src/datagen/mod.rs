//! Datasets: seeded synthetic mixtures with a known SSC basis, the bundled
//! time-allocation table, and CSV ingestion.

mod csv_io;
mod dirichlet;
mod synthetic;
mod time_allocation;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VolNmfError};
use crate::linalg::Matrix;

pub use csv_io::{load_csv, read_matrix_csv, write_csv, write_matrix_csv};
pub use dirichlet::{
    sample_coeffs_rejection, sample_coeffs_rejection_with_rng, sample_dirichlet, RejectionStats,
    MAX_CONSECUTIVE_REJECTIONS,
};
pub use synthetic::{build_ssc_basis_block, generate_synthetic, SyntheticSetting, SyntheticSpec};
pub use time_allocation::{k1_reference, load_time_allocation, ACTIVITY_LABELS, TIME_ALLOCATION_CSV};

/// Observation matrix with optional ground truth and labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Matrix,
    pub m_true: Option<Matrix>,
    pub h_true: Option<Matrix>,
    pub row_labels: Option<Vec<String>>,
    pub col_labels: Option<Vec<String>>,
}

impl Dataset {
    pub fn from_matrix(x: Matrix) -> Self {
        Self {
            x,
            m_true: None,
            h_true: None,
            row_labels: None,
            col_labels: None,
        }
    }
}

/// Divides every column by its sum.
pub fn normalize_columns(x: &Matrix) -> Result<Matrix> {
    let sums = x.col_sums();
    if let Some(j) = sums.iter().position(|&s| !(s > 0.0)) {
        return Err(VolNmfError::ZeroColumn(j));
    }
    Ok(Matrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] / sums[j]))
}
