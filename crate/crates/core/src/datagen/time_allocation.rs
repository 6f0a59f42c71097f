use sha2::{Digest, Sha256};

use super::csv_io::parse_csv_str;
use super::{normalize_columns, Dataset};
use crate::error::{Result, VolNmfError};
use crate::linalg::Matrix;

/// Minutes spent per activity, 18 activities × 30 groups (sex × age band ×
/// survey year). Column `M3580` is males aged 35-49 in the 1980 survey.
pub const TIME_ALLOCATION_CSV: &str = include_str!("../../assets/time_allocation.csv");

const TIME_ALLOCATION_SHA256: &str = "300918dd4ddbeb6c1d841cf0d669e1a7625d43b0291a7f4d842724dab32f3a72";

pub const ACTIVITY_LABELS: [&str; 18] = [
    "paidwork",
    "dom.work",
    "caring",
    "shopping",
    "per.need",
    "eating",
    "sleeping",
    "educat.",
    "particip",
    "soc.cont",
    "goingout",
    "sports",
    "gardening",
    "outside",
    "tv-radio",
    "reading",
    "relaxing",
    "other",
];

/// Loads the embedded table after verifying its checksum.
pub fn load_time_allocation() -> Result<Dataset> {
    let digest = Sha256::digest(TIME_ALLOCATION_CSV.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    if hex != TIME_ALLOCATION_SHA256 {
        return Err(VolNmfError::ChecksumMismatch);
    }
    parse_csv_str(TIME_ALLOCATION_CSV)
}

/// Rank-one reference: the basis is the row means of the column-normalized
/// data and every coefficient is one.
pub fn k1_reference(x: &Matrix) -> Result<(Matrix, Matrix)> {
    let n = normalize_columns(x)?;
    let j = n.cols() as f64;
    let means: Vec<f64> = n.row_sums().into_iter().map(|s| s / j).collect();
    let m = Matrix::new(n.rows(), 1, means)?;
    let h = Matrix::from_fn(1, n.cols(), |_, _| 1.0);
    Ok((m, h))
}
