use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dirichlet::sample_coeffs_rejection_with_rng;
use super::Dataset;
use crate::error::{Result, VolNmfError};
use crate::geometry::{ssc_check_exact_k3, SscVerdict};
use crate::linalg::Matrix;

/// Coefficient distributions for the three mixing regimes. The name counts
/// the rows of H that contain no (near-)zero entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SyntheticSetting {
    /// Dirichlet(2, 0.5, 0.5)
    OneDenseRow,
    /// Dirichlet(2, 2, 0.5)
    TwoDenseRows,
    /// Dirichlet(2, 2, 2)
    ThreeDenseRows,
}

impl SyntheticSetting {
    pub const ALL: [SyntheticSetting; 3] = [
        SyntheticSetting::OneDenseRow,
        SyntheticSetting::TwoDenseRows,
        SyntheticSetting::ThreeDenseRows,
    ];

    pub fn alpha(self) -> [f64; 3] {
        match self {
            Self::OneDenseRow => [2.0, 0.5, 0.5],
            Self::TwoDenseRows => [2.0, 2.0, 0.5],
            Self::ThreeDenseRows => [2.0, 2.0, 2.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::OneDenseRow => "one-dense-row",
            Self::TwoDenseRows => "two-dense-rows",
            Self::ThreeDenseRows => "three-dense-rows",
        }
    }
}

impl fmt::Display for SyntheticSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticSetting {
    type Err = VolNmfError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| VolNmfError::InvalidArgument(format!("unknown setting '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub setting: SyntheticSetting,
    /// Rows of X; the last six rows of M form the SSC block.
    pub i: usize,
    /// Columns of X.
    pub j: usize,
    pub k: usize,
    /// Every coefficient must be at most this value.
    pub cap: f64,
    /// Off-vertex weight of the SSC block rows.
    pub beta: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub const DEFAULT_BETA: f64 = 0.1;

    pub fn new(setting: SyntheticSetting, seed: u64) -> Self {
        Self {
            setting,
            i: 9,
            j: 500,
            k: 3,
            cap: 0.75,
            beta: Self::DEFAULT_BETA,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(VolNmfError::InvalidArgument(m));
        if self.k != 3 {
            return bad(format!(
                "synthetic settings are defined for k = 3, got {}",
                self.k
            ));
        }
        if self.i < 6 {
            return bad(format!("need at least 6 rows for the SSC block, got {}", self.i));
        }
        if self.j == 0 {
            return bad("need at least one column".into());
        }
        if !(self.cap > 0.0 && self.cap < 1.0) {
            return bad(format!("cap must lie in (0, 1), got {}", self.cap));
        }
        if !(0.0..0.5).contains(&self.beta) {
            return bad(format!("beta must lie in [0, 0.5), got {}", self.beta));
        }
        Ok(())
    }
}

/// The six rows `(1-β) eᵢ + β eⱼ` over ordered pairs `i ≠ j`, released only
/// after the exact checker confirms SSC1.
pub fn build_ssc_basis_block(k: usize, beta: f64) -> Result<Matrix> {
    if k != 3 {
        return Err(VolNmfError::InvalidArgument(format!(
            "SSC block is defined for k = 3, got {k}"
        )));
    }
    if !(0.0..0.5).contains(&beta) {
        return Err(VolNmfError::InvalidArgument(format!(
            "beta must lie in [0, 0.5), got {beta}"
        )));
    }
    let mut rows = Vec::with_capacity(6);
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                let mut r = [0.0; 3];
                r[i] = 1.0 - beta;
                r[j] = beta;
                rows.push(r);
            }
        }
    }
    let block = Matrix::from_rows(&rows)?;
    match ssc_check_exact_k3(&block) {
        Ok(report) if report.ssc1 == SscVerdict::Holds => Ok(block),
        _ => Err(VolNmfError::SscConstructionFailed { beta }),
    }
}

/// Noiseless `X = M H`: M stacks a uniform(0,1) block over the SSC block,
/// H has capped Dirichlet columns.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let top = Matrix::from_fn(spec.i - 6, spec.k, |_, _| rng.random::<f64>());
    let block = build_ssc_basis_block(spec.k, spec.beta)?;
    let m = if spec.i > 6 { top.vstack(&block)? } else { block };
    let (h, _) = sample_coeffs_rejection_with_rng(&spec.setting.alpha(), spec.cap, spec.j, &mut rng)?;
    let x = m.matmul(&h)?;
    Ok(Dataset {
        x,
        m_true: Some(m),
        h_true: Some(h),
        row_labels: None,
        col_labels: None,
    })
}
