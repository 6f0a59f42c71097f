use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Result, VolNmfError};
use crate::linalg::Matrix;

/// Consecutive rejections after which the cap is declared infeasible.
pub const MAX_CONSECUTIVE_REJECTIONS: usize = 1_000_000;

/// One Dirichlet(α) draw as normalized independent Gamma(αᵢ, 1) variates.
pub fn sample_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if alpha.is_empty() {
        return Err(VolNmfError::InvalidArgument("empty concentration vector".into()));
    }
    let gammas = alpha
        .iter()
        .map(|&a| {
            Gamma::new(a, 1.0)
                .map_err(|e| VolNmfError::InvalidArgument(format!("Dirichlet concentration {a}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    loop {
        let draws: Vec<f64> = gammas.iter().map(|g| g.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        // All components underflowing is possible for tiny concentrations.
        if total > 0.0 {
            return Ok(draws.into_iter().map(|v| v / total).collect());
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RejectionStats {
    pub accepted: usize,
    pub proposed: usize,
}

impl RejectionStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// `j` Dirichlet columns, each redrawn whole until every entry is at most
/// `cap`.
pub fn sample_coeffs_rejection(alpha: &[f64], cap: f64, j: usize, seed: u64) -> Result<Matrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_coeffs_rejection_with_rng(alpha, cap, j, &mut rng).map(|(h, _)| h)
}

pub fn sample_coeffs_rejection_with_rng<R: Rng + ?Sized>(
    alpha: &[f64],
    cap: f64,
    j: usize,
    rng: &mut R,
) -> Result<(Matrix, RejectionStats)> {
    if j == 0 {
        return Err(VolNmfError::InvalidArgument("need at least one column".into()));
    }
    let k = alpha.len();
    let mut h = Matrix::zeros(k.max(1), j);
    let mut stats = RejectionStats::default();
    for col in 0..j {
        let mut rejected = 0usize;
        let draw = loop {
            let d = sample_dirichlet(alpha, rng)?;
            stats.proposed += 1;
            if d.iter().all(|&v| v <= cap) {
                break d;
            }
            rejected += 1;
            if rejected >= MAX_CONSECUTIVE_REJECTIONS {
                return Err(VolNmfError::RejectionStall(rejected));
            }
        };
        stats.accepted += 1;
        h.set_col(col, &draw);
    }
    Ok((h, stats))
}
