//! Alternating projected fast gradient solver for
//!
//! ```text
//! min  ‖X - M H‖²_F + λ logdet(MᵀM + δI)
//! s.t. M ≥ 0, H ≥ 0, plus one sum-to-one placement
//! ```
//!
//! The H-subproblem is a constrained least-squares problem solved by an
//! accelerated projected gradient method. The M-subproblem replaces the
//! concave logdet term by its first-order Taylor expansion at the current
//! M, which gives a strongly convex quadratic upper bound that is then
//! minimized by a projected fast gradient method.
//!
//! Minimum-volume NMF runs this directly on X. Maximum-volume NMF runs it
//! on Xᵀ, where the volume of the coefficient matrix is penalized; by
//! `det(S)² · det(S)⁻² = 1` shrinking `det(HHᵀ)` expands `det(MᵀM)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VolNmfError};
use crate::geometry::{constraint_violation, project_constraint_in_place, ConstraintPlacement, Factor};
use crate::linalg::{frobenius_norm_sq, logdet_shifted_gram, spd_inverse, spectral_bounds, Matrix};

/// Which regularized problem to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Minimum-volume NMF: penalize `logdet(MᵀM + δI)`.
    Mvc,
    /// Maximum-volume NMF: penalize `logdet(HHᵀ + δI)` via the transposed
    /// problem.
    Mav,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mvc => "mvc",
            Method::Mav => "mav",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = VolNmfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mvc" => Ok(Method::Mvc),
            "mav" => Ok(Method::Mav),
            other => Err(VolNmfError::InvalidArgument(format!(
                "unknown method '{other}', expected mvc or mav"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitStrategy {
    RandomUniform,
    ProvidedFactors,
}

/// Sign of the volume term in [`objective_value`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VolumeSign {
    /// `fit + λ logdet(MᵀM + δI)`
    MinVol,
    /// `fit - λ logdet(MᵀM + δI)`
    MaxVol,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Target rank K.
    pub k: usize,
    /// Regularization weight relative to the initial residual.
    pub lambda_prime: f64,
    /// Shift inside the log-determinant.
    pub delta: f64,
    pub max_outer: usize,
    /// Fast gradient iterations per subproblem.
    pub inner_iter: usize,
    pub seed: u64,
    /// Placement of the sum-to-one constraint. For [`solve_mav`] it is
    /// expressed in terms of the original (untransposed) factors.
    pub placement: ConstraintPlacement,
    pub init: InitStrategy,
    /// Relative objective change below which the outer loop stops.
    pub tol_objective: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            k: 3,
            lambda_prime: 0.1,
            delta: 0.1,
            max_outer: 500,
            inner_iter: 50,
            seed: 0,
            placement: ConstraintPlacement::HColsSumOne,
            init: InitStrategy::RandomUniform,
            tol_objective: 1e-7,
        }
    }
}

impl SolverConfig {
    pub fn with_k(k: usize) -> Self {
        Self { k, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(VolNmfError::InvalidArgument(msg));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.lambda_prime >= 0.0) || !self.lambda_prime.is_finite() {
            return bad(format!(
                "lambda_prime must be nonnegative, got {}",
                self.lambda_prime
            ));
        }
        if self.max_outer == 0 || self.inner_iter == 0 {
            return bad("max_outer and inner_iter must be at least 1".into());
        }
        if !(self.tol_objective >= 0.0) {
            return bad(format!(
                "tol_objective must be nonnegative, got {}",
                self.tol_objective
            ));
        }
        Ok(())
    }

    fn check_rank(&self, x: &Matrix) -> Result<()> {
        let min_dim = x.rows().min(x.cols());
        if self.k > min_dim {
            return Err(VolNmfError::InvalidArgument(format!(
                "k = {} exceeds min(rows, cols) = {min_dim}",
                self.k
            )));
        }
        Ok(())
    }
}

/// Output of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    /// Basis, I×K.
    pub m: Matrix,
    /// Coefficients, K×J.
    pub h: Matrix,
    /// Absolute regularization weight fixed at initialization.
    pub lambda: f64,
    /// Penalized objective after every outer iteration.
    pub objective_history: Vec<f64>,
    /// `‖X - MH‖²_F` after every outer iteration.
    pub fit_history: Vec<f64>,
    /// `logdet(MᵀM + δI)` of the returned basis orientation after every
    /// outer iteration.
    pub volume_history: Vec<f64>,
    /// `logdet(HHᵀ + δI)` after every outer iteration.
    pub coefficient_volume_history: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl SolveResult {
    /// Lowest recorded objective.
    pub fn best_objective(&self) -> f64 {
        self.objective_history
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Seeded uniform initialization. The constrained factor is projected
/// feasible, then the free factor is rescaled so that `mean(M₀H₀)` matches
/// `mean(X)`.
pub fn init_factors(
    x: &Matrix,
    k: usize,
    seed: u64,
    placement: ConstraintPlacement,
) -> Result<(Matrix, Matrix)> {
    let (i, j) = x.shape();
    if k == 0 || k > i.min(j) {
        return Err(VolNmfError::InvalidArgument(format!(
            "k = {k} must lie in 1..={}",
            i.min(j)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Matrix::from_fn(i, k, |_, _| rng.random::<f64>());
    let mut h = Matrix::from_fn(k, j, |_, _| rng.random::<f64>());
    project_constraint_in_place(&mut m, Factor::M, placement);
    project_constraint_in_place(&mut h, Factor::H, placement);

    let approx_mean = m.matmul(&h)?.mean();
    let target = x.mean();
    if approx_mean > 0.0 && target > 0.0 {
        let s = target / approx_mean;
        match placement.factor() {
            Some(Factor::M) => h = h.scale(s),
            _ => m = m.scale(s),
        }
    }
    Ok((m, h))
}

/// `λ = λ' ‖X - M₀H₀‖²_F / |logdet(M₀ᵀM₀ + δI)|`.
pub fn compute_lambda(x: &Matrix, m0: &Matrix, h0: &Matrix, lambda_prime: f64, delta: f64) -> Result<f64> {
    if lambda_prime == 0.0 {
        return Ok(0.0);
    }
    let residual = frobenius_norm_sq(&x.sub(&m0.matmul(h0)?)?);
    let logdet = logdet_shifted_gram(&m0.gram(), delta)?;
    if logdet.abs() < 1e-12 {
        return Err(VolNmfError::DegenerateScale(logdet.abs()));
    }
    Ok(lambda_prime * residual / logdet.abs())
}

/// `‖X - MH‖²_F ± λ logdet(MᵀM + δI)`.
pub fn objective_value(
    x: &Matrix,
    m: &Matrix,
    h: &Matrix,
    lambda: f64,
    delta: f64,
    sign: VolumeSign,
) -> Result<f64> {
    let fit = frobenius_norm_sq(&x.sub(&m.matmul(h)?)?);
    if lambda == 0.0 {
        return Ok(fit);
    }
    let vol = logdet_shifted_gram(&m.gram(), delta)?;
    Ok(match sign {
        VolumeSign::MinVol => fit + lambda * vol,
        VolumeSign::MaxVol => fit - lambda * vol,
    })
}

fn step_bound(g: &Matrix) -> f64 {
    match spectral_bounds(g) {
        Ok(b) => b.l_max,
        // Trace is always an upper bound on the top eigenvalue of a PSD
        // matrix.
        Err(_) => g.trace(),
    }
}

/// `⟨G H, H⟩ - 2⟨B, H⟩`, i.e. `‖X - MH‖² - ‖X‖²` with `G = MᵀM`,
/// `B = MᵀX`.
fn h_subproblem_value(g: &Matrix, b: &Matrix, h: &Matrix, gh: &mut Matrix) -> f64 {
    g.matmul_into(h, gh);
    gh.inner(h) - 2.0 * b.inner(h)
}

/// Projected fast gradient on `‖X - MH‖²_F` over the H-feasible set.
///
/// Uses step `1/L` with `L = 2 λ_max(MᵀM)`, Nesterov momentum with restart
/// whenever the objective increases, and returns the best iterate visited
/// (the starting point included).
pub fn update_h_pfgm(
    x: &Matrix,
    m: &Matrix,
    h_init: &Matrix,
    placement: ConstraintPlacement,
    inner_iter: usize,
) -> Result<Matrix> {
    if m.rows() != x.rows() || m.cols() != h_init.rows() || h_init.cols() != x.cols() {
        return Err(VolNmfError::ShapeMismatch(format!(
            "X {:?}, M {:?}, H {:?}",
            x.shape(),
            m.shape(),
            h_init.shape()
        )));
    }
    let g = m.gram();
    let b = m.t_matmul(x)?;
    let lipschitz = 2.0 * step_bound(&g);
    if !(lipschitz > 0.0) {
        return Ok(h_init.clone());
    }
    let step = 1.0 / lipschitz;

    let mut gh = Matrix::zeros(h_init.rows(), h_init.cols());
    let mut best = h_init.clone();
    let mut best_val = h_subproblem_value(&g, &b, h_init, &mut gh);
    let mut prev = h_init.clone();
    let mut prev_val = best_val;
    let mut y = h_init.clone();
    let mut next = h_init.clone();
    let mut t = 1.0_f64;

    for _ in 0..inner_iter {
        // next = P(y - step * 2 (G y - B))
        g.matmul_into(&y, &mut gh);
        for ((n, (&yv, &ghv)), &bv) in next
            .as_mut_slice()
            .iter_mut()
            .zip(y.as_slice().iter().zip(gh.as_slice()))
            .zip(b.as_slice())
        {
            *n = yv - step * 2.0 * (ghv - bv);
        }
        project_constraint_in_place(&mut next, Factor::H, placement);
        let val = h_subproblem_value(&g, &b, &next, &mut gh);

        if val > prev_val {
            // Adaptive restart: drop momentum and take a plain projected
            // gradient step from the last accepted iterate.
            t = 1.0;
            y.as_mut_slice().copy_from_slice(prev.as_slice());
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        for ((yv, &nv), &pv) in y
            .as_mut_slice()
            .iter_mut()
            .zip(next.as_slice())
            .zip(prev.as_slice())
        {
            *yv = nv + beta * (nv - pv);
        }
        t = t_next;
        std::mem::swap(&mut prev, &mut next);
        prev_val = val;
        if val < best_val {
            best_val = val;
            best.as_mut_slice().copy_from_slice(prev.as_slice());
        }
    }
    Ok(best)
}

/// Quadratic majorizer of the M-subproblem at `m0`:
/// `A = HHᵀ + λ (M₀ᵀM₀ + δI)⁻¹`, `C = X Hᵀ`.
pub fn build_m_majorizer(
    x: &Matrix,
    h: &Matrix,
    m0: &Matrix,
    lambda: f64,
    delta: f64,
) -> Result<(Matrix, Matrix)> {
    if h.cols() != x.cols() || m0.cols() != h.rows() {
        return Err(VolNmfError::ShapeMismatch(format!(
            "X {:?}, H {:?}, M0 {:?}",
            x.shape(),
            h.shape(),
            m0.shape()
        )));
    }
    let mut a = h.gram_rows();
    if lambda != 0.0 {
        let inv = spd_inverse(&m0.gram().shifted(delta))?;
        a = a.add(&inv.scale(lambda))?;
    }
    let c = x.matmul_t(h)?;
    Ok((a, c))
}

/// `½⟨M A, M⟩ - ⟨C, M⟩`, the row-separable quadratic minimized in the
/// M-step.
pub fn m_quadratic_value(a: &Matrix, c: &Matrix, m: &Matrix) -> f64 {
    let mut ma = Matrix::zeros(m.rows(), m.cols());
    m_quadratic_with(a, c, m, &mut ma)
}

fn m_quadratic_with(a: &Matrix, c: &Matrix, m: &Matrix, ma: &mut Matrix) -> f64 {
    m.matmul_into(a, ma);
    0.5 * ma.inner(m) - c.inner(m)
}

/// Strongly convex projected fast gradient on the majorizer
/// `Σᵢ ½ M(i,:) A M(i,:)ᵀ - C(i,:) M(i,:)ᵀ`. The factor 2 in front of the
/// sum does not change the minimizer and is absorbed in the step size.
pub fn update_m_pfgm(
    a: &Matrix,
    c: &Matrix,
    m_init: &Matrix,
    placement: ConstraintPlacement,
    inner_iter: usize,
) -> Result<Matrix> {
    if !a.is_square() || a.rows() != m_init.cols() || c.shape() != m_init.shape() {
        return Err(VolNmfError::ShapeMismatch(format!(
            "A {:?}, C {:?}, M {:?}",
            a.shape(),
            c.shape(),
            m_init.shape()
        )));
    }
    let (l_max, l_min) = match spectral_bounds(a) {
        Ok(b) => (b.l_max, b.l_min),
        Err(_) => (a.trace(), 0.0),
    };
    if !(l_max > 0.0) {
        return Ok(m_init.clone());
    }
    let step = 1.0 / l_max;
    let momentum = (l_max.sqrt() - l_min.sqrt()) / (l_max.sqrt() + l_min.sqrt());

    let mut ma = Matrix::zeros(m_init.rows(), m_init.cols());
    let mut best = m_init.clone();
    let mut best_val = m_quadratic_with(a, c, m_init, &mut ma);
    let mut prev = m_init.clone();
    let mut prev_val = best_val;
    let mut y = m_init.clone();
    let mut next = m_init.clone();

    for _ in 0..inner_iter {
        y.matmul_into(a, &mut ma);
        for ((n, (&yv, &mav)), &cv) in next
            .as_mut_slice()
            .iter_mut()
            .zip(y.as_slice().iter().zip(ma.as_slice()))
            .zip(c.as_slice())
        {
            *n = yv - step * (mav - cv);
        }
        project_constraint_in_place(&mut next, Factor::M, placement);
        let val = m_quadratic_with(a, c, &next, &mut ma);

        if val > prev_val {
            y.as_mut_slice().copy_from_slice(prev.as_slice());
            continue;
        }
        for ((yv, &nv), &pv) in y
            .as_mut_slice()
            .iter_mut()
            .zip(next.as_slice())
            .zip(prev.as_slice())
        {
            *yv = nv + momentum * (nv - pv);
        }
        std::mem::swap(&mut prev, &mut next);
        prev_val = val;
        if val < best_val {
            best_val = val;
            best.as_mut_slice().copy_from_slice(prev.as_slice());
        }
    }
    Ok(best)
}

/// Alternating solver for `‖X - MH‖² + λ logdet(MᵀM + δI)` under the
/// configured placement. Returns the iterate with the lowest recorded
/// objective.
pub fn solve_volreg(
    x: &Matrix,
    config: &SolverConfig,
    provided: Option<(&Matrix, &Matrix)>,
) -> Result<SolveResult> {
    config.validate()?;
    config.check_rank(x)?;
    let k = config.k;
    let placement = config.placement;

    let (mut m, mut h) = match (config.init, provided) {
        (_, Some((m0, h0))) => {
            if m0.shape() != (x.rows(), k) || h0.shape() != (k, x.cols()) {
                return Err(VolNmfError::ShapeMismatch(format!(
                    "provided factors {:?} and {:?} do not match X {:?} with k = {k}",
                    m0.shape(),
                    h0.shape(),
                    x.shape()
                )));
            }
            let mut m0 = m0.clone();
            let mut h0 = h0.clone();
            project_constraint_in_place(&mut m0, Factor::M, placement);
            project_constraint_in_place(&mut h0, Factor::H, placement);
            (m0, h0)
        }
        (InitStrategy::ProvidedFactors, None) => {
            return Err(VolNmfError::InvalidArgument(
                "init = ProvidedFactors but no factors were given".into(),
            ))
        }
        (InitStrategy::RandomUniform, None) => init_factors(x, k, config.seed, placement)?,
    };

    let mut warnings = Vec::new();
    let lambda = match compute_lambda(x, &m, &h, config.lambda_prime, config.delta) {
        Ok(l) => l,
        Err(VolNmfError::DegenerateScale(v)) => {
            warnings.push(format!(
                "|logdet| = {v:e} at initialization; using denominator 1 for lambda"
            ));
            let residual = frobenius_norm_sq(&x.sub(&m.matmul(&h)?)?);
            config.lambda_prime * residual
        }
        Err(e) => return Err(e),
    };

    let delta = config.delta;
    let mut objective_history = Vec::with_capacity(config.max_outer);
    let mut fit_history = Vec::with_capacity(config.max_outer);
    let mut volume_history = Vec::with_capacity(config.max_outer);
    let mut coefficient_volume_history = Vec::with_capacity(config.max_outer);
    let mut best: Option<(f64, Matrix, Matrix)> = None;
    let mut converged = false;
    let mut iterations_run = 0;

    for _ in 0..config.max_outer {
        h = update_h_pfgm(x, &m, &h, placement, config.inner_iter)?;
        let (a, c) = build_m_majorizer(x, &h, &m, lambda, delta)?;
        m = update_m_pfgm(&a, &c, &m, placement, config.inner_iter)?;
        iterations_run += 1;

        let fit = frobenius_norm_sq(&x.sub(&m.matmul(&h)?)?);
        let vol = logdet_shifted_gram(&m.gram(), delta)?;
        let coeff_vol = logdet_shifted_gram(&h.gram_rows(), delta)?;
        let objective = fit + lambda * vol;

        let previous = objective_history.last().copied();
        objective_history.push(objective);
        fit_history.push(fit);
        volume_history.push(vol);
        coefficient_volume_history.push(coeff_vol);

        if best.as_ref().is_none_or(|(b, _, _)| objective < *b) {
            best = Some((objective, m.clone(), h.clone()));
        }
        if let Some(prev) = previous {
            if (objective - prev).abs() / objective.abs().max(1.0) < config.tol_objective {
                converged = true;
                break;
            }
        }
    }

    let (_, m, h) = best.expect("at least one outer iteration runs");
    Ok(SolveResult {
        m,
        h,
        lambda,
        objective_history,
        fit_history,
        volume_history,
        coefficient_volume_history,
        iterations_run,
        converged,
        warnings,
    })
}

/// Minimum-volume NMF: the regularized solver applied to X directly. The
/// default placement is `HColsSumOne`.
pub fn solve_mvc(x: &Matrix, config: &SolverConfig) -> Result<SolveResult> {
    solve_volreg(x, config, None)
}

/// Maximum-volume NMF through the transposed problem `Xᵀ ≈ Hᵀ Mᵀ`, whose
/// basis volume `det(HHᵀ)` is minimized. `config.placement` refers to the
/// original factors and is mapped onto the transposed ones.
pub fn solve_mav(x: &Matrix, config: &SolverConfig) -> Result<SolveResult> {
    let xt = x.transpose();
    let transposed_config = SolverConfig {
        placement: config.placement.transposed(),
        ..config.clone()
    };
    let r = solve_volreg(&xt, &transposed_config, None)?;
    Ok(SolveResult {
        m: r.h.transpose(),
        h: r.m.transpose(),
        lambda: r.lambda,
        objective_history: r.objective_history,
        fit_history: r.fit_history,
        volume_history: r.coefficient_volume_history,
        coefficient_volume_history: r.volume_history,
        iterations_run: r.iterations_run,
        converged: r.converged,
        warnings: r.warnings,
    })
}

pub fn solve(x: &Matrix, method: Method, config: &SolverConfig) -> Result<SolveResult> {
    match method {
        Method::Mvc => solve_mvc(x, config),
        Method::Mav => solve_mav(x, config),
    }
}

/// Best of `restarts` independent random initializations (seeds
/// `config.seed`, `config.seed + 1`, ...), ranked by lowest objective.
/// Restarts run in parallel; the choice does not depend on scheduling.
pub fn solve_best_of(
    x: &Matrix,
    method: Method,
    config: &SolverConfig,
    restarts: usize,
) -> Result<SolveResult> {
    let restarts = restarts.max(1);
    let runs: Vec<Result<SolveResult>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let cfg = SolverConfig {
                seed: config.seed.wrapping_add(r as u64),
                ..config.clone()
            };
            solve(x, method, &cfg)
        })
        .collect();
    let mut best: Option<SolveResult> = None;
    for run in runs {
        let run = run?;
        if best
            .as_ref()
            .is_none_or(|b| run.best_objective() < b.best_objective())
        {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// Largest constraint violation of a solve result under `placement`
/// (expressed on the returned factors).
pub fn feasibility_error(result: &SolveResult, placement: ConstraintPlacement) -> f64 {
    constraint_violation(&result.m, Factor::M, placement).max(constraint_violation(
        &result.h,
        Factor::H,
        placement,
    ))
}

/// Whether `history` never increases by more than `slack`.
pub fn is_non_increasing(history: &[f64], slack: f64) -> bool {
    history.windows(2).all(|w| w[1] <= w[0] + slack)
}
