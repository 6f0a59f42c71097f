//! Simplex projections for the constrained subproblems, and checkers for
//! the sufficiently scattered condition (SSC) on the rows of a basis
//! matrix.
//!
//! For a nonnegative basis `M` (I×K) the rows generate `cone(Mᵀ)`. SSC1
//! asks that the second-order cone `C = {y ≥ 0 : 1ᵀy ≥ √(K-1)‖y‖}` sits
//! inside that cone; equivalently the dual cone `{y : M y ≥ 0}` sits inside
//! `C* = {y : 1ᵀy ≥ ‖y‖}`. SSC2 asks that the dual cone only touches the
//! boundary of `C*` along the coordinate axes.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, VolNmfError};
use crate::linalg::{dot, norm2, spectral_bounds, Matrix};

/// Absolute tolerance for every cone-membership test. Inputs are expected
/// to be O(1) after normalization.
pub const CONE_TOL: f64 = 1e-10;

/// Where the sum-to-one constraint lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintPlacement {
    /// `M 1 = 1`
    MRowsSumOne,
    /// `Mᵀ 1 = 1`
    MColsSumOne,
    /// `H 1 = 1`
    HRowsSumOne,
    /// `Hᵀ 1 = 1`
    HColsSumOne,
    /// Only nonnegativity on both factors.
    NonnegOnly,
}

/// One of the two factors of `X ≈ M H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Factor {
    M,
    H,
}

impl ConstraintPlacement {
    pub const ALL: [ConstraintPlacement; 5] = [
        ConstraintPlacement::MRowsSumOne,
        ConstraintPlacement::MColsSumOne,
        ConstraintPlacement::HRowsSumOne,
        ConstraintPlacement::HColsSumOne,
        ConstraintPlacement::NonnegOnly,
    ];

    /// The factor carrying the sum-to-one constraint, if any.
    pub fn factor(self) -> Option<Factor> {
        match self {
            Self::MRowsSumOne | Self::MColsSumOne => Some(Factor::M),
            Self::HRowsSumOne | Self::HColsSumOne => Some(Factor::H),
            Self::NonnegOnly => None,
        }
    }

    /// The same constraint expressed for the transposed problem
    /// `Xᵀ ≈ Hᵀ Mᵀ`: the factors swap roles and rows become columns.
    pub fn transposed(self) -> Self {
        match self {
            Self::MRowsSumOne => Self::HColsSumOne,
            Self::MColsSumOne => Self::HRowsSumOne,
            Self::HRowsSumOne => Self::MColsSumOne,
            Self::HColsSumOne => Self::MRowsSumOne,
            Self::NonnegOnly => Self::NonnegOnly,
        }
    }

    pub fn cli_name(self) -> &'static str {
        match self {
            Self::MRowsSumOne => "m-rows",
            Self::MColsSumOne => "m-cols",
            Self::HRowsSumOne => "h-rows",
            Self::HColsSumOne => "h-cols",
            Self::NonnegOnly => "nonneg",
        }
    }
}

impl fmt::Display for ConstraintPlacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for ConstraintPlacement {
    type Err = VolNmfError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.cli_name() == s)
            .ok_or_else(|| VolNmfError::InvalidArgument(format!("unknown placement '{s}'")))
    }
}

/// Euclidean projection onto the probability simplex `{w ≥ 0, 1ᵀw = 1}`.
pub fn project_simplex_vector(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    let mut scratch = Vec::with_capacity(v.len());
    project_simplex_in_place(&mut out, &mut scratch);
    out
}

/// In-place sort-and-threshold simplex projection. `scratch` is reused
/// across calls to avoid allocation in inner loops.
pub fn project_simplex_in_place(v: &mut [f64], scratch: &mut Vec<f64>) {
    assert!(!v.is_empty(), "cannot project an empty vector");
    // Feasible points are returned bit-for-bit, which makes the projection
    // exactly idempotent.
    let mut sum = 0.0;
    let mut nonneg = true;
    for &x in v.iter() {
        sum += x;
        nonneg &= x >= 0.0;
    }
    if nonneg && (sum - 1.0).abs() <= 1e-12 {
        return;
    }

    scratch.clear();
    scratch.extend_from_slice(v);
    scratch.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (k, &u) in scratch.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            tau = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - tau).max(0.0);
    }
}

/// Projects `a` (one of the two factors) onto the feasible set described by
/// `placement`. Factors that do not carry the constraint are only clipped
/// at zero.
pub fn project_constraint(a: &Matrix, which: Factor, placement: ConstraintPlacement) -> Matrix {
    let mut out = a.clone();
    project_constraint_in_place(&mut out, which, placement);
    out
}

pub fn project_constraint_in_place(a: &mut Matrix, which: Factor, placement: ConstraintPlacement) {
    let mut scratch = Vec::new();
    let along_rows = match (placement, which) {
        (ConstraintPlacement::MRowsSumOne, Factor::M) | (ConstraintPlacement::HRowsSumOne, Factor::H) => {
            Some(true)
        }
        (ConstraintPlacement::MColsSumOne, Factor::M) | (ConstraintPlacement::HColsSumOne, Factor::H) => {
            Some(false)
        }
        _ => None,
    };
    match along_rows {
        None => {
            for v in a.as_mut_slice() {
                *v = v.max(0.0);
            }
        }
        Some(true) => {
            for i in 0..a.rows() {
                project_simplex_in_place(a.row_mut(i), &mut scratch);
            }
        }
        Some(false) => {
            let mut col = vec![0.0; a.rows()];
            for j in 0..a.cols() {
                for (i, c) in col.iter_mut().enumerate() {
                    *c = a[(i, j)];
                }
                project_simplex_in_place(&mut col, &mut scratch);
                a.set_col(j, &col);
            }
        }
    }
}

/// Largest deviation of the constrained rows/columns from summing to one,
/// together with the most negative entry of the factor.
pub fn constraint_violation(a: &Matrix, which: Factor, placement: ConstraintPlacement) -> f64 {
    let neg = (-a.min()).max(0.0);
    let sums = match (placement, which) {
        (ConstraintPlacement::MRowsSumOne, Factor::M) | (ConstraintPlacement::HRowsSumOne, Factor::H) => {
            a.row_sums()
        }
        (ConstraintPlacement::MColsSumOne, Factor::M) | (ConstraintPlacement::HColsSumOne, Factor::H) => {
            a.col_sums()
        }
        _ => Vec::new(),
    };
    sums.iter().map(|s| (s - 1.0).abs()).fold(neg, f64::max)
}

/// Verdict of one SSC condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SscVerdict {
    Holds,
    Violated,
    ProbablyHolds,
    NotChecked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SscMethod {
    ExactK3,
    Sampling,
}

/// Outcome of an SSC check.
///
/// `certificate` is present exactly when a verdict is `Violated`. When SSC1
/// fails it is a unit vector `y` with `M y ≥ 0` and `1ᵀy < ‖y‖`; when only
/// SSC2 fails it is a unit extreme ray lying on the boundary of `C*` that
/// is not a coordinate axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SscReport {
    pub ssc1: SscVerdict,
    pub ssc2: SscVerdict,
    pub certificate: Option<Vec<f64>>,
    pub method: SscMethod,
    pub samples_used: usize,
}

/// `M y ≥ -CONE_TOL` entrywise: `y` lies in the dual cone of `cone(Mᵀ)`.
pub fn in_dual_cone(generators: &Matrix, y: &[f64]) -> bool {
    (0..generators.rows()).all(|i| dot(generators.row(i), y) >= -CONE_TOL)
}

/// `1ᵀy ≥ ‖y‖ - CONE_TOL`: membership in the dual second-order cone `C*`.
pub fn in_dual_soc(y: &[f64]) -> bool {
    y.iter().sum::<f64>() >= norm2(y) - CONE_TOL
}

/// Membership in `C = {y ≥ 0 : 1ᵀy ≥ √(K-1)‖y‖}`.
pub fn in_soc(y: &[f64]) -> bool {
    let k = y.len() as f64;
    y.iter().all(|&v| v >= -CONE_TOL) && y.iter().sum::<f64>() >= (k - 1.0).sqrt() * norm2(y) - CONE_TOL
}

/// Whether `y` witnesses an SSC1 violation for the rows of `generators`.
pub fn is_ssc1_violation_witness(generators: &Matrix, y: &[f64]) -> bool {
    in_dual_cone(generators, y) && y.iter().sum::<f64>() < norm2(y) - CONE_TOL
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm2(v);
    (n > 0.0).then(|| v.iter().map(|x| x / n).collect())
}

fn estimated_rank(rows: &[Vec<f64>]) -> usize {
    let gram = Matrix::from_rows(rows).map(|m| m.gram());
    let Ok(g) = gram else { return 0 };
    let Ok(b) = spectral_bounds(&g) else { return 0 };
    if b.l_max <= 1e-24 {
        return 0;
    }
    if b.l_min > 1e-12 * b.l_max {
        return 3;
    }
    let any_independent_pair = rows
        .iter()
        .enumerate()
        .any(|(i, a)| rows[i + 1..].iter().any(|b| norm2(&cross(a, b)) > 1e-9));
    if any_independent_pair {
        2
    } else {
        1
    }
}

/// Extreme rays (unit vectors) of the dual cone `{y : M y ≥ 0}` of a rank-3
/// matrix with three columns, by intersecting pairs of constraint planes.
pub fn dual_cone_extreme_rays_k3(generators: &Matrix) -> Result<Vec<Vec<f64>>> {
    if generators.cols() != 3 {
        return Err(VolNmfError::ShapeMismatch(format!(
            "exact SSC check needs K = 3, got K = {}",
            generators.cols()
        )));
    }
    let rows: Vec<Vec<f64>> = (0..generators.rows())
        .filter_map(|i| normalized(generators.row(i)))
        .collect();
    let rank = estimated_rank(&rows);
    if rank < 3 {
        return Err(VolNmfError::RankDeficient { rank, required: 3 });
    }

    let mut rays: Vec<Vec<f64>> = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let c = cross(&rows[i], &rows[j]);
            let Some(y) = normalized(&c) else { continue };
            if norm2(&c) < 1e-12 {
                // Parallel generators do not define an edge.
                continue;
            }
            for sign in [1.0, -1.0] {
                let cand: Vec<f64> = y.iter().map(|v| sign * v).collect();
                if !rows.iter().all(|r| dot(r, &cand) >= -CONE_TOL) {
                    continue;
                }
                let duplicate = rays
                    .iter()
                    .any(|r| r.iter().zip(&cand).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() < 1e-18);
                if !duplicate {
                    rays.push(cand);
                }
            }
        }
    }
    if rays.is_empty() {
        return Err(VolNmfError::DegenerateRays);
    }
    Ok(rays)
}

/// Exact SSC1/SSC2 check for K = 3 by enumerating the extreme rays of the
/// dual cone. `generators` is the basis matrix `M` (rows generate
/// `cone(Mᵀ)`).
pub fn ssc_check_exact_k3(generators: &Matrix) -> Result<SscReport> {
    let rays = dual_cone_extreme_rays_k3(generators)?;

    let ssc1_witness = rays
        .iter()
        .find(|y| y.iter().sum::<f64>() < norm2(y) - CONE_TOL)
        .cloned();

    // C* is strictly convex away from its rays, so the dual cone can only
    // meet its boundary along extreme rays.
    let ssc2_witness = rays
        .iter()
        .find(|y| {
            let on_boundary = (y.iter().sum::<f64>() - norm2(y)).abs() <= CONE_TOL;
            let on_axis =
                y.iter().filter(|v| v.abs() > CONE_TOL).count() == 1 && y.iter().all(|&v| v >= -CONE_TOL);
            on_boundary && !on_axis
        })
        .cloned();

    let ssc1 = if ssc1_witness.is_some() {
        SscVerdict::Violated
    } else {
        SscVerdict::Holds
    };
    let ssc2 = if ssc2_witness.is_some() {
        SscVerdict::Violated
    } else {
        SscVerdict::Holds
    };
    Ok(SscReport {
        ssc1,
        ssc2,
        certificate: ssc1_witness.or(ssc2_witness),
        method: SscMethod::ExactK3,
        samples_used: rays.len(),
    })
}

/// Probabilistic SSC1 check for any K: samples directions uniformly on the
/// unit sphere and looks for a dual-cone member outside `C*`. A returned
/// certificate is a constructive witness; absence of one only means
/// `ProbablyHolds`.
pub fn ssc_check_sampling(generators: &Matrix, n_samples: usize, seed: u64) -> Result<SscReport> {
    let k = generators.cols();
    if k < 2 {
        return Err(VolNmfError::InvalidArgument(format!(
            "sampling SSC check needs K >= 2, got {k}"
        )));
    }
    if generators.min() < 0.0 {
        return Err(VolNmfError::InvalidArgument(
            "SSC generators must be nonnegative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = vec![0.0; k];
    for s in 0..n_samples {
        for v in y.iter_mut() {
            *v = StandardNormal.sample(&mut rng);
        }
        let n = norm2(&y);
        if n == 0.0 {
            continue;
        }
        y.iter_mut().for_each(|v| *v /= n);
        if is_ssc1_violation_witness(generators, &y) {
            return Ok(SscReport {
                ssc1: SscVerdict::Violated,
                ssc2: SscVerdict::NotChecked,
                certificate: Some(y),
                method: SscMethod::Sampling,
                samples_used: s + 1,
            });
        }
    }
    Ok(SscReport {
        ssc1: SscVerdict::ProbablyHolds,
        ssc2: SscVerdict::NotChecked,
        certificate: None,
        method: SscMethod::Sampling,
        samples_used: n_samples,
    })
}
