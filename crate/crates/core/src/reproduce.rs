//! Desk-scale reruns of the synthetic and time-allocation experiments.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{
    generate_synthetic, k1_reference, load_time_allocation, normalize_columns, write_csv, Dataset,
    SyntheticSetting, SyntheticSpec,
};
use crate::error::{Result, VolNmfError};
use crate::eval::{align_basis, metrics_report, DEFAULT_DELTA_METRIC};
use crate::linalg::Matrix;
use crate::solver::{is_non_increasing, solve_best_of, Method, SolveResult, SolverConfig};

pub const LAMBDA_SWEEP: [f64; 4] = [0.01, 0.05, 0.1, 0.5];
pub const MONOTONE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceOptions {
    /// Seed for data generation; restarts use `solver_seed`, `solver_seed + 1`, ...
    pub seed: u64,
    pub solver_seed: u64,
    pub restarts: usize,
    pub sweep: Vec<f64>,
    pub delta_metric: f64,
    /// Template for every solve; `k`, `lambda_prime` and `seed` are overridden.
    pub base: SolverConfig,
    /// Off-vertex weight of the synthetic SSC block.
    pub beta: f64,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            solver_seed: 100,
            restarts: 5,
            sweep: LAMBDA_SWEEP.to_vec(),
            delta_metric: DEFAULT_DELTA_METRIC,
            base: SolverConfig::default(),
            beta: SyntheticSpec::DEFAULT_BETA,
        }
    }
}

impl ReproduceOptions {
    fn config(&self, k: usize, lambda_prime: f64) -> SolverConfig {
        SolverConfig {
            k,
            lambda_prime,
            seed: self.solver_seed,
            ..self.base.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.sweep.is_empty() {
            return Err(VolNmfError::InvalidArgument("empty lambda_prime sweep".into()));
        }
        self.base.validate()
    }
}

/// One sweep cell of the synthetic experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixBRow {
    pub setting: SyntheticSetting,
    pub method: Method,
    pub lambda_prime: f64,
    pub volume_logdet: f64,
    /// `None` when a basis column collapsed to zero.
    pub aligned_error: Option<f64>,
    pub fit_rel: f64,
    pub converged: bool,
    pub monotone: bool,
    pub selected: bool,
}

#[derive(Debug, Clone)]
pub struct AppendixBSummary {
    pub rows: Vec<AppendixBRow>,
    /// Ground-truth volume per setting, in [`SyntheticSetting::ALL`] order.
    pub truth_volumes: Vec<f64>,
    /// Solve results aligned with `rows`.
    pub solves: Vec<SolveResult>,
}

impl AppendixBSummary {
    pub fn selected(&self, setting: SyntheticSetting, method: Method) -> Option<&AppendixBRow> {
        self.rows
            .iter()
            .find(|r| r.selected && r.setting == setting && r.method == method)
    }

    /// Settings whose selected cell does not have MAV volume above MVC volume.
    pub fn ordering_failures(&self) -> Vec<SyntheticSetting> {
        SyntheticSetting::ALL
            .into_iter()
            .filter(
                |&s| match (self.selected(s, Method::Mvc), self.selected(s, Method::Mav)) {
                    (Some(mvc), Some(mav)) => !(mav.volume_logdet > mvc.volume_logdet),
                    _ => true,
                },
            )
            .collect()
    }
}

fn cell(rows: &[AppendixBRow], s: SyntheticSetting, m: Method, lp: f64) -> &AppendixBRow {
    rows.iter()
        .find(|r| r.setting == s && r.method == m && r.lambda_prime == lp)
        .expect("every sweep cell is populated")
}

/// Per setting, flags the λ′ whose MAV run has the smallest aligned error
/// among cells where MAV ends with the larger volume.
fn select_appendix_b(rows: &mut [AppendixBRow], sweep: &[f64]) {
    for s in SyntheticSetting::ALL {
        let score = |lp: f64| {
            let mav = cell(rows, s, Method::Mav, lp);
            let mvc = cell(rows, s, Method::Mvc, lp);
            let ordered = mav.volume_logdet > mvc.volume_logdet;
            (!ordered, mav.aligned_error.unwrap_or(f64::INFINITY))
        };
        let mut best = sweep[0];
        for &lp in &sweep[1..] {
            if score(lp) < score(best) {
                best = lp;
            }
        }
        for r in rows
            .iter_mut()
            .filter(|r| r.setting == s && r.lambda_prime == best)
        {
            r.selected = true;
        }
    }
}

/// The three settings share one seed, and therefore one basis. Every
/// (setting, λ′, method) cell is solved with best-of-`restarts`.
pub fn run_appendix_b(opts: &ReproduceOptions) -> Result<AppendixBSummary> {
    opts.validate()?;
    let datasets: Vec<Dataset> = SyntheticSetting::ALL
        .into_iter()
        .map(|setting| {
            let spec = SyntheticSpec {
                beta: opts.beta,
                ..SyntheticSpec::new(setting, opts.seed)
            };
            generate_synthetic(&spec)
        })
        .collect::<Result<_>>()?;
    let truth_volumes = datasets
        .iter()
        .map(|d| crate::eval::volume_logdet(d.m_true.as_ref().unwrap(), opts.delta_metric))
        .collect::<Result<Vec<_>>>()?;

    let cells: Vec<(usize, f64, Method)> = (0..datasets.len())
        .flat_map(|s| {
            opts.sweep
                .iter()
                .flat_map(move |&lp| [Method::Mvc, Method::Mav].map(|m| (s, lp, m)))
        })
        .collect();
    let outcomes: Vec<(AppendixBRow, SolveResult)> = cells
        .par_iter()
        .map(|&(s, lp, method)| {
            let d = &datasets[s];
            let m_true = d.m_true.as_ref().unwrap();
            let r = solve_best_of(&d.x, method, &opts.config(3, lp), opts.restarts)?;
            let metrics = metrics_report(&d.x, &r.m, &r.h, opts.delta_metric)?;
            let aligned_error = match align_basis(&r.m, m_true) {
                Ok(a) => Some(a.mean_abs_error),
                Err(VolNmfError::ColumnCollapse(_)) => None,
                Err(e) => return Err(e),
            };
            let row = AppendixBRow {
                setting: SyntheticSetting::ALL[s],
                method,
                lambda_prime: lp,
                volume_logdet: metrics.volume_logdet,
                aligned_error,
                fit_rel: metrics.fit_rel,
                converged: r.converged,
                monotone: is_non_increasing(&r.objective_history, MONOTONE_SLACK),
                selected: false,
            };
            Ok((row, r))
        })
        .collect::<Result<_>>()?;
    let (mut rows, solves): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
    select_appendix_b(&mut rows, &opts.sweep);
    Ok(AppendixBSummary {
        rows,
        truth_volumes,
        solves,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:?}"))
}

/// Writes `appendix_b_summary.csv` and returns its path.
pub fn write_appendix_b(summary: &AppendixBSummary, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let path = out_dir.join("appendix_b_summary.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| VolNmfError::Io(e.to_string()))?;
    let io = |e: csv::Error| VolNmfError::Io(e.to_string());
    w.write_record([
        "setting",
        "method",
        "lambda_prime",
        "volume_logdet",
        "aligned_error",
        "fit_rel",
        "converged",
        "selected",
    ])
    .map_err(io)?;
    for r in &summary.rows {
        w.write_record([
            r.setting.name().to_owned(),
            r.method.name().to_owned(),
            format!("{:?}", r.lambda_prime),
            format!("{:?}", r.volume_logdet),
            fmt_opt(r.aligned_error),
            format!("{:?}", r.fit_rel),
            r.converged.to_string(),
            r.selected.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(vec![path])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeAllocationRow {
    pub method: Method,
    pub lambda_prime: f64,
    pub volume_logdet: f64,
    pub fit_rel: f64,
    pub sparsity_m: usize,
    pub sparsity_h: usize,
    pub converged: bool,
    pub monotone: bool,
    pub selected: bool,
}

#[derive(Debug, Clone)]
pub struct TimeAllocationSummary {
    /// Column-normalized data.
    pub x: Matrix,
    pub activities: Vec<String>,
    pub groups: Vec<String>,
    /// Rank-one reference basis (row means).
    pub k1_basis: Matrix,
    pub rows: Vec<TimeAllocationRow>,
    /// Solve results aligned with `rows`.
    pub solves: Vec<SolveResult>,
}

impl TimeAllocationSummary {
    fn selected_index(&self, method: Method) -> Option<usize> {
        self.rows.iter().position(|r| r.selected && r.method == method)
    }

    pub fn selected(&self, method: Method) -> Option<(&TimeAllocationRow, &SolveResult)> {
        self.selected_index(method)
            .map(|i| (&self.rows[i], &self.solves[i]))
    }

    pub fn ordering_holds(&self) -> bool {
        match (self.selected(Method::Mvc), self.selected(Method::Mav)) {
            (Some((mvc, _)), Some((mav, _))) => mav.volume_logdet > mvc.volume_logdet,
            _ => false,
        }
    }
}

/// K = 3 MVC and MAV over the λ′ sweep on the normalized time-allocation
/// table, plus the rank-one reference. The smallest λ′ at which MAV ends
/// with the larger volume is selected.
pub fn run_time_allocation(opts: &ReproduceOptions) -> Result<TimeAllocationSummary> {
    opts.validate()?;
    let data = load_time_allocation()?;
    let x = normalize_columns(&data.x)?;
    let (k1_basis, _) = k1_reference(&data.x)?;

    let cells: Vec<(f64, Method)> = opts
        .sweep
        .iter()
        .flat_map(|&lp| [Method::Mvc, Method::Mav].map(|m| (lp, m)))
        .collect();
    let outcomes: Vec<(TimeAllocationRow, SolveResult)> = cells
        .par_iter()
        .map(|&(lp, method)| {
            let r = solve_best_of(&x, method, &opts.config(3, lp), opts.restarts)?;
            let metrics = metrics_report(&x, &r.m, &r.h, opts.delta_metric)?;
            let row = TimeAllocationRow {
                method,
                lambda_prime: lp,
                volume_logdet: metrics.volume_logdet,
                fit_rel: metrics.fit_rel,
                sparsity_m: metrics.sparsity_m,
                sparsity_h: metrics.sparsity_h,
                converged: r.converged,
                monotone: is_non_increasing(&r.objective_history, MONOTONE_SLACK),
                selected: false,
            };
            Ok((row, r))
        })
        .collect::<Result<_>>()?;
    let (mut rows, solves): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();

    let vol = |rows: &[TimeAllocationRow], m: Method, lp: f64| {
        rows.iter()
            .find(|r| r.method == m && r.lambda_prime == lp)
            .map(|r| r.volume_logdet)
            .unwrap()
    };
    let chosen = opts
        .sweep
        .iter()
        .copied()
        .find(|&lp| vol(&rows, Method::Mav, lp) > vol(&rows, Method::Mvc, lp))
        .unwrap_or(opts.sweep[0]);
    for r in rows.iter_mut().filter(|r| r.lambda_prime == chosen) {
        r.selected = true;
    }

    Ok(TimeAllocationSummary {
        x,
        activities: data.row_labels.unwrap_or_default(),
        groups: data.col_labels.unwrap_or_default(),
        k1_basis,
        rows,
        solves,
    })
}

/// Writes the basis and coefficient tables (K = 1 reference, then the
/// selected MVC and MAV factors) and the volume summary.
pub fn write_time_allocation(summary: &TimeAllocationSummary, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (Some((_, mvc)), Some((_, mav))) = (summary.selected(Method::Mvc), summary.selected(Method::Mav))
    else {
        return Err(VolNmfError::InvalidArgument("no selected sweep cell".into()));
    };
    let columns: Vec<String> = std::iter::once("k1".to_owned())
        .chain((1..=3).map(|k| format!("mvc{k}")))
        .chain((1..=3).map(|k| format!("mav{k}")))
        .collect();

    let i = summary.k1_basis.rows();
    let basis = Matrix::from_fn(i, 7, |r, c| match c {
        0 => summary.k1_basis[(r, 0)],
        1..=3 => mvc.m[(r, c - 1)],
        _ => mav.m[(r, c - 4)],
    });
    let j = mvc.h.cols();
    let coeffs = Matrix::from_fn(j, 7, |r, c| match c {
        0 => 1.0,
        1..=3 => mvc.h[(c - 1, r)],
        _ => mav.h[(c - 4, r)],
    });
    let labelled = |x: Matrix, rows: &[String]| Dataset {
        row_labels: (rows.len() == x.rows()).then(|| rows.to_vec()),
        col_labels: Some(columns.clone()),
        ..Dataset::from_matrix(x)
    };
    let basis_path = out_dir.join("time_allocation_basis.csv");
    write_csv(&labelled(basis, &summary.activities), &basis_path)?;
    let coeff_path = out_dir.join("time_allocation_coefficients.csv");
    write_csv(&labelled(coeffs, &summary.groups), &coeff_path)?;

    let vol_path = out_dir.join("time_allocation_volumes.csv");
    let mut w = csv::Writer::from_path(&vol_path).map_err(|e| VolNmfError::Io(e.to_string()))?;
    let io = |e: csv::Error| VolNmfError::Io(e.to_string());
    w.write_record([
        "method",
        "lambda_prime",
        "volume_logdet",
        "fit_rel",
        "sparsity_m",
        "sparsity_h",
        "converged",
        "selected",
    ])
    .map_err(io)?;
    for r in &summary.rows {
        w.write_record([
            r.method.name().to_owned(),
            format!("{:?}", r.lambda_prime),
            format!("{:?}", r.volume_logdet),
            format!("{:?}", r.fit_rel),
            r.sparsity_m.to_string(),
            r.sparsity_h.to_string(),
            r.converged.to_string(),
            r.selected.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(vec![basis_path, coeff_path, vol_path])
}
