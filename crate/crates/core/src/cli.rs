//! Command implementations behind the `volnmf` binary. Each command writes
//! its outputs plus a `manifest.json` that [`replay`] can rerun.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::datagen::{
    generate_synthetic, read_matrix_csv, write_matrix_csv, SyntheticSetting, SyntheticSpec,
};
use crate::error::VolNmfError;
use crate::eval::{align_basis, metrics_report, AlignmentResult, MetricsReport};
use crate::linalg::Matrix;
use crate::plot::{build_simplex_plot, render_svg, PlotData};
use crate::reproduce::{
    run_appendix_b, run_time_allocation, write_appendix_b, write_time_allocation, ReproduceOptions,
};
use crate::solver::{solve_best_of, Method, SolveResult, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;
pub const EXIT_ORDERING: i32 = 5;

pub const MANIFEST_FILE: &str = "manifest.json";

/// A failure with the process exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    fn usage(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }

    fn runtime(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_RUNTIME,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Successful (or partially successful) command run.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub code: i32,
    /// Text for standard output.
    pub stdout: String,
    pub manifest: Option<RunManifest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Solver template, when the command solves anything.
    pub config: Option<SolverConfig>,
    pub dataset_id: String,
    pub seed: u64,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
    pub metrics: Option<MetricsReport>,
    pub wall_time_ms: u64,
    /// The command's full argument set.
    pub args: serde_json::Value,
}

impl RunManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, VolNmfError> {
        let text = fs::read_to_string(path.as_ref())?;
        serde_json::from_str(&text).map_err(|e| VolNmfError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("{}: {e}", dir.display())))
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map_or_else(String::new, |n| n.to_string_lossy().into_owned())
}

fn write_manifest(out: &Path, manifest: &RunManifest) -> CliResult<()> {
    let text = serde_json::to_string_pretty(manifest).map_err(CliError::runtime)?;
    fs::write(out.join(MANIFEST_FILE), text + "\n").map_err(CliError::runtime)
}

fn load_input(path: &Path) -> CliResult<Matrix> {
    read_matrix_csv(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn file_id(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let hex: String = Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    Ok(format!("file:{}:sha256={hex}", file_name(path)))
}

fn elapsed_ms(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateArgs {
    pub setting: SyntheticSetting,
    pub i: usize,
    pub j: usize,
    pub seed: u64,
    pub beta: f64,
    pub out: PathBuf,
}

impl GenerateArgs {
    pub fn new(setting: SyntheticSetting, seed: u64, out: impl Into<PathBuf>) -> Self {
        let spec = SyntheticSpec::new(setting, seed);
        Self {
            setting,
            i: spec.i,
            j: spec.j,
            seed,
            beta: spec.beta,
            out: out.into(),
        }
    }
}

/// Writes `X.csv`, `M_true.csv`, `H_true.csv` and the manifest.
pub fn cmd_generate(args: &GenerateArgs) -> CliResult<CommandOutput> {
    let start = Instant::now();
    let spec = SyntheticSpec {
        i: args.i,
        j: args.j,
        beta: args.beta,
        ..SyntheticSpec::new(args.setting, args.seed)
    };
    spec.validate().map_err(CliError::usage)?;
    let d = generate_synthetic(&spec).map_err(CliError::runtime)?;
    ensure_dir(&args.out)?;
    let mut outputs = Vec::new();
    for (name, m) in [
        ("X.csv", &d.x),
        ("M_true.csv", d.m_true.as_ref().unwrap()),
        ("H_true.csv", d.h_true.as_ref().unwrap()),
    ] {
        write_matrix_csv(m, args.out.join(name)).map_err(CliError::runtime)?;
        outputs.push(name.to_owned());
    }
    let manifest = RunManifest {
        command: "generate".into(),
        config: None,
        dataset_id: format!(
            "synthetic:{}:{}x{}:beta={:?}:seed={}",
            args.setting, args.i, args.j, args.beta, args.seed
        ),
        seed: args.seed,
        outputs,
        metrics: None,
        wall_time_ms: elapsed_ms(start),
        args: serde_json::to_value(args).map_err(CliError::runtime)?,
    };
    write_manifest(&args.out, &manifest)?;
    Ok(CommandOutput {
        code: EXIT_OK,
        stdout: format!(
            "wrote {} ({}x{})\n",
            args.out.join("X.csv").display(),
            args.i,
            args.j
        ),
        manifest: Some(manifest),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveArgs {
    pub x: PathBuf,
    pub method: Method,
    pub config: SolverConfig,
    pub restarts: usize,
    pub delta_metric: f64,
    pub out: PathBuf,
}

fn write_history(r: &SolveResult, path: &Path) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(CliError::runtime)?;
    w.write_record(["iteration", "objective", "fit", "volume"])
        .map_err(CliError::runtime)?;
    for (t, ((o, f), v)) in r
        .objective_history
        .iter()
        .zip(&r.fit_history)
        .zip(&r.volume_history)
        .enumerate()
    {
        w.write_record([
            (t + 1).to_string(),
            format!("{o:?}"),
            format!("{f:?}"),
            format!("{v:?}"),
        ])
        .map_err(CliError::runtime)?;
    }
    w.flush().map_err(CliError::runtime)
}

/// Best-of-restarts solve writing `M.csv`, `H.csv`, `history.csv` and the
/// manifest. Exit code 3 when the best run hit `max_outer`.
pub fn cmd_solve(args: &SolveArgs) -> CliResult<CommandOutput> {
    let start = Instant::now();
    let x = load_input(&args.x)?;
    let dataset_id = file_id(&args.x)?;
    args.config.validate().map_err(CliError::usage)?;
    let min_dim = x.rows().min(x.cols());
    if args.config.k > min_dim {
        return Err(CliError::usage(format!(
            "k = {} exceeds min(rows, cols) = {min_dim}",
            args.config.k
        )));
    }
    let r = solve_best_of(&x, args.method, &args.config, args.restarts).map_err(CliError::runtime)?;
    let metrics = metrics_report(&x, &r.m, &r.h, args.delta_metric).map_err(CliError::runtime)?;

    ensure_dir(&args.out)?;
    write_matrix_csv(&r.m, args.out.join("M.csv")).map_err(CliError::runtime)?;
    write_matrix_csv(&r.h, args.out.join("H.csv")).map_err(CliError::runtime)?;
    write_history(&r, &args.out.join("history.csv"))?;
    let manifest = RunManifest {
        command: "solve".into(),
        config: Some(args.config.clone()),
        dataset_id,
        seed: args.config.seed,
        outputs: ["M.csv", "H.csv", "history.csv"].map(String::from).to_vec(),
        metrics: Some(metrics.clone()),
        wall_time_ms: elapsed_ms(start),
        args: serde_json::to_value(args).map_err(CliError::runtime)?,
    };
    write_manifest(&args.out, &manifest)?;

    let mut stdout = format!(
        "{} k={} lambda'={} iterations={} converged={} fit_rel={:.6e} volume_logdet={:.6}\n",
        args.method,
        args.config.k,
        args.config.lambda_prime,
        r.iterations_run,
        r.converged,
        metrics.fit_rel,
        metrics.volume_logdet
    );
    for w in &r.warnings {
        stdout += &format!("warning: {w}\n");
    }
    Ok(CommandOutput {
        code: if r.converged { EXIT_OK } else { EXIT_NOT_CONVERGED },
        stdout,
        manifest: Some(manifest),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateArgs {
    pub m: PathBuf,
    pub h: PathBuf,
    pub x: PathBuf,
    pub m_true: Option<PathBuf>,
    pub delta_metric: f64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub metrics: MetricsReport,
    pub alignment: Option<AlignmentResult>,
}

/// Prints the metrics (and the alignment when a truth is given) as JSON and
/// stores the same document in `report.json`.
pub fn cmd_evaluate(args: &EvaluateArgs) -> CliResult<CommandOutput> {
    let m = load_input(&args.m)?;
    let h = load_input(&args.h)?;
    let x = load_input(&args.x)?;
    let m_true = args.m_true.as_deref().map(load_input).transpose()?;
    if !(args.delta_metric >= 0.0) {
        return Err(CliError::usage(format!(
            "delta-metric must be nonnegative, got {}",
            args.delta_metric
        )));
    }
    let metrics = metrics_report(&x, &m, &h, args.delta_metric).map_err(CliError::runtime)?;
    let alignment = m_true
        .as_ref()
        .map(|t| align_basis(&m, t))
        .transpose()
        .map_err(CliError::runtime)?;
    let report = EvaluationReport { metrics, alignment };
    let text = serde_json::to_string_pretty(&report).map_err(CliError::runtime)? + "\n";
    ensure_dir(&args.out)?;
    fs::write(args.out.join("report.json"), &text).map_err(CliError::runtime)?;
    Ok(CommandOutput {
        code: EXIT_OK,
        stdout: text,
        manifest: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Experiment {
    AppendixB,
    TimeAllocation,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::AppendixB => "appendix-b",
            Experiment::TimeAllocation => "time-allocation",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = VolNmfError;

    fn from_str(s: &str) -> Result<Self, VolNmfError> {
        match s {
            "appendix-b" => Ok(Experiment::AppendixB),
            "time-allocation" => Ok(Experiment::TimeAllocation),
            other => Err(VolNmfError::InvalidArgument(format!(
                "unknown experiment '{other}', expected appendix-b or time-allocation"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproduceArgs {
    pub experiment: Experiment,
    pub options: ReproduceOptions,
    pub out: PathBuf,
}

/// Runs one experiment and writes its summary tables. Exit code 5 when MAV
/// does not end with the larger volume.
pub fn cmd_reproduce(args: &ReproduceArgs) -> CliResult<CommandOutput> {
    let start = Instant::now();
    let opts = &args.options;
    ensure_dir(&args.out)?;
    let mut stdout = String::new();
    let (files, ordering_ok, dataset_id) = match args.experiment {
        Experiment::AppendixB => {
            let s = run_appendix_b(opts).map_err(CliError::runtime)?;
            let files = write_appendix_b(&s, &args.out).map_err(CliError::runtime)?;
            stdout += "setting,method,lambda_prime,volume_logdet,aligned_error\n";
            for r in s.rows.iter().filter(|r| r.selected) {
                stdout += &format!(
                    "{},{},{},{:.4},{}\n",
                    r.setting,
                    r.method,
                    r.lambda_prime,
                    r.volume_logdet,
                    r.aligned_error.map_or("collapsed".into(), |e| format!("{e:.4}"))
                );
            }
            let failures = s.ordering_failures();
            for f in &failures {
                stdout += &format!("ordering failure: MAV volume not above MVC volume in {f}\n");
            }
            let id = format!("synthetic:all-settings:beta={:?}:seed={}", opts.beta, opts.seed);
            (files, failures.is_empty(), id)
        }
        Experiment::TimeAllocation => {
            let s = run_time_allocation(opts).map_err(CliError::runtime)?;
            let files = write_time_allocation(&s, &args.out).map_err(CliError::runtime)?;
            stdout += &format!("k1 paidwork {:.4}\n", s.k1_basis[(0, 0)]);
            for r in s.rows.iter().filter(|r| r.selected) {
                stdout += &format!(
                    "{} lambda'={} volume_logdet={:.4}\n",
                    r.method, r.lambda_prime, r.volume_logdet
                );
            }
            let ok = s.ordering_holds();
            if !ok {
                stdout += "ordering failure: MAV volume not above MVC volume\n";
            }
            (files, ok, "bundled:time-allocation".to_owned())
        }
    };
    let manifest = RunManifest {
        command: "reproduce".into(),
        config: Some(opts.base.clone()),
        dataset_id,
        seed: opts.seed,
        outputs: files.iter().map(|p| file_name(p)).collect(),
        metrics: None,
        wall_time_ms: elapsed_ms(start),
        args: serde_json::to_value(args).map_err(CliError::runtime)?,
    };
    write_manifest(&args.out, &manifest)?;
    Ok(CommandOutput {
        code: if ordering_ok { EXIT_OK } else { EXIT_ORDERING },
        stdout,
        manifest: Some(manifest),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotArgs {
    pub m_est: PathBuf,
    pub m_true: Option<PathBuf>,
    /// Coefficients whose columns are plotted directly.
    pub h_true: Option<PathBuf>,
    /// Observations, used when no coefficients are given.
    pub x: Option<PathBuf>,
    pub out_svg: PathBuf,
}

/// Unit-sum slice plot of a rank-three factorization.
pub fn cmd_plot_simplex(args: &PlotArgs) -> CliResult<CommandOutput> {
    let m_est = load_input(&args.m_est)?;
    let m_true = args.m_true.as_deref().map(load_input).transpose()?;
    let (data, is_coeff) = match (&args.h_true, &args.x) {
        (Some(h), _) => (load_input(h)?, true),
        (None, Some(x)) => (load_input(x)?, false),
        (None, None) => return Err(CliError::usage("need coefficients or observations to plot")),
    };
    let data = if is_coeff {
        PlotData::Coefficients(&data)
    } else {
        PlotData::Observations(&data)
    };
    let plot = build_simplex_plot(&m_est, m_true.as_ref(), data).map_err(CliError::runtime)?;
    if let Some(parent) = args.out_svg.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    fs::write(&args.out_svg, render_svg(&plot)).map_err(CliError::runtime)?;
    Ok(CommandOutput {
        code: EXIT_OK,
        stdout: format!(
            "wrote {} ({} points)\n",
            args.out_svg.display(),
            plot.points.len()
        ),
        manifest: None,
    })
}

/// Reruns the command recorded in a manifest, writing into `out`.
pub fn replay(manifest: &RunManifest, out: &Path) -> CliResult<CommandOutput> {
    let bad = |e: serde_json::Error| CliError::usage(format!("manifest arguments: {e}"));
    match manifest.command.as_str() {
        "generate" => {
            let mut a: GenerateArgs = serde_json::from_value(manifest.args.clone()).map_err(bad)?;
            a.out = out.to_path_buf();
            cmd_generate(&a)
        }
        "solve" => {
            let mut a: SolveArgs = serde_json::from_value(manifest.args.clone()).map_err(bad)?;
            a.out = out.to_path_buf();
            cmd_solve(&a)
        }
        "reproduce" => {
            let mut a: ReproduceArgs = serde_json::from_value(manifest.args.clone()).map_err(bad)?;
            a.out = out.to_path_buf();
            cmd_reproduce(&a)
        }
        other => Err(CliError::usage(format!("cannot replay command '{other}'"))),
    }
}
