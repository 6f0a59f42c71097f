use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use volnmf::cli::{
    cmd_evaluate, cmd_generate, cmd_plot_simplex, cmd_reproduce, cmd_solve, replay, EvaluateArgs, Experiment,
    GenerateArgs, PlotArgs, ReproduceArgs, RunManifest, SolveArgs, EXIT_USAGE,
};
use volnmf::datagen::{SyntheticSetting, SyntheticSpec};
use volnmf::eval::DEFAULT_DELTA_METRIC;
use volnmf::geometry::ConstraintPlacement;
use volnmf::reproduce::{ReproduceOptions, LAMBDA_SWEEP};
use volnmf::solver::{Method, SolverConfig};

#[derive(Parser)]
#[command(name = "volnmf", version, about = "Minimum- and maximum-volume NMF")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SolverFlags {
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0.1)]
    lambda_prime: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 500)]
    max_outer: usize,
    #[arg(long, default_value_t = 50)]
    inner_iter: usize,
    #[arg(long, default_value = "h-cols")]
    placement: ConstraintPlacement,
}

impl SolverFlags {
    fn config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            k: self.k,
            lambda_prime: self.lambda_prime,
            delta: self.delta,
            max_outer: self.max_outer,
            inner_iter: self.inner_iter,
            seed,
            placement: self.placement,
            ..SolverConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with known factors.
    Generate {
        #[arg(long, default_value = "three-dense-rows")]
        setting: SyntheticSetting,
        #[arg(long, default_value_t = 9)]
        i: usize,
        #[arg(long, default_value_t = 500)]
        j: usize,
        #[arg(long, env = "VOLNMF_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = SyntheticSpec::DEFAULT_BETA)]
        beta: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Factorize a CSV matrix.
    Solve {
        x: PathBuf,
        #[arg(long, default_value = "mav")]
        method: Method,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long, env = "VOLNMF_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_DELTA_METRIC)]
        delta_metric: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Report fit, volume and sparsity of a factorization.
    Evaluate {
        #[arg(long)]
        m: PathBuf,
        #[arg(long)]
        h: PathBuf,
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        m_true: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_DELTA_METRIC)]
        delta_metric: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Rerun a published experiment (appendix-b or time-allocation).
    Reproduce {
        experiment: Experiment,
        #[arg(long, env = "VOLNMF_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        solver_seed: u64,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
        /// λ′ values to sweep.
        #[arg(long, value_delimiter = ',', default_values_t = LAMBDA_SWEEP)]
        sweep: Vec<f64>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 500)]
        max_outer: usize,
        #[arg(long, default_value_t = 50)]
        inner_iter: usize,
        #[arg(long, default_value_t = DEFAULT_DELTA_METRIC)]
        delta_metric: f64,
        #[arg(long, default_value_t = SyntheticSpec::DEFAULT_BETA)]
        beta: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Draw the unit-sum slice of a rank-three factorization as SVG.
    PlotSimplex {
        #[arg(long)]
        m_est: PathBuf,
        #[arg(long)]
        m_true: Option<PathBuf>,
        #[arg(long)]
        h_true: Option<PathBuf>,
        #[arg(long)]
        x: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rerun the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(command: Command) -> Result<volnmf::cli::CommandOutput, volnmf::cli::CliError> {
    match command {
        Command::Generate {
            setting,
            i,
            j,
            seed,
            beta,
            out,
        } => cmd_generate(&GenerateArgs {
            setting,
            i,
            j,
            seed,
            beta,
            out,
        }),
        Command::Solve {
            x,
            method,
            solver,
            seed,
            restarts,
            delta_metric,
            out,
        } => cmd_solve(&SolveArgs {
            x,
            method,
            config: solver.config(seed),
            restarts,
            delta_metric,
            out,
        }),
        Command::Evaluate {
            m,
            h,
            x,
            m_true,
            delta_metric,
            out,
        } => cmd_evaluate(&EvaluateArgs {
            m,
            h,
            x,
            m_true,
            delta_metric,
            out,
        }),
        Command::Reproduce {
            experiment,
            seed,
            solver_seed,
            restarts,
            sweep,
            delta,
            max_outer,
            inner_iter,
            delta_metric,
            beta,
            out,
        } => cmd_reproduce(&ReproduceArgs {
            experiment,
            options: ReproduceOptions {
                seed,
                solver_seed,
                restarts,
                sweep,
                delta_metric,
                base: SolverConfig {
                    delta,
                    max_outer,
                    inner_iter,
                    ..SolverConfig::default()
                },
                beta,
            },
            out,
        }),
        Command::PlotSimplex {
            m_est,
            m_true,
            h_true,
            x,
            out,
        } => cmd_plot_simplex(&PlotArgs {
            m_est,
            m_true,
            h_true,
            x,
            out_svg: out,
        }),
        Command::Replay { manifest, out } => {
            let m = RunManifest::load(&manifest).map_err(|e| volnmf::cli::CliError {
                code: EXIT_USAGE,
                message: format!("{}: {e}", manifest.display()),
            })?;
            replay(&m, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
