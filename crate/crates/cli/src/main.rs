//! `expsum` command line. Each subcommand parses flags, calls the library
//! and prints its output.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use expsum::exp_sums::{certificate_check, kernel_profile, FrequencyDraw};
use expsum::experiments::{run_experiment, write_outputs, ExperimentConfig};
use expsum::group_fourier::Signal;
use expsum::omega_models::{sample_omega, size_distribution, ModelKind, OmegaModel};
use expsum::parallel::{with_threads, Execution};
use expsum::recovery::{basis_pursuit, measure, MeasurementSet, SolverConfig};
use expsum::tail_bounds::{evaluate, paper_example_table, table_to_csv, BoundName, BoundQuery};
use serde::Serialize;

const MAX_M: u64 = 1_000_000_000;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] expsum::Error),
    #[error("dominance or recovery assertion failed; see {0}")]
    Assertion(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Assertion(_) => 3,
            _ => 2,
        }
    }
}

type CliResult = Result<String, CliError>;

#[derive(Parser)]
#[command(
    name = "expsum",
    version,
    about = "Random exponential sums, tail bounds and sparse recovery on Z_N"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a named tail bound.
    Bounds(BoundsArgs),
    /// Draw a random frequency set, or print the law of its size.
    Sample(SampleArgs),
    /// Kernel certificate of a frequency draw.
    Certify(CertifyArgs),
    /// Basis pursuit from partial Fourier data.
    Recover(RecoverArgs),
    /// Run a configured Monte Carlo experiment.
    Experiment(ExperimentArgs),
    /// The (C, n, p) table for the sparse-recovery bound.
    PaperTable(TableArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    name: String,
    #[arg(long = "N")]
    modulus: Option<usize>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long = "M")]
    max_m: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    nu: Option<u32>,
    #[arg(long = "C")]
    c: Option<f64>,
    #[arg(long = "T")]
    t: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ModelArg {
    UniformSubset,
    BernoulliSelection,
    OccupationRange,
    PoissonProcess,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long = "N")]
    modulus: usize,
    /// Subset size (uniform_subset).
    #[arg(long)]
    f: Option<usize>,
    /// Selection rate (bernoulli_selection, poisson_process).
    #[arg(long)]
    tau: Option<f64>,
    /// Number of draws (occupation_range).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the size distribution as CSV instead of a sample.
    #[arg(long)]
    distribution: bool,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long = "N")]
    modulus: usize,
    #[arg(long = "T")]
    t: u64,
    /// Explicit draw, comma separated (repeats allowed).
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["n", "seed"])]
    points: Option<Vec<usize>>,
    /// Number of uniform draws to sample.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RecoverArgs {
    /// MeasurementSet JSON file.
    #[arg(long, conflicts_with_all = ["signal", "omega"])]
    measurements: Option<PathBuf>,
    /// Signal JSON file, measured on --omega.
    #[arg(long, requires = "omega")]
    signal: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    omega: Option<Vec<usize>>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (parallel builds).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long = "N", default_value_t = 997)]
    modulus: usize,
    #[arg(long = "T", default_value_t = 2)]
    t: u64,
    #[arg(long = "C", value_delimiter = ',', default_values_t = [2.0, 3.0])]
    c: Vec<f64>,
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("--{flag} is required for this model")))
}

fn cmd_bounds(a: BoundsArgs) -> CliResult {
    let name: BoundName = a.name.parse()?;
    if a.max_m.is_some_and(|m| m > MAX_M) {
        return Err(CliError::Usage(format!("--M is capped at {MAX_M}")));
    }
    let query = BoundQuery {
        modulus: a.modulus,
        n: a.n,
        max_m: a.max_m,
        delta: a.delta,
        nu: a.nu,
        c: a.c,
        t: a.t,
    };
    let report = evaluate(name, &query)?;
    Ok(match a.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    })
}

fn cmd_sample(a: SampleArgs) -> CliResult {
    let kind = match a.model {
        ModelArg::UniformSubset => ModelKind::UniformSubset { f: need(a.f, "f")? },
        ModelArg::BernoulliSelection => ModelKind::BernoulliSelection {
            tau: need(a.tau, "tau")?,
        },
        ModelArg::OccupationRange => ModelKind::OccupationRange { n: need(a.n, "n")? },
        ModelArg::PoissonProcess => ModelKind::PoissonProcess {
            tau: need(a.tau, "tau")?,
        },
    };
    let model = OmegaModel::new(kind, a.modulus)?;
    Ok(if a.distribution {
        size_distribution(&model).to_csv()
    } else {
        sample_omega(&model, a.seed).to_json() + "\n"
    })
}

#[derive(Serialize)]
struct CertifyReport {
    modulus: usize,
    sparsity: u64,
    draws: usize,
    omega_size: usize,
    peak: f64,
    offpeak_sup: f64,
    argmax: usize,
    threshold: f64,
    holds: bool,
    margin: f64,
}

fn cmd_certify(a: CertifyArgs) -> CliResult {
    let draw = match (a.points, a.n) {
        (Some(points), _) => FrequencyDraw::new(a.modulus, points)?,
        (None, Some(n)) => {
            let model = OmegaModel::new(ModelKind::OccupationRange { n }, a.modulus)?;
            sample_omega(&model, a.seed)
                .draw
                .expect("occupancy samples carry their draw")
        }
        (None, None) => return Err(CliError::Usage("give --points or --n".into())),
    };
    let profile = kernel_profile(&draw);
    let verdict = certificate_check(&profile, a.t)?;
    let report = CertifyReport {
        modulus: a.modulus,
        sparsity: a.t,
        draws: draw.len(),
        omega_size: draw.range().len(),
        peak: profile.peak,
        offpeak_sup: profile.offpeak_sup,
        argmax: profile.argmax,
        threshold: profile.peak / (2 * a.t) as f64,
        holds: verdict.holds,
        margin: verdict.margin,
    };
    Ok(serde_json::to_string_pretty(&report).expect("serializable") + "\n")
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn cmd_recover(a: RecoverArgs) -> CliResult {
    let meas = match (&a.measurements, &a.signal, a.omega) {
        (Some(path), _, _) => MeasurementSet::from_json(&read(path)?)?,
        (None, Some(path), Some(omega)) => measure(&Signal::from_json(&read(path)?)?, &omega)?,
        _ => {
            return Err(CliError::Usage(
                "give --measurements, or --signal with --omega".into(),
            ))
        }
    };
    let mut cfg = SolverConfig::default();
    cfg.tol = a.tol.unwrap_or(cfg.tol);
    cfg.max_iter = a.max_iter.unwrap_or(cfg.max_iter);
    cfg.step = a.step.unwrap_or(cfg.step);
    Ok(basis_pursuit(&meas, &cfg)?.to_json() + "\n")
}

fn cmd_experiment(a: ExperimentArgs) -> CliResult {
    let mut cfg = ExperimentConfig::from_toml(&read(&a.config)?)?;
    if let Some(seed) = a.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = a.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &a.out {
        cfg.output_path = out.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    let exec = if a.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let outcome = match a.threads {
        Some(0) => return Err(CliError::Usage("--threads must be >= 1".into())),
        Some(t) => with_threads(t, || run_experiment(&cfg, exec))?,
        None => run_experiment(&cfg, exec)?,
    };
    let written = write_outputs(&outcome, &PathBuf::from(&cfg.output_path))?;
    let listing: String = written
        .iter()
        .map(|p| format!("{}\n", p.display()))
        .collect();
    if outcome.assertions_ok {
        Ok(listing)
    } else {
        print!("{listing}");
        Err(CliError::Assertion(cfg.output_path))
    }
}

fn cmd_paper_table(a: TableArgs) -> CliResult {
    Ok(table_to_csv(&paper_example_table(a.modulus, a.t, &a.c)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bounds(a) => cmd_bounds(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Recover(a) => cmd_recover(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::PaperTable(a) => cmd_paper_table(a),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
