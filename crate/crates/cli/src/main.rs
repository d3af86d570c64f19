use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spcov::io::{read_data_csv, save_data_csv};
use spcov::matrix::sample_covariance;
use spcov::simulation::{
    gen_truth, run_rate_experiment, sample_gaussian, ErrorScale, LambdaRule, Method, RateExperiment, TruthKind,
    TruthSpec,
};
use spcov::tuning::save_selection_csv;
use spcov::{estimate, select_lambda, Error, EstimatorConfig, LambdaGrid, Penalty, Target};

/// Sparse covariance, precision, correlation and Cholesky-factor estimation.
#[derive(Parser, Debug)]
#[command(name = "spcov", version, about)]
struct Cli {
    /// Worker threads for parallel work (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit one estimator at a fixed λ and write the result as JSON.
    Estimate(EstimateArgs),
    /// Choose λ by BIC over a grid; write the chosen fit as JSON and the
    /// per-λ table as CSV.
    Select(SelectArgs),
    /// Draw Gaussian data from a synthetic truth and write it as CSV.
    Simulate(SimulateArgs),
    /// Run a seeded Monte Carlo rate experiment.
    Rates(RatesArgs),
}

#[derive(Args, Debug, Clone)]
struct FitArgs {
    /// Quantity to estimate.
    #[arg(long, value_enum, default_value = "precision")]
    target: TargetArg,
    /// Penalty as `l1:λ`, `scad:λ[:a]`, `hard:λ`, or a bare family name
    /// combined with --lambda.
    #[arg(long, default_value = "scad")]
    penalty: String,
    /// Penalty level; overrides the λ inside --penalty.
    #[arg(long)]
    lambda: Option<f64>,
    /// Relative convergence tolerance of the inner solvers.
    #[arg(long)]
    tol: Option<f64>,
    /// Sweep cap of the inner solvers.
    #[arg(long)]
    max_sweeps: Option<usize>,
    /// Number of local linear approximation steps.
    #[arg(long)]
    lla_iters: Option<usize>,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Observations, one row per sample (CSV, optional header).
    #[arg(long = "in")]
    input: PathBuf,
    /// Output JSON path.
    #[arg(long)]
    out: PathBuf,
    /// Use the raw second moment instead of centering columns.
    #[arg(long)]
    no_center: bool,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Args, Debug)]
struct SelectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Output JSON path for the selected fit.
    #[arg(long)]
    out: PathBuf,
    /// CSV path for the per-λ table (default: --out with extension `csv`).
    #[arg(long)]
    table: Option<PathBuf>,
    /// Grid as `lo:hi:k`, log-spaced (default: 20 values of
    /// c·√(log p / n), c from 0.1 to 10).
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    no_center: bool,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Truth as `identity`, `tridiag:a`, `sparse:density:magnitude` or
    /// `ar1:φ`.
    #[arg(long, default_value = "tridiag:0.4")]
    truth: String,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RatesArgs {
    #[arg(long, default_value = "tridiag:0.4")]
    truth: String,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "100,200,400,800")]
    n_values: Vec<usize>,
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',', default_value = "50")]
    p_values: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// λ = c·√(log p / n) with this c. Without it, λ is chosen by BIC
    /// unless --lambda is given.
    #[arg(long)]
    lambda_scale: Option<f64>,
    /// Scale on which errors are measured.
    #[arg(long, value_enum, default_value = "precision")]
    error_scale: ScaleArg,
    /// Output CSV path; the JSON summary goes next to it with extension
    /// `json`.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TargetArg {
    Precision,
    Covariance,
    Correlation,
    InverseCorrelation,
    CholeskyMl,
    CholeskyLs,
    CholeskyNl,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Target {
        match t {
            TargetArg::Precision => Target::Precision,
            TargetArg::Covariance => Target::Covariance,
            TargetArg::Correlation => Target::Correlation,
            TargetArg::InverseCorrelation => Target::InverseCorrelation,
            TargetArg::CholeskyMl => Target::CholeskyMl,
            TargetArg::CholeskyLs => Target::CholeskyLs,
            TargetArg::CholeskyNl => Target::CholeskyNl,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScaleArg {
    Precision,
    InverseCorrelation,
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

type CmdResult = Result<u8, Failure>;

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = match cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Select(a) => cmd_select(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Rates(a) => cmd_rates(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}

fn parse_penalty(spec: &str, lambda: Option<f64>) -> Result<Penalty, Failure> {
    let full = if spec.contains(':') {
        spec.to_string()
    } else {
        match lambda {
            Some(l) => format!("{spec}:{l}"),
            None => return Err(input_error(format!("penalty '{spec}' needs a level: use {spec}:λ or --lambda"))),
        }
    };
    let pen: Penalty = full.parse()?;
    Ok(match lambda {
        Some(l) => pen.with_lambda(l)?,
        None => pen,
    })
}

fn build_config(fit: &FitArgs, default_lambda: Option<f64>) -> Result<EstimatorConfig, Failure> {
    let pen = parse_penalty(&fit.penalty, fit.lambda.or(default_lambda))?;
    let mut cfg = EstimatorConfig::new(fit.target.into(), pen);
    if let Some(t) = fit.tol {
        cfg.solver.tol = t;
    }
    if let Some(m) = fit.max_sweeps {
        cfg.solver.max_sweeps = m;
    }
    if let Some(k) = fit.lla_iters {
        cfg.lla_iters = k;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn check_parent(path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => {
            Err(input_error(format!("output directory {} does not exist", dir.display())))
        }
        _ => Ok(()),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn cmd_estimate(a: EstimateArgs) -> CmdResult {
    let cfg = build_config(&a.fit, None)?;
    check_parent(&a.out)?;
    let data = read_data_csv(&a.input)?;
    let s = sample_covariance(&data, !a.no_center)?;
    let fit = estimate(&s, &cfg)?;
    write_text(&a.out, &fit.to_json()?)?;
    if fit.converged {
        Ok(0)
    } else {
        eprintln!("warning: solver did not converge; result written with converged = false");
        Ok(2)
    }
}

fn cmd_select(a: SelectArgs) -> CmdResult {
    let cfg = build_config(&a.fit, Some(1.0))?;
    let table_path = a.table.clone().unwrap_or_else(|| a.out.with_extension("csv"));
    check_parent(&a.out)?;
    check_parent(&table_path)?;
    let data = read_data_csv(&a.input)?;
    let s = sample_covariance(&data, !a.no_center)?;
    let grid = match &a.grid {
        Some(g) => g.parse::<LambdaGrid>()?,
        None => LambdaGrid::default_for(data.p(), data.n())?,
    };
    let sel = select_lambda(&s, data.n(), &grid, &cfg)?;
    write_text(&a.out, &sel.best.to_json()?)?;
    save_selection_csv(&sel.table, &table_path)?;
    println!("selected lambda {}", sel.best_lambda);
    Ok(if sel.best.converged { 0 } else { 2 })
}

fn cmd_simulate(a: SimulateArgs) -> CmdResult {
    let kind: TruthKind = a.truth.parse()?;
    check_parent(&a.out)?;
    if a.n < 1 {
        return Err(input_error("--n must be at least 1"));
    }
    let truth = gen_truth(&TruthSpec { kind, p: a.p, seed: a.seed })?;
    let data = sample_gaussian(&truth.sigma, a.n, a.seed)?;
    save_data_csv(&data, &a.out)?;
    Ok(0)
}

fn cmd_rates(a: RatesArgs) -> CmdResult {
    let kind: TruthKind = a.truth.parse()?;
    let cfg = build_config(&a.fit, Some(1.0))?;
    let summary_path = a.out.with_extension("json");
    check_parent(&a.out)?;
    let lambda_rule = match (a.lambda_scale, a.fit.lambda) {
        (Some(c), _) => LambdaRule::OracleScale { c },
        (None, Some(_)) => LambdaRule::Fixed,
        (None, None) if a.fit.penalty.contains(':') => LambdaRule::Fixed,
        (None, None) => LambdaRule::Bic,
    };
    let exp = RateExperiment {
        truth: kind,
        n_values: a.n_values,
        p_values: a.p_values,
        replicates: a.replicates,
        method: Method::Estimator(cfg),
        lambda_rule,
        scale: match a.error_scale {
            ScaleArg::Precision => ErrorScale::Precision,
            ScaleArg::InverseCorrelation => ErrorScale::InverseCorrelation,
        },
        support_tol: 1e-8,
        seed: a.seed,
    };
    let report = run_rate_experiment(&exp)?;
    report.save_csv(&a.out)?;
    write_text(&summary_path, &report.to_json()?)?;
    let show = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.4}"));
    println!(
        "slope vs log rate: {} (se {}); slope vs log n: {} (se {})",
        show(report.slope_vs_rate.slope),
        show(report.slope_vs_rate.std_error),
        show(report.slope_vs_n.slope),
        show(report.slope_vs_n.std_error)
    );
    for m in &report.failure_messages {
        eprintln!("warning: {m}");
    }
    Ok(0)
}
