use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use segclust_core::experiment::{fit_tables, write_experiment, DEFAULT_MAX_CHANGES, DEFAULT_TOL};
use segclust_core::io::{read_signal, read_spec, write_signal, Table};
use segclust_core::oracle::risk_bound;
use segclust_core::selector::estimate_sigma_mad;
use segclust_core::signal::{example1_spec, generate, snr_to_sigma, EXAMPLE1_DEFAULT_LEVELS};
use segclust_core::{
    run_experiment, select, Error, ExperimentConfig, NoiseLevel, PenaltySpec, PiecewiseSpec, Result, DEFAULT_K,
};

#[derive(Parser)]
#[command(name = "segclust", version, about = "Joint change-point detection and level clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one noisy signal from a ground-truth spec.
    Simulate(SimulateArgs),
    /// Fit a signal file.
    Fit(FitArgs),
    /// Replicated simulate-and-fit runs with per-rep and summary CSVs.
    Experiment(ExperimentArgs),
    /// Print the risk bound for given true dimensions.
    Bound(BoundArgs),
}

#[derive(Args)]
struct SpecArgs {
    /// Ground-truth table (`cluster_index,level,seg_start,seg_end`); the
    /// built-in 2000-sample example is used when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Five levels for the built-in example.
    #[arg(long, value_delimiter = ',', num_args = 5, conflicts_with = "spec")]
    levels: Option<Vec<f64>>,
}

impl SpecArgs {
    fn load(&self) -> Result<PiecewiseSpec> {
        match (&self.spec, &self.levels) {
            (Some(path), _) => read_spec(path),
            (None, Some(l)) => example1_spec([l[0], l[1], l[2], l[3], l[4]]),
            (None, None) => example1_spec(EXAMPLE1_DEFAULT_LEVELS),
        }
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct NoiseArgs {
    /// Smallest jump divided by the noise variance.
    #[arg(long)]
    snr: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
}

impl NoiseArgs {
    fn level(&self) -> NoiseLevel {
        match (self.snr, self.sigma) {
            (Some(s), _) => NoiseLevel::Snr(s),
            (None, Some(s)) => NoiseLevel::Sigma(s),
            (None, None) => unreachable!("clap requires one of --snr/--sigma"),
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Must be 1; use `experiment` for replications.
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Output directory for `signal.txt` and `truth.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// One value per line.
    signal: PathBuf,
    /// Known noise standard deviation.
    #[arg(long, required_unless_present = "estimate_sigma")]
    sigma: Option<f64>,
    /// Estimate sigma from first differences instead.
    #[arg(long, conflicts_with = "sigma")]
    estimate_sigma: bool,
    /// Maximum number of change points D [default: min(20, N-1)].
    #[arg(long)]
    max_changes: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_K)]
    penalty_k: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_CHANGES)]
    max_changes: usize,
    #[arg(long, default_value_t = DEFAULT_K)]
    penalty_k: f64,
    /// Change-point matching tolerance in samples.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    dprime: usize,
    #[arg(long)]
    dpp: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    if a.reps != 1 {
        return Err(Error::InvalidInput("simulate draws a single signal; use `experiment` for --reps > 1".into()));
    }
    let spec = a.spec.load()?;
    let sigma = match a.noise.level() {
        NoiseLevel::Snr(s) => snr_to_sigma(&spec, s)?,
        NoiseLevel::Sigma(s) => s,
    };
    let y = generate(&spec, sigma, a.seed)?;
    std::fs::create_dir_all(&a.out)?;
    write_signal(&a.out.join("signal.txt"), y.values())?;
    std::fs::write(a.out.join("truth.csv"), segclust_core::io::format_spec(&spec))?;
    println!("sigma={sigma}");
    Ok(())
}

fn write_tables(dir: &Path, tables: Vec<(&str, Table)>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, t) in tables {
        t.write(&dir.join(name))?;
    }
    Ok(())
}

fn fit(a: &FitArgs) -> Result<()> {
    let y = read_signal(&a.signal)?;
    let n = y.len();
    let sigma = match a.sigma {
        Some(s) => s,
        None => estimate_sigma_mad(&y)?,
    };
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidInput(format!("sigma must be positive, got {sigma}")));
    }
    let d = a.max_changes.unwrap_or(DEFAULT_MAX_CHANGES.min(n.saturating_sub(1)));
    let spec = PenaltySpec::new(n, a.penalty_k, sigma * sigma, d)?;
    let start = Instant::now();
    let res = select(&y, &spec)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    write_tables(&a.out, fit_tables(&res, sigma, ms))?;
    let (dp, dpp) = res.reported_dims();
    println!("dprime={dp} dpp={dpp} crit={} sigma={sigma}", res.crit_value);
    Ok(())
}

fn experiment(a: &ExperimentArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::new(a.spec.load()?, a.noise.level());
    cfg.reps = a.reps;
    cfg.seed = a.seed;
    cfg.max_changes = a.max_changes;
    cfg.k = a.penalty_k;
    cfg.tol = a.tol;
    let out = run_experiment(&cfg)?;
    write_experiment(&a.out, &out)?;
    let s = &out.summary;
    println!(
        "reps={} sigma={} mean_cp_accuracy={} fraction_below_bound={} bound_per_sample={}",
        s.reps, s.sigma, s.mean_cp_accuracy, s.fraction_below_bound, s.bound_per_sample
    );
    Ok(())
}

fn bound(a: &BoundArgs) -> Result<()> {
    let b = risk_bound(a.dprime, a.dpp, a.n, a.sigma)?;
    println!("bound={}", b.total);
    println!("per_sample={}", b.per_sample);
    println!("consistency_ratio={}", b.consistency_ratio);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Experiment(a) => experiment(a),
        Command::Bound(a) => bound(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 3 } else { 2 })
        }
    }
}
