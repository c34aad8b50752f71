//! `sct`: stable distribution queries, combination tests, simulation runs,
//! figures and numeric checks.

mod config;
mod error;
mod figures;
mod format;
mod input;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sct_core::combine::{sct_test, PValueVector, SctConfig, WeightVector};
use sct_core::simulate::{grid_run, Metric, PowerReport, SimulationConfig};
use sct_core::verify::{run_suite, SuiteCheck, SuiteOptions};
use sct_core::{EvalPolicy, StableParams};

use config::RunConfig;
use error::CliError;
use format::num;

#[derive(Debug, Parser)]
#[command(
    name = "sct",
    version,
    about = "Stable combination test for dependent p-values"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the stable law S(alpha, beta, tau, delta; 1).
    Dist(DistArgs),
    /// Combine the p-values of a file into one test.
    Combine(CombineArgs),
    /// Run the size and power simulation and write the result CSV.
    Simulate(SimulateArgs),
    /// Draw one SVG per correlation model from a result CSV.
    Figures(FiguresArgs),
    /// Run the numeric checks and report one line per check.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DistFn {
    Cdf,
    Sf,
    Pdf,
    Quantile,
    Isf,
}

#[derive(Debug, Args)]
struct DistArgs {
    #[arg(value_enum)]
    function: DistFn,
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    delta: f64,
    /// Point for cdf, sf and pdf.
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    /// Probability for quantile and isf.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    /// alpha = 1.5, beta = 1.
    WeakDep,
    /// alpha = 0.9, beta = 1.
    StrongDep,
}

impl Preset {
    fn index(self) -> (f64, f64) {
        match self {
            Preset::WeakDep => (1.5, 1.0),
            Preset::StrongDep => (0.9, 1.0),
        }
    }
}

#[derive(Debug, Args)]
struct CombineArgs {
    /// One p-value per line, optionally followed by a weight.
    #[arg(long)]
    input: PathBuf,
    /// One weight per line; overrides a weight column in the input.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true, conflicts_with = "preset")]
    beta: Option<f64>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum MetricArg {
    Size,
    RawPower,
    AdjPower,
}

impl MetricArg {
    fn metric(self) -> Metric {
        match self {
            MetricArg::Size => Metric::Size,
            MetricArg::RawPower => Metric::RawPower,
            MetricArg::AdjPower => Metric::AdjPower,
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Run configuration; omitted keys take the standard design.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV. Defaults to results.csv in the configured output_dir,
    /// or standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, env = "SCT_THREADS")]
    threads: Option<usize>,
    /// Keep only these metrics in the output.
    #[arg(long, value_enum, value_delimiter = ',')]
    metric: Vec<MetricArg>,
    /// Restrict the SCT grid to one recommended index.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
}

#[derive(Debug, Args)]
struct FiguresArgs {
    /// Run configuration used when no CSV is given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Existing result CSV to draw.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, env = "SCT_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Checks to run: lemma_g, lemma_gtilde, normalizer, ks_null,
    /// power_trend. All by default.
    #[arg(long = "check", value_delimiter = ',')]
    checks: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "SCT_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    ks_draws: Option<usize>,
    #[arg(long)]
    power_reps: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Dist(a) => cmd_dist(&a),
        Command::Combine(a) => cmd_combine(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Figures(a) => cmd_figures(&a),
        Command::Verify(a) => cmd_verify(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sct: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn cmd_dist(a: &DistArgs) -> Result<(), CliError> {
    let law = StableParams::new(a.alpha, a.beta, a.tau, a.delta)?;
    let policy = EvalPolicy::default();
    let need = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| CliError::Usage(format!("this function needs --{flag}")))
    };
    let value = match a.function {
        DistFn::Cdf => law.cdf(need(a.x, "x")?, &policy)?,
        DistFn::Sf => law.sf(need(a.x, "x")?, &policy)?,
        DistFn::Pdf => law.pdf(need(a.x, "x")?, &policy)?,
        DistFn::Quantile => law.quantile(need(a.p, "p")?, &policy)?,
        DistFn::Isf => law.isf(need(a.p, "p")?, &policy)?,
    };
    println!("{}", num(value));
    Ok(())
}

fn cmd_combine(a: &CombineArgs) -> Result<(), CliError> {
    let (alpha, beta) = match a.preset {
        Some(p) => p.index(),
        None => (a.alpha.expect("clap requires alpha"), a.beta.unwrap_or(0.0)),
    };
    let config = SctConfig::new(alpha, beta, a.level)?;
    let (pvalues, column) = input::parse_pvalues(&a.input, &input::read(&a.input)?)?;
    let raw = match &a.weights {
        Some(path) => Some(input::parse_weights(path, &input::read(path)?)?),
        None => column,
    };
    let weights = match raw {
        Some(w) => WeightVector::normalized(&w)?,
        None => WeightVector::equal(pvalues.len())?,
    };
    let pvalues = PValueVector::new(pvalues)?;
    let out = sct_test(&pvalues, &weights, &config, &EvalPolicy::default())?;
    println!("statistic\t{}", num(out.statistic));
    println!("cutoff\t{}", num(out.cutoff));
    println!("combined_p\t{}", num(out.combined_p));
    println!("decision\t{}", if out.reject { "reject" } else { "retain" });
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn simulation(rc: &RunConfig, path: Option<&Path>) -> Result<SimulationConfig, CliError> {
    rc.to_simulation().map_err(|message| CliError::Config {
        path: path
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("<defaults>")),
        message,
    })
}

/// Runs the grid, reporting failed cells on standard error.
fn run_grid(config: &SimulationConfig) -> Result<PowerReport, CliError> {
    let report = grid_run(config)?;
    for f in &report.failures {
        match &f.model {
            Some(m) => eprintln!("sct: cell {} {}: {}", m.kind(), f.method, f.message),
            None => eprintln!("sct: {}: {}", f.method, f.message),
        }
    }
    Ok(report)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn cmd_simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let rc = load_config(a.config.as_deref())?;
    let mut config = simulation(&rc, a.config.as_deref())?;
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if let Some(threads) = a.threads {
        config.threads = threads;
    }
    if let Some(p) = a.preset {
        let (alpha, beta) = p.index();
        config.alphas = vec![alpha];
        config.betas = vec![beta];
    }
    let mut report = run_grid(&config)?;
    if !a.metric.is_empty() {
        let keep: Vec<Metric> = a.metric.iter().map(|m| m.metric()).collect();
        report.rows.retain(|r| keep.contains(&r.metric));
    }
    let csv = report.to_csv();
    let out = a
        .out
        .clone()
        .or_else(|| rc.output_dir.as_ref().map(|d| d.join("results.csv")));
    match out {
        Some(path) => write_file(&path, &csv)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(csv.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io("<stdout>", e))?;
        }
    }
    match report.failures.len() {
        0 => Ok(()),
        count => Err(CliError::CellsFailed { count }),
    }
}

fn cmd_figures(a: &FiguresArgs) -> Result<(), CliError> {
    let rc = load_config(a.config.as_deref())?;
    let out_dir = a
        .out_dir
        .clone()
        .or_else(|| rc.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("figures"));
    let (csv_path, failures) = match &a.csv {
        Some(path) => (path.clone(), 0),
        None => {
            let mut config = simulation(&rc, a.config.as_deref())?;
            if let Some(threads) = a.threads {
                config.threads = threads;
            }
            let report = run_grid(&config)?;
            let path = out_dir.join("results.csv");
            write_file(&path, &report.to_csv())?;
            (path, report.failures.len())
        }
    };
    let rows = figures::parse_csv(&csv_path, &input::read(&csv_path)?)?;
    for path in figures::write_figures(&rows, &out_dir)? {
        println!("{}", path.display());
    }
    match failures {
        0 => Ok(()),
        count => Err(CliError::CellsFailed { count }),
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let selection = if a.checks.is_empty() {
        SuiteCheck::ALL.to_vec()
    } else {
        a.checks
            .iter()
            .map(|name| {
                SuiteCheck::from_name(name).ok_or_else(|| {
                    let known: Vec<&str> = SuiteCheck::ALL.iter().map(|c| c.name()).collect();
                    CliError::Usage(format!(
                        "unknown check `{name}`, expected one of {}",
                        known.join(", ")
                    ))
                })
            })
            .collect::<Result<_, _>>()?
    };
    let mut opts = SuiteOptions::default();
    if let Some(seed) = a.seed {
        opts.seed = seed;
    }
    if let Some(threads) = a.threads {
        opts.threads = threads;
    }
    if let Some(d) = a.ks_draws {
        opts.ks_draws = d;
    }
    if let Some(r) = a.power_reps {
        opts.power_reps = r;
    }
    let lines = run_suite(&selection, &opts)?;
    for l in &lines {
        let verdict = if l.pass { "PASS" } else { "FAIL" };
        println!("{}\t{}\t{verdict}", l.name, format::sig(l.worst_margin, 6));
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    match failed {
        0 => Ok(()),
        failed => Err(CliError::ChecksFailed {
            failed,
            total: lines.len(),
        }),
    }
}
