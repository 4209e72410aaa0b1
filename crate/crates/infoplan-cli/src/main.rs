//! Command line front end: formula translation, single-episode planning and
//! Monte Carlo studies, all driven by a JSON configuration file with flag
//! overrides.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use infoplan::scltl::{parse_formula, translate, ApSet};
use infoplan::sim::{
    monte_carlo, plan_once, write_histogram_csv, write_trials_csv, ExperimentConfig, PlannerMode,
    SimError,
};

#[derive(Parser)]
#[command(
    name = "infoplan",
    version,
    about = "Informative path planning under scLTL constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate a formula into its automaton and write DOT + JSON dumps.
    Translate(TranslateArgs),
    /// Plan a single episode and write its trace.
    Plan(RunArgs),
    /// Run a Monte Carlo study and write its report files.
    Montecarlo(RunArgs),
}

#[derive(Args)]
struct TranslateArgs {
    /// Formula text, e.g. "(!U U C) & (!C U D2) & (!D2 U D1)".
    formula: String,
    /// Comma separated atom names the formula may use.
    #[arg(long, value_delimiter = ',', required = true)]
    atoms: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exhaustive,
    Rhc,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (JSON). Missing fields take their defaults;
    /// omitting the flag runs the default experiment.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured receding horizon length.
    #[arg(long)]
    horizon: Option<usize>,
    /// Overrides the configured planner.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Trial parallelism (0 picks the machine default).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Translate(args) => cmd_translate(&args),
        Command::Plan(args) => cmd_plan(&args),
        Command::Montecarlo(args) => cmd_montecarlo(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 0 success, 2 usage or parse problems, 3 infeasible specification,
/// 4 broken internal invariant.
fn exit_code(err: &SimError) -> u8 {
    if err.is_infeasible() {
        3
    } else if matches!(
        err,
        SimError::BadConfig(_) | SimError::Atoms(_) | SimError::Formula(_) | SimError::Io(_)
    ) {
        2
    } else {
        4
    }
}

fn cmd_translate(args: &TranslateArgs) -> Result<(), SimError> {
    let ap = ApSet::new(args.atoms.clone())?;
    let formula = parse_formula(&args.formula, &ap)?;
    let fsa = translate(&formula, &ap);

    fs::create_dir_all(&args.out)?;
    let dot_path = args.out.join("fsa.dot");
    let json_path = args.out.join("fsa.json");
    fs::write(&dot_path, fsa.to_dot())?;
    fs::write(&json_path, fsa.to_json())?;

    println!("automaton states: {}", fsa.state_count());
    println!("wrote {} and {}", dot_path.display(), json_path.display());
    Ok(())
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig, SimError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            serde_json::from_str(&text)
                .map_err(|e| SimError::BadConfig(format!("{}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(horizon) = args.horizon {
        cfg.horizon = horizon;
    }
    if let Some(mode) = args.mode {
        cfg.planner = match mode {
            Mode::Exhaustive => PlannerMode::Exhaustive,
            Mode::Rhc => PlannerMode::Rhc,
        };
    }
    if let Some(jobs) = args.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .ok();
    }
    Ok(cfg)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), SimError> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::from)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn cmd_plan(args: &RunArgs) -> Result<(), SimError> {
    let cfg = load_config(args)?;
    let trace = plan_once(&cfg)?;

    fs::create_dir_all(&args.out)?;
    let trace_path = args.out.join("trace.json");
    let trace_value = serde_json::to_value(&trace).map_err(std::io::Error::from)?;
    write_json(&trace_path, &trace_value)?;

    println!("terminal entropy: {:.6} bits", trace.terminal_entropy_bits);
    println!("satisfied: {}", trace.satisfied);
    println!("steps: {}", trace.transitions());
    println!("wrote {}", trace_path.display());
    Ok(())
}

fn cmd_montecarlo(args: &RunArgs) -> Result<(), SimError> {
    let cfg = load_config(args)?;
    let started = Instant::now();
    let report = monte_carlo(&cfg)?;
    let elapsed = started.elapsed().as_secs_f64();

    fs::create_dir_all(&args.out)?;
    let trials_path = args.out.join("trials.csv");
    let mut trials_csv = Vec::new();
    write_trials_csv(&report, &mut trials_csv)?;
    fs::write(&trials_path, trials_csv)?;

    let hist_path = args.out.join("histogram.csv");
    let mut hist_csv = Vec::new();
    write_histogram_csv(&report, &mut hist_csv)?;
    fs::write(&hist_path, hist_csv)?;

    let traces_path = args.out.join("traces.json");
    let traces_value = serde_json::to_value(&report.traces).map_err(std::io::Error::from)?;
    write_json(&traces_path, &traces_value)?;

    let summary_path = args.out.join("summary.json");
    write_json(&summary_path, &report.summary())?;

    println!("trials: {}", report.trials.len());
    println!("mean terminal entropy: {:.6} bits", report.stats.mean);
    println!("median terminal entropy: {:.6} bits", report.stats.median);
    println!("variance: {:.6}", report.stats.variance);
    println!("satisfied rate: {:.3}", report.stats.satisfied_rate);
    println!("wall time: {elapsed:.2} s");
    println!("wrote reports under {}", args.out.display());
    Ok(())
}
