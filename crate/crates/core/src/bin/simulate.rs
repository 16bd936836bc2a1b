use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use mlce::experiment::{emit_results, run_experiment, ExperimentConfig, Preset, SolverChoice};
use mlce::{Error, SchemeKind};

/// Monte Carlo throughput sweeps for the scheduling schemes.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    /// JSON config; keys override the preset (or the defaults).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated: proposed, classical-idnc, uncoded, ra-idnc.
    #[arg(long, value_delimiter = ',')]
    scheme: Option<Vec<SchemeKind>>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_parser = ["auto", "exact", "greedy"])]
    solver: Option<String>,
    /// Record wall times in trials.csv.
    #[arg(long)]
    timing: bool,
}

fn load(args: &Args) -> Result<ExperimentConfig, Error> {
    let base = args.preset.map(ExperimentConfig::preset).unwrap_or_default();
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            ExperimentConfig::from_json_over(&base, &text)?
        }
        None => base,
    };
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(s) = args.seed {
        config.master_seed = s;
    }
    if let Some(s) = &args.scheme {
        config.schemes = s.clone();
    }
    if let Some(o) = &args.out {
        config.output = o.clone();
    }
    if let Some(w) = args.workers {
        config.workers = w;
    }
    if let Some(s) = args.solver.as_deref() {
        config.solver = match s {
            "exact" => SolverChoice::Exact,
            "greedy" => SolverChoice::Greedy,
            _ => SolverChoice::Auto,
        };
    }
    config.record_wall_time |= args.timing;
    config.validate()?;
    Ok(config)
}

fn run(args: &Args) -> Result<(), Error> {
    let config = load(args)?;
    let outcome = run_experiment(&config)?;
    let (csv, json) = emit_results(&outcome.records, &outcome.aggregates, &config, &config.output)?;
    println!("{:>14} {:>28} {:>14} {:>12}", "sweep", "scheme", "mean Mbps", "stderr");
    for a in &outcome.aggregates {
        println!(
            "{:>14} {:>28} {:>14.4} {:>12.4}",
            a.sweep_value,
            a.scheme,
            a.mean_throughput_bps / 1e6,
            a.stderr_throughput_bps / 1e6
        );
    }
    eprintln!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
