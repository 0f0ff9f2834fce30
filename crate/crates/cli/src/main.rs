use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use wavefield_anc::{
    run_anc_convergence, run_field_map, run_interp_sweep, run_validate, Bundle, CliError, ExperimentConfig,
    FULL_SCALE_EPOCHS,
};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Experiment {
    InterpSweep,
    AncConvergence,
    FieldMap,
    Validate,
}

/// Runs one experiment and writes its CSV, JSON and model files.
#[derive(Debug, Parser)]
#[command(name = "wavefield-anc", version)]
struct Args {
    experiment: Experiment,
    /// Scenario and training configuration (.toml or .json).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides both the scenario and the training seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the number of training epochs.
    #[arg(long, conflicts_with = "paper_scale")]
    epochs: Option<usize>,
    /// Trains for the full 500000 epochs.
    #[arg(long)]
    paper_scale: bool,
}

fn load(args: &Args) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg = cfg.with_seed(seed);
    }
    if args.paper_scale {
        cfg.train.epochs = FULL_SCALE_EPOCHS;
    }
    if let Some(epochs) = args.epochs {
        cfg.train.epochs = epochs;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(args: &Args) -> Result<Bundle, CliError> {
    let cfg = load(args)?;
    Ok(match args.experiment {
        Experiment::InterpSweep => run_interp_sweep(&cfg, None)?.bundle,
        Experiment::AncConvergence => run_anc_convergence(&cfg, None)?.bundle,
        Experiment::FieldMap => run_field_map(&cfg, None)?.bundle,
        Experiment::Validate => run_validate(&cfg)?,
    })
}

fn report(bundle: &Bundle) {
    let mut out = std::io::stdout().lock();
    for c in &bundle.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let line = format!("{status} {}: measured {:.4e}, threshold {:.4e} ({})", c.name, c.measured, c.threshold, c.detail);
        if writeln!(out, "{line}").is_err() {
            return;
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(bundle) => {
            if let Err(e) = bundle.write_to(&args.out) {
                eprintln!("error: cannot write {}: {e}", args.out.display());
                return ExitCode::from(1);
            }
            report(&bundle);
            if bundle.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            if let CliError::Partial { bundle, .. } = &e {
                if let Err(w) = bundle.write_to(&args.out) {
                    eprintln!("error: cannot write partial results: {w}");
                }
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
