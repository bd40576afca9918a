//! `negcount <experiment> [--config PATH] [--out DIR] [--seed N] [--jobs N] [--no-timestamp]`
//!
//! Exit status: 0 when every asserted inequality holds, 1 when one fails,
//! 2 on invalid input.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use negcount::workbench::{run, ExperimentConfig, ExperimentKind};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Verb {
    CountLattice,
    CountContinuum,
    CountGraph,
    Bounds,
    VerifyMv,
    VerifyMz94,
    VerifySharg,
    VerifyDecoupling,
    VerifyCarryover,
    HardyScan,
    AlphaScan,
}

impl Verb {
    fn kind(self) -> ExperimentKind {
        match self {
            Verb::CountLattice => ExperimentKind::CountLattice,
            Verb::CountContinuum => ExperimentKind::CountContinuum,
            Verb::CountGraph => ExperimentKind::CountGraph,
            Verb::Bounds => ExperimentKind::Bounds,
            Verb::VerifyMv => ExperimentKind::VerifyMv,
            Verb::VerifyMz94 => ExperimentKind::VerifyMz94,
            Verb::VerifySharg => ExperimentKind::VerifySharg,
            Verb::VerifyDecoupling => ExperimentKind::VerifyDecoupling,
            Verb::VerifyCarryover => ExperimentKind::VerifyCarryover,
            Verb::HardyScan => ExperimentKind::HardyScan,
            Verb::AlphaScan => ExperimentKind::AlphaScan,
        }
    }
}

/// Count negative eigenvalues of 2D Schrödinger operators and check
/// eigenvalue estimates against the counts.
#[derive(Debug, Parser)]
#[command(name = "negcount", version)]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: Verb,
    /// Experiment configuration (JSON). `kind` may be omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; overrides `jobs`.
    #[arg(long)]
    jobs: Option<usize>,
    /// Omit the `# generated` line from the CSV.
    #[arg(long)]
    no_timestamp: bool,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, String> {
    let kind = cli.experiment.kind();
    let mut value = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            serde_json::from_str::<serde_json::Value>(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => serde_json::json!({}),
    };
    let obj = value.as_object_mut().ok_or("config must be a JSON object")?;
    match obj.get("kind").and_then(|k| k.as_str()) {
        Some(k) if k != kind.name() => return Err(format!("config kind `{k}` does not match experiment `{}`", kind.name())),
        _ => {
            obj.insert("kind".into(), kind.name().into());
        }
    }
    let mut config = ExperimentConfig::from_json(&value.to_string()).map_err(|e| e.to_string())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        config.jobs = jobs;
    }
    if let Some(out) = &cli.out {
        config.output.dir = Some(out.clone());
    }
    if cli.no_timestamp {
        config.output.timestamp = false;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let dir = config.output.dir.clone().unwrap_or_else(|| PathBuf::from("."));
    match outcome.write_files(&dir, &config.output) {
        Ok((csv, json)) => eprintln!("wrote {} and {}", csv.display(), json.display()),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let s = &outcome.summary;
    for (name, t) in &s.checks {
        eprintln!("{name}: {} passed, {} failed", t.passed, t.failed);
    }
    for f in &s.fitted {
        eprintln!(
            "fitted {}: C = {} (doubled grid {}), relative change {:.3}, {}",
            f.name,
            f.base,
            f.doubled,
            f.relative_change,
            if f.stable { "stable" } else { "unstable" }
        );
    }
    if s.non_converged > 0 {
        eprintln!("{} rows did not converge within the limits", s.non_converged);
    }
    ExitCode::from(outcome.exit_code() as u8)
}
