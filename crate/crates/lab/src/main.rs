use std::{
    fs,
    io::{self, Write},
    path::PathBuf,
    process::ExitCode,
};

use clap::{Args, Parser, Subcommand};
use sbp_lab::{
    runner::render_verdicts, run_experiment, write_outputs, ExperimentConfig, ExperimentKind, LabError, OutputFormat,
};

#[derive(Parser)]
#[command(name = "sbp-lab", version, about = "Symmetric binary perceptron experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Z/E[Z] against the lognormal limit law.
    Lognormal(Flags),
    /// Normality of the cycle statistics C_k.
    Cycles(Flags),
    /// Variance of log(Z/E[Z]) explained by the cycle correction Y.
    Convinp(Flags),
    /// P(Z >= 1) across densities.
    Threshold(Flags),
    /// Distance from a uniform solution to the nearest other solution.
    Freezing(Flags),
    /// Event probabilities under the null and planted laws.
    Contiguity(Flags),
    /// Uniqueness of the critical point of the overlap function.
    Hypothesis(Flags),
    /// Table of theory constants.
    Constants(Flags),
    /// Runs the experiment named in the config file.
    Run(Flags),
}

#[derive(Args)]
struct Flags {
    /// Config file (flat `key = value`).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record format.
    #[arg(long, value_parser = ["jsonl", "csv"])]
    format: Option<String>,
}

fn load(kind: Option<ExperimentKind>, flags: &Flags) -> Result<ExperimentConfig, LabError> {
    let mut config = match (&flags.config, kind) {
        (Some(path), kind) => {
            let text = fs::read_to_string(path).map_err(|source| LabError::Io {
                context: "cannot read config",
                path: path.clone(),
                source,
            })?;
            ExperimentConfig::parse(&text, kind)?
        }
        (None, Some(kind)) => ExperimentConfig::defaults(kind),
        (None, None) => return Err(LabError::config(0, "config", "`run` needs --config")),
    };
    if let Some(seed) = flags.seed {
        config.seed = seed;
    }
    if let Some(workers) = flags.workers {
        config.workers = workers.max(1);
    }
    if let Some(out) = &flags.out {
        config.out = out.clone();
    }
    if let Some(format) = &flags.format {
        config.format = format.parse::<OutputFormat>().map_err(|e| LabError::config(0, "format", e))?;
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, flags) = match &cli.command {
        Command::Lognormal(f) => (Some(ExperimentKind::Lognormal), f),
        Command::Cycles(f) => (Some(ExperimentKind::Cycles), f),
        Command::Convinp(f) => (Some(ExperimentKind::Convinp), f),
        Command::Threshold(f) => (Some(ExperimentKind::Threshold), f),
        Command::Freezing(f) => (Some(ExperimentKind::Freezing), f),
        Command::Contiguity(f) => (Some(ExperimentKind::Contiguity), f),
        Command::Hypothesis(f) => (Some(ExperimentKind::Hypothesis), f),
        Command::Constants(f) => (Some(ExperimentKind::Constants), f),
        Command::Run(f) => (None, f),
    };
    let config = match load(kind, flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("sbp-lab: usage error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = run_experiment(&config).and_then(|report| write_outputs(&report).map(|paths| (report, paths)));
    match result {
        Ok((report, paths)) => {
            // A closed stdout (e.g. piped into `head`) must not mask the exit status.
            let mut stdout = io::stdout().lock();
            let _ = write!(stdout, "{}", render_verdicts(&report.verdicts));
            for note in &report.notes {
                let _ = writeln!(stdout, "note: {note}");
            }
            let _ = writeln!(
                stdout,
                "{} records -> {}; summary -> {}",
                report.records.len(),
                paths.records.display(),
                paths.summary.display()
            );
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("sbp-lab: {e}");
            ExitCode::from(3)
        }
    }
}
