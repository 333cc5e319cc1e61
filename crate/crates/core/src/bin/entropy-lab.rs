use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use entropy_lab::experiments::{run, ExperimentConfig, ExperimentKind, OutputFormat};

/// Entropy experiments on countable Markov shifts.
///
/// Exit status: 0 when the verdict holds, 2 when it is violated, 1 on error.
#[derive(Parser)]
#[command(name = "entropy-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named by the config's "experiment" field.
    Run(Common),
    /// Katok/plug-in estimates over (N, k, δ) grids.
    Sweep(Common),
    /// Gibbs certificates and equilibrium gaps.
    GibbsAudit(Common),
    /// Entropy along a measure sequence against its vague limit.
    Semicontinuity(Common),
    /// First-return masses of a Markov measure.
    Kac(Common),
    /// Roof integrals and flow entropies along a sequence.
    Suspend(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    #[arg(long, default_value = "entropy-lab-out")]
    out: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Overrides the config's entropy at infinity.
    #[arg(long, allow_negative_numbers = true)]
    entropy_at_infinity: Option<f64>,
}

fn main() -> ExitCode {
    // usage errors exit with 1; clap's own code 2 would read as a violated verdict
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (kind, common) = match cli.command {
        Command::Run(c) => (None, c),
        Command::Sweep(c) => (Some(ExperimentKind::Sweep), c),
        Command::GibbsAudit(c) => (Some(ExperimentKind::GibbsAudit), c),
        Command::Semicontinuity(c) => (Some(ExperimentKind::Semicontinuity), c),
        Command::Kac(c) => (Some(ExperimentKind::Kac), c),
        Command::Suspend(c) => (Some(ExperimentKind::Suspend), c),
    };
    match execute(kind, &common) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn execute(kind: Option<ExperimentKind>, common: &Common) -> entropy_lab::Result<i32> {
    let mut cfg = ExperimentConfig::from_path(&common.config)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(h) = common.entropy_at_infinity {
        cfg.entropy_at_infinity = Some(h);
        cfg.validate()?;
    }
    let kind = kind
        .or(cfg.experiment)
        .ok_or_else(|| entropy_lab::Error::Config("config has no \"experiment\" field; use a subcommand".into()))?;
    let outcome = run(kind, &cfg)?;
    let format = match common.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    outcome.write(&common.out, format)?;
    println!("{}: {:?}", kind.name(), outcome.verdict);
    Ok(outcome.verdict.exit_code())
}
