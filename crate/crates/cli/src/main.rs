use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gaussdist::campaign::{run_campaign, CampaignConfig};
use gaussdist::compute::compute;
use gaussdist::sweep::{run_sweep, Grid};
use gaussdist::table::{write_csv, Row};
use gaussdist::{load_state, CliError, ConventionChoice, Outcome, EXIT_INPUT};
use gaussdist_core::symplectic::StateClass;

/// Trace-distance bounds for Gaussian states, with a Fock-basis oracle.
#[derive(Parser)]
#[command(name = "gaussdist", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Every bound for one pair of state files.
    Compute(ComputeArgs),
    /// Random pairs checked against the oracle.
    Verify(VerifyArgs),
    /// Bounds over a grid of product states.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ComputeArgs {
    a: PathBuf,
    b: PathBuf,
    /// CSV row instead of JSON.
    #[arg(long, conflicts_with = "json")]
    csv: bool,
    #[arg(long)]
    json: bool,
    #[arg(long, default_value = "quarter")]
    convention: ConventionChoice,
    /// Also run the oracle at this cutoff (one or two modes).
    #[arg(long, value_name = "CUTOFF")]
    oracle: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    trials: usize,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=2))]
    modes: u64,
    #[arg(long)]
    class: StateClass,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Starting Fock cutoff (default 60 for one mode, 16 for two).
    #[arg(long)]
    cutoff: Option<usize>,
    /// Largest cutoff tried on truncation (default 1.5× the cutoff).
    #[arg(long)]
    max_cutoff: Option<usize>,
    #[arg(long)]
    sympl_max: Option<f64>,
    #[arg(long)]
    mean_scale: Option<f64>,
    #[arg(long)]
    squeeze: Option<f64>,
    #[arg(long, default_value = "quarter")]
    convention: ConventionChoice,
    /// Per-trial CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    grid: PathBuf,
    #[arg(long)]
    no_oracle: bool,
    /// CSV destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compute(args) => cmd_compute(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}

fn write_rows(out: Option<&PathBuf>, rows: &[Row]) -> Result<(), CliError> {
    match out {
        Some(path) => write_csv(BufWriter::new(File::create(path)?), rows)?,
        None => write_csv(io::stdout().lock(), rows)?,
    }
    Ok(())
}

fn cmd_compute(args: ComputeArgs) -> Result<Outcome, CliError> {
    let s1 = load_state(&args.a)?;
    let s2 = load_state(&args.b)?;
    let output = compute(&s1, &s2, args.convention, args.oracle)?;
    if args.csv {
        let rows: Vec<Row> = output
            .reports
            .iter()
            .map(|r| {
                let mut row = Row::new(r.overlap.convention.name(), r.clone());
                row.oracle_distance = output.oracle.map(|o| o.trace_distance);
                row.oracle_overlap = output.oracle.map(|o| o.overlap);
                row
            })
            .collect();
        write_rows(None, &rows)?;
    } else {
        let mut stdout = io::stdout().lock();
        serde_json::to_writer_pretty(&mut stdout, &output)?;
        writeln!(stdout)?;
    }
    let outcome = output.outcome();
    if outcome == Outcome::Ambiguous {
        eprintln!("convention arbitration was ambiguous; reports for both conventions are shown");
    }
    Ok(outcome)
}

fn cmd_verify(args: VerifyArgs) -> Result<Outcome, CliError> {
    let mut config = CampaignConfig::new(args.modes as usize, args.class, args.trials, args.seed);
    if let Some(c) = args.cutoff {
        config.cutoff = c;
        config.max_cutoff = c * 3 / 2;
    }
    if let Some(c) = args.max_cutoff {
        config.max_cutoff = c;
    }
    if let Some(x) = args.sympl_max {
        config.sympl_max = x;
    }
    if let Some(x) = args.mean_scale {
        config.mean_scale = x;
    }
    if let Some(x) = args.squeeze {
        config.squeeze = x;
    }
    config.convention = args.convention;
    let summary = run_campaign(&config)?;
    if let Some(path) = &args.out {
        write_rows(Some(path), &summary.rows())?;
    }
    let mut stdout = io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, &summary)?;
    writeln!(stdout)?;
    for t in summary.trials.iter().filter(|t| !t.row.violations.is_empty()) {
        eprintln!("{}: {}", t.row.case_id, t.row.violations.join(", "));
    }
    Ok(summary.outcome())
}

fn cmd_sweep(args: SweepArgs) -> Result<Outcome, CliError> {
    let grid = Grid::load(&args.grid)?;
    let result = run_sweep(&grid, !args.no_oracle)?;
    for (id, reason) in &result.oracle_failures {
        eprintln!("{id}: oracle skipped: {reason}");
    }
    write_rows(args.out.as_ref(), &result.rows)?;
    Ok(Outcome::Pass)
}
