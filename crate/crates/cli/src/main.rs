//! `tpz`: generate, verify, analyze and plot Toeplitz rotation-set sequences.

mod analyze;
mod construct;
mod seqfile;
mod svg;
mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use crate::construct::Loaded;

const DEFAULT_BUDGET: u64 = 100_000_000;
const BUDGET_ENV: &str = "TPZ_BUDGET";

#[derive(Parser)]
#[command(name = "tpz", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sequence file.
    Generate {
        #[command(subcommand)]
        construction: Generate,
    },
    /// Run named checks on a sequence file and print JSON reports.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated check names, or `all`.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        checks: Vec<String>,
        /// Evaluation budget; overrides the TPZ_BUDGET environment variable.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Sample count for sampled checks.
        #[arg(long)]
        samples: Option<u64>,
        /// Record wall-clock times (reports are then no longer reproducible).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the averages of all windows of one length.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        window: u64,
        #[arg(long, default_value_t = 1)]
        stride: u64,
        /// Index range `lo:hi`, 1-based and inclusive; defaults to the body.
        #[arg(long)]
        range: Option<String>,
        /// Maximum number of windows.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the sweep path of a separator level with its winding number.
    Sweep {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// Defaults to a thousandth of the central window length.
        #[arg(long)]
        stride: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a cloud or sweep CSV as an SVG figure.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum Generate {
    /// Sequence whose rotation set is the segment from 0 to v.
    Segment {
        /// Endpoint `x,y` with rational coordinates, e.g. `1/4,1/4`.
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        /// Overrides the derived first block length.
        #[arg(long)]
        a1: Option<u64>,
        #[arg(long, default_value_t = 6)]
        levels: usize,
        #[arg(long)]
        length: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sequence whose rotation set separates the plane.
    Separator {
        #[arg(long = "K")]
        k: u64,
        #[arg(long = "L")]
        l: u64,
        /// `d_n = 2^(n + dexp)`.
        #[arg(long, default_value_t = 5, allow_hyphen_values = true)]
        dexp: i64,
        #[arg(long, default_value_t = 6)]
        levels: usize,
        /// Relax the size conditions on K, L and the block growth.
        #[arg(long)]
        toy_mode: bool,
        #[arg(long)]
        length: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sequence whose rotation set has non-empty interior.
    Interior {
        #[arg(long)]
        a1: u64,
        /// `d_n = 2^(n + dexp)`.
        #[arg(long, allow_hyphen_values = true)]
        dexp: i64,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Exit status of a command that ran to completion.
enum Outcome {
    Ok,
    Failed,
    OverBudget,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Ok(Outcome::OverBudget) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<tpz_core::Error>() {
                Some(tpz_core::Error::BudgetExceeded { .. }) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn budget(flag: Option<u64>) -> Result<u64> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{BUDGET_ENV}={v:?} is not a non-negative integer")),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn load(path: &Path) -> Result<Loaded> {
    let (manifest, symbols) = seqfile::read(path)?;
    Loaded::from_file(manifest, symbols)
}

/// Writes `text` to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => seqfile::write_atomic(p, |w| Ok(w.write_all(text.as_bytes())?)),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Generate { construction } => {
            let (out, (manifest, symbols)) = match construction {
                Generate::Segment { v, a1, levels, length, out } => {
                    (out, construct::generate_segment(construct::parse_vector(&v)?, a1, levels, length)?)
                }
                Generate::Separator { k, l, dexp, levels, toy_mode, length, out } => {
                    (out, construct::generate_separator(k, l, dexp, levels, toy_mode, length)?)
                }
                Generate::Interior { a1, dexp, levels, seed, out } => {
                    (out, construct::generate_interior(a1, dexp, levels, seed)?)
                }
            };
            seqfile::write(&out, &manifest, &symbols)?;
            eprintln!(
                "wrote {} symbols ({}) to {}",
                symbols.len(),
                manifest.construction.as_str(),
                out.display()
            );
            Ok(Outcome::Ok)
        }
        Command::Verify { input, checks, budget: b, seed, samples, timing, out } => {
            let loaded = load(&input)?;
            let opts = verify::Options { budget: budget(b)?, seed, samples, timing };
            let (json, reports, over_budget) = verify::run(&loaded, &checks, &opts)?;
            let mut text = serde_json::to_string_pretty(&json)?;
            text.push('\n');
            emit(out.as_deref(), &text)?;
            for r in &reports {
                eprintln!("{:<9} {:?}", r.check_name, r.status);
            }
            Ok(if over_budget {
                Outcome::OverBudget
            } else if reports.iter().any(|r| r.status == tpz_core::Status::Fail) {
                Outcome::Failed
            } else {
                Outcome::Ok
            })
        }
        Command::Analyze { input, window, stride, range, budget: b, format, out } => {
            let loaded = load(&input)?;
            let range = range.as_deref().map(analyze::parse_range).transpose()?;
            let (text, truncated) = analyze::analyze(&loaded, window, stride, range, budget(b)?, format)?;
            emit(out.as_deref(), &text)?;
            if truncated {
                eprintln!("budget exhausted; output is partial");
                return Ok(Outcome::OverBudget);
            }
            Ok(Outcome::Ok)
        }
        Command::Sweep { input, level, stride, format, out } => {
            let loaded = load(&input)?;
            let (text, passed) = analyze::sweep(&loaded, level, stride, format)?;
            emit(out.as_deref(), &text)?;
            Ok(if passed { Outcome::Ok } else { Outcome::Failed })
        }
        Command::Plot { input, out } => {
            let text = std::fs::read_to_string(&input)
                .with_context(|| format!("cannot read {}", input.display()))?;
            let figure = svg::plot(&text)?;
            emit(Some(&out), &figure)?;
            Ok(Outcome::Ok)
        }
    }
}
