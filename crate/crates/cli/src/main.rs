//! `locality-lab`: build localities from permutation groups, run the checkers
//! and list partial normal subgroups against normal subsystems.
//!
//! Exit status: 0 when every selected check passes, 1 on a failed check, 2 on
//! unreadable input, 3 when the instance does not meet a precondition.

mod commands;
mod instance;
mod render;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::render::Outcome;

#[derive(Parser, Debug)]
#[command(name = "locality-lab", version, about = "Localities, partial normal subgroups and normal subsystems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the locality and print a summary.
    Build(Common),
    /// Run checkers.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated subset of axioms, lemma-props, bijection, products,
        /// expansion, quotient. Defaults to all of them.
        #[arg(long)]
        checks: Option<String>,
    },
    /// List partial normal subgroups or normal subsystems.
    Enumerate {
        what: What,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum What {
    Pns,
    Subsystems,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Emit {
    Text,
    Structured,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Group file (`name:`, `degree:`, `gens:` lines).
    #[arg(long, required_unless_present = "load", conflicts_with = "load")]
    group: Option<std::path::PathBuf>,
    #[arg(long)]
    prime: Option<u32>,
    /// cr-closure, centric, quasicentric, subcentric, all, or
    /// `explicit:<gens>;<gens>` with comma-separated cycle generators per
    /// member.
    #[arg(long, conflicts_with = "load")]
    delta: Option<String>,
    /// Localities up to this size get the exhaustive enumeration audit.
    #[arg(long, default_value_t = locality_lab::correspondence::DEFAULT_AUDIT_BOUND)]
    audit_bound: usize,
    #[arg(long, value_enum, default_value_t = Emit::Text)]
    emit: Emit,
    /// Write the built locality to this file.
    #[arg(long)]
    dump: Option<std::path::PathBuf>,
    /// Read a locality written by `--dump` instead of building one.
    #[arg(long)]
    load: Option<std::path::PathBuf>,
}

/// Why a run stopped before producing a report.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Precondition(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, result): (&Common, Result<Outcome, Failure>) = match &cli.command {
        Command::Build(c) => (c, commands::build(c)),
        Command::Verify { common, checks } => (common, commands::verify(common, checks.as_deref())),
        Command::Enumerate { what, common } => (common, commands::enumerate(common, *what == What::Pns)),
    };
    match result {
        Ok(out) => {
            print!("{}", out.render(common.emit));
            if out.report.failures().next().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Input(e)) => {
            eprintln!("input error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Precondition(e)) => {
            eprintln!("precondition failed: {e}");
            ExitCode::from(3)
        }
    }
}
