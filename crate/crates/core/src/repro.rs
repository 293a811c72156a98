//! Command listings that reproduce each published artifact from a checkout.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Seed used by the documented Monte Carlo cross-check.
pub const MC_CHECK_SEED: u64 = 20_240_601;

const CLI: &str = "cargo run --release -p altratio-cli --";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReproTarget {
    Table1,
    Table2,
    Table3,
    McCheck,
}

impl FromStr for ReproTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(ReproTarget::Table1),
            "table2" => Ok(ReproTarget::Table2),
            "table3" => Ok(ReproTarget::Table3),
            "mc_check" | "mc-check" => Ok(ReproTarget::McCheck),
            other => Err(Error::UnknownTarget(other.to_string())),
        }
    }
}

impl fmt::Display for ReproTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReproTarget::Table1 => "table1",
            ReproTarget::Table2 => "table2",
            ReproTarget::Table3 => "table3",
            ReproTarget::McCheck => "mc_check",
        })
    }
}

/// Shell commands, run from the workspace root, that reproduce `target`.
/// Each line is `cargo run --release -p altratio-cli -- <args>`.
pub fn emit_repro_script(target: ReproTarget) -> Vec<String> {
    let table = |k: usize, config: &str| {
        vec![
            format!("{CLI} generate --config configs/{config} --format csv --out table{k}.csv"),
            format!(
                "{CLI} verify --config configs/{config} \
                 --reference crates/core/data/table{k}.csv \
                 --exclusions crates/core/data/exclusions.csv"
            ),
        ]
    };
    match target {
        ReproTarget::Table1 => table(1, "paper-grid-alpha05.json"),
        ReproTarget::Table2 => table(2, "paper-grid-alpha10.json"),
        ReproTarget::Table3 => table(3, "paper-grid-alpha15.json"),
        ReproTarget::McCheck => vec![format!(
            "{CLI} mc-check --config configs/mc-check.json --seed {MC_CHECK_SEED}"
        )],
    }
}

/// Parses a target name and emits its commands.
pub fn emit_repro_script_for(name: &str) -> Result<Vec<String>> {
    Ok(emit_repro_script(name.parse()?))
}

/// Splits an emitted command into the arguments passed to the CLI.
pub fn cli_args(command: &str) -> Option<Vec<&str>> {
    command
        .strip_prefix(CLI)
        .map(|rest| rest.split_whitespace().collect())
}
