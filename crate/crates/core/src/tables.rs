//! Regeneration and verification of the relative-efficiency tables.
//!
//! The published tables are shipped as CSV under `data/` (one file per
//! intercept `α`) together with a list of printed entries that are known
//! typos. Comparison works on printed entries: each `(α, g, β, n, A)` grid
//! point contributes two, its `E1` and its `E2`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{
    em_bias_alt, em_bias_ratio, em_bias_ratio_printed, em_mse_alt, em_mse_alt_min,
    em_mse_alt_min_printed, em_mse_ratio, em_var_mean, rel_efficiencies, ClosedFormInputs,
};
use crate::params::{DesignParams, SuperPopulationParams};
use crate::sim::{mc_model_expectations, McConfig, McEstimate, McSummary};
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 7] = ["alpha", "g", "beta", "n", "A", "E1", "E2"];

/// Absolute tolerance on two-decimal values used by the verification gate.
pub const DEFAULT_TOLERANCE: f64 = 0.02;

const TABLE_CSV: [&str; 3] = [
    include_str!("../data/table1.csv"),
    include_str!("../data/table2.csv"),
    include_str!("../data/table3.csv"),
];
const EXCLUSIONS_CSV: &str = include_str!("../data/exclusions.csv");

/// Shift values tabulated for one intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrid {
    pub alpha: f64,
    pub a_values: Vec<f64>,
}

/// Parameter grid of an efficiency table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(alias = "N")]
    pub population_size: usize,
    pub delta: f64,
    pub theta: f64,
    pub alphas: Vec<AlphaGrid>,
    pub betas: Vec<f64>,
    pub gs: Vec<f64>,
    pub ns: Vec<usize>,
}

impl GridSpec {
    /// The published grid for all three tables.
    pub fn paper() -> Self {
        GridSpec {
            population_size: 60,
            delta: 2.0,
            theta: 8.0,
            alphas: vec![
                AlphaGrid {
                    alpha: 0.5,
                    a_values: vec![0.3, 0.6, 0.9],
                },
                AlphaGrid {
                    alpha: 1.0,
                    a_values: vec![0.5, 1.0, 1.5, 1.9],
                },
                AlphaGrid {
                    alpha: 1.5,
                    a_values: vec![0.6, 1.2, 1.8, 2.4, 2.9],
                },
            ],
            betas: vec![0.5, 1.0, 1.5],
            gs: vec![0.0, 0.5, 1.0, 1.5, 2.0],
            ns: vec![10, 20],
        }
    }

    /// The published grid of table `table` (1, 2 or 3).
    pub fn paper_table(table: usize) -> Result<Self> {
        let mut grid = Self::paper();
        if !(1..=3).contains(&table) {
            return Err(Error::InvalidGrid(format!(
                "table must be 1, 2 or 3 (got {table})"
            )));
        }
        grid.alphas = vec![grid.alphas.swap_remove(table - 1)];
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidGrid(msg));
        if self.alphas.is_empty()
            || self.betas.is_empty()
            || self.gs.is_empty()
            || self.ns.is_empty()
        {
            return bad("alphas, betas, gs and ns must be non-empty".into());
        }
        if let Some(p) = self.alphas.iter().find(|p| p.a_values.is_empty()) {
            return bad(format!("no A values listed for alpha = {}", p.alpha));
        }
        for &n in &self.ns {
            if !(n as f64 * self.theta > 2.0) {
                return bad(format!(
                    "n·theta must exceed 2 (n = {n}, theta = {})",
                    self.theta
                ));
            }
        }
        // Remaining constraints are the model/design ones.
        for p in &self.alphas {
            for &beta in &self.betas {
                for &g in &self.gs {
                    SuperPopulationParams::new(p.alpha, beta, self.delta, g, self.theta)?;
                }
            }
        }
        for &n in &self.ns {
            DesignParams::new(self.population_size, n)?;
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        let a_total: usize = self.alphas.iter().map(|p| p.a_values.len()).sum();
        a_total * self.ns.len() * self.gs.len() * self.betas.len()
    }
}

/// One grid point of an efficiency table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyCell {
    pub alpha: f64,
    pub g: f64,
    pub beta: f64,
    pub n: usize,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
}

/// Computes every cell of `grid`, ordered by `α` panel, then `n`, `g`, `β`
/// and `A`, the printed layout of the tables.
pub fn generate_table(grid: &GridSpec) -> Result<Vec<EfficiencyCell>> {
    grid.validate()?;
    let mut coords = Vec::with_capacity(grid.cell_count());
    for panel in &grid.alphas {
        for &n in &grid.ns {
            for &g in &grid.gs {
                for &beta in &grid.betas {
                    for &a in &panel.a_values {
                        coords.push((panel.alpha, g, beta, n, a));
                    }
                }
            }
        }
    }
    coords
        .into_par_iter()
        .map(|(alpha, g, beta, n, a)| {
            let sp = SuperPopulationParams::new(alpha, beta, grid.delta, g, grid.theta)?;
            let dp = DesignParams::new(grid.population_size, n)?;
            let eff = rel_efficiencies(&ClosedFormInputs::new(sp, dp, a)?)?;
            Ok(EfficiencyCell {
                alpha,
                g,
                beta,
                n,
                a,
                e1: eff.e1,
                e2: eff.e2,
            })
        })
        .collect()
}

/// Rounds half away from zero to `decimals` places.
pub fn round_half_away(value: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (value * scale).round() / scale
}

/// How efficiencies are rendered in CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Two decimals, as printed in the tables.
    TwoDecimals,
    /// Shortest representation that reads back to the same `f64`.
    Full,
}

fn render(v: f64, precision: Precision) -> String {
    match precision {
        Precision::TwoDecimals => format!("{:.2}", round_half_away(v, 2)),
        Precision::Full => format!("{v:?}"),
    }
}

pub fn write_cells_csv<W: Write>(
    out: W,
    cells: &[EfficiencyCell],
    precision: Precision,
) -> Result<()> {
    let io = |e: csv::Error| Error::Io {
        path: "<csv output>".into(),
        source: std::io::Error::other(e),
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for c in cells {
        w.write_record([
            format!("{:?}", c.alpha),
            format!("{:?}", c.g),
            format!("{:?}", c.beta),
            c.n.to_string(),
            format!("{:?}", c.a),
            render(c.e1, precision),
            render(c.e2, precision),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<csv output>".into(),
        source: e,
    })
}

/// Markdown rendering, one row per cell, two decimals.
pub fn write_cells_markdown<W: Write>(mut out: W, cells: &[EfficiencyCell]) -> Result<()> {
    let io = |e| Error::Io {
        path: "<markdown output>".into(),
        source: e,
    };
    writeln!(out, "| alpha | g | beta | n | A | E1 | E2 |").map_err(io)?;
    writeln!(out, "|---:|---:|---:|---:|---:|---:|---:|").map_err(io)?;
    for c in cells {
        writeln!(
            out,
            "| {} | {:.1} | {:.1} | {} | {:.2} | {:.2} | {:.2} |",
            c.alpha,
            c.g,
            c.beta,
            c.n,
            c.a,
            round_half_away(c.e1, 2),
            round_half_away(c.e2, 2)
        )
        .map_err(io)?;
    }
    Ok(())
}

fn parse_error(source_name: &str, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        line,
        message: message.into(),
    }
}

fn csv_line(e: &csv::Error) -> u64 {
    e.position().map(|p| p.line()).unwrap_or(0)
}

/// Reads cells in the `alpha,g,beta,n,A,E1,E2` layout.
pub fn read_cells_csv<R: Read>(input: R, source_name: &str) -> Result<Vec<EfficiencyCell>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| parse_error(source_name, 1, e.to_string()))?
        .clone();
    if headers.iter().map(str::trim).ne(CSV_HEADER) {
        return Err(parse_error(
            source_name,
            1,
            format!("expected header `{}`", CSV_HEADER.join(",")),
        ));
    }
    rdr.deserialize()
        .map(|row| row.map_err(|e| parse_error(source_name, csv_line(&e), e.to_string())))
        .collect()
}

pub fn read_cells_file(path: &Path) -> Result<Vec<EfficiencyCell>> {
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    read_cells_csv(file, &path.display().to_string())
}

/// Reference cells of published table `table` (1, 2 or 3).
pub fn reference_table(table: usize) -> Result<Vec<EfficiencyCell>> {
    let csv = table
        .checked_sub(1)
        .and_then(|i| TABLE_CSV.get(i))
        .ok_or_else(|| Error::InvalidGrid(format!("table must be 1, 2 or 3 (got {table})")))?;
    read_cells_csv(csv.as_bytes(), &format!("table{table}.csv"))
}

/// Reference cells of all three tables, in table order.
pub fn reference_tables() -> Result<Vec<EfficiencyCell>> {
    let mut all = Vec::new();
    for t in 1..=3 {
        all.extend(reference_table(t)?);
    }
    Ok(all)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Column {
    E1,
    E2,
}

/// Coordinates of one printed entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryKey {
    pub alpha: f64,
    pub g: f64,
    pub beta: f64,
    pub n: usize,
    #[serde(rename = "A")]
    pub a: f64,
    pub column: Column,
}

type QuantizedKey = (i64, i64, i64, usize, i64);

fn quantize(alpha: f64, g: f64, beta: f64, n: usize, a: f64) -> QuantizedKey {
    let q = |v: f64| (v * 1e6).round() as i64;
    (q(alpha), q(g), q(beta), n, q(a))
}

impl EntryKey {
    fn cell_key(&self) -> QuantizedKey {
        quantize(self.alpha, self.g, self.beta, self.n, self.a)
    }
}

impl std::fmt::Display for EntryKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "alpha={} g={} beta={} n={} A={} {:?}",
            self.alpha, self.g, self.beta, self.n, self.a, self.column
        )
    }
}

/// A printed entry excluded from matching, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    #[serde(flatten)]
    pub key: EntryKey,
    pub printed: f64,
    pub reason: String,
}

pub fn read_exclusions_csv<R: Read>(input: R, source_name: &str) -> Result<Vec<Exclusion>> {
    #[derive(Deserialize)]
    struct Row {
        alpha: f64,
        g: f64,
        beta: f64,
        n: usize,
        #[serde(rename = "A")]
        a: f64,
        column: Column,
        printed: f64,
        reason: String,
    }
    csv::Reader::from_reader(input)
        .deserialize::<Row>()
        .map(|row| {
            let r = row.map_err(|e| parse_error(source_name, csv_line(&e), e.to_string()))?;
            Ok(Exclusion {
                key: EntryKey {
                    alpha: r.alpha,
                    g: r.g,
                    beta: r.beta,
                    n: r.n,
                    a: r.a,
                    column: r.column,
                },
                printed: r.printed,
                reason: r.reason,
            })
        })
        .collect()
}

pub fn read_exclusions_file(path: &Path) -> Result<Vec<Exclusion>> {
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    read_exclusions_csv(file, &path.display().to_string())
}

/// The documented typos in the published tables.
pub fn paper_exclusions() -> Result<Vec<Exclusion>> {
    read_exclusions_csv(EXCLUSIONS_CSV.as_bytes(), "exclusions.csv")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub key: EntryKey,
    pub expected: f64,
    /// `None` when the generated cells do not cover this coordinate.
    pub got: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// Printed entries in the reference, two per grid point.
    pub total_cells: usize,
    pub matched: usize,
    pub mismatched: Vec<Mismatch>,
    pub excluded_known_typos: Vec<Exclusion>,
}

impl ComparisonReport {
    pub fn is_clean(&self) -> bool {
        self.mismatched.is_empty()
    }

    pub fn excluded_fraction(&self) -> f64 {
        if self.total_cells == 0 {
            return 0.0;
        }
        self.excluded_known_typos.len() as f64 / self.total_cells as f64
    }
}

/// Compares generated cells against reference cells entry by entry. An
/// entry matches iff `|round₂(got) − reference| ≤ tolerance`; excluded
/// entries are reported without being matched.
pub fn compare_cells(
    cells: &[EfficiencyCell],
    reference: &[EfficiencyCell],
    tolerance: f64,
    exclusions: &[Exclusion],
) -> ComparisonReport {
    let computed: HashMap<QuantizedKey, &EfficiencyCell> = cells
        .iter()
        .map(|c| (quantize(c.alpha, c.g, c.beta, c.n, c.a), c))
        .collect();
    let excluded: HashMap<(QuantizedKey, Column), &Exclusion> = exclusions
        .iter()
        .map(|e| ((e.key.cell_key(), e.key.column), e))
        .collect();

    let mut report = ComparisonReport {
        total_cells: 0,
        matched: 0,
        mismatched: Vec::new(),
        excluded_known_typos: Vec::new(),
    };
    for r in reference {
        let ck = quantize(r.alpha, r.g, r.beta, r.n, r.a);
        for (column, expected) in [(Column::E1, r.e1), (Column::E2, r.e2)] {
            report.total_cells += 1;
            if let Some(ex) = excluded.get(&(ck, column)) {
                report.excluded_known_typos.push((*ex).clone());
                continue;
            }
            let got = computed.get(&ck).map(|c| match column {
                Column::E1 => c.e1,
                Column::E2 => c.e2,
            });
            // Small slack so that a difference of exactly `tolerance`
            // between two-decimal values is not lost to binary rounding.
            let ok =
                got.is_some_and(|v| (round_half_away(v, 2) - expected).abs() <= tolerance + 1e-9);
            if ok {
                report.matched += 1;
            } else {
                report.mismatched.push(Mismatch {
                    key: EntryKey {
                        alpha: r.alpha,
                        g: r.g,
                        beta: r.beta,
                        n: r.n,
                        a: r.a,
                        column,
                    },
                    expected,
                    got,
                });
            }
        }
    }
    report
}

/// [`compare_cells`] against a reference CSV on disk.
pub fn verify_against_reference(
    cells: &[EfficiencyCell],
    reference_path: &Path,
    tolerance: f64,
    exclusions: &[Exclusion],
) -> Result<ComparisonReport> {
    let reference = read_cells_file(reference_path)?;
    Ok(compare_cells(cells, &reference, tolerance, exclusions))
}

/// One closed form set against its Monte Carlo estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct CrosscheckRow {
    pub quantity: &'static str,
    pub closed_form: f64,
    pub mc: McEstimate,
    pub z_score: f64,
    /// `(mc − closed_form)/closed_form`.
    pub rel_diff: f64,
    /// A known misprinted form, expected to disagree with simulation.
    pub printed_form: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrosscheckReport {
    pub rows: Vec<CrosscheckRow>,
    pub summary: McSummary,
}

impl CrosscheckReport {
    pub fn row(&self, quantity: &str) -> Option<&CrosscheckRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    /// Whether every derived (non-misprinted) form lies within `max_z`
    /// standard errors of its simulation estimate.
    pub fn derived_within(&self, max_z: f64) -> bool {
        self.rows
            .iter()
            .filter(|r| !r.printed_form)
            .all(|r| r.z_score.abs() <= max_z)
    }
}

/// Simulates the model once and scores every closed form against it. The
/// minimum-MSE rows are included only when `a` equals `α`.
pub fn mc_crosscheck(
    sp: &SuperPopulationParams,
    dp: &DesignParams,
    a: f64,
    cfg: &McConfig,
) -> Result<CrosscheckReport> {
    let inp = ClosedFormInputs::new(*sp, *dp, a)?;
    let summary = mc_model_expectations(sp, dp, a, cfg)?;
    let row = |quantity, closed_form: f64, mc: McEstimate, printed_form| CrosscheckRow {
        quantity,
        closed_form,
        mc,
        z_score: mc.z_score(closed_form),
        rel_diff: (mc.value - closed_form) / closed_form,
        printed_form,
    };
    let mut rows = vec![
        row("bias_ratio", em_bias_ratio(&inp), summary.bias_ratio, false),
        row("bias_alt", em_bias_alt(&inp), summary.bias_alt, false),
        row("mse_ratio", em_mse_ratio(&inp), summary.mse_ratio, false),
        row("mse_alt", em_mse_alt(&inp), summary.mse_alt, false),
        row("var_mean", em_var_mean(&inp), summary.var_mean, false),
        row(
            "bias_ratio_printed",
            em_bias_ratio_printed(&inp),
            summary.bias_ratio,
            true,
        ),
    ];
    if a == sp.alpha {
        rows.push(row(
            "mse_alt_min",
            em_mse_alt_min(&inp),
            summary.mse_alt,
            false,
        ));
        rows.push(row(
            "mse_alt_min_printed",
            em_mse_alt_min_printed(&inp),
            summary.mse_alt,
            true,
        ));
    }
    Ok(CrosscheckReport { rows, summary })
}
