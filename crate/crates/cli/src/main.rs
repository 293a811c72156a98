#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use altratio::closed_form::ClosedFormInputs;
use altratio::design::{exact_design_expectations, Estimator, DEFAULT_ENUMERATION_CAP};
use altratio::params::{DesignParams, Population, SuperPopulationParams};
use altratio::repro::{emit_repro_script, ReproTarget, MC_CHECK_SEED};
use altratio::sim::{ErrorLaw, McConfig};
use altratio::tables::{
    compare_cells, generate_table, mc_crosscheck, paper_exclusions, read_cells_file,
    read_exclusions_file, reference_table, reference_tables, write_cells_csv, write_cells_markdown,
    ComparisonReport, CrosscheckReport, GridSpec, Precision, DEFAULT_TOLERANCE,
};
use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Parser)]
#[command(
    name = "altratio",
    version,
    about = "Efficiency tables and simulation checks for the shifted ratio estimator"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for Monte Carlo runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads for parallel work.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write CSV values at full precision instead of two decimals.
    #[arg(long, global = true)]
    full_precision: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the relative-efficiency table over a grid.
    Generate {
        /// Use the published grid of table 1, 2 or 3.
        #[arg(long)]
        table: Option<usize>,
    },
    /// Compare computed efficiencies against reference values.
    Verify {
        #[arg(long)]
        table: Option<usize>,
        /// Reference CSV (default: the embedded published values).
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Known-typo list (default: the embedded list).
        #[arg(long)]
        exclusions: Option<PathBuf>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Score the closed forms against a Monte Carlo simulation.
    McCheck(McCheckArgs),
    /// Exact design bias and MSE for a population file with columns x,y.
    Enumerate {
        #[arg(long)]
        population: PathBuf,
        /// Sample size.
        #[arg(short = 'n', long = "sample-size")]
        sample_size: usize,
        #[arg(long, value_enum, default_value_t = EstimatorArg::All)]
        estimator: EstimatorArg,
        /// Shift for the alternative estimator.
        #[arg(
            long = "a",
            short = 'A',
            default_value_t = 0.0,
            allow_hyphen_values = true
        )]
        a: f64,
    },
    /// Print the commands that reproduce a published artifact.
    Repro {
        /// table1, table2, table3 or mc_check
        target: String,
    },
}

#[derive(Args)]
struct McCheckArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long = "population-size")]
    population_size: Option<usize>,
    #[arg(long = "sample-size")]
    sample_size: Option<usize>,
    #[arg(long = "a", allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long)]
    populations: Option<u64>,
    /// SRSWOR draws per population; 0 enumerates every subset.
    #[arg(long)]
    designs: Option<u64>,
    #[arg(long = "error-law")]
    error_law: Option<ErrorLaw>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Mean,
    Ratio,
    Alternative,
    All,
}

#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Config {
    grid: Option<GridSpec>,
    mc: Option<McConfig>,
    model: Option<SuperPopulationParams>,
    design: Option<DesignParams>,
    #[serde(rename = "A")]
    a: Option<f64>,
    tolerance: Option<f64>,
}

fn load_config(path: Option<&Path>) -> anyhow::Result<Config> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn grid_for(table: Option<usize>, cfg: &Config) -> anyhow::Result<GridSpec> {
    let grid = match (table, &cfg.grid) {
        (Some(t), _) => GridSpec::paper_table(t)?,
        (None, Some(g)) => g.clone(),
        (None, None) => GridSpec::paper(),
    };
    grid.validate()?;
    Ok(grid)
}

fn install_threads(threads: Option<usize>) -> anyhow::Result<()> {
    if let Some(t) = threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let g = &cli.global;
    let cfg = load_config(g.config.as_deref())?;
    match cli.command {
        Command::Generate { table } => {
            install_threads(g.threads)?;
            let grid = grid_for(table, &cfg)?;
            let cells = generate_table(&grid)?;
            let mut out = output(g.out.as_deref())?;
            match g.format {
                Format::Csv => {
                    let precision = if g.full_precision {
                        Precision::Full
                    } else {
                        Precision::TwoDecimals
                    };
                    write_cells_csv(&mut out, &cells, precision)?;
                }
                Format::Markdown => write_cells_markdown(&mut out, &cells)?,
            }
            out.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            table,
            reference,
            exclusions,
            tolerance,
        } => {
            install_threads(g.threads)?;
            let grid = grid_for(table, &cfg)?;
            let tolerance = tolerance.or(cfg.tolerance).unwrap_or(DEFAULT_TOLERANCE);
            if !(tolerance >= 0.0) {
                bail!("tolerance must be non-negative");
            }
            let reference = match (reference, table) {
                (Some(p), _) => read_cells_file(&p)?,
                (None, Some(t)) => reference_table(t)?,
                (None, None) => reference_tables()?,
            };
            let exclusions = match exclusions {
                Some(p) => read_exclusions_file(&p)?,
                None => paper_exclusions()?,
            };
            let cells = generate_table(&grid)?;
            let report = compare_cells(&cells, &reference, tolerance, &exclusions);
            let mut out = output(g.out.as_deref())?;
            write_report(&mut out, &report, tolerance)?;
            out.flush()?;
            Ok(if report.is_clean() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::McCheck(args) => {
            let (sp, dp, a, mc) = mc_settings(&args, g, &cfg)?;
            let report = mc_crosscheck(&sp, &dp, a, &mc)?;
            let mut out = output(g.out.as_deref())?;
            writeln!(
                out,
                "# N={} n={} alpha={} beta={} delta={} g={} theta={} A={} populations={} designs={} seed={}",
                dp.population_size,
                dp.sample_size,
                sp.alpha,
                sp.beta,
                sp.delta,
                sp.g,
                sp.theta,
                a,
                mc.n_populations,
                mc.designs_per_population,
                mc.seed
            )?;
            write_crosscheck(&mut out, &report, g.format)?;
            out.flush()?;
            Ok(if report.derived_within(3.0) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Enumerate {
            population,
            sample_size,
            estimator,
            a,
        } => {
            let pop = read_population(&population)?;
            let dp = DesignParams::new(pop.len(), sample_size)?;
            let estimators: Vec<(&str, Estimator)> = match estimator {
                EstimatorArg::Mean => vec![("mean", Estimator::Mean)],
                EstimatorArg::Ratio => vec![("ratio", Estimator::Ratio)],
                EstimatorArg::Alternative => vec![("alternative", Estimator::Alternative(a))],
                EstimatorArg::All => vec![
                    ("mean", Estimator::Mean),
                    ("ratio", Estimator::Ratio),
                    ("alternative", Estimator::Alternative(a)),
                ],
            };
            let kinds: Vec<Estimator> = estimators.iter().map(|e| e.1).collect();
            let results = exact_design_expectations(&pop, &dp, &kinds, DEFAULT_ENUMERATION_CAP)?;
            let mut out = output(g.out.as_deref())?;
            let rows = estimators.iter().zip(&results).map(|((name, _), r)| {
                [
                    name.to_string(),
                    format!("{:?}", r.bias),
                    format!("{:?}", r.mse),
                    r.n_samples.to_string(),
                ]
            });
            write_rows(
                &mut out,
                g.format,
                &["estimator", "bias", "mse", "samples"],
                rows,
            )?;
            out.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Repro { target } => {
            let target: ReproTarget = target.parse()?;
            let mut out = output(g.out.as_deref())?;
            for line in emit_repro_script(target) {
                writeln!(out, "{line}")?;
            }
            out.flush()?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn mc_settings(
    args: &McCheckArgs,
    g: &GlobalOpts,
    cfg: &Config,
) -> anyhow::Result<(SuperPopulationParams, DesignParams, f64, McConfig)> {
    let base_sp = cfg.model.unwrap_or(SuperPopulationParams {
        alpha: 1.0,
        beta: 1.0,
        delta: 2.0,
        g: 1.0,
        theta: 8.0,
    });
    let sp = SuperPopulationParams::new(
        args.alpha.unwrap_or(base_sp.alpha),
        args.beta.unwrap_or(base_sp.beta),
        args.delta.unwrap_or(base_sp.delta),
        args.g.unwrap_or(base_sp.g),
        args.theta.unwrap_or(base_sp.theta),
    )?;
    let base_dp = cfg.design.unwrap_or(DesignParams {
        population_size: 60,
        sample_size: 10,
    });
    let dp = DesignParams::new(
        args.population_size.unwrap_or(base_dp.population_size),
        args.sample_size.unwrap_or(base_dp.sample_size),
    )?;
    let a = args.a.or(cfg.a).unwrap_or(0.5);
    ClosedFormInputs::new(sp, dp, a)?;

    let mut mc = cfg.mc.unwrap_or(McConfig {
        seed: MC_CHECK_SEED,
        ..McConfig::default()
    });
    if let Some(s) = g.seed {
        mc.seed = s;
    }
    if let Some(p) = args.populations {
        mc.n_populations = p;
    }
    if let Some(d) = args.designs {
        mc.designs_per_population = d;
    }
    if let Some(law) = args.error_law {
        mc.error_law = law;
    }
    if g.threads.is_some() {
        mc.threads = g.threads;
    }
    mc.validate()?;
    Ok((sp, dp, a, mc))
}

fn read_population(path: &Path) -> anyhow::Result<Population> {
    #[derive(Deserialize)]
    struct Unit {
        x: f64,
        y: f64,
    }
    let mut rdr =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for row in rdr.deserialize() {
        let u: Unit = row.with_context(|| format!("reading {}", path.display()))?;
        x.push(u.x);
        y.push(u.y);
    }
    Ok(Population::new(x, y)?)
}

fn write_rows<W: Write, I: IntoIterator<Item = [String; N]>, const N: usize>(
    out: &mut W,
    format: Format,
    header: &[&str; N],
    rows: I,
) -> io::Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "{}", header.join(","))?;
            for r in rows {
                writeln!(out, "{}", r.join(","))?;
            }
        }
        Format::Markdown => {
            writeln!(out, "| {} |", header.join(" | "))?;
            writeln!(out, "|{}", "---|".repeat(N))?;
            for r in rows {
                writeln!(out, "| {} |", r.join(" | "))?;
            }
        }
    }
    Ok(())
}

fn write_crosscheck<W: Write>(
    out: &mut W,
    report: &CrosscheckReport,
    format: Format,
) -> io::Result<()> {
    let rows = report.rows.iter().map(|r| {
        [
            r.quantity.to_string(),
            format!("{:.6}", r.closed_form),
            format!("{:.6}", r.mc.value),
            format!("{:.6}", r.mc.std_error),
            format!("{:.2}", r.z_score),
            format!("{:.4}", r.rel_diff),
            if r.printed_form { "printed" } else { "derived" }.to_string(),
        ]
    });
    write_rows(
        out,
        format,
        &[
            "quantity",
            "closed_form",
            "mc",
            "std_error",
            "z",
            "rel_diff",
            "form",
        ],
        rows,
    )
}

fn write_report<W: Write>(
    out: &mut W,
    report: &ComparisonReport,
    tolerance: f64,
) -> io::Result<()> {
    writeln!(
        out,
        "{} entries, tolerance {tolerance}: {} matched, {} mismatched, {} excluded as known typos ({:.1}%)",
        report.total_cells,
        report.matched,
        report.mismatched.len(),
        report.excluded_known_typos.len(),
        100.0 * report.excluded_fraction()
    )?;
    for m in &report.mismatched {
        match m.got {
            Some(v) => writeln!(
                out,
                "mismatch {}: reference {:.2}, computed {v:.4}",
                m.key, m.expected
            )?,
            None => writeln!(
                out,
                "missing {}: reference {:.2}, not in grid",
                m.key, m.expected
            )?,
        }
    }
    for e in &report.excluded_known_typos {
        writeln!(
            out,
            "excluded {}: printed {:.2} ({})",
            e.key, e.printed, e.reason
        )?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
