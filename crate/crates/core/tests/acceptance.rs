//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use altratio::closed_form::{
    dominance_interval, em_bias_alt, em_bias_ratio, em_mse_alt, em_mse_alt_min,
    em_mse_gain_at_optimum, em_mse_ratio, rel_efficiencies, ClosedFormInputs,
};
use altratio::design::{exact_design_expectation, sampled_design_expectation, Estimator};
use altratio::params::{DesignParams, SuperPopulationParams};
use altratio::repro::MC_CHECK_SEED;
use altratio::sim::{draw_population, mc_model_expectations, McConfig, McSummary};
use altratio::tables::{
    compare_cells, generate_table, mc_crosscheck, paper_exclusions, reference_tables,
    round_half_away, GridSpec, DEFAULT_TOLERANCE,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn inputs(n: usize, alpha: f64, beta: f64, g: f64, a: f64) -> ClosedFormInputs {
    ClosedFormInputs::new(
        SuperPopulationParams::new(alpha, beta, 2.0, g, 8.0).unwrap(),
        DesignParams::new(60, n).unwrap(),
        a,
    )
    .unwrap()
}

// Shared setting of criteria 3, 4 and 8.
fn mc_setting() -> (SuperPopulationParams, DesignParams, f64, McConfig) {
    (
        SuperPopulationParams::new(1.0, 1.0, 2.0, 1.0, 8.0).unwrap(),
        DesignParams::new(60, 10).unwrap(),
        0.5,
        McConfig {
            n_populations: 20_000,
            designs_per_population: 50,
            seed: MC_CHECK_SEED,
            ..McConfig::default()
        },
    )
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let eff = rel_efficiencies(&inputs(10, 0.5, 0.5, 0.0, 0.3)).unwrap();
    let elapsed = start.elapsed();
    let (e1, e2) = (round_half_away(eff.e1, 2), round_half_away(eff.e2, 2));
    let pass = (e1 - 192.86).abs() <= 0.01 + 1e-9
        && (e2 - 101.34).abs() <= 0.01 + 1e-9
        && elapsed < Duration::from_secs(1);
    outcome(pass, format!("E1 = {e1:.2}, E2 = {e2:.2} in {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let cells = generate_table(&GridSpec::paper()).unwrap();
    let reference = reference_tables().unwrap();
    let exclusions = paper_exclusions().unwrap();
    let report = compare_cells(&cells, &reference, DEFAULT_TOLERANCE, &exclusions);
    let elapsed = start.elapsed();
    let frac = report.excluded_fraction();
    let pass = report.is_clean() && frac < 0.05 && elapsed < Duration::from_secs(10);
    let mut detail = format!(
        "{} entries: {} matched, {} mismatched, {} excluded ({:.1}%) in {elapsed:?}",
        report.total_cells,
        report.matched,
        report.mismatched.len(),
        report.excluded_known_typos.len(),
        100.0 * frac
    );
    for m in &report.mismatched {
        detail.push_str(&format!(
            "\n      mismatch {}: printed {:.2}, computed {}",
            m.key,
            m.expected,
            m.got.map_or("-".into(), |v| format!("{v:.4}"))
        ));
    }
    outcome(pass, detail)
}

fn criterion_3(summary_out: &mut Option<McSummary>) -> (Outcome, Option<Outcome>) {
    let (sp, dp, a, cfg) = mc_setting();
    let start = Instant::now();
    let report = mc_crosscheck(&sp, &dp, a, &cfg).unwrap();
    let elapsed = start.elapsed();
    *summary_out = Some(report.summary);

    let mut pass = true;
    let mut detail = format!("20000 populations x 50 draws, seed {MC_CHECK_SEED}, {elapsed:?}");
    for q in ["bias_alt", "mse_alt", "mse_ratio", "var_mean"] {
        let r = report.row(q).unwrap();
        let ok = r.z_score.abs() <= 3.0 && r.rel_diff.abs() <= 0.02;
        pass &= ok;
        detail.push_str(&format!(
            "\n      {q:<10} closed {:.6}  mc {:.6} ± {:.6}  z {:+.2}  rel {:+.2}%  {}",
            r.closed_form,
            r.mc.value,
            r.mc.std_error,
            r.z_score,
            100.0 * r.rel_diff,
            if ok { "ok" } else { "FAIL" }
        ));
    }

    let derived = report.row("bias_ratio").unwrap();
    let printed = report.row("bias_ratio_printed").unwrap();
    let inp = ClosedFormInputs::new(sp, dp, a).unwrap();
    let at_opt = inp.with_a(sp.alpha);
    let min_equal = rel_close(em_mse_alt(&at_opt), em_mse_alt_min(&at_opt), 1e-12);
    let mut gap_ok = true;
    for cell in GridSpec::paper().alphas.iter().flat_map(|p| {
        [10, 20].into_iter().flat_map(move |n| {
            [0.0, 0.5, 1.0, 1.5, 2.0]
                .into_iter()
                .map(move |g| (p.alpha, n, g))
        })
    }) {
        let (alpha, n, g) = cell;
        let i = inputs(n, alpha, 1.0, g, alpha);
        gap_ok &= rel_close(
            em_mse_ratio(&i) - em_mse_alt_min(&i),
            em_mse_gain_at_optimum(&i),
            1e-12,
        );
        gap_ok &= rel_close(em_mse_alt(&i), em_mse_alt_min(&i), 1e-12);
    }
    let c4_pass =
        derived.z_score.abs() <= 3.0 && printed.z_score.abs() > 10.0 && min_equal && gap_ok;
    let c4 = outcome(
        c4_pass,
        format!(
            "derived bias z {:+.2}, printed bias z {:+.1}; min-MSE form equal: {min_equal}; gap identity: {gap_ok}",
            derived.z_score, printed.z_score
        ),
    );
    (outcome(pass, detail), Some(c4))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let sp = SuperPopulationParams::new(1.0, 1.0, 2.0, 1.0, 8.0).unwrap();
    let pop = draw_population(&sp, 8, 8_003).unwrap();
    let dp = DesignParams::new(8, 3).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    for (name, est) in [
        ("mean", Estimator::Mean),
        ("ratio", Estimator::Ratio),
        ("alt(0.5)", Estimator::Alternative(0.5)),
    ] {
        let exact = exact_design_expectation(&pop, &dp, est).unwrap();
        let sampled = sampled_design_expectation(&pop, &dp, est, 200_000, 5_005).unwrap();
        let zb = (sampled.bias - exact.bias) / sampled.bias_std_error;
        let zm = (sampled.mse - exact.mse) / sampled.mse_std_error;
        let ok = exact.n_samples == 56 && zb.abs() <= 3.0 && zm.abs() <= 3.0;
        pass &= ok;
        detail.push_str(&format!(
            "\n      {name:<9} bias exact {:+.6} sampled {:+.6} (z {:+.2}); mse exact {:.6} sampled {:.6} (z {:+.2})",
            exact.bias, sampled.bias, zb, exact.mse, sampled.mse, zm
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!("N = 8, n = 3, 56 subsets, 200000 draws, {elapsed:?}{detail}"),
    )
}

fn criterion_6() -> Outcome {
    let mut checked = 0usize;
    let mut endpoints = 0usize;
    let mut failures = Vec::new();
    for alpha in [0.25, 0.5, 1.0, 1.5, 3.0] {
        let interval = dominance_interval(alpha);
        // Midpoints of 50 equal bins; k = 12 and k = 37 land on 0 and 2α.
        let a_grid: Vec<f64> = (0..50)
            .map(|k| -alpha + 4.0 * alpha * (k as f64 + 0.5) / 50.0)
            .collect();
        for &g in &[0.0, 1.0, 2.0] {
            for &n in &[10usize, 20] {
                for &a in &a_grid {
                    let i = inputs(n, alpha, 1.0, g, a);
                    let (ba, br) = (em_bias_alt(&i).abs(), em_bias_ratio(&i).abs());
                    let (ma, mr) = (em_mse_alt(&i), em_mse_ratio(&i));
                    let ok = if a == 0.0 || a == 2.0 * alpha {
                        endpoints += 1;
                        rel_close(ma, mr, 1e-12)
                    } else if interval.contains(a) {
                        ba < br && ma < mr
                    } else {
                        ba > br && ma > mr
                    };
                    checked += 1;
                    if !ok {
                        failures.push(format!("alpha={alpha} g={g} n={n} A={a}"));
                    }
                }
            }
        }
    }
    outcome(
        failures.is_empty() && endpoints == 5 * 3 * 2 * 2,
        format!(
            "{checked} grid points ({endpoints} at endpoints), {} violations {:?}",
            failures.len(),
            failures
        ),
    )
}

fn criterion_7() -> Outcome {
    let grid = GridSpec::paper();
    let mut sym_ok = true;
    let mut beta_ok = true;
    let mut min_ok = true;
    let mut mono_ok = true;

    for panel in &grid.alphas {
        let alpha = panel.alpha;
        for &n in &grid.ns {
            for &g in &grid.gs {
                // Symmetry about α over a dense A grid.
                for k in 0..=200 {
                    let a = -alpha + 4.0 * alpha * k as f64 / 200.0;
                    let i = inputs(n, alpha, 1.0, g, a);
                    sym_ok &= rel_close(
                        em_mse_alt(&i),
                        em_mse_alt(&i.with_a(2.0 * alpha - a)),
                        1e-12,
                    );
                }
                // 1000-point scan for the minimiser.
                let scan: Vec<(f64, f64)> = (0..1000)
                    .map(|k| {
                        let a = -alpha + 4.0 * alpha * k as f64 / 999.0;
                        (a, em_mse_alt(&inputs(n, alpha, 1.0, g, a)))
                    })
                    .collect();
                let at_alpha = em_mse_alt(&inputs(n, alpha, 1.0, g, alpha));
                let (best_a, best) = scan
                    .iter()
                    .copied()
                    .min_by(|x, y| x.1.total_cmp(&y.1))
                    .unwrap();
                let spacing = 4.0 * alpha / 999.0;
                min_ok &= scan.iter().all(|&(_, v)| v >= at_alpha)
                    && (best_a - alpha).abs() <= spacing / 2.0 + 1e-12
                    && best >= at_alpha;

                for &a in &panel.a_values {
                    let e2s: Vec<f64> = grid
                        .betas
                        .iter()
                        .map(|&b| rel_efficiencies(&inputs(n, alpha, b, g, a)).unwrap().e2)
                        .collect();
                    beta_ok &= e2s.iter().all(|&e| rel_close(e, e2s[0], 1e-12));
                }
            }
            for &beta in &grid.betas {
                for &a in &panel.a_values {
                    let effs: Vec<_> = grid
                        .gs
                        .iter()
                        .map(|&g| rel_efficiencies(&inputs(n, alpha, beta, g, a)).unwrap())
                        .collect();
                    mono_ok &= effs
                        .windows(2)
                        .all(|w| w[1].e1 < w[0].e1 && w[1].e2 < w[0].e2);
                }
            }
        }
    }
    outcome(
        sym_ok && beta_ok && min_ok && mono_ok,
        format!(
            "symmetry {sym_ok}, E2 beta-invariance {beta_ok}, minimum at A = alpha {min_ok}, decreasing in g {mono_ok}"
        ),
    )
}

fn criterion_8(base: &McSummary) -> Outcome {
    let (sp, dp, a, cfg) = mc_setting();
    let mut identical = true;
    for threads in [1, 4, 8] {
        let run = mc_model_expectations(
            &sp,
            &dp,
            a,
            &McConfig {
                threads: Some(threads),
                ..cfg
            },
        )
        .unwrap();
        let same = [
            (run.bias_ratio, base.bias_ratio),
            (run.mse_ratio, base.mse_ratio),
            (run.bias_alt, base.bias_alt),
            (run.mse_alt, base.mse_alt),
            (run.var_mean, base.var_mean),
        ]
        .iter()
        .all(|(x, y)| {
            x.value.to_bits() == y.value.to_bits() && x.std_error.to_bits() == y.std_error.to_bits()
        });
        identical &= same;
    }
    let verdict = if identical {
        "bitwise identical"
    } else {
        "estimates differ"
    };
    outcome(
        identical,
        format!("threads 1, 4, 8 against the default pool: {verdict}"),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    results.push((1, "table-cell spot reproduction", criterion_1()));
    results.push((2, "full-table reproduction", criterion_2()));
    let mut summary = None;
    let (c3, c4) = criterion_3(&mut summary);
    results.push((3, "Monte Carlo vs closed form", c3));
    results.push((4, "erratum arbitration", c4.unwrap()));
    results.push((5, "exhaustive-enumeration oracle", criterion_5()));
    results.push((6, "dominance property suite", criterion_6()));
    results.push((7, "structural properties", criterion_7()));
    results.push((
        8,
        "determinism across thread counts",
        criterion_8(&summary.unwrap()),
    ));

    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (id, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("[{tag}] criterion {id}: {name}: {}", o.detail);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
