//! Design expectations under SRSWOR for a fixed finite population.
//!
//! Exact values come from enumerating every `n`-subset in lexicographic
//! order; [`sampled_design_expectation`] estimates the same quantities from
//! independent SRSWOR draws when `C(N, n)` is too large to enumerate.

use rand::seq::index;
use rand::Rng;

use crate::params::{DesignParams, Population};
use crate::rng::replicate_rng;
use crate::summation::{CompensatedSum, RunningMoments};
use crate::{Error, Result};

/// Default limit on the number of subsets [`exact_design_expectation`]
/// will enumerate.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Finite-population moments with `N − 1` divisors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinitePopulationMoments {
    pub ybar: f64,
    pub xbar: f64,
    pub sy2: f64,
    pub sx2: f64,
    pub syx: f64,
    /// `R = Ȳ/X̄`.
    pub r_ratio: f64,
    /// Regression slope `S_yx/S_x²`; `None` when every `x_i` is equal.
    pub beta_reg: Option<f64>,
    pub lambda: f64,
}

impl FinitePopulationMoments {
    pub fn regression_slope(&self) -> Result<f64> {
        self.beta_reg.ok_or(Error::DegenerateAuxiliary)
    }

    /// Whether `R` equals the regression slope to relative tolerance
    /// `rel_tol`, the condition under which the second-order MSE of the
    /// ratio estimator is minimal and its second-order bias vanishes.
    pub fn ratio_is_optimal(&self, rel_tol: f64) -> bool {
        match self.beta_reg {
            Some(b) => (self.r_ratio - b).abs() <= rel_tol * self.r_ratio.abs().max(b.abs()),
            None => false,
        }
    }
}

pub fn finite_population_moments(
    pop: &Population,
    dp: &DesignParams,
) -> Result<FinitePopulationMoments> {
    pop.check_design(dp)?;
    let ybar = pop.mean_y();
    let xbar = pop.mean_x();
    let mut sy2 = CompensatedSum::new();
    let mut sx2 = CompensatedSum::new();
    let mut syx = CompensatedSum::new();
    for (&x, &y) in pop.x().iter().zip(pop.y()) {
        let (dx, dy) = (x - xbar, y - ybar);
        sy2.add(dy * dy);
        sx2.add(dx * dx);
        syx.add(dy * dx);
    }
    let div = (pop.len() - 1) as f64;
    let (sy2, sx2, syx) = (sy2.value() / div, sx2.value() / div, syx.value() / div);
    Ok(FinitePopulationMoments {
        ybar,
        xbar,
        sy2,
        sx2,
        syx,
        r_ratio: ybar / xbar,
        beta_reg: (sx2 > 0.0).then(|| syx / sx2),
        lambda: dp.lambda(),
    })
}

/// Second-order approximation to the bias of the ratio estimator,
/// `λ(R·S_x² − S_yx)/X̄`.
pub fn approx_bias_ratio(m: &FinitePopulationMoments) -> f64 {
    m.lambda * (m.r_ratio * m.sx2 - m.syx) / m.xbar
}

/// Second-order approximation to the MSE of the ratio estimator,
/// `λ(S_y² + R²S_x² − 2R·S_yx)`.
pub fn approx_mse_ratio(m: &FinitePopulationMoments) -> f64 {
    let r = m.r_ratio;
    m.lambda * (m.sy2 + r * r * m.sx2 - 2.0 * r * m.syx)
}

/// Estimator whose design expectation is requested.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    Mean,
    Ratio,
    /// The transformed estimator with shift `A`.
    Alternative(f64),
}

impl Estimator {
    /// Evaluates the estimator from sample means. Callers guarantee
    /// positive means, which holds for any sample from a [`Population`].
    #[inline]
    pub(crate) fn evaluate(&self, ybar: f64, xbar: f64, pop_xbar: f64) -> f64 {
        match *self {
            Estimator::Mean => ybar,
            Estimator::Ratio => ybar * (pop_xbar / xbar),
            Estimator::Alternative(a) => (ybar - a) * (pop_xbar / xbar) + a,
        }
    }
}

/// Design bias and MSE of one estimator for one population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignExpectation {
    pub bias: f64,
    pub mse: f64,
    /// Subsets enumerated, or draws taken when sampled.
    pub n_samples: u64,
    /// Zero for exact enumeration.
    pub bias_std_error: f64,
    /// Zero for exact enumeration.
    pub mse_std_error: f64,
}

/// `C(n, k)`, or `None` if it does not fit in a `u64`.
pub fn subset_count(n: usize, k: usize) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Calls `visit` with every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k == 0 || k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx);
        // Rightmost position that can still advance.
        let Some(pos) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn subset_means(pop: &Population, idx: impl Iterator<Item = usize>, k: usize) -> (f64, f64) {
    let (x, y) = (pop.x(), pop.y());
    let (mut sx, mut sy) = (0.0, 0.0);
    for i in idx {
        sx += x[i];
        sy += y[i];
    }
    (sy / k as f64, sx / k as f64)
}

/// Exact design expectation by enumeration, with the default cap.
pub fn exact_design_expectation(
    pop: &Population,
    dp: &DesignParams,
    estimator: Estimator,
) -> Result<DesignExpectation> {
    Ok(exact_design_expectations(pop, dp, &[estimator], DEFAULT_ENUMERATION_CAP)?[0])
}

/// Exact design expectations of several estimators from one pass over all
/// `C(N, n)` subsets.
pub fn exact_design_expectations(
    pop: &Population,
    dp: &DesignParams,
    estimators: &[Estimator],
    cap: u64,
) -> Result<Vec<DesignExpectation>> {
    pop.check_design(dp)?;
    let (big_n, n) = (dp.population_size, dp.sample_size);
    let count = subset_count(big_n, n)
        .filter(|&c| c <= cap)
        .ok_or(Error::EnumerationCap {
            population: big_n,
            sample: n,
            cap,
        })?;

    let pop_xbar = pop.mean_x();
    let pop_ybar = pop.mean_y();
    let mut err_sums = vec![CompensatedSum::new(); estimators.len()];
    let mut sq_sums = vec![CompensatedSum::new(); estimators.len()];
    for_each_subset(big_n, n, |idx| {
        let (ybar, xbar) = subset_means(pop, idx.iter().copied(), n);
        for (k, est) in estimators.iter().enumerate() {
            let e = est.evaluate(ybar, xbar, pop_xbar) - pop_ybar;
            err_sums[k].add(e);
            sq_sums[k].add(e * e);
        }
    });

    let total = count as f64;
    Ok(err_sums
        .iter()
        .zip(&sq_sums)
        .map(|(e, sq)| DesignExpectation {
            bias: e.value() / total,
            mse: sq.value() / total,
            n_samples: count,
            bias_std_error: 0.0,
            mse_std_error: 0.0,
        })
        .collect())
}

/// Monte Carlo estimate of the design expectation from `n_draws`
/// independent SRSWOR samples; deterministic in `seed`.
pub fn sampled_design_expectation(
    pop: &Population,
    dp: &DesignParams,
    estimator: Estimator,
    n_draws: u64,
    seed: u64,
) -> Result<DesignExpectation> {
    pop.check_design(dp)?;
    if n_draws == 0 {
        return Err(Error::invalid("n_draws must be at least 1"));
    }
    let mut rng = replicate_rng(seed, 0);
    Ok(sampled_design_expectations(pop, dp, &[estimator], n_draws, &mut rng)[0])
}

/// Sampled design expectations of several estimators sharing the same
/// draws. The design must already have been checked against `pop`.
pub(crate) fn sampled_design_expectations<R: Rng + ?Sized>(
    pop: &Population,
    dp: &DesignParams,
    estimators: &[Estimator],
    n_draws: u64,
    rng: &mut R,
) -> Vec<DesignExpectation> {
    let (big_n, n) = (dp.population_size, dp.sample_size);
    let pop_xbar = pop.mean_x();
    let pop_ybar = pop.mean_y();
    let mut errs = vec![RunningMoments::new(); estimators.len()];
    let mut sqs = vec![RunningMoments::new(); estimators.len()];
    for _ in 0..n_draws {
        let sample = index::sample(rng, big_n, n);
        let (ybar, xbar) = subset_means(pop, sample.iter(), n);
        for (k, est) in estimators.iter().enumerate() {
            let e = est.evaluate(ybar, xbar, pop_xbar) - pop_ybar;
            errs[k].push(e);
            sqs[k].push(e * e);
        }
    }
    errs.iter()
        .zip(&sqs)
        .map(|(e, sq)| DesignExpectation {
            bias: e.mean(),
            mse: sq.mean(),
            n_samples: n_draws,
            bias_std_error: e.std_error(),
            mse_std_error: sq.std_error(),
        })
        .collect()
}
