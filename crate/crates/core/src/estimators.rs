//! Point estimators of the population mean `Ȳ` from an SRSWOR sample.
//!
//! All estimators take precomputed means so that the enumeration engine can
//! feed them running sums; [`estimate_from_sample`] is the convenience
//! wrapper working from a population and a set of unit labels.

use crate::params::Population;
use crate::summation::CompensatedSum;
use crate::{Error, Result};

/// The three estimates for one sample, together with the `A` used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateSet {
    pub mean_est: f64,
    pub ratio_est: f64,
    pub alt_est: f64,
    pub a_value: f64,
}

pub fn sample_mean(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let sum: CompensatedSum = sample.iter().copied().collect();
    Ok(sum.value() / sample.len() as f64)
}

fn check_means(xbar: f64, pop_xbar: f64) -> Result<()> {
    if !(xbar > 0.0) {
        return Err(Error::NonPositiveMean(xbar));
    }
    if !(pop_xbar > 0.0) {
        return Err(Error::NonPositiveMean(pop_xbar));
    }
    Ok(())
}

/// Classical ratio estimator `ȳ·(X̄/x̄)`.
pub fn ratio_estimate(ybar: f64, xbar: f64, pop_xbar: f64) -> Result<f64> {
    check_means(xbar, pop_xbar)?;
    Ok(ybar * (pop_xbar / xbar))
}

/// Transformed estimator `(ȳ − A)·(X̄/x̄) + A`, i.e. the ratio estimator
/// applied to `z = y − A` and shifted back. Equals [`ratio_estimate`]
/// bit-for-bit when `A = 0`.
pub fn alternative_estimate(ybar: f64, xbar: f64, pop_xbar: f64, a: f64) -> Result<f64> {
    check_means(xbar, pop_xbar)?;
    Ok((ybar - a) * (pop_xbar / xbar) + a)
}

/// The same estimator written as a correction to the ratio estimator,
/// `ȳ_r − A·(X̄/x̄ − 1)`.
pub fn alternative_estimate_from_ratio(ybar: f64, xbar: f64, pop_xbar: f64, a: f64) -> Result<f64> {
    let ratio = ratio_estimate(ybar, xbar, pop_xbar)?;
    Ok(ratio - a * (pop_xbar / xbar - 1.0))
}

/// All three estimates for the sample of units `indices` drawn from `pop`.
pub fn estimate_from_sample(pop: &Population, indices: &[usize], a: f64) -> Result<EstimateSet> {
    if indices.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= pop.len()) {
        return Err(Error::InvalidPopulation(format!(
            "sample label {bad} out of range for a population of {}",
            pop.len()
        )));
    }
    let xs: Vec<f64> = indices.iter().map(|&i| pop.x()[i]).collect();
    let ys: Vec<f64> = indices.iter().map(|&i| pop.y()[i]).collect();
    let xbar = sample_mean(&xs)?;
    let ybar = sample_mean(&ys)?;
    let pop_xbar = pop.mean_x();
    Ok(EstimateSet {
        mean_est: ybar,
        ratio_est: ratio_estimate(ybar, xbar, pop_xbar)?,
        alt_est: alternative_estimate(ybar, xbar, pop_xbar, a)?,
        a_value: a,
    })
}
