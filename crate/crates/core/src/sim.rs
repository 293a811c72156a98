//! Monte Carlo simulation of the gamma superpopulation model.
//!
//! A replicate draws one finite population
//! `y_i = α + β·x_i + u_i`, `x_i ~ Gamma(θ, 1)`, `Var(u_i | x_i) = δ·x_i^g`,
//! computes the design bias and MSE of every estimator on it (by sampled or
//! exhaustive SRSWOR), and the replicate values are averaged. Each replicate
//! owns a ChaCha stream indexed by its replicate number, and the average is
//! a pairwise reduction in replicate order, so results are bitwise
//! identical for any thread count.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{
    exact_design_expectations, sampled_design_expectations, Estimator, DEFAULT_ENUMERATION_CAP,
};
use crate::params::{DesignParams, Population, SuperPopulationParams};
use crate::rng::replicate_rng;
use crate::summation::pairwise_sum;
use crate::{Error, Result};

/// Conditional law of the model error `u_i` given `x_i`. Both have mean
/// zero and variance `δ·x_i^g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorLaw {
    #[default]
    Normal,
    /// `σ·(E − 1)` with `E` standard exponential.
    ShiftedExponential,
}

impl ErrorLaw {
    fn sample<R: Rng + ?Sized>(self, sd: f64, rng: &mut R) -> f64 {
        match self {
            ErrorLaw::Normal => {
                let z: f64 = StandardNormal.sample(rng);
                sd * z
            }
            ErrorLaw::ShiftedExponential => {
                let e: f64 = Exp1.sample(rng);
                sd * (e - 1.0)
            }
        }
    }
}

impl std::str::FromStr for ErrorLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(ErrorLaw::Normal),
            "shifted_exponential" | "shifted-exponential" => Ok(ErrorLaw::ShiftedExponential),
            other => Err(Error::invalid(format!(
                "unknown error law `{other}` (expected normal or shifted_exponential)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McConfig {
    pub n_populations: u64,
    /// SRSWOR draws per population; 0 enumerates every subset.
    pub designs_per_population: u64,
    pub seed: u64,
    pub error_law: ErrorLaw,
    /// Worker threads; `None` uses the global rayon pool. Never affects
    /// the results.
    pub threads: Option<usize>,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_populations: 20_000,
            designs_per_population: 50,
            seed: 20_240_601,
            error_law: ErrorLaw::Normal,
            threads: None,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_populations == 0 {
            return Err(Error::invalid("n_populations must be at least 1"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads must be at least 1"));
        }
        Ok(())
    }
}

/// A Monte Carlo mean with its standard error across replicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_replicates: u64,
}

impl McEstimate {
    fn from_replicates(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let value = pairwise_sum(values) / n;
        let squares: Vec<f64> = values.iter().map(|v| (v - value) * (v - value)).collect();
        let var = if values.len() > 1 {
            pairwise_sum(&squares) / (n - 1.0)
        } else {
            0.0
        };
        McEstimate {
            value,
            std_error: (var / n).sqrt(),
            n_replicates: values.len() as u64,
        }
    }

    /// `(value − reference)/std_error`.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.value - reference) / self.std_error
    }
}

/// Model expectation to estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantity {
    BiasRatio,
    MseRatio,
    BiasAlt(f64),
    MseAlt(f64),
    VarMean,
}

/// Estimates of all five model expectations from one simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSummary {
    pub bias_ratio: McEstimate,
    pub mse_ratio: McEstimate,
    pub bias_alt: McEstimate,
    pub mse_alt: McEstimate,
    pub var_mean: McEstimate,
    /// The `A` used for the transformed estimator.
    pub a_value: f64,
}

/// Draws a population of `size` units with normal errors.
pub fn draw_population(sp: &SuperPopulationParams, size: usize, seed: u64) -> Result<Population> {
    let mut rng = replicate_rng(seed, 0);
    draw_population_with(sp, size, ErrorLaw::Normal, &mut rng)
}

pub fn draw_population_with<R: Rng + ?Sized>(
    sp: &SuperPopulationParams,
    size: usize,
    law: ErrorLaw,
    rng: &mut R,
) -> Result<Population> {
    sp.validate()?;
    if size < 2 {
        return Err(Error::invalid("a population needs at least 2 units"));
    }
    let gamma = Gamma::new(sp.theta, 1.0).map_err(|e| Error::invalid(e.to_string()))?;
    let mut x = Vec::with_capacity(size);
    let mut y = Vec::with_capacity(size);
    for _ in 0..size {
        // Gamma variates underflow to 0 only with negligible probability for
        // θ > 2; redraw so the population stays on the positive support.
        let xi = loop {
            let v: f64 = gamma.sample(rng);
            if v > 0.0 {
                break v;
            }
        };
        let u = if sp.delta == 0.0 {
            0.0
        } else {
            law.sample((sp.delta * xi.powf(sp.g)).sqrt(), rng)
        };
        x.push(xi);
        y.push(sp.alpha + sp.beta * xi + u);
    }
    Population::new(x, y)
}

const ESTIMATOR_SLOTS: usize = 3;

/// One replicate: `[bias_r, mse_r, bias_a, mse_a, var_mean]`.
fn replicate(
    sp: &SuperPopulationParams,
    dp: &DesignParams,
    a: f64,
    cfg: &McConfig,
    index: u64,
) -> Result<[f64; 5]> {
    let mut rng = replicate_rng(cfg.seed, index);
    let pop = draw_population_with(sp, dp.population_size, cfg.error_law, &mut rng)?;
    let estimators: [Estimator; ESTIMATOR_SLOTS] =
        [Estimator::Ratio, Estimator::Alternative(a), Estimator::Mean];
    let d = if cfg.designs_per_population == 0 {
        exact_design_expectations(&pop, dp, &estimators, DEFAULT_ENUMERATION_CAP)?
    } else {
        sampled_design_expectations(&pop, dp, &estimators, cfg.designs_per_population, &mut rng)
    };
    Ok([d[0].bias, d[0].mse, d[1].bias, d[1].mse, d[2].mse])
}

/// Runs the simulation once and estimates every model expectation, using
/// the transformed estimator with shift `a`.
pub fn mc_model_expectations(
    sp: &SuperPopulationParams,
    dp: &DesignParams,
    a: f64,
    cfg: &McConfig,
) -> Result<McSummary> {
    sp.validate()?;
    dp.validate()?;
    cfg.validate()?;
    if cfg.designs_per_population == 0 {
        let count = crate::design::subset_count(dp.population_size, dp.sample_size);
        if count.is_none_or(|c| c > DEFAULT_ENUMERATION_CAP) {
            return Err(Error::EnumerationCap {
                population: dp.population_size,
                sample: dp.sample_size,
                cap: DEFAULT_ENUMERATION_CAP,
            });
        }
    }

    let run = || -> Result<Vec<[f64; 5]>> {
        (0..cfg.n_populations)
            .into_par_iter()
            .map(|i| replicate(sp, dp, a, cfg, i))
            .collect()
    };
    let rows = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::ThreadPool(e.to_string()))?
            .install(run)?,
        None => run()?,
    };

    let column = |k: usize| -> McEstimate {
        let values: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        McEstimate::from_replicates(&values)
    };
    Ok(McSummary {
        bias_ratio: column(0),
        mse_ratio: column(1),
        bias_alt: column(2),
        mse_alt: column(3),
        var_mean: column(4),
        a_value: a,
    })
}

/// Estimates a single model expectation.
pub fn mc_model_expectation(
    sp: &SuperPopulationParams,
    dp: &DesignParams,
    quantity: Quantity,
    cfg: &McConfig,
) -> Result<McEstimate> {
    let a = match quantity {
        Quantity::BiasAlt(a) | Quantity::MseAlt(a) => a,
        _ => 0.0,
    };
    let s = mc_model_expectations(sp, dp, a, cfg)?;
    Ok(match quantity {
        Quantity::BiasRatio => s.bias_ratio,
        Quantity::MseRatio => s.mse_ratio,
        Quantity::BiasAlt(_) => s.bias_alt,
        Quantity::MseAlt(_) => s.mse_alt,
        Quantity::VarMean => s.var_mean,
    })
}
