//! Parameter and data types shared by every module.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Constants of the superpopulation model
/// `y_i = α + β·x_i + u_i`, `E(u_i | x_i) = 0`, `E(u_i² | x_i) = δ·x_i^g`,
/// with `x_i` i.i.d. gamma of shape `θ` and unit scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperPopulationParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub g: f64,
    pub theta: f64,
}

impl SuperPopulationParams {
    pub fn new(alpha: f64, beta: f64, delta: f64, g: f64, theta: f64) -> Result<Self> {
        let sp = SuperPopulationParams {
            alpha,
            beta,
            delta,
            g,
            theta,
        };
        sp.validate()?;
        Ok(sp)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::invalid("alpha and beta must be finite"));
        }
        if !(self.theta > 2.0) || !self.theta.is_finite() {
            return Err(Error::invalid(format!(
                "theta must exceed 2 (got {})",
                self.theta
            )));
        }
        if !(0.0..=2.0).contains(&self.g) {
            return Err(Error::invalid(format!(
                "g must lie in [0, 2] (got {})",
                self.g
            )));
        }
        if !self.delta.is_finite() || self.delta < 0.0 {
            return Err(Error::invalid(format!(
                "delta must be finite and non-negative (got {})",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Population size `N` and SRSWOR sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignParams {
    #[serde(alias = "N")]
    pub population_size: usize,
    #[serde(alias = "n")]
    pub sample_size: usize,
}

impl DesignParams {
    pub fn new(population_size: usize, sample_size: usize) -> Result<Self> {
        let dp = DesignParams {
            population_size,
            sample_size,
        };
        dp.validate()?;
        Ok(dp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_size < 1 {
            return Err(Error::invalid("sample size must be at least 1"));
        }
        if self.sample_size >= self.population_size {
            return Err(Error::invalid(format!(
                "n < N required (got n = {}, N = {})",
                self.sample_size, self.population_size
            )));
        }
        Ok(())
    }

    /// Finite population correction `λ = (N − n)/(nN)`.
    pub fn lambda(&self) -> f64 {
        let big_n = self.population_size as f64;
        let n = self.sample_size as f64;
        (big_n - n) / (n * big_n)
    }
}

/// Checks every model and design constraint, including the closed-form
/// precondition `n·θ > 2`, and hands the pair back unchanged.
pub fn validate_params(
    sp: SuperPopulationParams,
    dp: DesignParams,
) -> Result<(SuperPopulationParams, DesignParams)> {
    sp.validate()?;
    dp.validate()?;
    if !(dp.sample_size as f64 * sp.theta > 2.0) {
        return Err(Error::invalid(format!(
            "n·theta must exceed 2 for closed forms (got {})",
            dp.sample_size as f64 * sp.theta
        )));
    }
    Ok((sp, dp))
}

/// A realized finite population of `(x_i, y_i)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Population {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidPopulation(format!(
                "x has {} values but y has {}",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::InvalidPopulation(
                "a population needs at least 2 units".into(),
            ));
        }
        if let Some(i) = x.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidPopulation(format!(
                "x[{i}] = {} is not a positive finite value",
                x[i]
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPopulation(format!(
                "y[{i}] = {} is not finite",
                y[i]
            )));
        }
        Ok(Population { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn mean_x(&self) -> f64 {
        crate::summation::mean(&self.x)
    }

    pub fn mean_y(&self) -> f64 {
        crate::summation::mean(&self.y)
    }

    /// Checks that `dp` describes samples drawn from this population.
    pub(crate) fn check_design(&self, dp: &DesignParams) -> Result<()> {
        dp.validate()?;
        if dp.population_size != self.len() {
            return Err(Error::invalid(format!(
                "design has N = {} but the population has {} units",
                dp.population_size,
                self.len()
            )));
        }
        Ok(())
    }
}
