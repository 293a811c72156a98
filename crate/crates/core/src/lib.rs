//! Transformed ratio estimation under a gamma superpopulation model.
//!
//! The crate covers three estimators of a finite-population mean under
//! simple random sampling without replacement (SRSWOR):
//!
//! * the sample mean `ȳ`,
//! * the classical ratio estimator `ȳ_r = ȳ·X̄/x̄`,
//! * the transformed estimator `ȳ_a = (ȳ − A)·X̄/x̄ + A`.
//!
//! For each one it provides closed-form model expectations of bias and MSE
//! under `y = α + βx + u` with gamma-distributed `x` ([`closed_form`]),
//! exact design expectations by subset enumeration ([`design`]), and a
//! seeded Monte Carlo simulator for the superpopulation model ([`sim`]).
//! [`tables`] regenerates and checks the published efficiency tables.
//!
//! ```
//! use altratio::closed_form::{rel_efficiencies, ClosedFormInputs};
//! use altratio::params::{DesignParams, SuperPopulationParams};
//!
//! let sp = SuperPopulationParams::new(0.5, 0.5, 2.0, 0.0, 8.0).unwrap();
//! let dp = DesignParams::new(60, 10).unwrap();
//! let inputs = ClosedFormInputs::new(sp, dp, 0.3).unwrap();
//! let eff = rel_efficiencies(&inputs).unwrap();
//! assert!((eff.e1 - 192.86).abs() < 0.005);
//! assert!((eff.e2 - 101.34).abs() < 0.005);
//! ```

// `!(v > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_form;
pub mod design;
mod error;
pub mod estimators;
pub mod params;
pub mod repro;
pub mod rng;
pub mod sim;
pub mod summation;
pub mod tables;

pub use error::{Error, Result};
