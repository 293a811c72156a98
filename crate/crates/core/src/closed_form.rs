//! Model expectations of bias and MSE under the gamma superpopulation model.
//!
//! Notation: `N` population size, `n` sample size, `θ` gamma shape,
//! `δ`, `g` the error-variance scale and exponent, `α`, `β` the model
//! intercept and slope, `A` the shift of the transformed estimator.
//! Every formula is evaluated in the factored form it is usually written in
//! so intermediate values can be compared with a hand derivation.
//!
//! Two printed forms that disagree with the derivation are kept as
//! `*_printed` functions so the Monte Carlo harness can arbitrate them.

use crate::params::{validate_params, DesignParams, SuperPopulationParams};
use crate::{Error, Result};

/// Validated inputs shared by every closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormInputs {
    pub sp: SuperPopulationParams,
    pub dp: DesignParams,
    /// Shift `A` of the transformed estimator.
    pub a: f64,
}

impl ClosedFormInputs {
    pub fn new(sp: SuperPopulationParams, dp: DesignParams, a: f64) -> Result<Self> {
        let (sp, dp) = validate_params(sp, dp)?;
        if !a.is_finite() {
            return Err(Error::invalid(format!("A must be finite (got {a})")));
        }
        Ok(ClosedFormInputs { sp, dp, a })
    }

    /// Same model and design with a different shift.
    pub fn with_a(&self, a: f64) -> Self {
        ClosedFormInputs { a, ..*self }
    }

    /// `(N, n, nθ)` as reals.
    fn sizes(&self) -> (f64, f64, f64) {
        let big_n = self.dp.population_size as f64;
        let n = self.dp.sample_size as f64;
        (big_n, n, n * self.sp.theta)
    }
}

/// `Γ(θ + g)/Γ(θ)` via a log-gamma difference.
pub fn gamma_ratio(theta: f64, g: f64) -> f64 {
    if g == 0.0 {
        return 1.0;
    }
    (libm::lgamma(theta + g) - libm::lgamma(theta)).exp()
}

/// `E_m B(ȳ_a) = (N − n)(α − A) / (N(nθ − 1))`.
pub fn em_bias_alt(inp: &ClosedFormInputs) -> f64 {
    let (big_n, n, nt) = inp.sizes();
    (big_n - n) * (inp.sp.alpha - inp.a) / (big_n * (nt - 1.0))
}

/// `E_m B(ȳ_r)`: the transformed-estimator bias at `A = 0`,
/// `(N − n)α / (N(nθ − 1))`.
pub fn em_bias_ratio(inp: &ClosedFormInputs) -> f64 {
    em_bias_alt(&inp.with_a(0.0))
}

/// The ratio-estimator bias as commonly printed, `(N − n)α/(nθ − 1)`,
/// which lacks the factor `1/N`. Kept only for arbitration.
pub fn em_bias_ratio_printed(inp: &ClosedFormInputs) -> f64 {
    let (big_n, n, nt) = inp.sizes();
    (big_n - n) * inp.sp.alpha / (nt - 1.0)
}

/// `(Nnθ + 2N − 2n) / ((nθ − 1)(nθ − 2))`, the coefficient of `α²` inside
/// the bracket of the ratio-estimator MSE.
fn intercept_coefficient(inp: &ClosedFormInputs) -> f64 {
    let (big_n, n, nt) = inp.sizes();
    (big_n * nt + 2.0 * big_n - 2.0 * n) / ((nt - 1.0) * (nt - 2.0))
}

/// `δ·{(nθ+g−1)(nθ+g−2) + nθ(Nθ − nθ + 1)} / ((nθ+g−1)(nθ+g−2)) · Γ(θ+g)/Γθ`,
/// the error-variance part of the bracket.
fn error_term(inp: &ClosedFormInputs) -> f64 {
    let (big_n, _, nt) = inp.sizes();
    let SuperPopulationParams {
        delta, g, theta, ..
    } = inp.sp;
    let d1 = nt + g - 1.0;
    let d2 = nt + g - 2.0;
    delta * (d1 * d2 + nt * (big_n * theta - nt + 1.0)) / (d1 * d2) * gamma_ratio(theta, g)
}

/// `E_m M(ȳ_r) = ((N − n)/N²)·[(Nnθ + 2N − 2n)α²/((nθ − 1)(nθ − 2)) + error term]`.
pub fn em_mse_ratio(inp: &ClosedFormInputs) -> f64 {
    let (big_n, n, _) = inp.sizes();
    let alpha = inp.sp.alpha;
    (big_n - n) / (big_n * big_n) * (intercept_coefficient(inp) * alpha * alpha + error_term(inp))
}

/// `E_m M(ȳ_a) = E_m M(ȳ_r) + (N − n)(Nnθ + 2N − 2n)(A² − 2Aα) / (N²(nθ − 1)(nθ − 2))`.
pub fn em_mse_alt(inp: &ClosedFormInputs) -> f64 {
    let (big_n, n, nt) = inp.sizes();
    let (a, alpha) = (inp.a, inp.sp.alpha);
    let correction = (big_n - n) * (big_n * nt + 2.0 * big_n - 2.0 * n) * (a * a - 2.0 * a * alpha)
        / (big_n * big_n * (nt - 1.0) * (nt - 2.0));
    em_mse_ratio(inp) + correction
}

/// Minimum over `A` of `E_m M(ȳ_a)`, reached at `A = α`:
/// `((N − n)/N²)·error term`.
pub fn em_mse_alt_min(inp: &ClosedFormInputs) -> f64 {
    let (big_n, n, _) = inp.sizes();
    (big_n - n) * error_term(inp) / (big_n * big_n)
}

/// The minimum MSE with the leading factor `(N − 1)` in place of `(N − n)`,
/// as sometimes printed. Kept only for arbitration.
pub fn em_mse_alt_min_printed(inp: &ClosedFormInputs) -> f64 {
    let (big_n, _, _) = inp.sizes();
    (big_n - 1.0) * error_term(inp) / (big_n * big_n)
}

/// `E_m M(ȳ_r) − min_A E_m M(ȳ_a) = (N − n)(Nnθ + 2N − 2n)α² / (N²(nθ − 1)(nθ − 2))`.
pub fn em_mse_gain_at_optimum(inp: &ClosedFormInputs) -> f64 {
    let (big_n, n, nt) = inp.sizes();
    let alpha = inp.sp.alpha;
    (big_n - n) * (big_n * nt + 2.0 * big_n - 2.0 * n) * alpha * alpha
        / (big_n * big_n * (nt - 1.0) * (nt - 2.0))
}

/// `E_m V(ȳ) = (N − n)·[β²θ + δ·Γ(θ+g)/Γθ] / (nN)`.
pub fn em_var_mean(inp: &ClosedFormInputs) -> f64 {
    let (big_n, n, _) = inp.sizes();
    let SuperPopulationParams {
        beta,
        delta,
        g,
        theta,
        ..
    } = inp.sp;
    (big_n - n) * (beta * beta * theta + delta * gamma_ratio(theta, g)) / (n * big_n)
}

/// The MSE-minimising shift, `A = α`.
pub fn optimal_a(sp: &SuperPopulationParams) -> f64 {
    sp.alpha
}

/// Percent relative efficiencies of the transformed estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efficiencies {
    /// Against the sample mean: `100·E_m V(ȳ) / E_m M(ȳ_a)`.
    pub e1: f64,
    /// Against the ratio estimator: `100·E_m M(ȳ_r) / E_m M(ȳ_a)`.
    pub e2: f64,
}

pub fn rel_efficiencies(inp: &ClosedFormInputs) -> Result<Efficiencies> {
    let denom = em_mse_alt(inp);
    if !(denom > 0.0) {
        return Err(Error::ZeroDenominator(
            "relative efficiency (E_m M(ȳ_a) = 0)",
        ));
    }
    Ok(Efficiencies {
        e1: 100.0 * em_var_mean(inp) / denom,
        e2: 100.0 * em_mse_ratio(inp) / denom,
    })
}

/// An open interval `(lower, upper)`; empty when `lower >= upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpenInterval {
    pub lower: f64,
    pub upper: f64,
}

impl OpenInterval {
    pub const EMPTY: OpenInterval = OpenInterval {
        lower: 0.0,
        upper: 0.0,
    };

    pub fn is_empty(&self) -> bool {
        self.lower >= self.upper
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower < v && v < self.upper
    }
}

/// Shifts `A` for which the transformed estimator is both less biased and
/// more efficient than the ratio estimator, i.e. `(α − A)² < α²`: the
/// interval between 0 and `2α`, empty when `α = 0`.
pub fn dominance_interval(alpha: f64) -> OpenInterval {
    if alpha == 0.0 || !alpha.is_finite() {
        return OpenInterval::EMPTY;
    }
    let other = 2.0 * alpha;
    OpenInterval {
        lower: other.min(0.0),
        upper: other.max(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inputs(n: usize, alpha: f64, beta: f64, g: f64, a: f64) -> ClosedFormInputs {
        ClosedFormInputs::new(
            SuperPopulationParams::new(alpha, beta, 2.0, g, 8.0).unwrap(),
            DesignParams::new(60, n).unwrap(),
            a,
        )
        .unwrap()
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn gamma_ratio_recurrences() {
        assert_eq!(gamma_ratio(8.0, 0.0), 1.0);
        assert!(rel_close(gamma_ratio(8.0, 1.0), 8.0, 1e-13));
        assert!(rel_close(gamma_ratio(8.0, 2.0), 72.0, 1e-13));
        assert!(rel_close(gamma_ratio(3.7, 2.0), 3.7 * 4.7, 1e-13));
        // Γ(8.5)/Γ(8) = (15!!/2^8)·√π / 7!
        let exact = 2027025.0 / 256.0 * std::f64::consts::PI.sqrt() / 5040.0;
        assert!(rel_close(gamma_ratio(8.0, 0.5), exact, 1e-13));
    }

    #[test]
    fn bias_examples() {
        let inp = inputs(10, 1.0, 1.0, 0.0, 0.0);
        assert!(rel_close(em_bias_alt(&inp), 50.0 / (60.0 * 79.0), 1e-15));
        assert!(rel_close(em_bias_ratio(&inp), 50.0 / (60.0 * 79.0), 1e-15));
        assert_eq!(em_bias_ratio(&inp), em_bias_alt(&inp.with_a(0.0)));
        assert_eq!(em_bias_alt(&inp.with_a(1.0)), 0.0);
        assert!(rel_close(em_bias_ratio_printed(&inp), 50.0 / 79.0, 1e-15));
        let zero_alpha = inputs(10, 0.0, 1.0, 0.0, 0.7);
        assert_eq!(em_bias_ratio(&zero_alpha), 0.0);
    }

    #[test]
    fn census_is_rejected() {
        let sp = SuperPopulationParams::new(1.0, 1.0, 2.0, 0.0, 8.0).unwrap();
        let dp = DesignParams {
            population_size: 60,
            sample_size: 60,
        };
        assert!(ClosedFormInputs::new(sp, dp, 0.0).is_err());
        let dp = DesignParams::new(60, 10).unwrap();
        assert!(ClosedFormInputs::new(sp, dp, f64::NAN).is_err());
    }

    #[test]
    fn mse_ratio_hand_value() {
        // (50/3600)·[4900·0.25/6162 + 2·(6162 + 80·401)/6162]
        let inp = inputs(10, 0.5, 0.5, 0.0, 0.0);
        let hand =
            50.0 / 3600.0 * (4900.0 * 0.25 / 6162.0 + 2.0 * (6162.0 + 80.0 * 401.0) / 6162.0);
        assert!(rel_close(em_mse_ratio(&inp), hand, 1e-14));
        assert!((em_mse_ratio(&inp) - 0.175153).abs() < 5e-7);
    }

    #[test]
    fn mse_alt_hand_value() {
        let inp = inputs(10, 0.5, 0.5, 0.0, 0.3);
        let correction = 50.0 * 4900.0 * (0.09 - 0.3) / (3600.0 * 6162.0);
        assert!(rel_close(
            em_mse_alt(&inp),
            em_mse_ratio(&inp) + correction,
            1e-14
        ));
        assert!((em_mse_alt(&inp) - 0.172834).abs() < 1e-6);
        assert_eq!(em_mse_alt(&inp.with_a(0.0)), em_mse_ratio(&inp));
    }

    #[test]
    fn minimum_mse() {
        let inp = inputs(10, 1.0, 1.0, 1.0, 1.0);
        assert!(rel_close(em_mse_alt(&inp), em_mse_alt_min(&inp), 1e-14));
        let no_error = ClosedFormInputs::new(
            SuperPopulationParams::new(1.0, 1.0, 0.0, 1.0, 8.0).unwrap(),
            DesignParams::new(60, 10).unwrap(),
            1.0,
        )
        .unwrap();
        assert_eq!(em_mse_alt_min(&no_error), 0.0);
        assert!(rel_close(
            em_mse_ratio(&inp) - em_mse_alt_min(&inp),
            em_mse_gain_at_optimum(&inp),
            1e-12
        ));
        // (N − 1) = 59 against (N − n) = 50.
        assert!(rel_close(
            em_mse_alt_min_printed(&inp) / em_mse_alt_min(&inp),
            59.0 / 50.0,
            1e-14
        ));
    }

    #[test]
    fn zero_intercept_makes_ratio_optimal() {
        let inp = inputs(20, 0.0, 1.5, 0.5, 0.0);
        assert!(rel_close(em_mse_ratio(&inp), em_mse_alt_min(&inp), 1e-14));
        assert_eq!(em_mse_gain_at_optimum(&inp), 0.0);
    }

    #[test]
    fn var_mean_examples() {
        let inp = inputs(10, 0.5, 0.5, 0.0, 0.3);
        assert!(rel_close(em_var_mean(&inp), 1.0 / 3.0, 1e-15));
        let degenerate = ClosedFormInputs::new(
            SuperPopulationParams::new(1.0, 0.0, 0.0, 1.0, 8.0).unwrap(),
            DesignParams::new(60, 10).unwrap(),
            0.0,
        )
        .unwrap();
        assert_eq!(em_var_mean(&degenerate), 0.0);
    }

    #[test]
    fn efficiencies_match_printed_cells() {
        let round2 = |v: f64| (v * 100.0).round() / 100.0;
        let e = rel_efficiencies(&inputs(10, 0.5, 0.5, 0.0, 0.3)).unwrap();
        assert_eq!(round2(e.e1), 192.86);
        assert_eq!(round2(e.e2), 101.34);
        let e = rel_efficiencies(&inputs(10, 1.0, 1.0, 0.0, 1.0)).unwrap();
        assert_eq!(round2(e.e1), 483.40);
        assert_eq!(round2(e.e2), 106.41);
    }

    #[test]
    fn e2_peaks_at_optimal_shift() {
        let at = |a| rel_efficiencies(&inputs(10, 0.5, 0.5, 0.0, a)).unwrap().e2;
        let best = at(0.5);
        for a in [0.3, 0.6, 0.9] {
            assert!(at(a) < best);
        }
    }

    #[test]
    fn zero_denominator_is_an_error() {
        let inp = ClosedFormInputs::new(
            SuperPopulationParams::new(1.0, 1.0, 0.0, 1.0, 8.0).unwrap(),
            DesignParams::new(60, 10).unwrap(),
            1.0,
        )
        .unwrap();
        assert!(matches!(
            rel_efficiencies(&inp),
            Err(Error::ZeroDenominator(_))
        ));
    }

    #[test]
    fn dominance_intervals() {
        assert_eq!(
            dominance_interval(0.5),
            OpenInterval {
                lower: 0.0,
                upper: 1.0
            }
        );
        assert_eq!(dominance_interval(1.5).upper, 3.0);
        assert!(dominance_interval(0.0).is_empty());
        let neg = dominance_interval(-1.0);
        assert!(neg.contains(-1.0) && !neg.contains(0.5));
    }

    proptest! {
        #[test]
        fn interval_is_exactly_the_dominance_region(
            alpha in prop_oneof![-3.0..-0.05f64, 0.05..3.0f64],
            a in -10.0..10.0f64,
            g in 0.0..=2.0f64,
            n in 2usize..40,
        ) {
            let inp = ClosedFormInputs::new(
                SuperPopulationParams::new(alpha, 1.0, 2.0, g, 8.0).unwrap(),
                DesignParams::new(60, n).unwrap(),
                a,
            ).unwrap();
            let gap = em_mse_ratio(&inp) - em_mse_alt(&inp);
            let margin = 1e-9 * em_mse_ratio(&inp);
            let inside = dominance_interval(alpha).contains(a);
            if inside && gap.abs() > margin {
                prop_assert!(gap > 0.0);
                prop_assert!(em_bias_alt(&inp).abs() < em_bias_ratio(&inp).abs());
            } else if !inside && gap.abs() > margin {
                prop_assert!(gap < 0.0);
            }
        }

        #[test]
        fn mse_is_symmetric_about_alpha(alpha in 0.05..3.0f64, a in -5.0..5.0f64, g in 0.0..=2.0f64) {
            let inp = inputs(10, alpha, 1.0, g, a);
            let mirrored = inp.with_a(2.0 * alpha - a);
            prop_assert!(rel_close(em_mse_alt(&inp), em_mse_alt(&mirrored), 1e-12));
        }

        #[test]
        fn e2_ignores_beta(alpha in 0.05..3.0f64, a in -3.0..3.0f64, b1 in 0.0..5.0f64, b2 in 0.0..5.0f64) {
            let e_a = rel_efficiencies(&inputs(20, alpha, b1, 1.0, a)).unwrap().e2;
            let e_b = rel_efficiencies(&inputs(20, alpha, b2, 1.0, a)).unwrap().e2;
            prop_assert!(rel_close(e_a, e_b, 1e-12));
        }
    }
}
