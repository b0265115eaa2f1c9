//! First-moment oracles for the two-type process.
//!
//! Expected particle counts reduce to single Brownian path expectations:
//! type-1 counts above a level are `e^(beta t) P(N(0, sigma2 t) >= x)`,
//! and type-2 functionals integrate a variable-speed Brownian motion over
//! the birth time `s` of the type-2 founder with weight
//! `alpha e^(beta s + (t - s))`. These closed forms and quadratures are the
//! deterministic reference the particle engine is validated against.

#[allow(unused_imports)]
use num_traits::Float;

use core::fmt;

use crate::gauss;
use crate::phase::ModelParams;
use crate::quad::{self, QuadError, QuadResult, QuadratureSpec};

/// Switch to the analytic `beta -> 1` limit below this distance.
const BETA_ONE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// The Gaussian tail upper bound is only valid for positive arguments.
    NonPositiveArgument(f64),
    Quadrature(QuadError),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::NonPositiveArgument(x) => {
                write!(f, "argument must be positive, got {x}")
            }
            OracleError::Quadrature(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for OracleError {}

impl From<QuadError> for OracleError {
    fn from(e: QuadError) -> Self {
        OracleError::Quadrature(e)
    }
}

/// Expected number of type-1 particles at or above `x` at time `t`.
pub fn expected_type1_above(params: &ModelParams, t: f64, x: f64) -> f64 {
    debug_assert!(t > 0.0);
    (params.beta * t).exp() * gauss::normal_tail(x, params.sigma2 * t)
}

/// Expected total number of type-2 particles at time `t`:
/// `alpha (e^(beta t) - e^t) / (beta - 1)`, with the removable singularity
/// at `beta = 1` handled by its limit `alpha t e^t`.
pub fn expected_type2_count(params: &ModelParams, t: f64) -> f64 {
    debug_assert!(t > 0.0);
    if (params.beta - 1.0).abs() < BETA_ONE_EPS {
        params.alpha * t * t.exp()
    } else {
        params.alpha * ((params.beta * t).exp() - t.exp()) / (params.beta - 1.0)
    }
}

/// Expected number of type-2 particles at or above `x` at time `t`:
/// `alpha int_0^t e^(beta s + (t-s)) P(N(0, sigma2 s + (t-s)) >= x) ds`.
pub fn expected_type2_above(
    params: &ModelParams,
    t: f64,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult, OracleError> {
    debug_assert!(t > 0.0);
    let (alpha, beta, sigma2) = (params.alpha, params.beta, params.sigma2);
    let result = quad::integrate(
        |s| (beta * s + (t - s)).exp() * gauss::normal_tail(x, sigma2 * s + (t - s)),
        0.0,
        t,
        spec,
    )?;
    Ok(QuadResult {
        value: alpha * result.value,
        error_estimate: alpha * result.error_estimate,
        subdivisions: result.subdivisions,
    })
}

/// Exact Gaussian tail and its classical upper bound
/// `e^(-x^2/2) / (sqrt(2 pi) x)`, which dominates for every `x > 0`.
pub fn gaussian_tail_bound(x: f64) -> Result<(f64, f64), OracleError> {
    if !(x > 0.0) {
        return Err(OracleError::NonPositiveArgument(x));
    }
    let exact = gauss::std_normal_tail(x);
    let bound = gauss::std_normal_pdf(x) / x;
    Ok((exact, bound))
}

/// First-moment (Markov) upper bound on `P(M_t >= rho t + y)` for a
/// standard branching Brownian motion: `e^t P(N(0, t) >= rho t + y)`.
///
/// Meaningful for `rho > sqrt(2)` and `rho t + y > 0`.
pub fn ld_first_moment(rho: f64, t: f64, y: f64) -> f64 {
    debug_assert!(rho > core::f64::consts::SQRT_2);
    debug_assert!(rho * t + y > 0.0);
    t.exp() * gauss::normal_tail(rho * t + y, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::QuadRule;

    fn params(beta: f64, sigma2: f64, alpha: f64) -> ModelParams {
        ModelParams::new(beta, sigma2, alpha).unwrap()
    }

    #[test]
    fn type1_above_examples() {
        // Symmetry: x = 0 leaves half the mass.
        let v = expected_type1_above(&params(1.0, 1.0, 0.0), 4.0, 0.0);
        assert!((v - 4.0_f64.exp() / 2.0).abs() < 1e-10);
        assert!((v - 27.299_075_016_572_12).abs() < 1e-9);

        // x -> -inf recovers the full population.
        let all = expected_type1_above(&params(2.0, 0.5, 0.0), 1.5, -1e6);
        assert!((all - 3.0_f64.exp()).abs() < 1e-9);

        let v = expected_type1_above(&params(2.0, 0.5, 0.0), 1.0, 1.0);
        let exact = 2.0_f64.exp() * gauss::std_normal_tail(2.0_f64.sqrt());
        assert!((v - exact).abs() < 1e-14);
        assert!((v - 0.581_146_332_605_932_5).abs() < 1e-12, "{v}");
    }

    #[test]
    fn type2_count_examples() {
        let v = expected_type2_count(&params(2.0, 1.0, 1.0), 1.0);
        let exact = 2.0_f64.exp() - 1.0_f64.exp();
        assert!((v - exact).abs() < 1e-12);
        assert!((v - 4.670_774_270_471_605).abs() < 1e-9, "{v}");

        assert_eq!(expected_type2_count(&params(2.0, 1.0, 0.0), 3.0), 0.0);

        // beta = 1 limit.
        let v = expected_type2_count(&params(1.0, 1.0, 2.0), 1.0);
        assert!((v - 2.0 * core::f64::consts::E).abs() < 1e-12);
        assert!((v - 5.436_563_656_918_09).abs() < 1e-9, "{v}");

        // Continuity across the switch.
        let lo = expected_type2_count(&params(1.0 - 2e-9, 1.0, 1.0), 2.0);
        let hi = expected_type2_count(&params(1.0 + 2e-9, 1.0, 1.0), 2.0);
        let mid = expected_type2_count(&params(1.0, 1.0, 1.0), 2.0);
        assert!((lo - mid).abs() < 1e-6 && (hi - mid).abs() < 1e-6);
    }

    #[test]
    fn type2_above_examples() {
        let spec = QuadratureSpec::default();
        let p = params(2.0, 0.5, 1.0);

        // x = 0: the Gaussian tail is exactly 1/2, so the integral is
        // 0.5 e (e - 1) by hand.
        let r = expected_type2_above(&p, 1.0, 0.0, &spec).unwrap();
        let exact = 0.5 * core::f64::consts::E * (core::f64::consts::E - 1.0);
        assert!((r.value - exact).abs() < 1e-10);
        assert!((r.value - 2.335_387_135_235_802_3).abs() < 1e-9, "{}", r.value);

        // x -> -inf degenerates to the total count, within tolerance.
        let all = expected_type2_above(&p, 1.0, -1e6, &spec).unwrap();
        let count = expected_type2_count(&p, 1.0);
        assert!((all.value - count).abs() < 1e-8, "{} vs {count}", all.value);

        // Both rules agree.
        let simpson = QuadratureSpec {
            rule: QuadRule::FixedSimpson,
            max_subdivisions: 400,
            ..spec
        };
        let r2 = expected_type2_above(&p, 1.0, 1.5, &simpson).unwrap();
        let r1 = expected_type2_above(&p, 1.0, 1.5, &spec).unwrap();
        assert!((r1.value - r2.value).abs() < 1e-8);
    }

    #[test]
    fn type2_above_monotonicity() {
        let spec = QuadratureSpec::default();
        let value = |beta: f64, alpha: f64, t: f64, x: f64| {
            expected_type2_above(&params(beta, 0.5, alpha), t, x, &spec)
                .unwrap()
                .value
        };
        // Decreasing in x, increasing in t and alpha.
        let xs = [-1.0, 0.0, 0.5, 1.0, 2.0];
        for w in xs.windows(2) {
            assert!(value(2.0, 1.0, 1.0, w[0]) > value(2.0, 1.0, 1.0, w[1]));
        }
        let ts = [0.5, 1.0, 1.5, 2.0];
        for w in ts.windows(2) {
            assert!(value(2.0, 1.0, w[0], 0.5) < value(2.0, 1.0, w[1], 0.5));
        }
        for w in [0.5, 1.0, 2.0].windows(2) {
            assert!(value(2.0, w[0], 1.0, 0.5) < value(2.0, w[1], 1.0, 0.5));
        }
    }

    #[test]
    fn gaussian_tail_bound_examples() {
        let (exact, bound) = gaussian_tail_bound(1.0).unwrap();
        assert!((exact - 0.158_655_253_931_457_07).abs() < 1e-12);
        assert!((bound - 0.241_970_724_519_143_37).abs() < 1e-12);

        let (exact, bound) = gaussian_tail_bound(3.0).unwrap();
        assert!((exact - 1.349_898_031_630_094e-3).abs() < 1e-12);
        assert!((bound - 1.477_282_803_979_336e-3).abs() < 1e-12);

        // The bound dominates everywhere and is asymptotically tight.
        for i in 1..=80 {
            let x = 0.1 * i as f64;
            let (exact, bound) = gaussian_tail_bound(x).unwrap();
            assert!(bound >= exact);
        }
        let (exact, bound) = gaussian_tail_bound(8.0).unwrap();
        assert!(bound / exact < 1.02);

        assert!(gaussian_tail_bound(0.0).is_err());
        assert!(gaussian_tail_bound(-1.0).is_err());
    }

    #[test]
    fn ld_first_moment_examples() {
        let v = ld_first_moment(1.8, 4.0, 0.0);
        // e^4 Q(3.6)
        let exact = 4.0_f64.exp() * gauss::std_normal_tail(3.6);
        assert!((v - exact).abs() < 1e-12);
        assert!((v - 8.687e-3).abs() < 1e-5, "{v}");

        // y -> infinity kills the bound.
        assert!(ld_first_moment(1.8, 4.0, 1e4) < 1e-300);
    }
}
