//! One-dimensional quadrature with error estimates.
//!
//! Two rules: an adaptive Gauss-Kronrod (G7, K15) scheme that splits the
//! worst interval until the requested tolerance is met, and a fixed
//! composite Simpson rule with a Richardson error estimate. The adaptive
//! rule is the default for the moment oracles.

#[allow(unused_imports)]
use num_traits::Float;

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;
use core::fmt;

/// 15-point Kronrod abscissae on [-1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];

/// 7-point Gauss weights (positive half; last entry is the center).
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadRule {
    /// Adaptive Gauss-Kronrod, worst-interval-first subdivision.
    AdaptiveGaussKronrod,
    /// Composite Simpson on `max_subdivisions` panels, no adaptivity.
    FixedSimpson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rule: QuadRule,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rule: QuadRule::AdaptiveGaussKronrod,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_subdivisions: 200,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(QuadError::InvalidSpec("tolerances must be positive"));
        }
        if self.max_subdivisions == 0 {
            return Err(QuadError::InvalidSpec("max_subdivisions must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuadError {
    InvalidSpec(&'static str),
    /// Tolerance not reached within the subdivision budget; the partial
    /// result and its error estimate are reported for diagnosis.
    NonConvergence {
        value: f64,
        error_estimate: f64,
        subdivisions: usize,
    },
}

impl fmt::Display for QuadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadError::InvalidSpec(msg) => write!(f, "invalid quadrature spec: {msg}"),
            QuadError::NonConvergence {
                value,
                error_estimate,
                subdivisions,
            } => write!(
                f,
                "quadrature did not converge after {subdivisions} subdivisions \
                 (value {value}, error estimate {error_estimate})"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for QuadError {}

struct Interval {
    error: f64,
    value: f64,
    lo: f64,
    hi: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut kronrod = WGK[7] * f(center);
    let mut gauss = WG[3] * f(center);
    for i in 0..7 {
        let dx = half * XGK[i];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * sum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * sum;
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

/// Integrates `f` over `[lo, hi]` per the spec.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult, QuadError> {
    spec.validate()?;
    if lo == hi {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
        });
    }
    match spec.rule {
        QuadRule::AdaptiveGaussKronrod => adaptive_gk(&f, lo, hi, spec),
        QuadRule::FixedSimpson => fixed_simpson(&f, lo, hi, spec.max_subdivisions),
    }
}

fn adaptive_gk<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult, QuadError> {
    let mut heap = BinaryHeap::new();
    let (value, error) = gk15(f, lo, hi);
    heap.push(Interval { error, value, lo, hi });
    let mut total_value = value;
    let mut total_error = error;
    let mut subdivisions = 0usize;

    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total_value.abs());
        if total_error <= tol {
            return Ok(QuadResult {
                value: total_value,
                error_estimate: total_error,
                subdivisions,
            });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(QuadError::NonConvergence {
                value: total_value,
                error_estimate: total_error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap holds at least one interval");
        let mid = 0.5 * (worst.lo + worst.hi);
        let (v1, e1) = gk15(f, worst.lo, mid);
        let (v2, e2) = gk15(f, mid, worst.hi);
        total_value += v1 + v2 - worst.value;
        total_error += e1 + e2 - worst.error;
        heap.push(Interval { error: e1, value: v1, lo: worst.lo, hi: mid });
        heap.push(Interval { error: e2, value: v2, lo: mid, hi: worst.hi });
        subdivisions += 1;
    }
}

fn composite_simpson<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut sum = f(lo) + f(hi);
    for i in 1..panels {
        let x = lo + i as f64 * h;
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    sum * h / 3.0
}

fn fixed_simpson<F: Fn(f64) -> f64>(
    f: &F,
    lo: f64,
    hi: f64,
    panels: usize,
) -> Result<QuadResult, QuadError> {
    let panels = (panels.max(2) + 1) & !1; // even, at least 2
    let fine = composite_simpson(f, lo, hi, panels);
    let coarse = composite_simpson(f, lo, hi, panels / 2);
    Ok(QuadResult {
        value: fine,
        // Standard Richardson estimate for a fourth-order rule.
        error_estimate: (fine - coarse).abs() / 15.0,
        subdivisions: panels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gk_spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn polynomials_are_exact() {
        // K15 integrates degree <= 22 exactly; Simpson degree <= 3.
        let r = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, &gk_spec()).unwrap();
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (1.0 / 4.0 - 1.0 - 1.0);
        assert!((r.value - exact).abs() < 1e-12);

        let spec = QuadratureSpec {
            rule: QuadRule::FixedSimpson,
            max_subdivisions: 64,
            ..gk_spec()
        };
        let r = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, &spec).unwrap();
        assert!((r.value - exact).abs() < 1e-12);
    }

    #[test]
    fn exp_integral() {
        let r = integrate(|x| x.exp(), 0.0, 1.0, &gk_spec()).unwrap();
        assert!((r.value - (core::f64::consts::E - 1.0)).abs() < 1e-13);
        assert!(r.error_estimate < 1e-10);
    }

    #[test]
    fn oscillatory_integrand_needs_subdivision() {
        let r = integrate(|x| (40.0 * x).sin(), 0.0, 3.0, &gk_spec()).unwrap();
        let exact = (1.0 - (120.0_f64).cos()) / 40.0;
        assert!((r.value - exact).abs() < 1e-10, "{} vs {exact}", r.value);
        assert!(r.subdivisions > 0);
    }

    #[test]
    fn budget_exhaustion_reports_diagnostics() {
        let spec = QuadratureSpec {
            max_subdivisions: 2,
            abs_tol: 1e-14,
            rel_tol: 1e-14,
            ..gk_spec()
        };
        match integrate(|x| (200.0 * x).sin().abs(), 0.0, 3.0, &spec) {
            Err(QuadError::NonConvergence { subdivisions, .. }) => assert_eq!(subdivisions, 2),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn halving_tolerance_moves_less_than_error_estimate() {
        let f = |x: f64| (-x * x / 2.0).exp() * (3.0 * x).cos();
        let loose = QuadratureSpec {
            abs_tol: 1e-6,
            rel_tol: 1e-6,
            ..gk_spec()
        };
        let tight = QuadratureSpec {
            abs_tol: 5e-7,
            rel_tol: 5e-7,
            ..gk_spec()
        };
        let a = integrate(f, -8.0, 8.0, &loose).unwrap();
        let b = integrate(f, -8.0, 8.0, &tight).unwrap();
        assert!((a.value - b.value).abs() <= a.error_estimate.max(f64::EPSILON));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let spec = QuadratureSpec { abs_tol: 0.0, ..gk_spec() };
        assert!(matches!(
            integrate(|x| x, 0.0, 1.0, &spec),
            Err(QuadError::InvalidSpec(_))
        ));
    }
}
