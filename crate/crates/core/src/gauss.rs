//! Gaussian tail helpers shared by the oracles and the samplers.

#[allow(unused_imports)]
use num_traits::Float;

/// 1/sqrt(2*pi).
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// Upper tail `P(N(0,1) >= x)` via the complementary error function.
pub fn std_normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Lower tail `P(N(0,1) <= x)`.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Upper tail of a centered Gaussian with the given variance.
///
/// `variance = 0` degenerates to a point mass at zero.
pub fn normal_tail(x: f64, variance: f64) -> f64 {
    debug_assert!(variance >= 0.0);
    if variance == 0.0 {
        return if x <= 0.0 { 1.0 } else { 0.0 };
    }
    std_normal_tail(x / variance.sqrt())
}

/// Standard normal density.
pub fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}
