//! Standard normal density and distribution function.

use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal density.
pub fn pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF, computed through `erfc` so both tails keep full
/// relative precision.
pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}
