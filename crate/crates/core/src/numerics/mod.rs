//! Overflow-safe complex arithmetic, exact polynomial algebra and quadrature rules.

pub mod logcomplex;
pub mod poly;
pub mod quadrature;
pub mod sum;

pub use logcomplex::{lc_div, lc_from_complex, lc_mul, lc_pow_int, lc_sum, LogComplex};
pub use poly::{poly_derivative, poly_eval, rational_eval, PolynomialQ, RationalAtOne};
pub use quadrature::{quad_gauss_legendre, quad_radial, quad_trapezoid_periodic, QuadKind, Quadrature1D};

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// ln k!
pub fn ln_factorial(k: usize) -> f64 {
    libm::lgamma(k as f64 + 1.0)
}
