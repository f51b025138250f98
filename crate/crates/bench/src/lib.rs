//! Shared fixtures for the benchmarks.

use szego_core::oracle::{build_basis, GridSpec, OrthonormalBasis, PrecisionMode};
use szego_core::potential::{make_elliptic_ginibre, Potential};
use szego_core::Complex64;

/// Exterior pair with ζ = zw̄ = 1.8.
pub const EXTERIOR_PAIR: (Complex64, Complex64) = (Complex64::new(1.5, 0.0), Complex64::new(1.2, 0.0));

/// Q = u² + 3v².
pub fn elliptic() -> Potential {
    make_elliptic_ginibre(1.0, 3.0).expect("valid elliptic parameters")
}

pub fn elliptic_basis(n: usize, mode: PrecisionMode) -> OrthonormalBasis {
    build_basis(&elliptic(), n, n - 1, &GridSpec::default(), mode).expect("basis within budget")
}

/// Boundary pair of the elliptic droplet at the given angles.
pub fn elliptic_boundary_pair(theta1: f64, theta2: f64) -> (Complex64, Complex64) {
    let pot = elliptic();
    let p = |t| szego_core::potential::boundary_point(&pot, 1.0, t).expect("boundary point").p;
    (p(theta1), p(theta2))
}
