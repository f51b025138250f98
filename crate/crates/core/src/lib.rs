//! Reproducing kernels of weighted polynomial spaces in the plane.
//!
//! Exact oracles (the Ginibre closed form and brute-force orthonormal
//! bases) sit next to the asymptotic formulas they are checked against:
//! exterior and bulk expansions of the Ginibre kernel, Szegő-type kernel
//! asymptotics for general potentials, Berezin measures and loop-equation
//! residuals.

pub mod error;
pub mod expansion;
pub mod general_kernel;
pub mod geometry;
pub mod ginibre;
pub mod hardy;
pub mod numerics;
pub mod oracle;
pub mod potential;
pub mod validate;
pub mod ward;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use numerics::logcomplex::{lc_sum, LogComplex};
pub use numerics::poly::{PolynomialQ, RationalAtOne};
pub use numerics::quadrature::{QuadKind, Quadrature1D};
pub use potential::{AdmissiblePotential, BoundaryPoint, ConformalMap, DropletGeometry};
