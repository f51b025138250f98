use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Exterior conformal map of a droplet onto {|ω| > 1}, normalized so that
/// φ(∞) = ∞ with φ'(∞) > 0. Inverse χ(ω) = Aω + B/ω (disc: B = 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConformalMap {
    Disc { r: f64 },
    Ellipse { a: f64, b: f64 },
}

impl ConformalMap {
    pub fn ellipse_from_axes(p: f64, q: f64) -> Self {
        ConformalMap::Ellipse { a: 0.5 * (p + q), b: 0.5 * (p - q) }
    }

    /// Laurent coefficients (A, B) of χ(ω) = Aω + B/ω.
    pub fn laurent(&self) -> (f64, f64) {
        match *self {
            ConformalMap::Disc { r } => (r, 0.0),
            ConformalMap::Ellipse { a, b } => (a, b),
        }
    }

    /// Semi-axes along the real and imaginary directions.
    pub fn semi_axes(&self) -> (f64, f64) {
        let (a, b) = self.laurent();
        (a + b, a - b)
    }

    pub fn scaled(&self, s: f64) -> Self {
        match *self {
            ConformalMap::Disc { r } => ConformalMap::Disc { r: r * s },
            ConformalMap::Ellipse { a, b } => ConformalMap::Ellipse { a: a * s, b: b * s },
        }
    }

    pub fn chi(&self, w: Complex64) -> Complex64 {
        let (a, b) = self.laurent();
        w * a + b / w
    }

    pub fn chi_prime(&self, w: Complex64) -> Complex64 {
        let (a, b) = self.laurent();
        a - b / (w * w)
    }

    pub fn chi_second(&self, w: Complex64) -> Complex64 {
        let (_, b) = self.laurent();
        2.0 * b / (w * w * w)
    }

    pub fn phi(&self, z: Complex64) -> Complex64 {
        match *self {
            ConformalMap::Disc { r } => z / r,
            ConformalMap::Ellipse { a, b } => {
                // larger root of Aω² - zω + B = 0
                let s = (z * z - 4.0 * a * b).sqrt();
                let (p, m) = (z + s, z - s);
                let top = if p.norm_sqr() >= m.norm_sqr() { p } else { m };
                top / (2.0 * a)
            }
        }
    }

    pub fn phi_prime(&self, z: Complex64) -> Complex64 {
        1.0 / self.chi_prime(self.phi(z))
    }

    /// Branch of √φ' that is positive at infinity.
    pub fn sqrt_phi_prime(&self, z: Complex64) -> Complex64 {
        let d = self.chi_prime(self.phi(z));
        1.0 / d.sqrt()
    }

    pub fn boundary(&self, theta: f64) -> Complex64 {
        self.chi(Complex64::from_polar(1.0, theta))
    }

    /// Outward unit normal at χ(e^{iθ}).
    pub fn normal(&self, theta: f64) -> Complex64 {
        let w = Complex64::from_polar(1.0, theta);
        let v = w * self.chi_prime(w);
        v / v.norm()
    }

    /// |χ'(e^{iθ})|, the arclength density of the boundary parametrization.
    pub fn speed(&self, theta: f64) -> f64 {
        self.chi_prime(Complex64::from_polar(1.0, theta)).norm()
    }

    /// Strict interior test of the droplet.
    pub fn contains(&self, z: Complex64) -> bool {
        let (p, q) = self.semi_axes();
        (z.re / p).powi(2) + (z.im / q).powi(2) < 1.0
    }

    pub fn outer_radius(&self) -> f64 {
        let (p, q) = self.semi_axes();
        p.abs().max(q.abs())
    }

    /// Distance from z0 (inside) to the boundary along direction e^{iψ}.
    pub fn ray_exit(&self, z0: Complex64, psi: f64) -> Result<f64> {
        let (p, q) = self.semi_axes();
        let (s, c) = psi.sin_cos();
        let qa = (c / p).powi(2) + (s / q).powi(2);
        let qb = z0.re * c / (p * p) + z0.im * s / (q * q);
        let qc = (z0.re / p).powi(2) + (z0.im / q).powi(2) - 1.0;
        if qc > 0.0 {
            return Err(Error::Domain(format!("ray origin {z0} lies outside the droplet")));
        }
        let disc = qb * qb - qa * qc;
        Ok((-qb + disc.max(0.0).sqrt()) / qa)
    }

    pub fn radial_extent(&self, theta: f64) -> f64 {
        self.ray_exit(Complex64::new(0.0, 0.0), theta).expect("origin is inside")
    }

    /// Nearest point of the boundary to z: (θ, χ(e^{iθ})) by Newton on θ.
    pub fn nearest_boundary_point(&self, z: Complex64) -> (f64, Complex64) {
        let g = |th: f64| {
            let w = Complex64::from_polar(1.0, th);
            let d0 = self.chi(w) - z;
            let d1 = Complex64::i() * w * self.chi_prime(w);
            let d2 = -w * self.chi_prime(w) - w * w * self.chi_second(w);
            let g1 = 2.0 * (d0.conj() * d1).re;
            let g2 = 2.0 * (d1.norm_sqr() + (d0.conj() * d2).re);
            (d0.norm_sqr(), g1, g2)
        };
        // coarse scan for the basin, then Newton
        let m = 64;
        let mut th = (0..m)
            .map(|k| 2.0 * PI * k as f64 / m as f64)
            .min_by(|a, b| g(*a).0.total_cmp(&g(*b).0))
            .unwrap_or(0.0);
        for _ in 0..60 {
            let (_, g1, g2) = g(th);
            if g2 <= 0.0 {
                th -= 1e-3 * g1.signum();
                continue;
            }
            let step = g1 / g2;
            th -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        (th, self.boundary(th))
    }

    /// Signed distance from z to the boundary, positive inside.
    pub fn signed_distance(&self, z: Complex64) -> f64 {
        let (_, p) = self.nearest_boundary_point(z);
        let d = (z - p).norm();
        if self.contains(z) {
            d
        } else {
            -d
        }
    }
}
