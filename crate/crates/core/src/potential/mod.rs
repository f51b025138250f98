//! Admissible potentials, their droplets S_τ and the holomorphic data
//! 𝒬_τ, ℋ_τ, V_τ living on the exterior of each droplet.

pub mod analysis;
pub mod conformal;
pub mod extension;

use std::f64::consts::PI;

use num_complex::Complex64;
use once_cell::sync::OnceCell;

use crate::error::{Error, Result};

pub use analysis::{
    boundary_point, boundary_speed, boundary_speed_fd, droplet, equilibrium_mass, obstacle, ridge, ridge_between,
    ridge_quadratic_coefficient, v_tau, v_tau_with, variational_spread, RidgeComparison,
};
pub use conformal::ConformalMap;
pub use extension::HarmonicExtension;

pub const DEFAULT_NODES: usize = 512;
pub const DEFAULT_RHO0: f64 = 0.5;
pub const DEFAULT_TAU0: f64 = 0.8;

/// What the kernel asymptotics need from a potential Q.
pub trait AdmissiblePotential: Send + Sync {
    fn name(&self) -> String;
    fn q(&self, z: Complex64) -> f64;
    /// ΔQ = ∂∂̄Q (a quarter of the usual Laplacian).
    fn laplacian(&self, z: Complex64) -> f64;
    fn droplet_map(&self, tau: f64) -> Result<ConformalMap>;
    /// Q(-z) = Q(z).
    fn parity_symmetric(&self) -> bool {
        false
    }
    fn is_radial(&self) -> bool {
        false
    }
    /// (α, β) when Q = α|z|² + β Re z².
    fn quadratic_form(&self) -> Option<(f64, f64)> {
        None
    }
    fn nodes(&self) -> usize {
        DEFAULT_NODES
    }
    fn unit_data(&self) -> &TauData;
    fn tau_data(&self, tau: f64) -> Result<TauData> {
        TauData::build(self, tau, self.nodes())
    }
}

/// The τ-member of the droplet family with its holomorphic data.
#[derive(Clone, Debug)]
pub struct TauData {
    pub tau: f64,
    pub map: ConformalMap,
    /// 𝒬_τ as a function of ω = φ_τ(z)
    pub q_ext: HarmonicExtension,
    /// ℋ_τ as a function of ω = φ_τ(z)
    pub h_ext: HarmonicExtension,
}

impl TauData {
    pub fn build<P: AdmissiblePotential + ?Sized>(pot: &P, tau: f64, nodes: usize) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::Domain(format!("droplet parameter τ must be positive, got {tau}")));
        }
        let map = pot.droplet_map(tau)?;
        let q_ext = HarmonicExtension::fit(|t| pot.q(map.boundary(t)), nodes)?;
        let h_ext = HarmonicExtension::fit(|t| 0.5 * pot.laplacian(map.boundary(t)).ln(), nodes)?;
        Ok(TauData { tau, map, q_ext, h_ext })
    }

    pub fn phi(&self, z: Complex64) -> Complex64 {
        self.map.phi(z)
    }

    pub fn sqrt_phi_prime(&self, z: Complex64) -> Complex64 {
        self.map.sqrt_phi_prime(z)
    }

    /// 𝒬_τ(z)
    pub fn q_hol(&self, z: Complex64) -> Complex64 {
        self.q_ext.eval(self.phi(z))
    }

    /// ℋ_τ(z)
    pub fn h_hol(&self, z: Complex64) -> Complex64 {
        self.h_ext.eval(self.phi(z))
    }

    /// V_τ(z) = Re 𝒬_τ(z) + τ log|φ_τ(z)|², without the depth check.
    pub fn v(&self, z: Complex64) -> f64 {
        let w = self.phi(z);
        self.q_ext.eval(w).re + self.tau * w.norm_sqr().ln()
    }

    pub fn check_depth(&self, z: Complex64, rho0: f64) -> Result<()> {
        let m = self.phi(z).norm();
        if m <= rho0 {
            return Err(Error::Domain(format!(
                "z = {z} lies in the excluded compact: |φ_τ(z)| = {m:.4} ≤ ρ0 = {rho0}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialKind {
    Ginibre,
    /// Q = Σ_k coeffs[k-1] |z|^{2k}
    Radial { coeffs: Vec<f64> },
    /// Q = a u² + b v²
    Elliptic { a: f64, b: f64 },
}

#[derive(Debug)]
pub struct Potential {
    pub kind: PotentialKind,
    nodes: usize,
    unit: OnceCell<TauData>,
}

impl Clone for Potential {
    fn clone(&self) -> Self {
        Potential { kind: self.kind.clone(), nodes: self.nodes, unit: self.unit.clone() }
    }
}

pub fn make_ginibre() -> Potential {
    Potential::new(PotentialKind::Ginibre, DEFAULT_NODES).expect("Ginibre data builds")
}

/// Radial potential q(r) = Σ c_k r^{2k}; needs nonnegative coefficients, not all zero.
pub fn make_radial(coeffs: &[f64]) -> Result<Potential> {
    if coeffs.is_empty() || coeffs.iter().any(|&c| c < 0.0 || !c.is_finite()) || coeffs.iter().all(|&c| c == 0.0) {
        return Err(Error::Config(format!(
            "radial profile needs finite nonnegative coefficients, not all zero; got {coeffs:?}"
        )));
    }
    Potential::new(PotentialKind::Radial { coeffs: coeffs.to_vec() }, DEFAULT_NODES)
}

/// Named radial profiles: "r2", "r4" (= r⁴/2), "r2+r4" (= r²/2 + r⁴/4).
pub fn radial_profile(name: &str) -> Result<Vec<f64>> {
    match name {
        "r2" => Ok(vec![1.0]),
        "r4" => Ok(vec![0.0, 0.5]),
        "r2+r4" => Ok(vec![0.5, 0.25]),
        _ => Err(Error::Config(format!("unknown radial profile '{name}' (use r2, r4 or r2+r4)"))),
    }
}

pub fn make_elliptic_ginibre(a: f64, b: f64) -> Result<Potential> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        let (al, be) = (0.5 * (a + b), 0.5 * (a - b));
        return Err(Error::Config(format!(
            "elliptic potential needs a, b > 0 (α = {al}, |β| = {}); the droplet is not an ellipse",
            be.abs()
        )));
    }
    Potential::new(PotentialKind::Elliptic { a, b }, DEFAULT_NODES)
}

impl Potential {
    pub fn new(kind: PotentialKind, nodes: usize) -> Result<Self> {
        let p = Potential { kind, nodes, unit: OnceCell::new() };
        let data = TauData::build(&p, 1.0, nodes)?;
        let _ = p.unit.set(data);
        Ok(p)
    }

    pub fn with_nodes(&self, nodes: usize) -> Result<Self> {
        Potential::new(self.kind.clone(), nodes)
    }

    /// Droplet radius for radial potentials: ½ r q'(r) = τ.
    pub fn radial_radius(&self, tau: f64) -> Result<f64> {
        match &self.kind {
            PotentialKind::Ginibre => Ok(tau.sqrt()),
            PotentialKind::Radial { coeffs } => {
                let mass = |r: f64| coeffs.iter().enumerate().map(|(i, c)| (i + 1) as f64 * c * r.powi(2 * (i as i32 + 1))).sum::<f64>();
                let mut hi = 1.0;
                let mut guard = 0;
                while mass(hi) < tau {
                    hi *= 2.0;
                    guard += 1;
                    if guard > 200 {
                        return Err(Error::Config(format!("no droplet radius for τ = {tau}")));
                    }
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mass(mid) < tau {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-16 * hi {
                        break;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
            PotentialKind::Elliptic { .. } => Err(Error::Domain("elliptic droplets are not discs".into())),
        }
    }

    fn radial_q(coeffs: &[f64], r2: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, c| (acc + c) * r2)
    }
}

impl AdmissiblePotential for Potential {
    fn name(&self) -> String {
        match &self.kind {
            PotentialKind::Ginibre => "ginibre".into(),
            PotentialKind::Radial { coeffs } => format!("radial{coeffs:?}"),
            PotentialKind::Elliptic { a, b } => format!("elliptic(a={a}, b={b})"),
        }
    }

    fn q(&self, z: Complex64) -> f64 {
        match &self.kind {
            PotentialKind::Ginibre => z.norm_sqr(),
            PotentialKind::Radial { coeffs } => Self::radial_q(coeffs, z.norm_sqr()),
            PotentialKind::Elliptic { a, b } => a * z.re * z.re + b * z.im * z.im,
        }
    }

    fn laplacian(&self, z: Complex64) -> f64 {
        match &self.kind {
            PotentialKind::Ginibre => 1.0,
            PotentialKind::Radial { coeffs } => {
                let r2 = z.norm_sqr();
                coeffs.iter().enumerate().map(|(i, c)| ((i + 1) * (i + 1)) as f64 * c * r2.powi(i as i32)).sum()
            }
            PotentialKind::Elliptic { a, b } => 0.5 * (a + b),
        }
    }

    fn droplet_map(&self, tau: f64) -> Result<ConformalMap> {
        match &self.kind {
            PotentialKind::Ginibre | PotentialKind::Radial { .. } => Ok(ConformalMap::Disc { r: self.radial_radius(tau)? }),
            PotentialKind::Elliptic { a, b } => {
                let alpha = 0.5 * (a + b);
                // mass α p q = τ, shape p/q = b/a
                let q = (tau * a / (alpha * b)).sqrt();
                let p = q * b / a;
                Ok(ConformalMap::ellipse_from_axes(p, q))
            }
        }
    }

    fn parity_symmetric(&self) -> bool {
        true
    }

    fn is_radial(&self) -> bool {
        !matches!(self.kind, PotentialKind::Elliptic { .. })
    }

    fn quadratic_form(&self) -> Option<(f64, f64)> {
        match &self.kind {
            PotentialKind::Ginibre => Some((1.0, 0.0)),
            PotentialKind::Radial { coeffs } if coeffs.iter().skip(1).all(|&c| c == 0.0) => Some((coeffs[0], 0.0)),
            PotentialKind::Radial { .. } => None,
            PotentialKind::Elliptic { a, b } => Some((0.5 * (a + b), 0.5 * (a - b))),
        }
    }

    fn nodes(&self) -> usize {
        self.nodes
    }

    fn unit_data(&self) -> &TauData {
        self.unit.get().expect("unit data is built in the constructor")
    }
}

/// A point of Γ_τ with its outward unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub p: Complex64,
    pub normal: Complex64,
    pub tau: f64,
}

/// Sampled boundary of S_τ with the Laurent data of χ_τ.
#[derive(Clone, Debug)]
pub struct DropletGeometry {
    pub tau: f64,
    pub map: ConformalMap,
    /// χ_τ(e^{2πik/m})
    pub boundary: Vec<Complex64>,
    /// coefficients of ω and ω^{-1} in χ_τ
    pub conformal_coeffs: (f64, f64),
}

impl DropletGeometry {
    pub fn arclength(&self) -> Vec<f64> {
        let mut s = vec![0.0];
        for w in self.boundary.windows(2) {
            let last = *s.last().unwrap();
            s.push(last + (w[1] - w[0]).norm());
        }
        s
    }
}

pub(crate) fn theta_nodes(m: usize) -> impl Iterator<Item = f64> {
    (0..m).map(move |k| 2.0 * PI * k as f64 / m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ginibre_data() {
        let g = make_ginibre();
        let d = g.unit_data();
        assert_eq!(d.phi(c(0.3, 2.0)), c(0.3, 2.0));
        assert!((d.q_hol(c(2.0, 1.0)) - 1.0).norm() < 1e-14);
        assert!(d.h_hol(c(2.0, 1.0)).norm() < 1e-14);
        let t = g.tau_data(0.5).unwrap();
        assert!((t.phi(c(1.0, 0.0)).re - 2f64.sqrt()).abs() < 1e-14);
        assert!((t.q_hol(c(3.0, 0.0)).re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn radial_r2_matches_ginibre() {
        let r = make_radial(&radial_profile("r2").unwrap()).unwrap();
        let g = make_ginibre();
        for tau in [0.5, 0.9, 1.0] {
            let (dr, dg) = (r.tau_data(tau).unwrap(), g.tau_data(tau).unwrap());
            let z = c(1.3, -0.4);
            assert!((dr.v(z) - dg.v(z)).abs() < 1e-12);
            assert!((dr.phi(z) - dg.phi(z)).norm() < 1e-12);
        }
    }

    #[test]
    fn quartic_radius() {
        let r = make_radial(&radial_profile("r4").unwrap()).unwrap();
        for tau in [0.5, 0.9, 1.0] {
            assert!((r.radial_radius(tau).unwrap() - tau.powf(0.25)).abs() < 1e-14);
        }
        assert!(make_radial(&[-1.0]).is_err());
        assert!(radial_profile("r6").is_err());
    }

    #[test]
    fn elliptic_axes() {
        let e = make_elliptic_ginibre(1.0, 3.0).unwrap();
        let (p, q) = e.unit_data().map.semi_axes();
        assert!((p - 1.5f64.sqrt()).abs() < 1e-15);
        assert!((q - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        assert!((2.0 * p * q - 1.0).abs() < 1e-15);
        assert!(make_elliptic_ginibre(1.0, 0.0).is_err());
        assert!(make_elliptic_ginibre(-1.0, 3.0).is_err());
        let circ = make_elliptic_ginibre(1.0, 1.0).unwrap();
        let (p1, q1) = circ.unit_data().map.semi_axes();
        assert!((p1 - 1.0).abs() < 1e-15 && (q1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn extension_matches_boundary_data() {
        for pot in [make_elliptic_ginibre(1.0, 3.0).unwrap(), make_radial(&[0.5, 0.25]).unwrap()] {
            for tau in [0.5, 1.0] {
                let d = pot.tau_data(tau).unwrap();
                for k in 0..97 {
                    let p = d.map.boundary(0.0647 * k as f64);
                    assert!((d.q_hol(p).re - pot.q(p)).abs() < 1e-9);
                    assert!((d.h_hol(p).re - 0.5 * pot.laplacian(p).ln()).abs() < 1e-9);
                    assert!((d.v(p) - pot.q(p)).abs() < 1e-10);
                }
                assert!(d.q_hol(c(1e9, 0.0)).im.abs() < 1e-12);
            }
        }
        let e = make_elliptic_ginibre(1.0, 3.0).unwrap();
        assert!((e.unit_data().h_hol(c(2.0, 2.0)) - 0.5 * 2f64.ln()).norm() < 1e-13);
    }

    #[test]
    fn depth_check() {
        let d = make_ginibre().tau_data(1.0).unwrap();
        assert!(d.check_depth(c(0.2, 0.0), DEFAULT_RHO0).is_err());
        assert!(d.check_depth(c(0.7, 0.0), DEFAULT_RHO0).is_ok());
    }
}
