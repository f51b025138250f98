use std::f64::consts::PI;

use num_complex::Complex64;

use super::{theta_nodes, AdmissiblePotential, BoundaryPoint, DropletGeometry, DEFAULT_RHO0};
use crate::error::{Error, Result};
use crate::numerics::quadrature::quad_gauss_legendre;
use crate::numerics::sum::Accumulator;

pub fn droplet<P: AdmissiblePotential + ?Sized>(pot: &P, tau: f64, m: usize) -> Result<DropletGeometry> {
    let map = pot.droplet_map(tau)?;
    let boundary = theta_nodes(m).map(|t| map.boundary(t)).collect();
    Ok(DropletGeometry { tau, map, boundary, conformal_coeffs: map.laurent() })
}

pub fn boundary_point<P: AdmissiblePotential + ?Sized>(pot: &P, tau: f64, theta: f64) -> Result<BoundaryPoint> {
    let map = pot.droplet_map(tau)?;
    Ok(BoundaryPoint { p: map.boundary(theta), normal: map.normal(theta), tau })
}

/// ∫_{S_τ} ΔQ dA with dA = dxdy/π.
pub fn equilibrium_mass<P: AdmissiblePotential + ?Sized>(pot: &P, tau: f64) -> Result<f64> {
    let map = pot.droplet_map(tau)?;
    let gl = quad_gauss_legendre(48);
    let m = 256;
    let mut acc = Accumulator::default();
    for th in theta_nodes(m) {
        let r_max = map.radial_extent(th);
        let e = Complex64::from_polar(1.0, th);
        let ray = gl.mapped(0.0, r_max).integrate(|r| pot.laplacian(e * r) * r);
        acc.add(ray);
    }
    Ok(acc.value() * (2.0 * PI / m as f64) / PI)
}

pub fn v_tau_with<P: AdmissiblePotential + ?Sized>(pot: &P, tau: f64, z: Complex64, rho0: f64) -> Result<f64> {
    let data = if tau == 1.0 { pot.unit_data().clone() } else { pot.tau_data(tau)? };
    data.check_depth(z, rho0)?;
    Ok(data.v(z))
}

/// V_τ(z) = Re 𝒬_τ(z) + τ log|φ_τ(z)|².
pub fn v_tau<P: AdmissiblePotential + ?Sized>(pot: &P, tau: f64, z: Complex64) -> Result<f64> {
    v_tau_with(pot, tau, z, DEFAULT_RHO0)
}

/// (Q - V_τ)(z)
pub fn ridge<P: AdmissiblePotential + ?Sized>(pot: &P, tau: f64, z: Complex64) -> Result<f64> {
    Ok(pot.q(z) - v_tau(pot, tau, z)?)
}

/// Obstacle function: Q on the droplet, V_τ off it.
pub fn obstacle<P: AdmissiblePotential + ?Sized>(pot: &P, tau: f64, z: Complex64) -> Result<f64> {
    let data = pot.tau_data(tau)?;
    if data.map.contains(z) {
        Ok(pot.q(z))
    } else {
        Ok(data.v(z))
    }
}

/// Normal velocity of Γ_τ under Laplacian growth: |φ_τ'(p)| / (2ΔQ(p)).
pub fn boundary_speed<P: AdmissiblePotential + ?Sized>(pot: &P, tau: f64, p: Complex64) -> Result<f64> {
    let map = pot.droplet_map(tau)?;
    Ok(map.phi_prime(p).norm() / (2.0 * pot.laplacian(p)))
}

/// Central difference of the signed distance from p to Γ_{τ±dτ}.
pub fn boundary_speed_fd<P: AdmissiblePotential + ?Sized>(pot: &P, tau: f64, p: Complex64, dtau: f64) -> Result<f64> {
    if !(dtau > 0.0 && dtau < tau) {
        return Err(Error::Config(format!("finite-difference step dτ = {dtau} must lie in (0, τ)")));
    }
    let up = pot.droplet_map(tau + dtau)?.signed_distance(p);
    let down = pot.droplet_map(tau - dtau)?.signed_distance(p);
    Ok((up - down) / (2.0 * dtau))
}

/// (Q - V_τ)(p + ℓn)/ℓ², to be compared with 2ΔQ(p).
pub fn ridge_quadratic_coefficient<P: AdmissiblePotential + ?Sized>(pot: &P, bp: &BoundaryPoint, ell: f64) -> Result<f64> {
    if ell == 0.0 {
        return Err(Error::Domain("normal offset must be nonzero".into()));
    }
    Ok(ridge(pot, bp.tau, bp.p + bp.normal * ell)? / (ell * ell))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RidgeComparison {
    pub exact: f64,
    pub predicted: f64,
    /// nearest point of Γ_τ to z
    pub foot: Complex64,
}

impl RidgeComparison {
    pub fn ratio(&self) -> f64 {
        self.exact / self.predicted
    }
}

/// Ridge at τ evaluated on Γ_{τ'} against (|φ_τ'(p)|²/2ΔQ(p))(τ' - τ)².
pub fn ridge_between<P: AdmissiblePotential + ?Sized>(pot: &P, tau: f64, tau_prime: f64, z: Complex64) -> Result<RidgeComparison> {
    let data = pot.tau_data(tau)?;
    data.check_depth(z, DEFAULT_RHO0)?;
    let exact = pot.q(z) - data.v(z);
    let (_, foot) = data.map.nearest_boundary_point(z);
    let dphi = data.map.phi_prime(foot).norm();
    let predicted = dphi * dphi / (2.0 * pot.laplacian(foot)) * (tau_prime - tau).powi(2);
    Ok(RidgeComparison { exact, predicted, foot })
}

/// ∫_S log|z - w| ΔQ(w) dA(w) for z inside S, polar about z.
fn log_potential<P: AdmissiblePotential + ?Sized>(pot: &P, map: &super::ConformalMap, z: Complex64, m: usize) -> Result<f64> {
    let gl = quad_gauss_legendre(40).mapped(0.0, 1.0);
    let mut acc = Accumulator::default();
    for psi in theta_nodes(m) {
        let r = map.ray_exit(z, psi)?;
        let e = Complex64::from_polar(1.0, psi);
        // ρ = r t²
        let ray = gl.integrate(|t| {
            let rho = r * t * t;
            if rho == 0.0 {
                return 0.0;
            }
            rho.ln() * pot.laplacian(z + e * rho) * rho * 2.0 * r * t
        });
        acc.add(ray);
    }
    Ok(acc.value() * (2.0 * PI / m as f64) / PI)
}

/// Values of Q(z) - 2∫ log|z - w| dσ(w) at interior sample points and their spread.
pub fn variational_spread<P: AdmissiblePotential + ?Sized>(pot: &P) -> Result<(f64, Vec<f64>)> {
    let map = pot.droplet_map(1.0)?;
    let mut vals = Vec::new();
    for &t in &[0.0, 0.35, 0.7, 0.9] {
        for k in 0..5 {
            let th = 0.3 + 1.1 * k as f64;
            let z = Complex64::from_polar(t * map.radial_extent(th), th);
            vals.push(pot.q(z) - 2.0 * log_potential(pot, &map, z, 512)?);
            if t == 0.0 {
                break;
            }
        }
    }
    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((hi - lo, vals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{make_elliptic_ginibre, make_ginibre, make_radial, radial_profile, Potential};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn builtins() -> Vec<Potential> {
        vec![
            make_ginibre(),
            make_radial(&radial_profile("r4").unwrap()).unwrap(),
            make_radial(&radial_profile("r2+r4").unwrap()).unwrap(),
            make_elliptic_ginibre(1.0, 3.0).unwrap(),
        ]
    }

    #[test]
    fn mass_equals_tau() {
        for pot in builtins() {
            for tau in [0.5, 0.9, 1.0] {
                let m = equilibrium_mass(&pot, tau).unwrap();
                assert!((m - tau).abs() < 1e-8, "{} τ={tau}: {m}", pot.name());
            }
        }
    }

    #[test]
    fn ginibre_v_values() {
        let g = make_ginibre();
        assert!((v_tau(&g, 1.0, c(2.0, 0.0)).unwrap() - (1.0 + 4f64.ln())).abs() < 1e-14);
        assert!((v_tau(&g, 1.0, c(0.0, 1.0)).unwrap() - 1.0).abs() < 1e-14);
        // τ + τ log(|z|²/τ)
        let v = v_tau(&g, 0.6, c(1.1, 0.3)).unwrap();
        assert!((v - (0.6 + 0.6 * ((1.21 + 0.09) / 0.6f64).ln())).abs() < 1e-13);
        let far = [1e2, 1e4, 1e6].map(|r| v_tau(&g, 1.0, c(r, 0.0)).unwrap() - 2.0 * r.ln());
        assert!(far.iter().all(|d| (d - 1.0).abs() < 1e-9));
    }

    #[test]
    fn ridge_taylor() {
        let g = make_ginibre();
        let r = ridge(&g, 1.0, c(1.01, 0.0)).unwrap();
        let closed = 1.01f64.powi(2) - 1.0 - 1.01f64.powi(2).ln();
        assert!((r - closed).abs() < 1e-15);
        assert!((r / 1e-4 - 2.0).abs() < 0.03);
        for pot in builtins() {
            for th in [0.0, 0.7, std::f64::consts::FRAC_PI_2, 2.9] {
                let bp = boundary_point(&pot, 1.0, th).unwrap();
                assert!(ridge(&pot, 1.0, bp.p).unwrap().abs() < 1e-10);
                let coef = ridge_quadratic_coefficient(&pot, &bp, 1e-3).unwrap();
                let target = 2.0 * pot.laplacian(bp.p);
                assert!(((coef - target) / target).abs() < 0.01, "{} θ={th}: {coef} vs {target}", pot.name());
            }
        }
    }

    #[test]
    fn ridge_grows_off_boundary() {
        for pot in builtins() {
            for th in [0.2, 1.3, 2.5, 4.0] {
                let bp = boundary_point(&pot, 1.0, th).unwrap();
                let mut prev = 0.0;
                for k in 1..20 {
                    let ell = 0.1 * k as f64;
                    let v = ridge(&pot, 1.0, bp.p + bp.normal * ell).unwrap();
                    assert!(v > prev);
                    assert!(v >= 0.3 * (ell * ell).min(1.0), "{}: ℓ={ell} ridge {v}", pot.name());
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn speed_closed_form_and_fd() {
        let g = make_ginibre();
        assert!((boundary_speed(&g, 1.0, c(0.0, 1.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((boundary_speed_fd(&g, 1.0, c(0.0, 1.0), 1e-3).unwrap() - 0.5).abs() < 1e-6);
        for pot in builtins() {
            for th in [0.0, 0.9, std::f64::consts::FRAC_PI_2, 2.2] {
                let bp = boundary_point(&pot, 1.0, th).unwrap();
                let s = boundary_speed(&pot, 1.0, bp.p).unwrap();
                let fd = boundary_speed_fd(&pot, 1.0, bp.p, 1e-3).unwrap();
                assert!(s > 0.0);
                assert!((s - fd).abs() < 1e-4, "{} θ={th}: {s} vs {fd}", pot.name());
            }
        }
    }

    #[test]
    fn ridge_between_examples() {
        let g = make_ginibre();
        let rb = ridge_between(&g, 0.99, 1.0, c(1.0, 0.0)).unwrap();
        let exact = 1.0 - (0.99 + 0.99 * (1.0f64 / 0.99).ln());
        assert!((rb.exact - exact).abs() < 1e-15);
        assert!((rb.predicted - 1e-4 / (2.0 * 0.99)).abs() < 1e-15);
        assert!((rb.ratio() - 1.0).abs() < 0.02);
        assert_eq!(ridge_between(&g, 1.0, 1.0, c(1.0, 0.0)).unwrap().exact.abs() < 1e-15, true);
        let e = make_elliptic_ginibre(1.0, 3.0).unwrap();
        for th in [0.0, 0.8, 1.6] {
            let z = e.droplet_map(1.0).unwrap().boundary(th);
            let rb = ridge_between(&e, 0.99, 1.0, z).unwrap();
            assert!((rb.ratio() - 1.0).abs() < 0.05, "θ={th}: {}", rb.ratio());
        }
    }

    #[test]
    fn elliptic_variational_constancy() {
        let e = make_elliptic_ginibre(1.0, 3.0).unwrap();
        let (spread, _) = variational_spread(&e).unwrap();
        assert!(spread < 1e-4, "spread {spread}");
        // the ellipse u²/2 + 6v² ≤ 1 (wrong axes) fails the same test
        let wrong = wrong_axes_spread();
        assert!(wrong > 1e-2, "wrong-axes ellipse spread {wrong}");
        let (g, vals) = variational_spread(&make_ginibre()).unwrap();
        assert!(g < 1e-6 && (vals[0] - 1.0).abs() < 1e-6);
    }

    fn wrong_axes_spread() -> f64 {
        let e = make_elliptic_ginibre(1.0, 3.0).unwrap();
        let map = crate::potential::ConformalMap::ellipse_from_axes(2f64.sqrt(), 1.0 / 6f64.sqrt());
        let vals: Vec<f64> = [0.0, 0.5, 1.0]
            .iter()
            .map(|&x| {
                let z = c(x, 0.0);
                e.q(z) - 2.0 * log_potential(&e, &map, z, 512).unwrap()
            })
            .collect();
        vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - vals.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn obstacle_ordering() {
        for pot in builtins() {
            for &z in &[c(1.5, 0.2), c(-0.3, 1.4), c(2.5, -2.0)] {
                let lo = obstacle(&pot, 0.9, z).unwrap();
                let hi = obstacle(&pot, 1.0, z).unwrap();
                assert!(lo <= hi + 1e-12);
                assert!(hi <= pot.q(z) + 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn obstacle_below_q(r in 0.0f64..3.0, th in -3.1f64..3.1, tau in 0.5f64..1.0) {
            let pot = make_elliptic_ginibre(1.0, 3.0).unwrap();
            let z = Complex64::from_polar(r, th);
            let o = obstacle(&pot, tau, z).unwrap();
            prop_assert!(o <= pot.q(z) + 1e-10);
        }
    }
}
