//! Szegő kernel of the exterior domain, its orthonormal basis and the
//! harmonic measure, all through the exterior conformal map.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::sum::{pairwise_sum, pairwise_sum_real};
use crate::potential::{AdmissiblePotential, ConformalMap};

pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SzegoKernelValue {
    pub z: Complex64,
    pub w: Complex64,
    pub value: Complex64,
}

fn check_closure(map: &ConformalMap, z: Complex64) -> Result<Complex64> {
    let f = map.phi(z);
    if f.norm() < 1.0 - BOUNDARY_TOL {
        return Err(Error::Domain(format!("{z} lies inside the droplet (|φ| = {:.6})", f.norm())));
    }
    Ok(f)
}

pub fn szego_kernel_map(map: &ConformalMap, z: Complex64, w: Complex64) -> Result<Complex64> {
    let fz = check_closure(map, z)?;
    let fw = check_closure(map, w)?;
    let d = fz * fw.conj() - 1.0;
    if d.norm() < 1e-14 {
        return Err(Error::Pole(format!("φ(z)·conj φ(w) = 1 at z = {z}, w = {w}")));
    }
    Ok(map.sqrt_phi_prime(z) * map.sqrt_phi_prime(w).conj() / (2.0 * PI * d))
}

/// S(z, w) = (1/2π) √φ'(z) conj √φ'(w) / (φ(z) conj φ(w) - 1).
pub fn szego_kernel<P: AdmissiblePotential + ?Sized>(pot: &P, z: Complex64, w: Complex64) -> Result<SzegoKernelValue> {
    Ok(SzegoKernelValue { z, w, value: szego_kernel_map(&pot.unit_data().map, z, w)? })
}

pub fn szego_basis_map(map: &ConformalMap, j: usize, z: Complex64) -> Result<Complex64> {
    if j == 0 {
        return Err(Error::Domain("Hardy basis starts at j = 1".into()));
    }
    let f = check_closure(map, z)?;
    Ok(map.sqrt_phi_prime(z) / ((2.0 * PI).sqrt() * f.powi(j as i32)))
}

/// ψ_j(z) = √φ'(z) / (√(2π) φ(z)^j), j ≥ 1.
pub fn szego_basis<P: AdmissiblePotential + ?Sized>(pot: &P, j: usize, z: Complex64) -> Result<Complex64> {
    szego_basis_map(&pot.unit_data().map, j, z)
}

/// Boundary nodes χ(e^{iθ_k}) with arclength weights |χ'|·2π/m.
pub fn boundary_rule(map: &ConformalMap, m: usize) -> Vec<(Complex64, f64)> {
    let h = 2.0 * PI / m as f64;
    (0..m)
        .map(|k| {
            let th = k as f64 * h;
            (map.boundary(th), map.speed(th) * h)
        })
        .collect()
}

pub fn harmonic_measure_density_map(map: &ConformalMap, z: Complex64, p: Complex64) -> Result<f64> {
    let fz = map.phi(z);
    if fz.norm() <= 1.0 + BOUNDARY_TOL {
        return Err(Error::Domain(format!("harmonic measure needs z strictly outside the droplet, got {z}")));
    }
    let fp = map.phi(p);
    Ok((fz.norm_sqr() - 1.0) / (2.0 * PI * (fz - fp).norm_sqr()) * map.phi_prime(p).norm())
}

/// Density of ω_z with respect to arclength at p ∈ Γ.
pub fn harmonic_measure_density<P: AdmissiblePotential + ?Sized>(pot: &P, z: Complex64, p: Complex64) -> Result<f64> {
    harmonic_measure_density_map(&pot.unit_data().map, z, p)
}

pub fn harmonic_measure_mass<P: AdmissiblePotential + ?Sized>(pot: &P, z: Complex64, m: usize) -> Result<f64> {
    let map = pot.unit_data().map;
    let terms = boundary_rule(&map, m)
        .into_iter()
        .map(|(p, w)| harmonic_measure_density_map(&map, z, p).map(|d| d * w))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum_real(&terms))
}

/// ∫_Γ g(p) dω_z(p) for complex g.
pub fn harmonic_measure_integral<P, G>(pot: &P, z: Complex64, m: usize, g: G) -> Result<Complex64>
where
    P: AdmissiblePotential + ?Sized,
    G: Fn(Complex64) -> Complex64,
{
    let map = pot.unit_data().map;
    let terms = boundary_rule(&map, m)
        .into_iter()
        .map(|(p, w)| harmonic_measure_density_map(&map, z, p).map(|d| g(p) * d * w))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms))
}

/// |∫_Γ ψ_f(w) conj S(w, z) |dw| - ψ_f(z)|; f = 0 tests the constant function.
pub fn szego_reproducing_check<P: AdmissiblePotential + ?Sized>(pot: &P, f: usize, z: Complex64, m: usize) -> Result<f64> {
    let map = pot.unit_data().map;
    let mut terms = Vec::with_capacity(m);
    for (w, dw) in boundary_rule(&map, m) {
        let g = if f == 0 { Complex64::new(1.0, 0.0) } else { szego_basis_map(&map, f, w)? };
        terms.push(g * szego_kernel_map(&map, w, z)?.conj() * dw);
    }
    let target = if f == 0 { Complex64::new(0.0, 0.0) } else { szego_basis_map(&map, f, z)? };
    Ok((pairwise_sum(&terms) - target).norm())
}

/// Boundary Gram matrix of ψ_1..ψ_j.
pub fn orthonormality_matrix<P: AdmissiblePotential + ?Sized>(pot: &P, j: usize, m: usize) -> Result<Vec<Vec<Complex64>>> {
    let map = pot.unit_data().map;
    let rule = boundary_rule(&map, m);
    let vals: Vec<Vec<Complex64>> = (1..=j)
        .map(|k| rule.iter().map(|(p, _)| szego_basis_map(&map, k, *p)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok((0..j)
        .map(|a| {
            (0..j)
                .map(|b| {
                    let t: Vec<Complex64> = rule.iter().enumerate().map(|(i, (_, w))| vals[a][i] * vals[b][i].conj() * w).collect();
                    pairwise_sum(&t)
                })
                .collect()
        })
        .collect())
}

pub fn max_identity_deviation(g: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - target).norm());
        }
    }
    worst
}

/// Σ_{j=1}^{terms} ψ_j(z) conj ψ_j(w).
pub fn basis_sum<P: AdmissiblePotential + ?Sized>(pot: &P, terms: usize, z: Complex64, w: Complex64) -> Result<Complex64> {
    let map = pot.unit_data().map;
    let v: Vec<Complex64> = (1..=terms)
        .map(|j| Ok(szego_basis_map(&map, j, z)? * szego_basis_map(&map, j, w)?.conj()))
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&v))
}
