//! Kernel asymptotics for general potentials near and outside the droplet:
//! the Szegő-type product formula, boundary cocycles, the Gaussian belt
//! form of the Berezin measure, quasipolynomials and the tail kernel.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ginibre::ginibre_orthonormal;
use crate::hardy::{harmonic_measure_density_map, BOUNDARY_TOL};
use crate::numerics::logcomplex::{lc_sum, LogComplex};
use crate::numerics::quadrature::quad_gauss_legendre;
use crate::numerics::sum::pairwise_sum_real;
use crate::potential::{AdmissiblePotential, BoundaryPoint, HarmonicExtension, TauData, DEFAULT_RHO0, DEFAULT_TAU0};

/// Rate reported with every asymptotic value; only decay is ever asserted.
pub const BETA_REPORTED: f64 = 0.125;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelOptions {
    /// constant in δ_n
    pub m_const: f64,
    pub eta: f64,
    pub tau0: f64,
    pub rho0: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions { m_const: 1.0, eta: 0.05, tau0: DEFAULT_TAU0, rho0: DEFAULT_RHO0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SequenceCuts {
    pub n: usize,
    pub theta_n: f64,
    pub delta_n: f64,
    pub eps_n: f64,
}

impl SequenceCuts {
    pub fn new(n: usize, m_const: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("sequence cuts need n ≥ 3, got {n}")));
        }
        if !(m_const > 0.0) {
            return Err(Error::Config(format!("belt constant M must be positive, got {m_const}")));
        }
        let nf = n as f64;
        let ln = nf.ln();
        Ok(SequenceCuts {
            n,
            theta_n: 1.0 - ln / nf.sqrt(),
            delta_n: m_const * (ln.ln() / nf).sqrt(),
            eps_n: ln / nf.sqrt(),
        })
    }

    /// First degree of the tail sum, ⌈nθ_n⌉ clamped at 0.
    pub fn tail_start(&self) -> usize {
        (self.n as f64 * self.theta_n).ceil().max(0.0) as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelRegime {
    ExteriorBelt,
    Boundary,
}

impl KernelRegime {
    pub fn name(self) -> &'static str {
        match self {
            KernelRegime::ExteriorBelt => "exterior_belt",
            KernelRegime::Boundary => "boundary",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct KernelAsymptotic {
    pub n: usize,
    pub z: Complex64,
    pub w: Complex64,
    pub value: LogComplex,
    pub regime: KernelRegime,
    pub beta_claimed: f64,
}

fn on_boundary(data: &TauData, z: Complex64) -> bool {
    (data.phi(z).norm() - 1.0).abs() <= BOUNDARY_TOL
}

fn check_belt(data: &TauData, cuts: &SequenceCuts, z: Complex64) -> Result<()> {
    if data.map.contains(z) {
        let d = data.map.signed_distance(z);
        if d > cuts.delta_n {
            return Err(Error::Regime(format!(
                "{z} lies {d:.4} inside the droplet, beyond the belt width δ_n = {:.4} (n = {})",
                cuts.delta_n, cuts.n
            )));
        }
    }
    Ok(())
}

/// log of √φ'(z) conj √φ'(w) / (2π(φ(z) conj φ(w) - 1)), no closure check.
fn log_szego(data: &TauData, z: Complex64, w: Complex64) -> Result<LogComplex> {
    let d = data.phi(z) * data.phi(w).conj() - 1.0;
    if d.norm() == 0.0 {
        return Err(Error::Pole(format!("φ(z) conj φ(w) = 1 at z = {z}, w = {w}")));
    }
    Ok(LogComplex::from_complex(data.sqrt_phi_prime(z))
        .mul(LogComplex::from_complex(data.sqrt_phi_prime(w)).conj())
        .div(LogComplex::from_complex(2.0 * PI * d))?)
}

/// √(2πn) e^{(n/2)(𝒬(z)+conj 𝒬(w)) - (n/2)(Q(z)+Q(w)) + (ℋ(z)+conj ℋ(w))/2} (φ(z) conj φ(w))^n S(z, w).
pub fn kernel_asymptotic<P: AdmissiblePotential + ?Sized>(
    pot: &P,
    n: usize,
    z: Complex64,
    w: Complex64,
    opts: &KernelOptions,
) -> Result<KernelAsymptotic> {
    let data = pot.unit_data();
    let cuts = SequenceCuts::new(n, opts.m_const)?;
    check_belt(data, &cuts, z)?;
    check_belt(data, &cuts, w)?;
    let (fz, fw) = (data.phi(z), data.phi(w));
    let gap = (fz * fw.conj() - 1.0).norm();
    if gap < opts.eta {
        return Err(Error::Regime(format!("|φ(z) conj φ(w) - 1| = {gap:.3e} below η = {}", opts.eta)));
    }
    let nf = n as f64;
    let (qz, qw) = (data.q_hol(z), data.q_hol(w));
    let (hz, hw) = (data.h_hol(z), data.h_hol(w));
    let expo = 0.5 * nf * (qz + qw.conj()) - 0.5 * nf * (pot.q(z) + pot.q(w)) + 0.5 * (hz + hw.conj());
    let value = LogComplex::new(0.5 * (2.0 * PI * nf).ln(), 0.0)
        .mul_exp(expo)
        .mul(LogComplex::from_complex(fz).mul(LogComplex::from_complex(fw).conj()).pow_int(n as i64))
        .mul(log_szego(data, z, w)?);
    let regime = if on_boundary(data, z) && on_boundary(data, w) { KernelRegime::Boundary } else { KernelRegime::ExteriorBelt };
    Ok(KernelAsymptotic { n, z, w, value, regime, beta_claimed: BETA_REPORTED })
}

/// c_n(z, w) = (φ(z) conj φ(w))^n e^{i(n/2) Im(𝒬(z)-𝒬(w))} e^{i Im(ℋ(z)-ℋ(w))/2}, z, w ∈ Γ.
pub fn cocycle<P: AdmissiblePotential + ?Sized>(pot: &P, n: usize, z: Complex64, w: Complex64) -> Result<LogComplex> {
    let data = pot.unit_data();
    for p in [z, w] {
        if !on_boundary(data, p) {
            return Err(Error::Domain(format!("cocycle needs boundary points; |φ({p})| = {}", data.phi(p).norm())));
        }
    }
    let nf = n as f64;
    let phase = |p: Complex64| nf * data.phi(p).arg() + 0.5 * nf * data.q_hol(p).im + 0.5 * data.h_hol(p).im;
    Ok(LogComplex::new(0.0, phase(z) - phase(w)))
}

/// √(2πn) ΔQ(z)^{1/4} ΔQ(w)^{1/4} |S(z, w)| for distinct z, w ∈ Γ.
pub fn boundary_correlation_modulus<P: AdmissiblePotential + ?Sized>(pot: &P, n: usize, z: Complex64, w: Complex64) -> Result<f64> {
    if (z - w).norm() == 0.0 {
        return Err(Error::Domain("boundary correlation needs z ≠ w".into()));
    }
    let s = crate::hardy::szego_kernel(pot, z, w)?.value.norm();
    Ok((2.0 * PI * n as f64).sqrt() * (pot.laplacian(z) * pot.laplacian(w)).powf(0.25) * s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeltDensity {
    pub p: BoundaryPoint,
    pub ell: f64,
    pub density: f64,
}

/// P_z(p) √(4nΔQ(p))/√(2π) e^{-2nΔQ(p)ℓ²}, per unit arclength and normal length.
pub fn berezin_belt_density<P: AdmissiblePotential + ?Sized>(
    pot: &P,
    n: usize,
    z: Complex64,
    p: BoundaryPoint,
    ell: f64,
    opts: &KernelOptions,
    allow_outside_belt: bool,
) -> Result<BeltDensity> {
    let cuts = SequenceCuts::new(n, opts.m_const)?;
    if !allow_outside_belt && ell.abs() > cuts.delta_n {
        return Err(Error::Regime(format!("|ℓ| = {} exceeds δ_n = {:.4}", ell.abs(), cuts.delta_n)));
    }
    let map = pot.unit_data().map;
    let pz = harmonic_measure_density_map(&map, z, p.p)?;
    let lap = pot.laplacian(p.p);
    let nf = n as f64;
    let density = pz * (4.0 * nf * lap).sqrt() / (2.0 * PI).sqrt() * (-2.0 * nf * lap * ell * ell).exp();
    Ok(BeltDensity { p, ell, density })
}

/// Mass of the Gaussian belt density over |ℓ| ≤ δ_n, by 2-D quadrature.
pub fn belt_mass<P: AdmissiblePotential + ?Sized>(pot: &P, n: usize, z: Complex64, opts: &KernelOptions, m: usize) -> Result<f64> {
    let cuts = SequenceCuts::new(n, opts.m_const)?;
    let map = pot.unit_data().map;
    let gl = quad_gauss_legendre(32).mapped(-cuts.delta_n, cuts.delta_n);
    let h = 2.0 * PI / m as f64;
    let rows = (0..m)
        .map(|k| {
            let th = k as f64 * h;
            let bp = BoundaryPoint { p: map.boundary(th), normal: map.normal(th), tau: 1.0 };
            let ds = map.speed(th) * h;
            let mut acc = 0.0;
            for (&l, &wl) in gl.nodes.iter().zip(&gl.weights) {
                acc += wl * berezin_belt_density(pot, n, z, bp, l, opts, false)?.density;
            }
            Ok(acc * ds)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum_real(&rows))
}

/// Precomputed τ-data for τ = j/n over a degree range.
pub struct TauFamily {
    pub n: usize,
    pub j_start: usize,
    data: Vec<TauData>,
}

impl TauFamily {
    pub fn new<P: AdmissiblePotential + ?Sized>(pot: &P, n: usize, j_start: usize, j_end: usize) -> Result<Self> {
        if j_start == 0 || j_end < j_start {
            return Err(Error::Domain(format!("empty or invalid degree range {j_start}..={j_end}")));
        }
        let data = (j_start..=j_end)
            .into_par_iter()
            .map(|j| if j == n { Ok(pot.unit_data().clone()) } else { pot.tau_data(j as f64 / n as f64) })
            .collect::<Result<Vec<_>>>()?;
        Ok(TauFamily { n, j_start, data })
    }

    pub fn get(&self, j: usize) -> Option<&TauData> {
        j.checked_sub(self.j_start).and_then(|i| self.data.get(i))
    }
}

fn quasi_from_data<P: AdmissiblePotential + ?Sized>(pot: &P, data: &TauData, n: usize, j: usize, z: Complex64, rho0: f64) -> Result<LogComplex> {
    data.check_depth(z, rho0)?;
    let nf = n as f64;
    let expo = 0.5 * data.h_hol(z) + 0.5 * nf * data.q_hol(z) - 0.5 * nf * pot.q(z);
    Ok(LogComplex::new(0.25 * (nf / (2.0 * PI)).ln(), 0.0)
        .mul_exp(expo)
        .mul(LogComplex::from_complex(data.sqrt_phi_prime(z)))
        .mul(LogComplex::from_complex(data.phi(z)).pow_int(j as i64)))
}

/// W♯_{j,n}(z) = (n/2π)^{1/4} e^{ℋ_τ/2} √φ_τ' φ_τ^j e^{n𝒬_τ/2} e^{-nQ/2}, τ = j/n.
pub fn quasipolynomial<P: AdmissiblePotential + ?Sized>(pot: &P, n: usize, j: usize, z: Complex64, opts: &KernelOptions) -> Result<LogComplex> {
    let tau = j as f64 / n as f64;
    if tau < opts.tau0 || j >= n {
        return Err(Error::Domain(format!("degree {j} gives τ = {tau:.4} outside [τ0, 1) with τ0 = {}", opts.tau0)));
    }
    let data = pot.tau_data(tau)?;
    quasi_from_data(pot, &data, n, j, z, opts.rho0)
}

/// Σ_{j=⌈nθ_n⌉}^{n-1} W♯_{j,n}(z) conj W♯_{j,n}(w).
///
/// At desk-scale n the cut θ_n can sit below τ0; the sum then runs down
/// to θ_n regardless.
pub fn tail_kernel<P: AdmissiblePotential + ?Sized>(pot: &P, n: usize, z: Complex64, w: Complex64, opts: &KernelOptions) -> Result<LogComplex> {
    let cuts = SequenceCuts::new(n, opts.m_const)?;
    let unit = pot.unit_data();
    check_belt(unit, &cuts, z)?;
    check_belt(unit, &cuts, w)?;
    let start = cuts.tail_start().max(1);
    let fam = TauFamily::new(pot, n, start, n - 1)?;
    tail_kernel_with(pot, &fam, z, w, opts)
}

pub fn tail_kernel_with<P: AdmissiblePotential + ?Sized>(pot: &P, fam: &TauFamily, z: Complex64, w: Complex64, opts: &KernelOptions) -> Result<LogComplex> {
    let n = fam.n;
    let terms = (fam.j_start..n)
        .map(|j| {
            let d = fam.get(j).expect("degree inside the family");
            let a = quasi_from_data(pot, d, n, j, z, opts.rho0)?;
            let b = quasi_from_data(pot, d, n, j, w, opts.rho0)?;
            Ok(a.mul(b.conj()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(lc_sum(&terms))
}

/// (φ(z) conj φ(w))^n / (φ(z) conj φ(w) - 1).
pub fn szego_sum_prediction<P: AdmissiblePotential + ?Sized>(pot: &P, n: usize, z: Complex64, w: Complex64) -> Result<LogComplex> {
    let data = pot.unit_data();
    let x = data.phi(z) * data.phi(w).conj();
    LogComplex::from_complex(x).pow_int(n as i64).div(LogComplex::from_complex(x - 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowDegreeReport {
    pub n: usize,
    pub z: Complex64,
    /// max_j |W_{j,n}(z)| e^{n(Q - Q̌)(z)/2} over j ≤ nθ_n, as a logarithm
    pub log_max: f64,
    pub argmax: usize,
}

fn is_ginibre<P: AdmissiblePotential + ?Sized>(pot: &P) -> bool {
    pot.is_radial() && pot.quadratic_form() == Some((1.0, 0.0))
}

/// Ginibre only: low-degree basis elements against the obstacle weight.
pub fn lowdeg_bound_check<P: AdmissiblePotential + ?Sized>(pot: &P, n: usize, z: Complex64, opts: &KernelOptions) -> Result<LowDegreeReport> {
    if !is_ginibre(pot) {
        return Err(Error::Domain("low-degree check needs closed-form basis elements (Ginibre)".into()));
    }
    let cuts = SequenceCuts::new(n, opts.m_const)?;
    check_belt(pot.unit_data(), &cuts, z)?;
    let r2 = z.norm_sqr();
    let obstacle = if r2 <= 1.0 { r2 } else { 1.0 + r2.ln() };
    let lift = 0.5 * n as f64 * (r2 - obstacle);
    let last = (n as f64 * cuts.theta_n).floor().max(0.0) as usize;
    let (argmax, log_max) = (0..=last)
        .map(|j| (j, ginibre_orthonormal(n, j, z).log_mag + lift))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    Ok(LowDegreeReport { n, z, log_max, argmax })
}

/// Holomorphic h on the exterior with Re h = -|φ'|²/(4ΔQ) on Γ, Im h(∞) = 0.
pub fn h_function<P: AdmissiblePotential + ?Sized>(pot: &P, z: Complex64) -> Result<Complex64> {
    let map = pot.unit_data().map;
    let ext = HarmonicExtension::fit(
        |t| {
            let p = map.boundary(t);
            let d = map.phi_prime(p).norm_sqr();
            -d / (4.0 * pot.laplacian(p))
        },
        pot.nodes(),
    )?;
    Ok(ext.eval(map.phi(z)))
}

/// F_τ(z) = (φ_τ(z)/φ(z)) e^{(𝒬_τ - 𝒬)(z)/(2τ)}.
pub fn f_tau<P: AdmissiblePotential + ?Sized>(pot: &P, tau: f64, z: Complex64) -> Result<Complex64> {
    let unit = pot.unit_data();
    let d = pot.tau_data(tau)?;
    Ok(d.phi(z) / unit.phi(z) * ((d.q_hol(z) - unit.q_hol(z)) / (2.0 * tau)).exp())
}

/// a_m(z, w) = (F_τ(z) conj F_τ(w))^m with τ = m/n.
pub fn a_coefficient<P: AdmissiblePotential + ?Sized>(pot: &P, n: usize, m: usize, z: Complex64, w: Complex64) -> Result<LogComplex> {
    let tau = m as f64 / n as f64;
    let x = f_tau(pot, tau, z)? * f_tau(pot, tau, w)?.conj();
    Ok(LogComplex::from_complex(x).pow_int(m as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::exterior_kernel_expansion;
    use crate::ginibre::ginibre_kernel_exact;
    use crate::potential::{boundary_point, make_elliptic_ginibre, make_ginibre, make_radial, radial_profile};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn opts() -> KernelOptions {
        KernelOptions::default()
    }

    #[test]
    fn cuts_definitions() {
        let s = SequenceCuts::new(400, 1.0).unwrap();
        assert!((s.theta_n - (1.0 - 400f64.ln() / 20.0)).abs() < 1e-15);
        assert!((s.delta_n - (400f64.ln().ln() / 400.0).sqrt()).abs() < 1e-15);
        assert!((s.eps_n - 400f64.ln() / 20.0).abs() < 1e-15);
        assert!(400.0 * s.theta_n < 400.0);
        assert!(SequenceCuts::new(2, 1.0).is_err());
        assert!(SequenceCuts::new(100, 0.0).is_err());
    }

    #[test]
    fn ginibre_specialization_is_exterior_leading_term() {
        let g = make_ginibre();
        for &(n, z, w) in &[(100usize, c(1.5, 0.0), c(1.2, 0.0)), (400, c(2.0, 1.0), c(1.0, 0.0)), (1600, c(1.1, 0.5), c(0.9, -0.8))] {
            let a = kernel_asymptotic(&g, n, z, w, &opts()).unwrap().value;
            let b = exterior_kernel_expansion(n, z, w, 0, 0.05).unwrap();
            assert!((a.log_mag - b.log_mag).abs() < 1e-12 * a.log_mag.abs().max(1.0));
            assert!(crate::numerics::logcomplex::normalize_arg(a.arg - b.arg).abs() < 1e-11);
        }
    }

    #[test]
    fn regime_errors() {
        let g = make_ginibre();
        assert!(matches!(kernel_asymptotic(&g, 100, c(0.3, 0.0), c(1.5, 0.0), &opts()), Err(Error::Regime(_))));
        assert!(matches!(kernel_asymptotic(&g, 100, c(1.01, 0.0), c(1.01, 0.0), &opts()), Err(Error::Regime(_))));
        let r = kernel_asymptotic(&g, 100, c(1.0, 0.0), c(0.0, 1.0), &opts()).unwrap();
        assert_eq!(r.regime, KernelRegime::Boundary);
        let r = kernel_asymptotic(&g, 100, c(1.3, 0.0), c(0.0, 1.0), &opts()).unwrap();
        assert_eq!(r.regime, KernelRegime::ExteriorBelt);
    }

    #[test]
    fn elliptic_boundary_modulus() {
        let e = make_elliptic_ginibre(1.0, 3.0).unwrap();
        let map = e.unit_data().map;
        let (p1, p2) = (map.boundary(0.4), map.boundary(2.0));
        let n = 50;
        let k = kernel_asymptotic(&e, n, p1, p2, &opts()).unwrap();
        let s = crate::hardy::szego_kernel(&e, p1, p2).unwrap().value.norm();
        let expect = (2.0 * PI * n as f64).sqrt() * 2f64.sqrt() * s;
        assert!((k.value.modulus() / expect - 1.0).abs() < 1e-9);
        assert!((boundary_correlation_modulus(&e, n, p1, p2).unwrap() / expect - 1.0).abs() < 1e-12);
        // cocycle-factored form agrees in full
        let cn = cocycle(&e, n, p1, p2).unwrap();
        let sz = LogComplex::from_complex(crate::hardy::szego_kernel(&e, p1, p2).unwrap().value);
        let factored = LogComplex::new((expect / s).ln(), 0.0).mul(sz).mul(cn);
        assert!(k.value.ratio_minus_one(factored).unwrap().norm() < 1e-9);
    }

    #[test]
    fn cocycle_examples() {
        let g = make_ginibre();
        let (a, b, v) = (0.7, -1.9, 2.4);
        let ca = Complex64::from_polar(1.0, a);
        let cb = Complex64::from_polar(1.0, b);
        let cv = Complex64::from_polar(1.0, v);
        let n = 37;
        let x = cocycle(&g, n, ca, cb).unwrap();
        assert!(crate::numerics::logcomplex::normalize_arg(x.arg - n as f64 * (a - b)).abs() < 1e-12);
        assert_eq!(cocycle(&g, n, ca, ca).unwrap(), LogComplex::ONE);
        let lhs = cocycle(&g, n, ca, cb).unwrap().mul(cocycle(&g, n, cb, cv).unwrap());
        let rhs = cocycle(&g, n, ca, cv).unwrap();
        assert!(crate::numerics::logcomplex::normalize_arg(lhs.arg - rhs.arg).abs() < 1e-12);
        assert!(cocycle(&g, n, c(1.1, 0.0), ca).is_err());
        let e = make_elliptic_ginibre(1.0, 3.0).unwrap();
        let m = e.unit_data().map;
        let (p, q, r) = (m.boundary(0.3), m.boundary(1.7), m.boundary(4.1));
        let l = cocycle(&e, 200, p, q).unwrap().mul(cocycle(&e, 200, q, r).unwrap());
        assert!(crate::numerics::logcomplex::normalize_arg(l.arg - cocycle(&e, 200, p, r).unwrap().arg).abs() < 1e-12);
        assert!(l.log_mag.abs() < 1e-10);
    }

    #[test]
    fn boundary_decay_limit() {
        let g = make_ginibre();
        let (z, w) = (c(1.0, 0.0), c(0.0, 1.0));
        let n = 1000;
        let m = boundary_correlation_modulus(&g, n, z, w).unwrap();
        let rz = crate::ginibre::ginibre_one_point(n, z);
        let b = m * m / rz;
        assert!((b * PI * (z - w).norm_sqr() - 1.0).abs() < 0.05);
        assert!(boundary_correlation_modulus(&g, n, z, z).is_err());
    }

    #[test]
    fn belt_density_reduces_to_disc_formula() {
        let g = make_ginibre();
        let z = c(2.0, 0.0);
        let n = 400;
        for th in [0.0, 1.2, 3.0] {
            let bp = boundary_point(&g, 1.0, th).unwrap();
            for ell in [0.0, 0.02, -0.04] {
                let d = berezin_belt_density(&g, n, z, bp, ell, &opts(), false).unwrap().density;
                let e = crate::expansion::berezin_gaussian_ginibre(n, z, th, ell).unwrap();
                assert!((d - e).abs() < 1e-12 * e);
            }
        }
        let bp = boundary_point(&g, 1.0, 0.0).unwrap();
        assert!(berezin_belt_density(&g, n, z, bp, 0.5, &opts(), false).is_err());
        assert!(berezin_belt_density(&g, n, z, bp, 0.5, &opts(), true).is_ok());
    }

    #[test]
    fn belt_mass_close_to_one() {
        for pot in [make_ginibre(), make_elliptic_ginibre(1.0, 3.0).unwrap(), make_radial(&radial_profile("r4").unwrap()).unwrap()] {
            let z = c(3.0, 0.5);
            let m = belt_mass(&pot, 400, z, &opts(), 512).unwrap();
            assert!(m <= 1.0 + 1e-9 && m > 0.95, "{}: {m}", pot.name());
        }
        let m = belt_mass(&make_ginibre(), 400, c(2.0, 0.0), &opts(), 512).unwrap();
        assert!((m - 1.0).abs() < 0.02);
    }

    #[test]
    fn quasipolynomial_tracks_exact_basis() {
        let g = make_ginibre();
        let n = 400;
        let o = opts();
        let cuts = SequenceCuts::new(n, 1.0).unwrap();
        let mut worst: f64 = 0.0;
        for j in [380usize, 390, 399] {
            for &r in &[1.0 - 0.5 * cuts.delta_n, 1.0, 1.0 + cuts.delta_n] {
                let z = c(r, 0.3 * r);
                let a = quasipolynomial(&g, n, j, z, &o).unwrap();
                let b = ginibre_orthonormal(n, j, z);
                worst = worst.max(b.ratio_minus_one(a).unwrap().norm());
            }
        }
        assert!(worst < 1e-3, "{worst}");
        assert!(quasipolynomial(&g, n, 100, c(1.0, 0.0), &o).is_err());
    }

    #[test]
    fn quasipolynomial_modulus_on_own_boundary() {
        let e = make_elliptic_ginibre(1.0, 3.0).unwrap();
        let (n, j) = (100usize, 90usize);
        let d = e.tau_data(0.9).unwrap();
        for th in [0.1, 1.4, 2.8] {
            let p = d.map.boundary(th);
            let v = quasipolynomial(&e, n, j, p, &opts()).unwrap();
            let expect = 0.25 * (n as f64 / (2.0 * PI)).ln() + 0.5 * d.sqrt_phi_prime(p).norm_sqr().ln() + 0.5 * 0.5 * e.laplacian(p).ln();
            assert!((v.log_mag - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn ginibre_quasipolynomial_norm() {
        // ‖W♯_{j,n}‖² over ℂ by radial quadrature
        let g = make_ginibre();
        let n = 400;
        let o = opts();
        let gl = crate::numerics::Quadrature1D::composite(0.7, 1.3, 60, 8);
        let j = 390;
        let v = gl.integrate(|r| {
            let x = quasipolynomial(&g, n, j, c(r, 0.0), &o).unwrap();
            (2.0 * x.log_mag).exp() * 2.0 * r
        });
        let eps = SequenceCuts::new(n, 1.0).unwrap().eps_n;
        assert!((v.sqrt() - 1.0).abs() < eps);
    }

    #[test]
    fn tail_kernel_matches_exact() {
        let g = make_ginibre();
        let z = c(1.3, 0.0);
        let t = tail_kernel(&g, 400, z, z, &opts()).unwrap();
        let k = ginibre_kernel_exact(400, z, z).value;
        assert!(t.ratio_minus_one(k).unwrap().norm() < 0.02);
        let w = c(1.1, 0.4);
        let a = tail_kernel(&g, 200, z, w, &opts()).unwrap();
        let b = tail_kernel(&g, 200, w, z, &opts()).unwrap();
        assert_eq!(a.log_mag, b.log_mag);
        assert_eq!(a.arg, -b.arg);
    }

    #[test]
    fn tail_kernel_vs_szego_sum() {
        let g = make_ginibre();
        let (z, w) = (c(1.2, 0.1), c(1.1, -0.2));
        let mut prev = f64::INFINITY;
        for n in [100usize, 400, 1600] {
            let t = tail_kernel(&g, n, z, w, &opts()).unwrap();
            let pred = kernel_asymptotic(&g, n, z, w, &opts()).unwrap().value;
            let err = t.ratio_minus_one(pred).unwrap().norm();
            assert!(err < prev);
            prev = err;
        }
        let s = szego_sum_prediction(&g, 100, z, w).unwrap();
        let zeta = z * w.conj();
        assert!(s.ratio_minus_one(LogComplex::from_complex(zeta).pow_int(100).div(LogComplex::from_complex(zeta - 1.0)).unwrap()).unwrap().norm() < 1e-13);
    }

    #[test]
    fn lowdeg_decay() {
        let g = make_ginibre();
        let z = c(1.2, 0.0);
        let a = lowdeg_bound_check(&g, 100, z, &opts()).unwrap();
        let b = lowdeg_bound_check(&g, 400, z, &opts()).unwrap();
        assert!(b.log_max - a.log_max < -(10f64.ln()));
        assert!(lowdeg_bound_check(&make_elliptic_ginibre(1.0, 3.0).unwrap(), 100, z, &opts()).is_err());
        let deep = lowdeg_bound_check(&g, 400, c(3.0, 0.0), &opts()).unwrap();
        assert!(deep.log_max.exp() == 0.0 || deep.log_max < -50.0);
    }

    #[test]
    fn h_function_examples() {
        let g = make_ginibre();
        assert!((h_function(&g, c(2.0, 1.0)).unwrap() - (-0.25)).norm() < 1e-14);
        let e = make_elliptic_ginibre(1.0, 3.0).unwrap();
        for z in [c(1.5, 0.0), c(0.0, 1.0), c(1e6, 0.0)] {
            assert!(h_function(&e, z).unwrap().re < 0.0);
        }
        assert!(h_function(&e, c(1e9, 0.0)).unwrap().im.abs() < 1e-12);
    }

    #[test]
    fn f_tau_properties() {
        let e = make_elliptic_ginibre(1.0, 3.0).unwrap();
        let z = c(1.7, 0.8);
        assert!((f_tau(&e, 1.0, z).unwrap() - 1.0).norm() < 1e-13);
        let far = f_tau(&e, 0.9, c(1e8, 0.0)).unwrap();
        assert!(far.re > 0.0 && far.im.abs() < 1e-9);
        let g = make_ginibre();
        let n = 400;
        let m = (n as f64 * SequenceCuts::new(n, 1.0).unwrap().theta_n).ceil() as usize;
        let a = a_coefficient(&g, n, m, c(1.1, 0.0), c(1.1, 0.0)).unwrap();
        let tau = m as f64 / n as f64;
        let expect = m as f64 * (-tau.ln() + 1.0 - 1.0 / tau);
        assert!((a.log_mag - expect).abs() < 1e-10);
        assert!(a.log_mag < -0.3 * (n as f64).ln().powi(2));
    }

    proptest! {
        #[test]
        fn determinant_cocycle_invariant(a in -3.0f64..3.0, b in -3.0f64..3.0, n in 20usize..200) {
            let g = make_ginibre();
            let (z, w) = (Complex64::from_polar(1.3, 0.4), Complex64::from_polar(1.5, 2.0));
            let o = opts();
            let k = |x, y| kernel_asymptotic(&g, n, x, y, &o).unwrap().value.to_complex();
            let det = (k(z, z) * k(w, w) - k(z, w) * k(w, z)).re;
            let (gz, gw) = (Complex64::from_polar(1.0, a), Complex64::from_polar(1.0, b));
            let kg = |x: Complex64, y: Complex64, gx: Complex64, gy: Complex64| k(x, y) * gx * gy.conj();
            let det2 = (kg(z, z, gz, gz) * kg(w, w, gw, gw) - kg(z, w, gz, gw) * kg(w, z, gw, gz)).re;
            prop_assert!((det - det2).abs() <= 1e-10 * det.abs().max(1e-300));
        }

        #[test]
        fn asymptotic_hermitian(r1 in 1.05f64..2.5, t1 in -3.1f64..3.1, r2 in 1.05f64..2.5, t2 in -3.1f64..3.1) {
            let e = make_elliptic_ginibre(1.0, 3.0).unwrap();
            let map = e.unit_data().map;
            let z = map.chi(Complex64::from_polar(r1, t1));
            let w = map.chi(Complex64::from_polar(r2, t2));
            let o = opts();
            let a = kernel_asymptotic(&e, 60, z, w, &o).unwrap().value;
            let b = kernel_asymptotic(&e, 60, w, z, &o).unwrap().value;
            prop_assert!((a.log_mag - b.log_mag).abs() <= 1e-13 * a.log_mag.abs().max(1.0));
            prop_assert!(crate::numerics::logcomplex::normalize_arg(a.arg + b.arg).abs() < 1e-12);
        }
    }
}
