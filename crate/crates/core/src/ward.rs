//! Cauchy transforms of Berezin measures and loop-equation residuals.

use std::f64::consts::PI;

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::ginibre::{ginibre_kernel_exact, log_ginibre_one_point};
use crate::hardy::harmonic_measure_integral;
use crate::numerics::ln_factorial;
use crate::numerics::logcomplex::{lc_sum, LogComplex};
use crate::numerics::quadrature::Quadrature1D;
use crate::numerics::sum::{pairwise_sum, pairwise_sum_real};
use crate::oracle::{kernel_oracle, OrthonormalBasis};
use crate::potential::{make_ginibre, AdmissiblePotential, Potential};

/// Radius of the z-centred disc carrying the singular part of 1/(z − w).
pub const CAUCHY_DISC: f64 = 0.1;
const GL_NODES: usize = 8;

static GINIBRE: Lazy<Potential> = Lazy::new(make_ginibre);

#[derive(Clone, Copy, Debug)]
pub enum KernelSource<'a> {
    Ginibre { n: usize },
    Oracle(&'a OrthonormalBasis),
}

impl KernelSource<'_> {
    pub fn n(&self) -> usize {
        match self {
            KernelSource::Ginibre { n } => *n,
            KernelSource::Oracle(b) => b.n,
        }
    }

    pub fn potential(&self) -> &Potential {
        match self {
            KernelSource::Ginibre { .. } => &GINIBRE,
            KernelSource::Oracle(b) => b.potential(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSource::Ginibre { .. } => "ginibre",
            KernelSource::Oracle(_) => "oracle",
        }
    }

    pub fn kernel(&self, z: Complex64, w: Complex64) -> Result<LogComplex> {
        match self {
            KernelSource::Ginibre { n } => Ok(ginibre_kernel_exact(*n, z, w).value),
            KernelSource::Oracle(b) => kernel_oracle(b, z, w),
        }
    }

    /// log R_n(z) = log K_n(z, z).
    pub fn log_one_point(&self, z: Complex64) -> Result<f64> {
        match self {
            KernelSource::Ginibre { n } => Ok(log_ginibre_one_point(*n, z)),
            KernelSource::Oracle(b) => Ok(kernel_oracle(b, z, z)?.log_mag),
        }
    }

    /// K_n(z, r e^{2πik/m}) for k < m.
    fn ring(&self, z: Complex64, r: f64, m: usize) -> Result<Vec<LogComplex>> {
        match self {
            KernelSource::Ginibre { n } => Ok(ginibre_ring(*n, z, r, m)),
            KernelSource::Oracle(b) => {
                let wz = b.weighted(z);
                (0..m)
                    .map(|k| {
                        let w = Complex64::from_polar(r, 2.0 * PI * k as f64 / m as f64);
                        let ww = b.weighted(w);
                        let terms: Vec<LogComplex> = wz.iter().zip(&ww).take(b.n).map(|(a, c)| a.mul(c.conj())).collect();
                        Ok(lc_sum(&terms))
                    })
                    .collect()
            }
        }
    }
}

/// Ginibre kernel on a ring by one FFT: K = n e^{-n(|z|²+r²)/2} Σ_j (n z r)^j/j! e^{-ijθ}.
pub(crate) fn ginibre_ring(n: usize, z: Complex64, r: f64, m: usize) -> Vec<LogComplex> {
    let nf = n as f64;
    let base = -0.5 * nf * (z.norm_sqr() + r * r) + nf.ln();
    let lzr = (nf * z.norm() * r).ln();
    let logs: Vec<f64> = (0..n).map(|j| if j == 0 { base } else { base + j as f64 * lzr - ln_factorial(j) }).collect();
    let top = if z.norm() == 0.0 { base } else { logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max) };
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    let arg = z.arg();
    for (j, l) in logs.iter().enumerate() {
        if z.norm() == 0.0 && j > 0 {
            break;
        }
        buf[j % m] += Complex64::from_polar((l - top).exp(), j as f64 * arg);
    }
    FftPlanner::<f64>::new().plan_fft_forward(m).process(&mut buf);
    buf.into_iter().map(|x| LogComplex::from_complex(x).mul(LogComplex::new(top, 0.0))).collect()
}

/// C^∞ cutoff: 1 at 0, 0 beyond ρ.
fn cutoff(s: f64, rho: f64) -> f64 {
    let t = s / rho;
    if t <= 0.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    1.0 - a / (a + b)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CauchyTransform {
    pub z: Complex64,
    /// μ_{n,z}(k_z) after normalization by the computed mass
    pub value: Complex64,
    /// ∫ B_n(z, w) dA(w) before normalization
    pub mass: f64,
}

/// ∫ B_n(z, w)/(z − w) dA(w) / ∫ B_n(z, w) dA(w).
///
/// A smooth partition of unity splits the integrand: the part near z is
/// integrated in polar coordinates about z, the rest on an origin-centred
/// polar grid. `refine` multiplies all node counts.
pub fn berezin_cauchy_transform(src: &KernelSource, z: Complex64, refine: usize) -> Result<CauchyTransform> {
    if refine == 0 {
        return Err(Error::Config("quadrature refinement must be positive".into()));
    }
    let n = src.n();
    let nf = n as f64;
    let sq = nf.sqrt();
    let rho = CAUCHY_DISC;
    let log_kzz = src.log_one_point(z)?;
    if !log_kzz.is_finite() {
        return Err(Error::Precision(format!("one-point function underflows at z={z}")));
    }
    let berezin = |k: LogComplex| if k.is_zero() { 0.0 } else { (2.0 * k.log_mag - log_kzz).exp() };

    // inner disc about z: w = z + s e^{iψ}, dA = s ds dψ/π, 1/(z − w) = −e^{−iψ}/s
    let inner_width = (rho / 4.0).min(0.5 / sq);
    let inner_rule = Quadrature1D::composite(0.0, rho, (rho / inner_width).ceil() as usize * refine, GL_NODES);
    let m_in = (64usize.max(16 * (rho * sq * 2.0 * PI).ceil() as usize)).div_ceil(4) * 4 * refine;
    let inner: Vec<(Complex64, f64)> = inner_rule
        .nodes
        .par_iter()
        .zip(inner_rule.weights.par_iter())
        .map(|(&s, &ws)| {
            let chi = cutoff(s, rho);
            let mut ks = Vec::with_capacity(m_in);
            let mut ones = Vec::with_capacity(m_in);
            for k in 0..m_in {
                let psi = 2.0 * PI * k as f64 / m_in as f64;
                let e = Complex64::from_polar(1.0, psi);
                let b = berezin(src.kernel(z, z + s * e)?);
                let wgt = ws * chi * b * (2.0 / m_in as f64);
                ks.push(-wgt * e.conj());
                ones.push(wgt * s);
            }
            Ok((pairwise_sum(&ks), pairwise_sum_real(&ones)))
        })
        .collect::<Result<Vec<_>>>()?;

    // origin-centred grid for (1 − χ) B
    let r_max = src.potential().unit_data().map.outer_radius() + 12.0 / sq;
    let outer_width = (0.5 / sq).min(rho / 4.0);
    let outer_rule = Quadrature1D::composite(0.0, r_max, (r_max / outer_width).ceil() as usize * refine, GL_NODES);
    let arc = (0.125 / sq).min(rho / 16.0);
    let outer: Vec<(Complex64, f64)> = outer_rule
        .nodes
        .par_iter()
        .zip(outer_rule.weights.par_iter())
        .map(|(&r, &wr)| {
            let m = (64usize.max((2.0 * PI * r / arc).ceil() as usize)).div_ceil(4) * 4 * refine;
            let ks = src.ring(z, r, m)?;
            let mut acc_k = Vec::with_capacity(m);
            let mut acc_1 = Vec::with_capacity(m);
            for (k, kv) in ks.into_iter().enumerate() {
                let w = Complex64::from_polar(r, 2.0 * PI * k as f64 / m as f64);
                let d = z - w;
                let chi = cutoff(d.norm(), rho);
                if chi >= 1.0 {
                    continue;
                }
                let wgt = wr * r * (2.0 / m as f64) * (1.0 - chi) * berezin(kv);
                acc_k.push(wgt / d);
                acc_1.push(wgt);
            }
            Ok((pairwise_sum(&acc_k), pairwise_sum_real(&acc_1)))
        })
        .collect::<Result<Vec<_>>>()?;

    let ik = pairwise_sum(&inner.iter().chain(&outer).map(|x| x.0).collect::<Vec<_>>());
    let i1 = pairwise_sum_real(&inner.iter().chain(&outer).map(|x| x.1).collect::<Vec<_>>());
    if !(i1 > 0.0) {
        return Err(Error::Resolution(format!("Berezin measure at z={z} has no mass on the grid")));
    }
    Ok(CauchyTransform { z, value: ik / i1, mass: i1 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopResidual {
    pub n: usize,
    pub z: Complex64,
    /// ∂̄_z μ_{n,z}(k_z)
    pub lhs: Complex64,
    /// R_n − nΔQ − Δ log R_n
    pub rhs: f64,
    pub residual: Complex64,
    pub fd_step: f64,
    pub quad_refine: usize,
    /// finite-difference error estimate (step halving)
    pub fd_error: f64,
    /// quadrature error estimate (node doubling)
    pub quad_error: f64,
    pub budget: f64,
}

impl LoopResidual {
    pub fn within_budget(&self) -> bool {
        self.residual.norm() <= self.budget
    }
}

/// Default step: 0.1/n within 3/√n of the boundary, 0.01/√n elsewhere.
pub fn default_fd_step(pot: &Potential, n: usize, z: Complex64) -> f64 {
    let nf = n as f64;
    let dist = pot.unit_data().map.signed_distance(z).abs();
    if dist < 3.0 / nf.sqrt() {
        0.1 / nf
    } else {
        0.01 / nf.sqrt()
    }
}

fn dbar(src: &KernelSource, z: Complex64, h: f64, refine: usize) -> Result<Complex64> {
    let shifts = [Complex64::new(h, 0.0), Complex64::new(-h, 0.0), Complex64::new(0.0, h), Complex64::new(0.0, -h)];
    let mu: Vec<Complex64> = shifts
        .iter()
        .map(|s| berezin_cauchy_transform(src, z + s, refine).map(|c| c.value))
        .collect::<Result<Vec<_>>>()?;
    let dx = (mu[0] - mu[1]) / (2.0 * h);
    let dy = (mu[2] - mu[3]) / (2.0 * h);
    Ok(0.5 * (dx + Complex64::new(0.0, 1.0) * dy))
}

/// Δ log R_n with Δ = ∂∂̄, by the five-point stencil.
pub fn laplacian_log_one_point(src: &KernelSource, z: Complex64, h: f64) -> Result<f64> {
    let pts = [
        z,
        z + Complex64::new(h, 0.0),
        z - Complex64::new(h, 0.0),
        z + Complex64::new(0.0, h),
        z - Complex64::new(0.0, h),
    ];
    let v: Vec<f64> = pts.iter().map(|&p| src.log_one_point(p)).collect::<Result<Vec<_>>>()?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Precision(format!("R_n underflows on the stencil around z={z}")));
    }
    Ok(0.25 * (v[1] + v[2] + v[3] + v[4] - 4.0 * v[0]) / (h * h))
}

fn rhs(src: &KernelSource, z: Complex64, h: f64) -> Result<f64> {
    let n = src.n() as f64;
    let log_r = src.log_one_point(z)?;
    Ok(log_r.exp() - n * src.potential().laplacian(z) - laplacian_log_one_point(src, z, h)?)
}

pub fn loop_residual(src: &KernelSource, z: Complex64, fd_step: Option<f64>, refine: usize) -> Result<LoopResidual> {
    let n = src.n();
    let h = fd_step.unwrap_or_else(|| default_fd_step(src.potential(), n, z));
    if !(h > 0.0) {
        return Err(Error::Config(format!("finite-difference step must be positive, got {h}")));
    }
    let lhs_h = dbar(src, z, h, refine)?;
    let lhs = dbar(src, z, 0.5 * h, refine)?;
    let lhs_fine = dbar(src, z, 0.5 * h, 2 * refine)?;
    let rhs_h = rhs(src, z, h)?;
    let rhs_half = rhs(src, z, 0.5 * h)?;
    let log_r = src.log_one_point(z)?.abs();
    let hh = 0.5 * h;
    let roundoff = 1e-14 * (log_r + 1.0) / (hh * hh) + 1e-13 * (lhs.norm() + 1.0) / hh;
    let fd_error = (lhs - lhs_h).norm() + (rhs_half - rhs_h).abs();
    let quad_error = (lhs_fine - lhs).norm();
    Ok(LoopResidual {
        n,
        z,
        lhs,
        rhs: rhs_half,
        residual: lhs - rhs_half,
        fd_step: hh,
        quad_refine: refine,
        fd_error,
        quad_error,
        budget: fd_error + quad_error + roundoff,
    })
}

/// z̄/(|z|²−1) − (1/n) z̄(|z|²+1)/(|z|²−1)³ for the Ginibre ensemble.
pub fn exterior_cauchy_two_term(n: usize, z: Complex64) -> Result<Complex64> {
    let s = z.norm_sqr();
    if s <= 1.0 {
        return Err(Error::Domain(format!("two-term Cauchy transform needs |z| > 1, got |z|={}", s.sqrt())));
    }
    let (lead, second) = exterior_cauchy_coefficients(z);
    Ok(lead + second / n as f64)
}

/// Leading and 1/n coefficients of the Ginibre Cauchy transform.
pub fn exterior_cauchy_coefficients(z: Complex64) -> (Complex64, Complex64) {
    let s = z.norm_sqr();
    let d = s - 1.0;
    (z.conj() / d, -z.conj() * (s + 1.0) / (d * d * d))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicLimit {
    pub z: Complex64,
    /// ω_z(k_z) by boundary quadrature
    pub omega: Complex64,
    /// ∂_z log(|φ(z)|² − 1)
    pub analytic: Complex64,
    /// omega − analytic
    pub h: Complex64,
}

pub fn harmonic_limit_check<P: AdmissiblePotential + ?Sized>(pot: &P, z: Complex64, m: usize) -> Result<HarmonicLimit> {
    let map = pot.unit_data().map;
    if map.contains(z) {
        return Err(Error::Domain(format!("z={z} is not exterior to the droplet")));
    }
    let omega = harmonic_measure_integral(pot, z, m, |p| 1.0 / (z - p))?;
    let f = map.phi(z);
    let analytic = map.phi_prime(z) * f.conj() / (f.norm_sqr() - 1.0);
    Ok(HarmonicLimit { z, omega, analytic, h: omega - analytic })
}

/// Least-squares slope of log max|H| against log|z| over rings.
pub fn harmonic_remainder_decay<P: AdmissiblePotential + ?Sized>(pot: &P, radii: &[f64], angles: usize, m: usize) -> Result<f64> {
    if radii.len() < 2 {
        return Err(Error::Config("decay fit needs at least two radii".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &r in radii {
        let mut worst: f64 = 0.0;
        for k in 0..angles {
            let z = Complex64::from_polar(r, 2.0 * PI * (k as f64 + 0.5) / angles as f64);
            worst = worst.max(harmonic_limit_check(pot, z, m)?.h.norm());
        }
        xs.push(r.ln());
        ys.push(worst.ln());
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{build_basis, GridSpec, PrecisionMode};
    use crate::potential::{make_elliptic_ginibre, make_radial, radial_profile};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ring_fft_matches_pointwise_kernel() {
        let n = 30;
        let z = c(1.4, 0.3);
        let vals = ginibre_ring(n, z, 0.9, 16);
        for (k, v) in vals.iter().enumerate() {
            let w = Complex64::from_polar(0.9, 2.0 * PI * k as f64 / 16.0);
            let want = ginibre_kernel_exact(n, z, w).value;
            assert!(v.ratio_minus_one(want).unwrap().norm() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn berezin_mass_is_one() {
        for z in [c(0.5, 0.0), c(1.0, 0.0), c(2.0, 0.0)] {
            let ct = berezin_cauchy_transform(&KernelSource::Ginibre { n: 50 }, z, 1).unwrap();
            assert!((ct.mass - 1.0).abs() < 1e-8, "z={z} mass={}", ct.mass);
        }
    }

    #[test]
    fn transform_decays_like_one_over_z() {
        let z = c(12.0, 5.0);
        let ct = berezin_cauchy_transform(&KernelSource::Ginibre { n: 30 }, z, 1).unwrap();
        // the harmonic measure from z has mean 1/z̄, so z μ = 1 + O(|z|^{-2})
        assert!((z * ct.value - 1.0).norm() < 2.0 / z.norm_sqr());
    }

    #[test]
    fn two_term_formula() {
        let (lead, second) = exterior_cauchy_coefficients(c(2.0, 0.0));
        assert!((lead.re - 2.0 / 3.0).abs() < 1e-15 && lead.im == 0.0);
        assert!((second.re + 10.0 / 27.0).abs() < 1e-15);
        let z = c(1.7, -0.8);
        assert!((exterior_cauchy_two_term(50, z.conj()).unwrap() - exterior_cauchy_two_term(50, z).unwrap().conj()).norm() < 1e-15);
        let far = c(1e4, 3e3);
        assert!((far * exterior_cauchy_two_term(50, far).unwrap() - 1.0).norm() < 1e-7);
        assert!(matches!(exterior_cauchy_two_term(50, c(0.6, 0.8)), Err(Error::Domain(_))));
    }

    #[test]
    fn ginibre_transform_converges_to_two_terms() {
        let z = c(2.0, 0.0);
        let (lead, second) = exterior_cauchy_coefficients(z);
        let mut errs = Vec::new();
        for n in [100, 200] {
            let mu = berezin_cauchy_transform(&KernelSource::Ginibre { n }, z, 1).unwrap().value;
            let scaled = (mu - lead) * n as f64;
            errs.push((scaled - second).norm());
        }
        assert!(errs[1] < errs[0] && errs[1] < 0.1 * second.norm(), "{errs:?}");
    }

    #[test]
    fn loop_equation_ginibre() {
        let src = KernelSource::Ginibre { n: 50 };
        for z in [c(0.5, 0.0), c(1.5, 0.0)] {
            let lr = loop_residual(&src, z, None, 1).unwrap();
            assert!(lr.within_budget(), "{lr:?}");
            assert!(lr.residual.norm() <= 1e-3 * 50.0, "{lr:?}");
        }
    }

    #[test]
    fn bulk_log_density_is_flat() {
        // R_n ≈ n in the bulk to exponential accuracy, so Δ log R_n is tiny
        let src = KernelSource::Ginibre { n: 100 };
        let d = laplacian_log_one_point(&src, c(0.3, 0.0), 0.001).unwrap();
        assert!(d.abs() < 1e-3 * 100.0, "{d}");
    }

    #[test]
    fn harmonic_limit_ginibre_has_no_remainder() {
        let pot = make_ginibre();
        for z in [c(2.0, 0.0), c(-1.3, 1.1), c(0.2, 3.0)] {
            let hl = harmonic_limit_check(&pot, z, 512).unwrap();
            assert!(hl.h.norm() < 1e-12, "{hl:?}");
            let (lead, _) = exterior_cauchy_coefficients(z);
            assert!((hl.analytic - lead).norm() < 1e-14);
        }
        assert!(matches!(harmonic_limit_check(&pot, c(0.5, 0.0), 512), Err(Error::Domain(_))));
    }

    #[test]
    fn harmonic_limit_radial_has_no_remainder() {
        let pot = make_radial(&radial_profile("r2+r4").unwrap()).unwrap();
        let hl = harmonic_limit_check(&pot, c(1.8, -0.9), 512).unwrap();
        assert!(hl.h.norm() < 1e-12);
    }

    #[test]
    fn elliptic_remainder_decays() {
        let pot = make_elliptic_ginibre(1.0, 3.0).unwrap();
        let hl = harmonic_limit_check(&pot, c(3.0, 0.0), 1024).unwrap();
        assert!(hl.h.norm().is_finite() && hl.h.norm() > 1e-8);
        let slope = harmonic_remainder_decay(&pot, &[5.0, 10.0], 16, 1024).unwrap();
        assert!(slope < -1.5, "{slope}");
    }

    #[test]
    fn oracle_source_matches_ginibre_source() {
        let n = 20;
        let basis = build_basis(&make_ginibre(), n, n - 1, &GridSpec::default(), PrecisionMode::Native).unwrap();
        let z = c(1.6, 0.4);
        let a = berezin_cauchy_transform(&KernelSource::Oracle(&basis), z, 1).unwrap().value;
        let b = berezin_cauchy_transform(&KernelSource::Ginibre { n }, z, 1).unwrap().value;
        assert!((a - b).norm() < 1e-9 * b.norm());
    }

    #[test]
    fn elliptic_transform_approaches_harmonic_limit() {
        let pot = make_elliptic_ginibre(1.0, 3.0).unwrap();
        let z = c(1.6, 0.5);
        let target = harmonic_limit_check(&pot, z, 1024).unwrap().omega;
        let mut errs = Vec::new();
        for n in [10, 30] {
            let basis = build_basis(&pot, n, n - 1, &GridSpec::default(), PrecisionMode::Extended).unwrap();
            let mu = berezin_cauchy_transform(&KernelSource::Oracle(&basis), z, 1).unwrap().value;
            errs.push((mu - target).norm());
        }
        assert!(errs[1] < errs[0], "{errs:?}");
    }
}
