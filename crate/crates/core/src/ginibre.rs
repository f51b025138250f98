//! Exact Ginibre kernel: partial exponential sums, one-point function and
//! Berezin kernel, all in log-polar form.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::logcomplex::{lc_sum, LogComplex};
use crate::numerics::quadrature::{quad_trapezoid_periodic, Quadrature1D};
use crate::numerics::sum::{pairwise_sum_real, ComplexAccumulator};
use crate::numerics::{ln_factorial, ln_gamma};

const NEGLIGIBLE: f64 = 1e-22;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GinibreKernelValue {
    pub n: usize,
    pub z: Complex64,
    pub w: Complex64,
    pub value: LogComplex,
}

/// Σ_{k=lo}^{hi} x^k / k!  (hi = None: to infinity), anchored at the largest term.
fn poisson_block(x: Complex64, lo: usize, hi: Option<usize>) -> LogComplex {
    let r = x.norm();
    if r == 0.0 {
        return if lo == 0 { LogComplex::ONE } else { LogComplex::ZERO };
    }
    if let Some(h) = hi {
        if h < lo {
            return LogComplex::ZERO;
        }
    }
    let peak = r.floor() as usize;
    let mut anchor = peak.max(lo);
    if let Some(h) = hi {
        anchor = anchor.min(h);
    }
    let anchor_log = LogComplex::new(anchor as f64 * r.ln() - ln_factorial(anchor), anchor as f64 * x.arg());

    let mut acc = ComplexAccumulator::default();
    acc.add(Complex64::new(1.0, 0.0));
    // upward: t_{k+1} = t_k x / (k+1)
    let mut t = Complex64::new(1.0, 0.0);
    let mut k = anchor;
    loop {
        if hi.is_some_and(|h| k >= h) {
            break;
        }
        k += 1;
        t *= x / k as f64;
        acc.add(t);
        if (k as f64) > r && t.norm() < NEGLIGIBLE {
            break;
        }
    }
    // downward: t_{k-1} = t_k k / x
    let mut t = Complex64::new(1.0, 0.0);
    let mut k = anchor;
    while k > lo {
        t *= k as f64 / x;
        k -= 1;
        acc.add(t);
        if t.norm() < NEGLIGIBLE {
            break;
        }
    }
    anchor_log.mul(LogComplex::from_complex(acc.value()))
}

/// E_n(ζ) = e^{-nζ} Σ_{k<n} (nζ)^k / k!.
///
/// Inside the unit disc the complementary tail is summed instead, since
/// there the terms of the finite sum cancel.
pub fn partial_exp_sum(n: usize, zeta: Complex64) -> LogComplex {
    assert!(n >= 1, "n must be positive");
    let x = zeta * n as f64;
    if zeta.norm() < 1.0 {
        let tail = exp_sum_tail_inner(n, x);
        lc_sum(&[LogComplex::ONE, tail.neg()])
    } else {
        poisson_block(x, 0, Some(n - 1)).mul_exp(-x)
    }
}

fn exp_sum_tail_inner(n: usize, x: Complex64) -> LogComplex {
    poisson_block(x, n, None).mul_exp(-x)
}

/// 1 - E_n(ζ), accurate also when it is far below machine epsilon
/// relative to 1 (the bulk regime).
pub fn exp_sum_tail(n: usize, zeta: Complex64) -> LogComplex {
    assert!(n >= 1);
    if zeta.norm() < 1.0 {
        exp_sum_tail_inner(n, zeta * n as f64)
    } else {
        lc_sum(&[LogComplex::ONE, partial_exp_sum(n, zeta).neg()])
    }
}

/// E_n(ζ) via Γ(n, nζ)/(n-1)!, with Γ(a, x) from the Legendre continued
/// fraction (modified Lentz). Only offered for Re ζ > 1.
pub fn incomplete_gamma_route(n: usize, zeta: Complex64) -> Result<LogComplex> {
    if zeta.re <= 1.0 {
        return Err(Error::Domain(format!("continued fraction route needs Re ζ > 1, got {zeta}")));
    }
    let a = n as f64;
    let x = zeta * a;
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut converged = false;
    for i in 1..100_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = d * an + b;
        if d.norm() < tiny {
            d = Complex64::new(tiny, 0.0);
        }
        c = b + an / c;
        if c.norm() < tiny {
            c = Complex64::new(tiny, 0.0);
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Tolerance(format!("continued fraction did not converge at n={n}, ζ={zeta}")));
    }
    let lx = Complex64::new(x.norm().ln(), x.arg());
    let log_pref = -x + lx * a - ln_gamma(a);
    Ok(LogComplex::exp(log_pref).mul(LogComplex::from_complex(h)))
}

/// Direct sum plus the continued-fraction value and their relative gap when available.
pub fn partial_exp_sum_checked(n: usize, zeta: Complex64) -> (LogComplex, Option<f64>) {
    let direct = partial_exp_sum(n, zeta);
    let gap = incomplete_gamma_route(n, zeta)
        .ok()
        .and_then(|cf| cf.ratio_minus_one(direct).ok())
        .map(|d| d.norm());
    (direct, gap)
}

fn kernel_exponent(n: usize, z: Complex64, w: Complex64) -> Complex64 {
    let nf = n as f64;
    z * w.conj() * nf - 0.5 * nf * (z.norm_sqr() + w.norm_sqr())
}

pub fn ginibre_kernel_exact(n: usize, z: Complex64, w: Complex64) -> GinibreKernelValue {
    let zeta = z * w.conj();
    let value = partial_exp_sum(n, zeta)
        .mul(LogComplex::from_real(n as f64))
        .mul_exp(kernel_exponent(n, z, w));
    GinibreKernelValue { n, z, w, value }
}

/// (K_exact - K_bulk) / K_bulk = -(1 - E_n(zw̄)), without cancellation.
pub fn ginibre_bulk_deviation(n: usize, z: Complex64, w: Complex64) -> LogComplex {
    exp_sum_tail(n, z * w.conj()).neg()
}

/// R_n(z) = K_n(z, z).
pub fn ginibre_one_point(n: usize, z: Complex64) -> f64 {
    ginibre_kernel_exact(n, z, z).value.modulus()
}

pub fn log_ginibre_one_point(n: usize, z: Complex64) -> f64 {
    ginibre_kernel_exact(n, z, z).value.log_mag
}

pub fn log_ginibre_berezin(n: usize, z: Complex64, w: Complex64) -> f64 {
    let k = ginibre_kernel_exact(n, z, w).value;
    if k.is_zero() {
        return f64::NEG_INFINITY;
    }
    2.0 * k.log_mag - log_ginibre_one_point(n, z)
}

/// B_n(z, w) = |K_n(z, w)|^2 / K_n(z, z).
pub fn ginibre_berezin(n: usize, z: Complex64, w: Complex64) -> f64 {
    log_ginibre_berezin(n, z, w).exp()
}

/// Orthonormal basis element √(n^{j+1}/j!) z^j e^{-n|z|²/2}.
pub fn ginibre_orthonormal(n: usize, j: usize, z: Complex64) -> LogComplex {
    let nf = n as f64;
    let norm = 0.5 * ((j as f64 + 1.0) * nf.ln() - ln_factorial(j));
    LogComplex::from_complex(z).pow_int(j as i64).mul(LogComplex::new(norm - 0.5 * nf * z.norm_sqr(), 0.0))
}

/// ∫ B_n(z, w) dA(w) by polar quadrature about the origin, radial extent 1 + 10/√n.
pub fn berezin_mass(n: usize, z: Complex64, angular: usize) -> f64 {
    let r_max = 1.0 + 10.0 / (n as f64).sqrt();
    let width = (0.25 / (n as f64).sqrt()).min(0.05);
    let panels = (r_max / width).ceil() as usize;
    let radial = Quadrature1D::composite(0.0, r_max, panels, 8);
    let ang = quad_trapezoid_periodic(angular);
    let log_rz = log_ginibre_one_point(n, z);
    let rows: Vec<f64> = radial
        .nodes
        .par_iter()
        .zip(radial.weights.par_iter())
        .map(|(&r, &wr)| {
            let vals: Vec<f64> = ang
                .nodes
                .iter()
                .zip(&ang.weights)
                .map(|(&t, &wt)| {
                    let w = Complex64::from_polar(r, t);
                    let k = ginibre_kernel_exact(n, z, w).value;
                    wt * (2.0 * k.log_mag - log_rz).exp()
                })
                .collect();
            wr * r * pairwise_sum_real(&vals)
        })
        .collect();
    pairwise_sum_real(&rows) / std::f64::consts::PI
}
