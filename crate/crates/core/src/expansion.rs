//! Asymptotic series for the Ginibre kernel: Stirling coefficients,
//! Tricomi polynomials, the correction terms ρ_j, the exterior and bulk
//! expansions, and the Gaussian approximation of the Berezin measure.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use once_cell::sync::Lazy;

use crate::error::{Error, Result};
use crate::geometry::{classify, u_map, Region, DEFAULT_TOL};
use crate::numerics::logcomplex::LogComplex;
use crate::numerics::poly::{poly_derivative, rational_eval, PolynomialQ, RationalAtOne};

pub const DEFAULT_ETA: f64 = 0.05;
/// Largest correction index kept in the shared table.
pub const TABLE_TERMS: usize = 6;

fn int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// b_0 = 1, b_j = ζ(1-ζ) b'_{j-1} + (2j-1) ζ b_{j-1}.
pub fn tricomi_b(j: usize) -> PolynomialQ {
    let mut b = PolynomialQ::from_ints(&[1]);
    let zeta = PolynomialQ::from_ints(&[0, 1]);
    let z1mz = PolynomialQ::from_ints(&[0, 1, -1]);
    for k in 1..=j {
        let next = z1mz.mul(&poly_derivative(&b)).add(&zeta.mul(&b).scale(&int(2 * k as i64 - 1)));
        b = next;
    }
    b
}

/// Bernoulli numbers B_0..=B_m (B_1 = -1/2 convention).
pub fn bernoulli(m: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(m + 1);
    b.push(BigRational::one());
    for k in 1..=m {
        let mut s = BigRational::zero();
        for (i, bi) in b.iter().enumerate() {
            s += BigRational::from_integer(binomial(BigInt::from(k + 1), BigInt::from(i))) * bi;
        }
        b.push(-s / int(k as i64 + 1));
    }
    b
}

/// Coefficients of n^n e^{-n}/(n-1)! = √(n/2π) Σ_k coeffs[k] n^{-k}.
#[derive(Clone, Debug, PartialEq)]
pub struct StirlingSeries {
    pub coeffs: Vec<BigRational>,
}

pub fn stirling_series(k_max: usize) -> Result<StirlingSeries> {
    if k_max > TABLE_TERMS {
        return Err(Error::Config(format!("Stirling series supported up to order {TABLE_TERMS}")));
    }
    // log of the series: g(x) = -Σ_m B_{2m} / (2m(2m-1)) x^{2m-1}
    let bern = bernoulli(2 * k_max + 2);
    let mut g = vec![BigRational::zero(); k_max + 1];
    for m in 1.. {
        let p = 2 * m - 1;
        if p > k_max {
            break;
        }
        g[p] = -bern[2 * m].clone() / int((2 * m * (2 * m - 1)) as i64);
    }
    // exponentiate: k f_k = Σ_{i=1}^k i g_i f_{k-i}
    let mut f = vec![BigRational::one()];
    for k in 1..=k_max {
        let mut s = BigRational::zero();
        for i in 1..=k {
            s += int(i as i64) * &g[i] * &f[k - i];
        }
        f.push(s / int(k as i64));
    }
    Ok(StirlingSeries { coeffs: f })
}

/// ρ_j = Σ_{i=0}^{j} s_{j-i} (-1)^i b_i(ζ) / (ζ-1)^{2i}.
pub fn rho(j: usize) -> Result<RationalAtOne> {
    if j == 0 {
        return Err(Error::Domain("correction terms start at j = 1".into()));
    }
    let st = stirling_series(j)?;
    let d = PolynomialQ::zeta_minus_one();
    let mut num = PolynomialQ::zero();
    for i in 0..=j {
        let sign = if i % 2 == 0 { int(1) } else { int(-1) };
        let term = tricomi_b(i).mul(&d.pow(2 * (j - i))).scale(&(sign * &st.coeffs[j - i]));
        num = num.add(&term);
    }
    Ok(RationalAtOne::new(num, 2 * j))
}

#[derive(Clone, Debug)]
pub struct CorrectionTable {
    /// rho[j - 1] = ρ_j
    pub rho: Vec<RationalAtOne>,
}

impl CorrectionTable {
    pub fn new(k_max: usize) -> Result<Self> {
        Ok(CorrectionTable { rho: (1..=k_max).map(rho).collect::<Result<_>>()? })
    }

    /// 1 + Σ_{j=1}^{k} ρ_j(ζ)/n^j
    pub fn bracket(&self, n: usize, zeta: Complex64, k: usize) -> Result<Complex64> {
        if k > self.rho.len() {
            return Err(Error::Config(format!("only {} correction terms tabulated", self.rho.len())));
        }
        let mut s = Complex64::new(1.0, 0.0);
        let mut p = 1.0;
        for r in &self.rho[..k] {
            p /= n as f64;
            s += rational_eval(r, zeta)? * p;
        }
        Ok(s)
    }
}

static TABLE: Lazy<CorrectionTable> = Lazy::new(|| CorrectionTable::new(TABLE_TERMS).expect("table builds"));

pub fn correction_table() -> &'static CorrectionTable {
    &TABLE
}

/// Truncated exterior expansion of K_n(z, w) with k correction terms.
pub fn exterior_kernel_expansion(n: usize, z: Complex64, w: Complex64, k: usize, eta: f64) -> Result<LogComplex> {
    let zeta = z * w.conj();
    let label = classify(zeta, DEFAULT_TOL);
    if !label.in_e_sz {
        return Err(Error::Regime(format!(
            "exterior expansion needs zw̄ in the exterior Szegő domain; ζ = {zeta} is {}",
            label.region.name()
        )));
    }
    if (zeta - 1.0).norm() < eta {
        return Err(Error::Regime(format!("ζ = {zeta} within η = {eta} of 1")));
    }
    let nf = n as f64;
    let pref = LogComplex::new(0.5 * (nf / (2.0 * PI)).ln(), 0.0)
        .mul(LogComplex::from_complex(zeta).pow_int(n as i64))
        .div(LogComplex::from_complex(zeta - 1.0))?
        .mul_exp(Complex64::new(nf - 0.5 * nf * (z.norm_sqr() + w.norm_sqr()), 0.0));
    let bracket = correction_table().bracket(n, zeta, k)?;
    Ok(pref.mul(LogComplex::from_complex(bracket)))
}

#[derive(Clone, Copy, Debug)]
pub struct BulkExpansion {
    pub value: LogComplex,
    /// ρ^n / (√n |ζ - 1|), ρ = |u(zw̄)|
    pub bound: f64,
}

pub fn bulk_kernel_expansion(n: usize, z: Complex64, w: Complex64, eta: f64) -> Result<BulkExpansion> {
    let zeta = z * w.conj();
    let label = classify(zeta, DEFAULT_TOL);
    if !matches!(label.region, Region::RegionI | Region::OnSzegoCurve) {
        return Err(Error::Regime(format!("bulk expansion needs zw̄ inside the Szegő curve; ζ = {zeta} is {}", label.region.name())));
    }
    if (zeta - 1.0).norm() < eta {
        return Err(Error::Regime(format!("ζ = {zeta} within η = {eta} of 1")));
    }
    let nf = n as f64;
    let value = LogComplex::from_real(nf).mul_exp(zeta * nf - 0.5 * nf * (z.norm_sqr() + w.norm_sqr()));
    let rho = u_map(zeta).norm();
    let bound = (nf * rho.ln() - 0.5 * nf.ln()).exp() / (zeta - 1.0).norm();
    Ok(BulkExpansion { value, bound })
}

/// Exterior Poisson kernel of the unit disc, density in θ.
pub fn poisson_disc(z: Complex64, theta: f64) -> Result<f64> {
    let r2 = z.norm_sqr();
    if r2 <= 1.0 {
        return Err(Error::Domain(format!("Poisson kernel needs |z| > 1, got |z| = {}", r2.sqrt())));
    }
    Ok((r2 - 1.0) / (2.0 * PI * (z - Complex64::from_polar(1.0, theta)).norm_sqr()))
}

/// P_z(θ) γ_n(ℓ) with γ_n(ℓ) = (2√n/√(2π)) e^{-2nℓ²}, in coordinates w = e^{iθ}(1+ℓ).
pub fn berezin_gaussian_ginibre(n: usize, z: Complex64, theta: f64, ell: f64) -> Result<f64> {
    let nf = n as f64;
    let gamma = 2.0 * nf.sqrt() / (2.0 * PI).sqrt() * (-2.0 * nf * ell * ell).exp();
    Ok(poisson_disc(z, theta)? * gamma)
}

/// Tricomi coefficient check value: b_j(1) = (2j-1)!!.
pub fn double_factorial_odd(j: usize) -> BigInt {
    (1..=j).fold(BigInt::one(), |acc, k| acc * BigInt::from(2 * k - 1))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ginibre::ginibre_kernel_exact;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tricomi_examples() {
        assert_eq!(tricomi_b(0), PolynomialQ::from_ints(&[1]));
        assert_eq!(tricomi_b(1), PolynomialQ::from_ints(&[0, 1]));
        assert_eq!(tricomi_b(2), PolynomialQ::from_ints(&[0, 1, 2]));
        for j in 0..=8 {
            let b = tricomi_b(j);
            assert_eq!(b.degree(), Some(j));
            assert!(b.all_integers() && b.all_nonnegative());
            assert_eq!(b.eval_rational(&int(1)), BigRational::from_integer(double_factorial_odd(j)));
        }
    }

    #[test]
    fn bernoulli_small() {
        let b = bernoulli(8);
        assert_eq!(b[1], BigRational::new((-1).into(), 2.into()));
        assert_eq!(b[2], BigRational::new(1.into(), 6.into()));
        assert_eq!(b[4], BigRational::new((-1).into(), 30.into()));
        assert_eq!(b[8], BigRational::new((-1).into(), 30.into()));
        assert!(b[3].is_zero() && b[5].is_zero());
    }

    #[test]
    fn stirling_leading() {
        let s = stirling_series(4).unwrap();
        assert_eq!(s.coeffs[0], int(1));
        assert_eq!(s.coeffs[1], BigRational::new((-1).into(), 12.into()));
        assert_eq!(s.coeffs[2], BigRational::new(1.into(), 288.into()));
        assert!(stirling_series(7).is_err());
    }

    #[test]
    fn rho_one_matches_closed_form() {
        // -1/12 - ζ/(ζ-1)^2 = (-(ζ-1)^2/12 - ζ)/(ζ-1)^2
        let d = PolynomialQ::zeta_minus_one();
        let num = d.pow(2).scale(&BigRational::new((-1).into(), 12.into())).add(&PolynomialQ::from_ints(&[0, -1]));
        assert_eq!(rho(1).unwrap(), RationalAtOne::new(num, 2));
        let v = rational_eval(&rho(1).unwrap(), c(2.0, 0.0)).unwrap();
        assert!((v.re + 25.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn pole_orders_exact() {
        for j in 1..=TABLE_TERMS {
            let r = rho(j).unwrap();
            assert_eq!(r.pole_order(), 2 * j);
            assert!(r.numerator().div_zeta_minus_one().is_none());
        }
    }

    #[test]
    fn regime_errors() {
        let e = exterior_kernel_expansion(100, c(0.5, 0.0), c(0.5, 0.0), 1, DEFAULT_ETA).unwrap_err();
        assert!(matches!(e, Error::Regime(ref m) if m.contains("RegionI")));
        assert!(exterior_kernel_expansion(100, c(1.0, 0.0), c(1.01, 0.0), 1, DEFAULT_ETA).is_err());
        assert!(bulk_kernel_expansion(100, c(1.5, 0.0), c(1.2, 0.0), DEFAULT_ETA).is_err());
    }

    #[test]
    fn exterior_leading_error_is_rho1_over_n() {
        let (z, w) = (c(1.5, 0.0), c(1.2, 0.0));
        let exact = ginibre_kernel_exact(200, z, w).value;
        let approx = exterior_kernel_expansion(200, z, w, 0, DEFAULT_ETA).unwrap();
        let err = exact.ratio_minus_one(approx).unwrap();
        let predicted = rational_eval(&rho(1).unwrap(), c(1.8, 0.0)).unwrap() / 200.0;
        assert!((err - predicted).norm() < 0.1 * predicted.norm());
        assert!(approx.arg.abs() < 1e-14);
    }

    #[test]
    fn bulk_examples() {
        let b = bulk_kernel_expansion(37, c(0.0, 0.0), c(0.0, 0.0), DEFAULT_ETA).unwrap();
        assert!((b.value.modulus() - 37.0).abs() < 1e-12);
        let (z, w) = (c(0.3, 0.0), c(0.35, 0.0));
        let n = 200;
        let kb = bulk_kernel_expansion(n, z, w, DEFAULT_ETA).unwrap().value;
        let kzz = bulk_kernel_expansion(n, z, z, DEFAULT_ETA).unwrap().value;
        let berezin = (2.0 * kb.log_mag - kzz.log_mag).exp();
        let heat = n as f64 * (-(n as f64) * (z - w).norm_sqr()).exp();
        assert!((berezin / heat - 1.0).abs() < 0.02);
    }

    #[test]
    fn poisson_examples() {
        assert!((poisson_disc(c(2.0, 0.0), 0.0).unwrap() - 3.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(poisson_disc(c(0.5, 0.0), 0.0).is_err());
        let t = crate::numerics::quad_trapezoid_periodic(256);
        let mass = t.integrate(|th| poisson_disc(c(1.7, 0.4), th).unwrap());
        assert!((mass - 1.0).abs() < 1e-12);
        let far = poisson_disc(c(1e8, 0.0), 1.0).unwrap();
        assert!((far - 1.0 / (2.0 * PI)).abs() < 1e-7);
        let g = berezin_gaussian_ginibre(100, c(2.0, 0.0), 0.0, 0.0).unwrap();
        assert!((g - 20.0 / (2.0 * PI).sqrt() * 3.0 / (2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn region_two_matches_two_term_structure() {
        // E_n(ζ)·√(2πn)(ζ-1)/u(ζ)^n → 1 for ζ in region II
        let zeta = c(1.8, 0.0);
        let mut prev = f64::INFINITY;
        for n in [50usize, 200, 800] {
            let e = crate::ginibre::partial_exp_sum(n, zeta);
            let scale = LogComplex::new(0.5 * (2.0 * PI * n as f64).ln(), 0.0)
                .mul(LogComplex::from_complex(zeta - 1.0))
                .div(LogComplex::from_complex(u_map(zeta)).pow_int(n as i64))
                .unwrap();
            let v = e.mul(scale).to_complex();
            let dev = (v - 1.0).norm();
            assert!(dev < prev);
            prev = dev;
        }
        assert!(prev < 0.01);
    }

    proptest! {
        #[test]
        fn diagonal_real_is_real_positive(r in 1.2f64..2.5, n in 20usize..300) {
            let z = c(r, 0.0);
            let v = exterior_kernel_expansion(n, z, z, 2, DEFAULT_ETA).unwrap();
            prop_assert!(v.arg.abs() < 1e-14);
        }
    }

    /// Fixed-point arithmetic on big integers: value = mant / 2^BITS.
    mod fixed {
        use num_bigint::BigInt;
        use num_traits::{One, Signed, Zero};

        pub const BITS: u64 = 320;

        pub fn one() -> BigInt {
            BigInt::one() << BITS
        }

        pub fn from_int(k: i64) -> BigInt {
            BigInt::from(k) << BITS
        }

        pub fn mul(a: &BigInt, b: &BigInt) -> BigInt {
            (a * b) >> BITS
        }

        pub fn div(a: &BigInt, b: &BigInt) -> BigInt {
            (a << BITS) / b
        }

        /// 2 atanh(s) = ln((1+s)/(1-s)) for |s| small.
        fn two_atanh(s: &BigInt) -> BigInt {
            let s2 = mul(s, s);
            let mut term = s.clone();
            let mut acc = BigInt::zero();
            let mut k = 1i64;
            while !term.is_zero() {
                acc += &term / BigInt::from(k);
                term = mul(&term, &s2);
                k += 2;
            }
            acc * 2
        }

        pub fn ln2() -> BigInt {
            two_atanh(&div(&one(), &from_int(3)))
        }

        /// ln of a positive big integer.
        pub fn ln_int(x: &BigInt) -> BigInt {
            let e = x.bits() - 1;
            // mantissa m = x / 2^e in [1, 2)
            let m = if e >= BITS { x >> (e - BITS) } else { x << (BITS - e) };
            let s = div(&(&m - one()), &(&m + one()));
            two_atanh(&s) + ln2() * BigInt::from(e)
        }

        pub fn atan_inv(k: i64) -> BigInt {
            let x = div(&one(), &from_int(k));
            let x2 = mul(&x, &x);
            let mut term = x;
            let mut acc = BigInt::zero();
            let mut j = 1i64;
            let mut sign = 1i64;
            while !term.is_zero() {
                acc += &term / BigInt::from(j) * sign;
                term = mul(&term, &x2);
                j += 2;
                sign = -sign;
            }
            acc
        }

        pub fn pi() -> BigInt {
            atan_inv(5) * 16 - atan_inv(239) * 4
        }

        /// ln of a fixed-point value in (0, inf).
        pub fn ln_fixed(x: &BigInt) -> BigInt {
            ln_int(x) - ln2() * BigInt::from(BITS)
        }

        pub fn expm1(x: &BigInt) -> BigInt {
            assert!(x.abs() < one());
            let mut term = x.clone();
            let mut acc = BigInt::zero();
            let mut k = 1i64;
            while !term.is_zero() {
                acc += &term;
                k += 1;
                term = mul(&term, x) / BigInt::from(k);
            }
            acc
        }
    }

    fn factorial(n: u64) -> BigInt {
        fn prod(lo: u64, hi: u64) -> BigInt {
            if hi - lo < 16 {
                return (lo..=hi).fold(BigInt::one(), |a, k| a * BigInt::from(k));
            }
            let mid = (lo + hi) / 2;
            prod(lo, mid) * prod(mid + 1, hi)
        }
        if n < 2 {
            BigInt::one()
        } else {
            prod(2, n)
        }
    }

    /// n^n e^{-n} / (n-1)! · √(2π/n) - 1 as an exact fixed-point rational.
    fn stirling_defect(n: u64) -> BigRational {
        use fixed::*;
        let nn = BigInt::from(n);
        let ln_n = ln_int(&nn);
        let l = &ln_n * &nn - from_int(n as i64) - ln_int(&factorial(n - 1))
            + (ln2() + ln_fixed(&pi()) - &ln_n) / 2;
        BigRational::new(expm1(&l), BigInt::one() << BITS)
    }

    #[test]
    fn stirling_coefficient_two_matches_richardson_fit() {
        let ns = [1_000u64, 10_000, 100_000];
        let v: Vec<BigRational> = ns.iter().map(|&n| stirling_defect(n)).collect();
        // v(n) ≈ a/n + b/n² + c/n³ ; solve exactly by Cramer's rule
        let row = |n: u64| {
            let x = BigRational::new(BigInt::one(), BigInt::from(n));
            [x.clone(), &x * &x, &x * &x * &x]
        };
        let m: Vec<[BigRational; 3]> = ns.iter().map(|&n| row(n)).collect();
        let det3 = |a: &[[BigRational; 3]]| {
            &a[0][0] * (&a[1][1] * &a[2][2] - &a[1][2] * &a[2][1]) - &a[0][1] * (&a[1][0] * &a[2][2] - &a[1][2] * &a[2][0])
                + &a[0][2] * (&a[1][0] * &a[2][1] - &a[1][1] * &a[2][0])
        };
        let d = det3(&m);
        let mut m2 = m.clone();
        for i in 0..3 {
            m2[i][1] = v[i].clone();
        }
        let b2 = rational_to_f64(&(det3(&m2) / &d));
        let mut m1 = m.clone();
        for i in 0..3 {
            m1[i][0] = v[i].clone();
        }
        let b1 = rational_to_f64(&(det3(&m1) / &d));
        let s = stirling_series(2).unwrap();
        let exact2 = rational_to_f64(&s.coeffs[2]);
        assert!((b1 + 1.0 / 12.0).abs() < 1e-9);
        assert!(((b2 - exact2) / exact2).abs() < 1e-6, "fit {b2} vs {exact2}");
    }
}
