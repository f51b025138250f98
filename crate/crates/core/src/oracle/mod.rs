//! Brute-force orthonormal bases of weighted polynomial spaces.
//!
//! Native mode orthogonalizes against a discretized measure by Arnoldi
//! iteration on multiplication by z, so the monomial Gram matrix is only
//! used for diagnostics. Extended mode works with exact rational moments
//! of quadratic weights.

pub mod exact;
mod native;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::logcomplex::{lc_sum, LogComplex};
use crate::potential::{AdmissiblePotential, Potential};

pub use exact::{exact_moments, ExactMoments};
pub use native::GridSpec;

pub const NATIVE_COND_BUDGET: f64 = 1e12;
pub const EXTENDED_COND_BUDGET: f64 = 1e60;
const RESCALE: f64 = 1e150;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecisionMode {
    Native,
    Extended,
}

impl PrecisionMode {
    pub fn name(self) -> &'static str {
        match self {
            PrecisionMode::Native => "native",
            PrecisionMode::Extended => "extended",
        }
    }

    pub fn budget(self) -> f64 {
        match self {
            PrecisionMode::Native => NATIVE_COND_BUDGET,
            PrecisionMode::Extended => EXTENDED_COND_BUDGET,
        }
    }
}

impl fmt::Display for PrecisionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PrecisionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "native" => Ok(PrecisionMode::Native),
            "extended" => Ok(PrecisionMode::Extended),
            other => Err(Error::Config(format!("unknown precision mode '{other}' (native|extended)"))),
        }
    }
}

enum MomentSource {
    Radial(Vec<f64>),
    Nodes { pts: Vec<Complex64>, wts: Vec<f64> },
    Exact(exact::ExactBasis),
}

/// Monomial Gram matrix M_jk = ∫ z^j z̄^k e^{-nQ} dA with diagnostics.
pub struct GramData {
    pub n: usize,
    pub max_degree: usize,
    pub mode: PrecisionMode,
    pub moments: Vec<Vec<Complex64>>,
    /// Cholesky factor of `moments` when f64 elimination succeeds
    pub chol: Option<Vec<Vec<Complex64>>>,
    /// Jacobi-scaled condition number, worst parity block
    pub cond_estimate: f64,
    pot: Potential,
    source: MomentSource,
}

impl fmt::Debug for GramData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GramData")
            .field("n", &self.n)
            .field("max_degree", &self.max_degree)
            .field("mode", &self.mode)
            .field("cond_estimate", &self.cond_estimate)
            .finish()
    }
}

pub fn compute_moments(pot: &Potential, n: usize, max_degree: usize, grid: &GridSpec, mode: PrecisionMode) -> Result<GramData> {
    if n == 0 || max_degree > n {
        return Err(Error::Config(format!("need n ≥ 1 and max_degree ≤ n, got n={n}, max_degree={max_degree}")));
    }
    if grid.refine == 0 || grid.nodes_per_panel == 0 {
        return Err(Error::Config("grid refinement and panel size must be positive".into()));
    }
    let dim = max_degree + 1;
    let zero = Complex64::new(0.0, 0.0);
    match mode {
        PrecisionMode::Native if pot.is_radial() => {
            let diag = native::radial_moments(pot, n, max_degree, grid);
            if let Some(j) = diag.iter().position(|m| !(*m > 0.0)) {
                return Err(Error::Resolution(format!("moment of degree {j} vanished on the radial grid")));
            }
            let mut moments = vec![vec![zero; dim]; dim];
            let mut chol = vec![vec![zero; dim]; dim];
            for j in 0..dim {
                moments[j][j] = Complex64::new(diag[j], 0.0);
                chol[j][j] = Complex64::new(diag[j].sqrt(), 0.0);
            }
            Ok(GramData { n, max_degree, mode, moments, chol: Some(chol), cond_estimate: 1.0, pot: pot.clone(), source: MomentSource::Radial(diag) })
        }
        PrecisionMode::Native => {
            let (pts, wts) = native::polar_nodes(pot, n, max_degree, grid);
            let moments = native::node_moments(&pts, &wts, max_degree);
            let chol = native::cholesky(&moments);
            let cond_estimate = native::blocks(dim, pot.parity_symmetric())
                .iter()
                .map(|idx| native::cond_jacobi(&native::sub_block(&moments, idx)))
                .fold(1.0, f64::max);
            Ok(GramData { n, max_degree, mode, moments, chol, cond_estimate, pot: pot.clone(), source: MomentSource::Nodes { pts, wts } })
        }
        PrecisionMode::Extended => {
            let (alpha, beta) = pot
                .quadratic_form()
                .ok_or_else(|| Error::Config(format!("extended moments need a quadratic potential, got {}", pot.name())))?;
            let mom = exact_moments(alpha, beta, n, max_degree)?;
            let moments: Vec<Vec<Complex64>> = (0..dim)
                .map(|j| (0..dim).map(|k| Complex64::new(exact::ratio_to_f64(&mom.m[j][k]) * mom.m00, 0.0)).collect())
                .collect();
            let chol = native::cholesky(&moments);
            let eb = exact::exact_basis(&mom, max_degree)?;
            let cond_estimate = eb.cond;
            Ok(GramData { n, max_degree, mode, moments, chol, cond_estimate, pot: pot.clone(), source: MomentSource::Exact(eb) })
        }
    }
}

/// Orthonormal polynomials P_j with z P_j = Σ_{i ≤ j+1} H_ij P_i.
#[derive(Clone, Debug)]
pub struct OrthonormalBasis {
    pub n: usize,
    pub max_degree: usize,
    pub precision_mode: PrecisionMode,
    /// monomial coefficients, row j has length j + 1
    pub coeffs: Vec<Vec<Complex64>>,
    /// recurrence[j][i] = H_ij, i ≤ j + 1
    pub recurrence: Vec<Vec<Complex64>>,
    pub p0: f64,
    /// deviation of the computed basis from orthonormality in the arithmetic it was built in
    pub residual: f64,
    /// ‖C M C* − I‖_max evaluated in f64 against `GramData::moments`
    pub moment_residual: f64,
    pub cond_estimate: f64,
    pot: Potential,
}

fn coefficient_rows(p0: f64, h: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let mut rows = vec![vec![Complex64::new(p0, 0.0)]];
    for (j, col) in h.iter().enumerate() {
        let mut next = vec![Complex64::new(0.0, 0.0); j + 2];
        for (a, c) in rows[j].iter().enumerate() {
            next[a + 1] += c;
        }
        for (i, hij) in col.iter().enumerate().take(j + 1) {
            for (a, c) in rows[i].iter().enumerate() {
                next[a] -= hij * c;
            }
        }
        let lead = col[j + 1];
        for c in next.iter_mut() {
            *c /= lead;
        }
        rows.push(next);
    }
    rows
}

fn moment_residual(coeffs: &[Vec<Complex64>], m: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, ci) in coeffs.iter().enumerate() {
        for (j, cj) in coeffs.iter().enumerate().take(i + 1) {
            let mut s = Complex64::new(0.0, 0.0);
            for (a, x) in ci.iter().enumerate() {
                for (b, y) in cj.iter().enumerate() {
                    s += x * m[a][b] * y.conj();
                }
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((s - target).norm());
        }
    }
    worst
}

pub fn orthonormalize(g: &GramData) -> Result<OrthonormalBasis> {
    let budget = g.mode.budget();
    if !(g.cond_estimate <= budget) {
        let hint = match g.mode {
            PrecisionMode::Native => "; use extended precision or a lower degree",
            PrecisionMode::Extended => "",
        };
        return Err(Error::Precision(format!(
            "Gram condition estimate {:.3e} exceeds the {} budget {:.0e}{hint}",
            g.cond_estimate, g.mode, budget
        )));
    }
    let (p0, h, coeffs, residual) = match &g.source {
        MomentSource::Radial(diag) => {
            let p0 = 1.0 / diag[0].sqrt();
            let h: Vec<Vec<Complex64>> = (0..g.max_degree)
                .map(|j| {
                    let mut col = vec![Complex64::new(0.0, 0.0); j + 2];
                    col[j + 1] = Complex64::new((diag[j + 1] / diag[j]).sqrt(), 0.0);
                    col
                })
                .collect();
            let coeffs: Vec<Vec<Complex64>> = (0..=g.max_degree)
                .map(|j| {
                    let mut row = vec![Complex64::new(0.0, 0.0); j + 1];
                    row[j] = Complex64::new(1.0 / diag[j].sqrt(), 0.0);
                    row
                })
                .collect();
            let residual = diag.iter().zip(&coeffs).map(|(m, r)| (m * r.last().unwrap().norm_sqr() - 1.0).abs()).fold(0.0, f64::max);
            (p0, h, coeffs, residual)
        }
        MomentSource::Nodes { pts, wts } => {
            let r = native::arnoldi(pts, wts, g.max_degree, g.pot.parity_symmetric())?;
            let coeffs = coefficient_rows(r.p0, &r.h);
            (r.p0, r.h, coeffs, r.residual)
        }
        MomentSource::Exact(eb) => {
            if !eb.exact_identity {
                return Err(Error::Precision("exact factorization does not reproduce the Gram matrix".into()));
            }
            (eb.p0, eb.h.clone(), eb.coeffs.clone(), 0.0)
        }
    };
    let moment_residual = moment_residual(&coeffs, &g.moments);
    Ok(OrthonormalBasis {
        n: g.n,
        max_degree: g.max_degree,
        precision_mode: g.mode,
        coeffs,
        recurrence: h,
        p0,
        residual,
        moment_residual,
        cond_estimate: g.cond_estimate,
        pot: g.pot.clone(),
    })
}

/// One-call construction: moments then orthonormalization.
pub fn build_basis(pot: &Potential, n: usize, max_degree: usize, grid: &GridSpec, mode: PrecisionMode) -> Result<OrthonormalBasis> {
    orthonormalize(&compute_moments(pot, n, max_degree, grid, mode)?)
}

impl OrthonormalBasis {
    /// Rebuild a basis from a stored recurrence; coefficients are regenerated.
    #[allow(clippy::too_many_arguments)]
    pub fn from_recurrence(
        pot: &Potential,
        n: usize,
        precision_mode: PrecisionMode,
        p0: f64,
        recurrence: Vec<Vec<Complex64>>,
        residual: f64,
        moment_residual: f64,
        cond_estimate: f64,
    ) -> Result<Self> {
        if !(p0 > 0.0 && p0.is_finite()) {
            return Err(Error::Config(format!("stored basis has invalid P_0 = {p0}")));
        }
        for (j, col) in recurrence.iter().enumerate() {
            if col.len() != j + 2 {
                return Err(Error::Config(format!("recurrence column {j} has length {}, expected {}", col.len(), j + 2)));
            }
            if !(col[j + 1].norm() > 0.0) || col.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::Config(format!("recurrence column {j} is degenerate")));
            }
        }
        let max_degree = recurrence.len();
        let coeffs = coefficient_rows(p0, &recurrence);
        Ok(OrthonormalBasis {
            n,
            max_degree,
            precision_mode,
            coeffs,
            recurrence,
            p0,
            residual,
            moment_residual,
            cond_estimate,
            pot: pot.clone(),
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.pot
    }

    /// P_j(z) for all j by the Hessenberg recurrence, with a common log scale.
    pub fn polynomials(&self, z: Complex64) -> (Vec<Complex64>, f64) {
        let mut p = Vec::with_capacity(self.max_degree + 1);
        p.push(Complex64::new(self.p0, 0.0));
        let mut log_scale = 0.0;
        for (j, col) in self.recurrence.iter().enumerate() {
            let mut t = z * p[j];
            for (i, hij) in col.iter().enumerate().take(j + 1) {
                if hij.re != 0.0 || hij.im != 0.0 {
                    t -= hij * p[i];
                }
            }
            let next = t / col[j + 1];
            let mag = next.norm();
            p.push(next);
            if mag > RESCALE {
                for x in p.iter_mut() {
                    *x /= mag;
                }
                log_scale += mag.ln();
            }
        }
        (p, log_scale)
    }

    /// W_j(z) = P_j(z) e^{-nQ(z)/2}.
    pub fn weighted(&self, z: Complex64) -> Vec<LogComplex> {
        let (p, log_scale) = self.polynomials(z);
        let shift = log_scale - 0.5 * self.n as f64 * self.pot.q(z);
        p.into_iter().map(|x| LogComplex::from_complex(x).mul_exp(Complex64::new(shift, 0.0))).collect()
    }
}

/// K_n(z, w) = Σ_{j<n} W_j(z) conj W_j(w).
pub fn kernel_oracle(basis: &OrthonormalBasis, z: Complex64, w: Complex64) -> Result<LogComplex> {
    if basis.max_degree + 1 < basis.n {
        return Err(Error::Config(format!(
            "kernel of degree n={} needs max_degree ≥ {}, basis has {}",
            basis.n,
            basis.n - 1,
            basis.max_degree
        )));
    }
    let wz = basis.weighted(z);
    let ww = if w == z { wz.clone() } else { basis.weighted(w) };
    let terms: Vec<LogComplex> = wz.iter().zip(&ww).take(basis.n).map(|(a, b)| a.mul(b.conj())).collect();
    Ok(lc_sum(&terms))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointwiseBoundReport {
    pub n: usize,
    /// max over samples and degrees of |W_j(z)| e^{n(Q − Q̌)(z)/2} / √n
    pub max_ratio: f64,
    pub argmax_j: usize,
    pub argmax_z: Complex64,
}

/// Empirical constant in |W_j(z)| ≤ C √n e^{-n(Q − Q̌_τ)(z)/2}; τ = j/n unless `tau_prime` is given.
pub fn pointwise_bound_check(basis: &OrthonormalBasis, tau_prime: Option<f64>, degrees: &[usize], samples: &[Complex64]) -> Result<PointwiseBoundReport> {
    let nf = basis.n as f64;
    let mut best = PointwiseBoundReport { n: basis.n, max_ratio: 0.0, argmax_j: 0, argmax_z: Complex64::new(0.0, 0.0) };
    for &j in degrees {
        if j > basis.max_degree || (j == 0 && tau_prime.is_none()) {
            return Err(Error::Config(format!("degree {j} outside 1..={}", basis.max_degree)));
        }
        let tau = tau_prime.unwrap_or(j as f64 / nf);
        let data = basis.pot.tau_data(tau)?;
        for &z in samples {
            let check = if data.map.contains(z) { basis.pot.q(z) } else { data.v(z) };
            let w = basis.weighted(z)[j];
            let log_ratio = w.log_mag + 0.5 * nf * (basis.pot.q(z) - check) - 0.5 * nf.ln();
            let ratio = log_ratio.exp();
            if ratio > best.max_ratio {
                best.max_ratio = ratio;
                best.argmax_j = j;
                best.argmax_z = z;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ginibre::{ginibre_kernel_exact, ginibre_orthonormal};
    use crate::numerics::ln_factorial;
    use crate::potential::{boundary_point, make_elliptic_ginibre, make_ginibre, make_radial, radial_profile};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_points(k: usize, radius: f64) -> Vec<Complex64> {
        // deterministic scatter in the disc of the given radius
        (0..k)
            .map(|i| {
                let t = (i as f64 + 0.5) / k as f64;
                Complex64::from_polar(radius * t.sqrt(), 2.399963229728653 * i as f64)
            })
            .collect()
    }

    #[test]
    fn rebuilt_basis_reproduces_kernel() {
        let pot = make_elliptic_ginibre(1.0, 3.0).unwrap();
        let b = build_basis(&pot, 16, 16, &GridSpec::default(), PrecisionMode::Extended).unwrap();
        let r = OrthonormalBasis::from_recurrence(&pot, 16, b.precision_mode, b.p0, b.recurrence.clone(), b.residual, b.moment_residual, b.cond_estimate).unwrap();
        let (z, w) = (c(0.3, 0.2), c(-0.1, 0.4));
        let k1 = kernel_oracle(&b, z, w).unwrap().to_complex();
        let k2 = kernel_oracle(&r, z, w).unwrap().to_complex();
        assert!((k1 - k2).norm() <= 1e-13 * k1.norm());
        let mut bad = b.recurrence.clone();
        bad[2].pop();
        assert!(OrthonormalBasis::from_recurrence(&pot, 16, b.precision_mode, b.p0, bad, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn ginibre_moments_are_factorials() {
        let n = 40;
        let g = compute_moments(&make_ginibre(), n, 40, &GridSpec::default(), PrecisionMode::Native).unwrap();
        for j in 0..=40 {
            let want = (ln_factorial(j) - (j as f64 + 1.0) * (n as f64).ln()).exp();
            assert!((g.moments[j][j].re / want - 1.0).abs() < 1e-10, "j={j}");
        }
    }

    #[test]
    fn ginibre_oracle_matches_closed_form() {
        let n = 40;
        let basis = build_basis(&make_ginibre(), n, n - 1, &GridSpec::default(), PrecisionMode::Native).unwrap();
        let pts = sample_points(20, 1.6);
        for (k, &z) in pts.iter().enumerate() {
            let w = pts[(k + 7) % pts.len()];
            let got = kernel_oracle(&basis, z, w).unwrap();
            let want = ginibre_kernel_exact(n, z, w).value;
            assert!(got.ratio_minus_one(want).unwrap().norm() < 1e-8, "z={z} w={w}");
        }
        for j in [0, 5, 39] {
            let z = c(0.7, -0.4);
            let r = basis.weighted(z)[j].ratio_minus_one(ginibre_orthonormal(n, j, z)).unwrap();
            assert!(r.norm() < 1e-10);
        }
    }

    #[test]
    fn native_grid_on_ginibre_agrees_with_radial_path() {
        // force the two-dimensional grid by using an elliptic weight with equal axes
        let n = 16;
        let pot = make_elliptic_ginibre(1.0, 1.0).unwrap();
        let basis = build_basis(&pot, n, n - 1, &GridSpec::default(), PrecisionMode::Native).unwrap();
        assert!(basis.residual < 1e-12);
        for &z in &sample_points(6, 1.3) {
            let got = kernel_oracle(&basis, z, c(0.3, 0.9)).unwrap();
            let want = ginibre_kernel_exact(n, z, c(0.3, 0.9)).value;
            assert!(got.ratio_minus_one(want).unwrap().norm() < 1e-9);
        }
    }

    #[test]
    fn elliptic_native_at_forty() {
        let pot = make_elliptic_ginibre(1.0, 3.0).unwrap();
        let g = compute_moments(&pot, 40, 40, &GridSpec::default(), PrecisionMode::Native).unwrap();
        for j in 0..=40 {
            for k in 0..=40 {
                assert!((g.moments[j][k] - g.moments[k][j].conj()).norm() <= 1e-14 * g.moments[j][k].norm());
            }
        }
        assert!(g.cond_estimate < NATIVE_COND_BUDGET);
        let basis = orthonormalize(&g).unwrap();
        assert!(basis.residual < 1e-8, "{}", basis.residual);
        // leading coefficients are positive
        assert!(basis.coeffs.iter().enumerate().all(|(j, r)| r[j].re > 0.0 && r[j].im.abs() < 1e-12 * r[j].re));
    }

    #[test]
    fn native_and_extended_agree() {
        let pot = make_elliptic_ginibre(1.0, 3.0).unwrap();
        let n = 24;
        let nat = build_basis(&pot, n, n - 1, &GridSpec::default(), PrecisionMode::Native).unwrap();
        let ext = build_basis(&pot, n, n - 1, &GridSpec::default(), PrecisionMode::Extended).unwrap();
        assert_eq!(ext.residual, 0.0);
        for &z in &sample_points(10, 1.4) {
            let w = z.conj() * 0.8 + c(0.1, 0.0);
            let a = kernel_oracle(&nat, z, w).unwrap();
            let b = kernel_oracle(&ext, z, w).unwrap();
            assert!(a.ratio_minus_one(b).unwrap().norm() < 1e-9, "z={z}");
        }
    }

    #[test]
    fn native_refuses_ill_conditioned_degree() {
        let pot = make_elliptic_ginibre(1.0, 3.0).unwrap();
        let g = compute_moments(&pot, 60, 60, &GridSpec::default(), PrecisionMode::Native).unwrap();
        assert!(matches!(orthonormalize(&g), Err(Error::Precision(_))));
        let ext = build_basis(&pot, 60, 60, &GridSpec::default(), PrecisionMode::Extended).unwrap();
        assert!(ext.cond_estimate < EXTENDED_COND_BUDGET);
    }

    #[test]
    fn refinement_is_stable() {
        let pot = make_elliptic_ginibre(1.0, 3.0).unwrap();
        let n = 20;
        let coarse = build_basis(&pot, n, n - 1, &GridSpec::default(), PrecisionMode::Native).unwrap();
        let fine = build_basis(&pot, n, n - 1, &GridSpec { refine: 2, ..GridSpec::default() }, PrecisionMode::Native).unwrap();
        for &z in &sample_points(8, 1.5) {
            let a = kernel_oracle(&coarse, z, z).unwrap();
            let b = kernel_oracle(&fine, z, z).unwrap();
            assert!(a.ratio_minus_one(b).unwrap().norm() < 1e-8);
        }
    }

    #[test]
    fn extended_needs_quadratic_weight() {
        let pot = make_radial(&radial_profile("r4").unwrap()).unwrap();
        assert!(matches!(compute_moments(&pot, 10, 9, &GridSpec::default(), PrecisionMode::Extended), Err(Error::Config(_))));
        assert!(matches!(compute_moments(&pot, 10, 11, &GridSpec::default(), PrecisionMode::Native), Err(Error::Config(_))));
        assert!("quad".parse::<PrecisionMode>().is_err());
    }

    #[test]
    fn quartic_radial_kernel_reproduces() {
        // the one-point function integrates to n
        let pot = make_radial(&radial_profile("r4").unwrap()).unwrap();
        let n = 12;
        let basis = build_basis(&pot, n, n - 1, &GridSpec::default(), PrecisionMode::Native).unwrap();
        let rmax = 2.2;
        let rule = crate::numerics::quadrature::Quadrature1D::composite(0.0, rmax, 60, 8);
        let mass = rule.integrate(|r| 2.0 * r * kernel_oracle(&basis, c(r, 0.0), c(r, 0.0)).unwrap().modulus());
        assert!((mass - n as f64).abs() < 1e-8, "{mass}");
    }

    #[test]
    fn ginibre_pointwise_bound_is_order_one() {
        let mut ratios = Vec::new();
        for n in [20, 40, 80] {
            let basis = build_basis(&make_ginibre(), n, n - 1, &GridSpec::default(), PrecisionMode::Native).unwrap();
            let r = pointwise_bound_check(&basis, None, &[n - 1], &[c(1.5, 0.0)]).unwrap();
            ratios.push(r.max_ratio);
        }
        assert!(ratios.iter().all(|&r| r > 0.0 && r < 2.0), "{ratios:?}");
    }

    #[test]
    fn elliptic_kernel_at_boundary_is_finite() {
        let pot = make_elliptic_ginibre(1.0, 3.0).unwrap();
        let p = boundary_point(&pot, 1.0, 0.3).unwrap().p;
        let basis = build_basis(&pot, 20, 19, &GridSpec::default(), PrecisionMode::Extended).unwrap();
        let k = kernel_oracle(&basis, p, p).unwrap();
        assert!(k.arg.abs() < 1e-12 && k.modulus() > 1.0 && k.modulus() < 20.0);
    }
}
