use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::quadrature::Quadrature1D;
use crate::numerics::sum::{pairwise_sum, pairwise_sum_real};
use crate::potential::{AdmissiblePotential, Potential};

const CHUNK: usize = 4096;
/// Rings whose best-case contribution is below e^{-PRUNE} of the peak are dropped.
const PRUNE: f64 = 80.0;

/// Quadrature resolution for moment assembly; `refine` multiplies both node counts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub refine: usize,
    pub nodes_per_panel: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { refine: 1, nodes_per_panel: 8 }
    }
}

pub(crate) fn r_max(pot: &Potential, n: usize) -> f64 {
    pot.unit_data().map.outer_radius() + 12.0 / (n as f64).sqrt()
}

fn radial_rule(pot: &Potential, n: usize, grid: &GridSpec) -> Quadrature1D {
    let rm = r_max(pot, n);
    let width = 0.5 / (n as f64).sqrt();
    let panels = ((rm / width).ceil() as usize).max(4) * grid.refine;
    Quadrature1D::composite(0.0, rm, panels, grid.nodes_per_panel)
}

/// Diagonal moments ∫|z|^{2j} e^{-nQ} dA of a radial weight.
pub(crate) fn radial_moments(pot: &Potential, n: usize, max_degree: usize, grid: &GridSpec) -> Vec<f64> {
    let rule = radial_rule(pot, n, grid);
    let nf = n as f64;
    (0..=max_degree)
        .map(|j| {
            // factor out the peak of r^{2j} e^{-nq(r)} to keep the sum in range
            let logs: Vec<f64> = rule
                .nodes
                .iter()
                .map(|&r| if r > 0.0 { 2.0 * j as f64 * r.ln() - nf * pot.q(Complex64::new(r, 0.0)) } else { f64::NEG_INFINITY })
                .collect();
            let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let terms: Vec<f64> = logs.iter().zip(&rule.nodes).zip(&rule.weights).map(|((l, r), w)| 2.0 * r * w * (l - peak).exp()).collect();
            pairwise_sum_real(&terms) * peak.exp()
        })
        .collect()
}

/// Polar product grid with ring-dependent angular counts; weights include e^{-nQ}/π.
pub(crate) fn polar_nodes(pot: &Potential, n: usize, max_degree: usize, grid: &GridSpec) -> (Vec<Complex64>, Vec<f64>) {
    let rule = radial_rule(pot, n, grid);
    let nf = n as f64;
    let beta = pot.quadratic_form().map(|(_, b)| b.abs()).unwrap_or(0.0);
    let d = max_degree as f64;
    let rings: Vec<(f64, f64, usize, f64)> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&r, &wr)| {
            let x = nf * beta * r * r;
            let m = (4.0 * x + 4.0 * d + 64.0).ceil() as usize;
            let m = (m.div_ceil(4) * 4).max(4 * max_degree + 16) * grid.refine;
            // best case over the ring and over degrees
            let qmin = (0..16).map(|k| pot.q(Complex64::from_polar(r, PI * k as f64 / 16.0))).fold(f64::INFINITY, f64::min);
            let imp = 2.0 * d * r.max(1.0).ln() - nf * qmin;
            (r, wr, m, imp)
        })
        .collect();
    let peak = rings.iter().map(|x| x.3).fold(f64::NEG_INFINITY, f64::max);
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    for &(r, wr, m, imp) in &rings {
        if imp < peak - PRUNE {
            continue;
        }
        let h = 2.0 * PI / m as f64;
        for k in 0..m {
            let x = Complex64::from_polar(r, k as f64 * h);
            let w = wr * r * h / PI * (-nf * pot.q(x)).exp();
            if w > 0.0 {
                pts.push(x);
                wts.push(w);
            }
        }
    }
    (pts, wts)
}

/// Full Hermitian moment matrix from the node list, upper half mirrored.
pub(crate) fn node_moments(pts: &[Complex64], wts: &[f64], max_degree: usize) -> Vec<Vec<Complex64>> {
    let dim = max_degree + 1;
    let partials: Vec<Vec<Complex64>> = pts
        .par_chunks(CHUNK)
        .zip(wts.par_chunks(CHUNK))
        .map(|(xs, ws)| {
            let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
            let mut pw = vec![Complex64::new(0.0, 0.0); dim];
            for (x, w) in xs.iter().zip(ws) {
                let mut a = Complex64::new(w.sqrt(), 0.0);
                for p in pw.iter_mut() {
                    *p = a;
                    a *= x;
                }
                for j in 0..dim {
                    for k in j..dim {
                        acc[j * dim + k] += pw[j] * pw[k].conj();
                    }
                }
            }
            acc
        })
        .collect();
    let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for j in 0..dim {
        for k in j..dim {
            let col: Vec<Complex64> = partials.iter().map(|p| p[j * dim + k]).collect();
            m[j][k] = pairwise_sum(&col);
        }
    }
    for j in 0..dim {
        m[j][j] = Complex64::new(m[j][j].re, 0.0);
        for k in 0..j {
            m[j][k] = m[k][j].conj();
        }
    }
    m
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    // Σ a conj(b), fixed chunking for reproducible rounding
    let parts: Vec<Complex64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| pairwise_sum(&x.iter().zip(y).map(|(p, q)| p * q.conj()).collect::<Vec<_>>()))
        .collect();
    pairwise_sum(&parts)
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    y.par_chunks_mut(CHUNK).zip(x.par_chunks(CHUNK)).for_each(|(ys, xs)| {
        for (u, v) in ys.iter_mut().zip(xs) {
            *u -= a * v;
        }
    });
}

pub(crate) struct ArnoldiResult {
    pub p0: f64,
    pub h: Vec<Vec<Complex64>>,
    pub residual: f64,
}

/// Orthonormal polynomials of the discrete measure by Arnoldi on multiplication by z.
pub(crate) fn arnoldi(pts: &[Complex64], wts: &[f64], max_degree: usize, parity: bool) -> Result<ArnoldiResult> {
    let total: f64 = pairwise_sum_real(wts);
    if !(total > 0.0) {
        return Err(Error::Resolution("quadrature weights vanish".into()));
    }
    let p0 = 1.0 / total.sqrt();
    let v0: Vec<Complex64> = wts.iter().map(|w| Complex64::new(w.sqrt() * p0, 0.0)).collect();
    let mut vs = vec![v0];
    let mut h = Vec::with_capacity(max_degree);
    for j in 0..max_degree {
        let mut u: Vec<Complex64> = vs[j].iter().zip(pts).map(|(v, x)| v * x).collect();
        let before = dot(&u, &u).re.sqrt();
        let mut col = vec![Complex64::new(0.0, 0.0); j + 2];
        for _pass in 0..2 {
            for i in 0..=j {
                let c = dot(&u, &vs[i]);
                col[i] += c;
                axpy(&mut u, c, &vs[i]);
            }
        }
        let nrm = dot(&u, &u).re.sqrt();
        if !(nrm > 1e-13 * before) {
            return Err(Error::Resolution(format!(
                "degree {} polynomial has no mass on the quadrature grid (ratio {:.2e}); refine the grid",
                j + 1,
                nrm / before
            )));
        }
        if parity {
            for (i, c) in col.iter_mut().enumerate().take(j + 1) {
                if (i + j + 1) % 2 == 1 {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
        }
        col[j + 1] = Complex64::new(nrm, 0.0);
        for x in u.iter_mut() {
            *x /= nrm;
        }
        vs.push(u);
        h.push(col);
    }
    // discrete Gram of the computed vectors
    let mut residual: f64 = 0.0;
    for a in 0..vs.len() {
        for b in 0..=a {
            let g = dot(&vs[a], &vs[b]);
            let target = if a == b { 1.0 } else { 0.0 };
            residual = residual.max((g - target).norm());
        }
    }
    Ok(ArnoldiResult { p0, h, residual })
}

/// Hermitian Cholesky M = L L*; None on a non-positive pivot.
pub(crate) fn cholesky(m: &[Vec<Complex64>]) -> Option<Vec<Vec<Complex64>>> {
    let d = m.len();
    let mut l = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for j in 0..d {
        let mut s = m[j][j].re;
        for k in 0..j {
            s -= l[j][k].norm_sqr();
        }
        if !(s > 0.0) {
            return None;
        }
        let ljj = s.sqrt();
        l[j][j] = Complex64::new(ljj, 0.0);
        for i in j + 1..d {
            let mut t = m[i][j];
            for k in 0..j {
                t -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = t / ljj;
        }
    }
    Some(l)
}

fn solve_chol(l: &[Vec<Complex64>], b: &[Complex64]) -> Vec<Complex64> {
    let d = l.len();
    let mut y = b.to_vec();
    for i in 0..d {
        for k in 0..i {
            let t = l[i][k] * y[k];
            y[i] -= t;
        }
        y[i] /= l[i][i];
    }
    for i in (0..d).rev() {
        for k in i + 1..d {
            let t = l[k][i].conj() * y[k];
            y[i] -= t;
        }
        y[i] /= l[i][i];
    }
    y
}

fn matvec(m: &[Vec<Complex64>], x: &[Complex64]) -> Vec<Complex64> {
    m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

fn vnorm(x: &[Complex64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// 2-norm condition number of a Hermitian positive block after Jacobi scaling.
pub(crate) fn cond_jacobi(block: &[Vec<Complex64>]) -> f64 {
    let d = block.len();
    if d == 0 {
        return 1.0;
    }
    let s: Vec<f64> = (0..d).map(|i| 1.0 / block[i][i].re.sqrt()).collect();
    let b: Vec<Vec<Complex64>> = (0..d).map(|i| (0..d).map(|j| block[i][j] * s[i] * s[j]).collect()).collect();
    let start: Vec<Complex64> = (0..d).map(|i| Complex64::new(1.0 + 0.01 * i as f64, 0.0)).collect();
    let mut x = start.clone();
    let mut lmax = 0.0;
    for _ in 0..500 {
        let y = matvec(&b, &x);
        let nrm = vnorm(&y);
        if nrm == 0.0 {
            break;
        }
        let conv = (nrm - lmax).abs() <= 1e-12 * nrm;
        lmax = nrm;
        x = y.iter().map(|c| c / nrm).collect();
        if conv {
            break;
        }
    }
    let Some(l) = cholesky(&b) else {
        return f64::INFINITY;
    };
    let mut x = start;
    let mut inv_max = 0.0;
    for _ in 0..500 {
        let y = solve_chol(&l, &x);
        let nrm = vnorm(&y);
        let conv = (nrm - inv_max).abs() <= 1e-12 * nrm;
        inv_max = nrm;
        x = y.iter().map(|c| c / nrm).collect();
        if conv {
            break;
        }
    }
    lmax * inv_max
}

/// Index sets of the parity blocks (or one block).
pub(crate) fn blocks(dim: usize, parity: bool) -> Vec<Vec<usize>> {
    if parity {
        vec![(0..dim).step_by(2).collect(), (1..dim).step_by(2).collect()]
    } else {
        vec![(0..dim).collect()]
    }
}

pub(crate) fn sub_block(m: &[Vec<Complex64>], idx: &[usize]) -> Vec<Vec<Complex64>> {
    idx.iter().map(|&i| idx.iter().map(|&j| m[i][j]).collect()).collect()
}
