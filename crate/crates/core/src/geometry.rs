//! The map u(ζ) = ζ e^{1-ζ}, the Szegő curve, the curve K and the region
//! classifier used to pick an expansion for the Ginibre kernel.

use std::f64::consts::PI;

use num_complex::Complex64;
use once_cell::sync::Lazy;

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_STEP: f64 = 1e-3;

pub fn u_map(zeta: Complex64) -> Complex64 {
    zeta * (1.0 - zeta).exp()
}

/// log|u(ζ)| = ln|ζ| + 1 - Re ζ.
fn log_abs_u(zeta: Complex64) -> f64 {
    zeta.norm().ln() + 1.0 - zeta.re
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    RegionI,
    RegionII,
    RegionIII,
    OnSzegoCurve,
    OnCurveK,
    AtOne,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::RegionI => "RegionI",
            Region::RegionII => "RegionII",
            Region::RegionIII => "RegionIII",
            Region::OnSzegoCurve => "OnSzegoCurve",
            Region::OnCurveK => "OnCurveK",
            Region::AtOne => "AtOne",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegionLabel {
    pub region: Region,
    pub in_e_sz: bool,
}

#[derive(Clone, Debug)]
pub struct TracedCurve {
    pub points: Vec<Complex64>,
    pub closed: bool,
    pub tol: f64,
}

impl TracedCurve {
    pub fn winding_number(&self, p: Complex64) -> i64 {
        let mut total = 0.0;
        let pts = &self.points;
        for i in 0..pts.len() {
            let a = pts[i] - p;
            let b = pts[(i + 1) % pts.len()] - p;
            total += (b / a).arg();
        }
        (total / (2.0 * PI)).round() as i64
    }

    /// Even-odd ray casting against the closed polygon.
    pub fn contains(&self, p: Complex64) -> bool {
        let pts = &self.points;
        let mut inside = false;
        let mut j = pts.len() - 1;
        for i in 0..pts.len() {
            let (a, b) = (pts[i], pts[j]);
            if (a.im > p.im) != (b.im > p.im) {
                let x = a.re + (p.im - a.im) * (b.re - a.re) / (b.im - a.im);
                if p.re < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    pub fn max_spacing(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max)
    }
}

/// Negative real crossing -t of the Szegő curve, where t e^t = e^{-1}.
pub fn szego_crossing() -> f64 {
    let f = |t: f64| t.ln() + t + 1.0;
    let (mut lo, mut hi) = (0.1f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    -0.5 * (lo + hi)
}

fn newton_onto_level(mut z: Complex64, tol: f64) -> Option<Complex64> {
    for _ in 0..50 {
        let f = log_abs_u(z);
        let r2 = z.norm_sqr();
        let g = Complex64::new(z.re / r2 - 1.0, z.im / r2);
        let g2 = g.norm_sqr();
        if g2 == 0.0 {
            return None;
        }
        let dz = g * (f / g2);
        z -= dz;
        if dz.norm() < 1e-15 && log_abs_u(z).abs() < tol {
            return Some(z);
        }
    }
    (log_abs_u(z).abs() < tol).then_some(z)
}

/// Closed Szegő curve {|ζ| ≤ 1, |u(ζ)| = 1}, traced counterclockwise from 1.
pub fn trace_szego_curve(step: f64, tol: f64) -> Result<TracedCurve> {
    if !(step > 0.0 && step <= 0.05) {
        return Err(Error::Config(format!("step must lie in (0, 0.05], got {step}")));
    }
    let corr_tol = (0.01 * tol).max(1e-15);
    let start_dir = Complex64::from_polar(1.0, 0.75 * PI);
    let fail = |z: Complex64, why: &str| Error::Continuation { last_good: format!("{z}"), reason: why.into() };
    let mut z = newton_onto_level(1.0 + start_dir * (0.5 * step), corr_tol)
        .ok_or_else(|| fail(Complex64::new(1.0, 0.0), "corrector diverged at start"))?;
    let mut upper = vec![Complex64::new(1.0, 0.0), z];
    let mut dir = start_dir;
    let mut h = 0.8 * step;
    loop {
        let r2 = z.norm_sqr();
        let g = Complex64::new(z.re / r2 - 1.0, z.im / r2);
        let mut t = Complex64::new(0.0, 1.0) * g / g.norm();
        if (t * dir.conj()).re < 0.0 {
            t = -t;
        }
        let pred = z + t * h;
        match newton_onto_level(pred, corr_tol) {
            Some(next) if (next - z).norm() <= step && (next - z).norm() > 0.1 * h => {
                if next.im <= 0.0 {
                    break;
                }
                dir = t;
                z = next;
                upper.push(z);
                h = (h * 1.5).min(0.8 * step);
            }
            _ => {
                h *= 0.5;
                if h < 1e-10 {
                    return Err(fail(z, "step size underflow"));
                }
            }
        }
        if upper.len() > 10_000_000 {
            return Err(fail(z, "too many points"));
        }
    }
    let cross = Complex64::new(szego_crossing(), 0.0);
    let last = *upper.last().unwrap();
    // fill the final gap to the axis if it exceeds the step
    let gap = (cross - last).norm();
    if gap > step {
        let k = (gap / step).ceil() as usize;
        for i in 1..k {
            let p = last + (cross - last) * (i as f64 / k as f64);
            if let Some(q) = newton_onto_level(p, corr_tol) {
                upper.push(q);
            }
        }
    }
    let mut points = upper.clone();
    points.push(cross);
    for p in upper.iter().rev() {
        points.push(p.conj());
    }
    Ok(TracedCurve { points, closed: true, tol })
}

fn curve_k_x(y: f64) -> f64 {
    if y.abs() < 1e-8 {
        1.0 - y * y / 3.0
    } else {
        y / y.tan()
    }
}

fn curve_k_slope(y: f64) -> f64 {
    if y.abs() < 1e-6 {
        -2.0 * y / 3.0
    } else {
        let s = y.sin();
        1.0 / y.tan() - y / (s * s)
    }
}

/// Branch of Im u = 0 through 1, perpendicular to the real axis: x = y cot y.
pub fn trace_curve_k(extent: f64, step: f64, tol: f64) -> Result<TracedCurve> {
    if extent <= 0.0 {
        return Err(Error::Config("extent must be positive".into()));
    }
    if step <= 0.0 {
        return Err(Error::Config("step must be positive".into()));
    }
    let mut half = Vec::new();
    let mut y: f64 = 0.0;
    loop {
        let slope = curve_k_slope(y);
        let dy = 0.9 * step / (1.0 + slope * slope).sqrt();
        y += dy;
        if y >= PI - 1e-9 {
            break;
        }
        // corrector: Newton in x on Im u at fixed y
        let mut x = curve_k_x(y);
        for _ in 0..3 {
            let s = y.sin();
            let g = y * y.cos() - x * s;
            if s.abs() < 1e-300 {
                break;
            }
            x += g / s;
        }
        let z = Complex64::new(x, y);
        if u_map(z).im.abs() > tol {
            return Err(Error::Continuation { last_good: format!("{z}"), reason: "corrector missed tolerance".into() });
        }
        if (z - 1.0).norm() > extent {
            break;
        }
        half.push(z);
    }
    let mut points: Vec<Complex64> = half.iter().rev().map(|z| z.conj()).collect();
    points.push(Complex64::new(1.0, 0.0));
    points.extend(half);
    Ok(TracedCurve { points, closed: false, tol })
}

/// Region classifier backed by one traced Szegő curve.
#[derive(Clone, Debug)]
pub struct Classifier {
    pub szego: TracedCurve,
}

impl Classifier {
    pub fn new(step: f64) -> Result<Self> {
        Ok(Classifier { szego: trace_szego_curve(step, 1e-13)? })
    }

    pub fn classify(&self, zeta: Complex64, tol: f64) -> RegionLabel {
        let region = if (zeta - 1.0).norm() <= tol {
            Region::AtOne
        } else if zeta.norm() <= 1.0 + tol && (u_map(zeta).norm() - 1.0).abs() <= tol {
            Region::OnSzegoCurve
        } else if on_curve_k(zeta, tol) {
            Region::OnCurveK
        } else if u_map(zeta).norm() > 1.0 + tol {
            Region::RegionIII
        } else if zeta.norm() < 1.0 && self.szego.contains(zeta) {
            Region::RegionI
        } else {
            Region::RegionII
        };
        let in_e_sz = !matches!(region, Region::RegionI | Region::OnSzegoCurve | Region::AtOne);
        RegionLabel { region, in_e_sz }
    }
}

fn on_curve_k(zeta: Complex64, tol: f64) -> bool {
    let y = zeta.im.abs();
    if y >= PI || y <= tol {
        return false;
    }
    let slope = curve_k_slope(y);
    (zeta.re - curve_k_x(y)).abs() / (1.0 + slope * slope).sqrt() <= tol
}

static DEFAULT_CLASSIFIER: Lazy<Classifier> =
    Lazy::new(|| Classifier::new(DEFAULT_STEP).expect("default Szegő curve traces"));

pub fn default_classifier() -> &'static Classifier {
    &DEFAULT_CLASSIFIER
}

pub fn classify(zeta: Complex64, tol: f64) -> RegionLabel {
    DEFAULT_CLASSIFIER.classify(zeta, tol)
}
