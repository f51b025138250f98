use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

pub const COEFF_CUTOFF: f64 = 1e-13;

/// Holomorphic function on the exterior of the unit disc,
/// G(ω) = c_0 + 2 Σ_{k≥1} c_{-k} ω^{-k}, with Re G = f on |ω| = 1.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicExtension {
    pub c0: f64,
    /// coeffs[k - 1] = 2 c_{-k}
    pub coeffs: Vec<Complex64>,
}

impl HarmonicExtension {
    pub fn constant(c: f64) -> Self {
        HarmonicExtension { c0: c, coeffs: Vec::new() }
    }

    /// Fit from samples f(θ_j), θ_j = 2πj/m.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let m = samples.len();
        if m < 8 {
            return Err(Error::Config("harmonic extension needs at least 8 nodes".into()));
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&f| Complex64::new(f, 0.0)).collect();
        // Σ f_j e^{+ikθ_j} gives m·c_{-k}
        FftPlanner::<f64>::new().plan_fft_inverse(m).process(&mut buf);
        let inv = 1.0 / m as f64;
        let c0 = buf[0].re * inv;
        let half = m / 2 - 1;
        let mut coeffs: Vec<Complex64> = (1..=half).map(|k| 2.0 * buf[k] * inv).collect();
        let tail = coeffs[half * 3 / 4..].iter().map(|c| c.norm()).fold(0.0, f64::max);
        if tail > 1e3 * COEFF_CUTOFF {
            return Err(Error::Tolerance(format!(
                "boundary data not resolved by {m} nodes: trailing Fourier coefficient {tail:.3e}"
            )));
        }
        while coeffs.last().is_some_and(|c| c.norm() < 2.0 * COEFF_CUTOFF) {
            coeffs.pop();
        }
        Ok(HarmonicExtension { c0, coeffs })
    }

    pub fn fit<F: Fn(f64) -> f64>(f: F, m: usize) -> Result<Self> {
        let samples: Vec<f64> = (0..m).map(|j| f(2.0 * PI * j as f64 / m as f64)).collect();
        Self::from_samples(&samples)
    }

    /// G(ω), by Horner in 1/ω.
    pub fn eval(&self, w: Complex64) -> Complex64 {
        let x = 1.0 / w;
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = (acc + c) * x;
        }
        acc + self.c0
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }
}
