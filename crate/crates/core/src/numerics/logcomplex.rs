use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::sum::ComplexAccumulator;

/// Complex number stored as (natural log of the modulus, argument).
///
/// Zero is the canonical pair (-inf, 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogComplex {
    pub log_mag: f64,
    pub arg: f64,
}

/// Reduce an angle to (-pi, pi].
pub fn normalize_arg(a: f64) -> f64 {
    if !a.is_finite() {
        return a;
    }
    if a > -PI && a <= PI {
        return a;
    }
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex { log_mag: f64::NEG_INFINITY, arg: 0.0 };
    pub const ONE: LogComplex = LogComplex { log_mag: 0.0, arg: 0.0 };

    pub fn new(log_mag: f64, arg: f64) -> Self {
        if log_mag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogComplex { log_mag, arg: normalize_arg(arg) }
    }

    pub fn from_complex(c: Complex64) -> Self {
        lc_from_complex(c.re, c.im)
    }

    pub fn from_real(x: f64) -> Self {
        lc_from_complex(x, 0.0)
    }

    /// e^c for a complex exponent c.
    pub fn exp(c: Complex64) -> Self {
        Self::new(c.re, c.im)
    }

    /// Principal logarithm as a complex number; fails on zero.
    pub fn ln(self) -> Result<Complex64> {
        if self.is_zero() {
            return Err(Error::Domain("logarithm of zero".into()));
        }
        Ok(Complex64::new(self.log_mag, self.arg))
    }

    pub fn is_zero(self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    pub fn to_complex(self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        let m = self.log_mag.exp();
        Complex64::new(m * self.arg.cos(), m * self.arg.sin())
    }

    pub fn modulus(self) -> f64 {
        self.log_mag.exp()
    }

    pub fn conj(self) -> Self {
        if self.is_zero() {
            return self;
        }
        // keep pi fixed so the range stays (-pi, pi]
        let a = if self.arg == PI { PI } else { -self.arg };
        LogComplex { log_mag: self.log_mag, arg: a }
    }

    pub fn mul(self, other: Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_mag + other.log_mag, self.arg + other.arg)
    }

    pub fn div(self, other: Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        if self.is_zero() {
            return Ok(Self::ZERO);
        }
        Ok(Self::new(self.log_mag - other.log_mag, self.arg - other.arg))
    }

    pub fn recip(self) -> Result<Self> {
        Self::ONE.div(self)
    }

    pub fn pow_int(self, n: i64) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        if self.is_zero() {
            return if n > 0 { Self::ZERO } else { LogComplex { log_mag: f64::INFINITY, arg: 0.0 } };
        }
        Self::new(self.log_mag * n as f64, self.arg * n as f64)
    }

    pub fn powf(self, p: f64) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::new(self.log_mag * p, self.arg * p)
    }

    pub fn scale(self, x: f64) -> Self {
        self.mul(Self::from_real(x))
    }

    /// Multiply by e^c.
    pub fn mul_exp(self, c: Complex64) -> Self {
        self.mul(Self::exp(c))
    }

    pub fn add(self, other: Self) -> Self {
        lc_sum(&[self, other])
    }

    pub fn neg(self) -> Self {
        if self.is_zero() {
            return self;
        }
        Self::new(self.log_mag, self.arg + PI)
    }

    /// self / other - 1 computed without cancellation in the exponent.
    pub fn ratio_minus_one(self, other: Self) -> Result<Complex64> {
        let r = self.div(other)?;
        if r.is_zero() {
            return Ok(Complex64::new(-1.0, 0.0));
        }
        Ok(expm1_complex(Complex64::new(r.log_mag, r.arg)))
    }
}

/// e^c - 1 with full relative accuracy for small c.
pub fn expm1_complex(c: Complex64) -> Complex64 {
    let em1 = c.re.exp_m1();
    let (s, co) = c.im.sin_cos();
    let half = (0.5 * c.im).sin();
    let cos_m1 = -2.0 * half * half;
    Complex64::new(em1 * co + cos_m1, (em1 + 1.0) * s)
}

pub fn lc_from_complex(re: f64, im: f64) -> LogComplex {
    if re == 0.0 && im == 0.0 {
        return LogComplex::ZERO;
    }
    let m = re.hypot(im);
    let log_mag = if m.is_finite() && m > 0.0 {
        m.ln()
    } else {
        // rescale to dodge overflow in hypot
        let s = re.abs().max(im.abs());
        s.ln() + (re / s).hypot(im / s).ln()
    };
    LogComplex::new(log_mag, im.atan2(re))
}

pub fn lc_mul(a: LogComplex, b: LogComplex) -> LogComplex {
    a.mul(b)
}

pub fn lc_div(a: LogComplex, b: LogComplex) -> Result<LogComplex> {
    a.div(b)
}

pub fn lc_pow_int(a: LogComplex, n: i64) -> LogComplex {
    a.pow_int(n)
}

/// Sum of log-polar terms: rescale by the largest modulus, accumulate
/// with compensated summation, then restore the scale.
pub fn lc_sum(terms: &[LogComplex]) -> LogComplex {
    let live: Vec<&LogComplex> = terms.iter().filter(|t| !t.is_zero()).collect();
    match live.len() {
        0 => return LogComplex::ZERO,
        1 => return *live[0],
        _ => {}
    }
    let anchor = live.iter().map(|t| t.log_mag).fold(f64::NEG_INFINITY, f64::max);
    if !anchor.is_finite() {
        return LogComplex { log_mag: anchor, arg: 0.0 };
    }
    let mut acc = ComplexAccumulator::default();
    for t in &live {
        let m = (t.log_mag - anchor).exp();
        acc.add(Complex64::new(m * t.arg.cos(), m * t.arg.sin()));
    }
    let s = lc_from_complex(acc.value().re, acc.value().im);
    if s.is_zero() {
        return LogComplex::ZERO;
    }
    LogComplex::new(anchor + s.log_mag, s.arg)
}
