use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Polynomial with exact rational coefficients, ascending degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolynomialQ {
    coeffs: Vec<BigRational>,
}

impl PolynomialQ {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PolynomialQ { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    pub fn zero() -> Self {
        PolynomialQ { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// ζ - 1
    pub fn zeta_minus_one() -> Self {
        Self::from_ints(&[-1, 1])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero);
                let b = other.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero);
                a + b
            })
            .collect();
        Self::new(c)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut c = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut r = Self::constant(BigRational::one());
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Exact division by (ζ - 1); None if the remainder is nonzero.
    pub fn div_zeta_minus_one(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        // synthetic division at 1, highest degree first
        let n = self.coeffs.len();
        let mut q = vec![BigRational::zero(); n - 1];
        let mut carry = BigRational::zero();
        for i in (0..n).rev() {
            let v = &self.coeffs[i] + &carry;
            if i == 0 {
                return if v.is_zero() { Some(Self::new(q)) } else { None };
            }
            q[i - 1] = v.clone();
            carry = v;
        }
        unreachable!()
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn all_integers(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    pub fn all_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }
}

impl fmt::Display for PolynomialQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{k}")?,
            }
        }
        Ok(())
    }
}

pub fn poly_derivative(p: &PolynomialQ) -> PolynomialQ {
    PolynomialQ::new(
        p.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
            .collect(),
    )
}

pub fn poly_eval(p: &PolynomialQ, z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in p.coeffs.iter().rev() {
        acc = acc * z + c.to_f64().unwrap_or(f64::NAN);
    }
    acc
}

/// numerator / (ζ - 1)^pole_order, reduced so that the numerator does
/// not vanish at 1 unless the pole order is zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalAtOne {
    numerator: PolynomialQ,
    pole_order: usize,
}

impl RationalAtOne {
    pub fn new(numerator: PolynomialQ, pole_order: usize) -> Self {
        let mut num = numerator;
        let mut m = pole_order;
        if num.is_zero() {
            return RationalAtOne { numerator: num, pole_order: 0 };
        }
        while m > 0 {
            match num.div_zeta_minus_one() {
                Some(q) => {
                    num = q;
                    m -= 1;
                }
                None => break,
            }
        }
        RationalAtOne { numerator: num, pole_order: m }
    }

    pub fn numerator(&self) -> &PolynomialQ {
        &self.numerator
    }

    pub fn pole_order(&self) -> usize {
        self.pole_order
    }

    pub fn add(&self, other: &Self) -> Self {
        let m = self.pole_order.max(other.pole_order);
        let d = PolynomialQ::zeta_minus_one();
        let a = self.numerator.mul(&d.pow(m - self.pole_order));
        let b = other.numerator.mul(&d.pow(m - other.pole_order));
        Self::new(a.add(&b), m)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        Self::new(self.numerator.scale(s), self.pole_order)
    }
}

impl fmt::Display for RationalAtOne {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pole_order == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "[{}] / (z-1)^{}", self.numerator, self.pole_order)
        }
    }
}

pub fn rational_eval(r: &RationalAtOne, z: Complex64) -> Result<Complex64> {
    let num = poly_eval(&r.numerator, z);
    if r.pole_order == 0 {
        return Ok(num);
    }
    let d = z - 1.0;
    if d.norm() == 0.0 {
        return Err(Error::Pole(format!("rational function with pole of order {} evaluated at 1", r.pole_order)));
    }
    Ok(num / d.powi(r.pole_order as i32))
}
