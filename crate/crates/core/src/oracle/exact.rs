use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Moments of e^{-n(α|z|² + β Re z²)} normalized so that M_00 = 1, exact.
#[derive(Clone, Debug)]
pub struct ExactMoments {
    /// m[j][k] = M_{jk}/M_00 for j ≤ max_degree + 1, k ≤ max_degree
    pub m: Vec<Vec<BigRational>>,
    /// true M_00 = 1/(n √(α² − β²)) in the dA = dx dy/π normalization
    pub m00: f64,
}

fn to_rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Config(format!("non-finite coefficient {x}")))
}

pub fn ratio_to_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    match x.to_f64() {
        Some(v) if v.is_finite() && v != 0.0 => v,
        _ => {
            // scale by powers of two when the quotient leaves the f64 range
            let nb = x.numer().bits() as i64;
            let db = x.denom().bits() as i64;
            let shift = nb - db;
            let scaled = if shift > 0 {
                x / BigRational::from_integer(BigInt::one() << shift as usize)
            } else {
                x * BigRational::from_integer(BigInt::one() << (-shift) as usize)
            };
            scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
        }
    }
}

pub fn exact_moments(alpha: f64, beta: f64, n: usize, max_degree: usize) -> Result<ExactMoments> {
    if !(alpha > beta.abs()) {
        return Err(Error::Config(format!("quadratic weight needs α > |β|, got α={alpha}, β={beta}")));
    }
    let a = to_rational(alpha)?;
    let b = to_rational(beta)?;
    let nr = BigRational::from_integer(BigInt::from(n));
    let rows = max_degree + 2;
    // row 0 must reach column 2·(rows − 1) + max_degree for the row recurrence
    let kmax = 2 * rows + max_degree + 2;
    let det = &a * &a - &b * &b;
    let mut row0 = vec![BigRational::zero(); kmax + 1];
    row0[0] = BigRational::one();
    for k in 1..kmax {
        // M_{0,k+1} = −β k M_{0,k−1} / (n(α² − β²))
        if k % 2 == 1 {
            let kk = BigRational::from_integer(BigInt::from(k));
            row0[k + 1] = -(&b * kk * &row0[k - 1]) / (&nr * &det);
        }
    }
    let mut m = vec![row0];
    for j in 0..rows - 1 {
        let prev = &m[j];
        let len = prev.len() - 1;
        let mut next = vec![BigRational::zero(); len];
        for (k, slot) in next.iter_mut().enumerate() {
            // M_{j+1,k} = (k M_{j,k−1} − nβ M_{j,k+1}) / (nα)
            let mut v = -(&nr * &b * &prev[k + 1]);
            if k > 0 {
                v += BigRational::from_integer(BigInt::from(k)) * &prev[k - 1];
            }
            *slot = v / (&nr * &a);
        }
        m.push(next);
    }
    for row in m.iter_mut() {
        row.truncate(max_degree + 1);
    }
    let m00 = 1.0 / (n as f64 * (alpha * alpha - beta * beta).sqrt());
    Ok(ExactMoments { m, m00 })
}

pub(crate) struct ExactBasis {
    pub p0: f64,
    pub h: Vec<Vec<Complex64>>,
    pub coeffs: Vec<Vec<Complex64>>,
    pub cond: f64,
    /// L D Lᵀ reproduces the Gram matrix exactly
    pub exact_identity: bool,
}

fn mul_opt(a: &BigRational, b: &BigRational) -> Option<BigRational> {
    if a.is_zero() || b.is_zero() {
        None
    } else {
        Some(a * b)
    }
}

/// Exact L D Lᵀ of the Gram matrix, monic orthogonal polynomials and their recurrence.
pub(crate) fn exact_basis(mom: &ExactMoments, max_degree: usize) -> Result<ExactBasis> {
    let dim = max_degree + 1;
    let g = |i: usize, j: usize| &mom.m[i][j];
    let mut l = vec![vec![BigRational::zero(); dim]; dim];
    let mut d = vec![BigRational::zero(); dim];
    for j in 0..dim {
        let mut s = g(j, j).clone();
        for k in 0..j {
            if let Some(t) = mul_opt(&l[j][k], &l[j][k]) {
                s -= t * &d[k];
            }
        }
        if s <= BigRational::zero() {
            return Err(Error::Precision(format!("exact Gram matrix lost positivity at degree {j}")));
        }
        d[j] = s;
        l[j][j] = BigRational::one();
        for i in j + 1..dim {
            let mut t = g(i, j).clone();
            for k in 0..j {
                if let Some(p) = mul_opt(&l[i][k], &l[j][k]) {
                    t -= p * &d[k];
                }
            }
            l[i][j] = if t.is_zero() { t } else { t / &d[j] };
        }
    }
    // rows of L⁻¹ are the monic orthogonal polynomials
    let mut linv = vec![vec![BigRational::zero(); dim]; dim];
    for i in 0..dim {
        linv[i][i] = BigRational::one();
        for j in (0..i).rev() {
            let mut s = BigRational::zero();
            for k in j + 1..=i {
                if let Some(p) = mul_opt(&l[k][j], &linv[i][k]) {
                    s += p;
                }
            }
            linv[i][j] = -s;
        }
    }
    let mut exact_identity = true;
    for i in 0..dim {
        for j in 0..=i {
            let mut s = BigRational::zero();
            for k in 0..=j {
                if let Some(p) = mul_opt(&l[i][k], &l[j][k]) {
                    s += p * &d[k];
                }
            }
            if &s != g(i, j) {
                exact_identity = false;
            }
        }
    }
    // ⟨z p_j, p_i⟩ = Σ_ab L⁻¹_ja L⁻¹_ib M_{a+1,b}
    let mut t = vec![vec![BigRational::zero(); dim]; dim];
    for j in 0..dim - 1 {
        for b in 0..dim {
            let mut s = BigRational::zero();
            for a in 0..=j {
                if let Some(p) = mul_opt(&linv[j][a], &mom.m[a + 1][b]) {
                    s += p;
                }
            }
            t[j][b] = s;
        }
    }
    let df: Vec<f64> = d.iter().map(ratio_to_f64).collect();
    let mut h = Vec::with_capacity(max_degree);
    for j in 0..max_degree {
        let mut col = vec![Complex64::new(0.0, 0.0); j + 2];
        for (i, c) in col.iter_mut().enumerate().take(j + 1) {
            let mut s = BigRational::zero();
            for b in 0..=i {
                if let Some(p) = mul_opt(&t[j][b], &linv[i][b]) {
                    s += p;
                }
            }
            *c = Complex64::new(ratio_to_f64(&s) / (df[i] * df[j]).sqrt(), 0.0);
        }
        col[j + 1] = Complex64::new(ratio_to_f64(&(&d[j + 1] / &d[j])).sqrt(), 0.0);
        h.push(col);
    }
    let p0 = 1.0 / mom.m00.sqrt();
    let coeffs: Vec<Vec<Complex64>> = (0..dim)
        .map(|j| {
            let s = 1.0 / (mom.m00 * df[j]).sqrt();
            (0..=j).map(|a| Complex64::new(ratio_to_f64(&linv[j][a]) * s, 0.0)).collect()
        })
        .collect();
    // G⁻¹ = L⁻ᵀ D⁻¹ L⁻¹, infinity-norm condition number after Jacobi scaling
    let diag: Vec<f64> = (0..dim).map(|i| ratio_to_f64(g(i, i))).collect();
    let scaled: Vec<Vec<BigRational>> = (0..dim).map(|j| linv[j].iter().map(|x| x / &d[j]).collect()).collect();
    let mut norm_g: f64 = 0.0;
    let mut norm_inv: f64 = 0.0;
    for a in 0..dim {
        let mut rg = 0.0;
        let mut ri = 0.0;
        for b in 0..dim {
            let sc = (diag[a] * diag[b]).sqrt();
            rg += (ratio_to_f64(g(a, b)) / sc).abs();
            let mut s = BigRational::zero();
            for j in a.max(b)..dim {
                if let Some(p) = mul_opt(&scaled[j][a], &linv[j][b]) {
                    s += p;
                }
            }
            ri += (ratio_to_f64(&s) * sc).abs();
        }
        norm_g = norm_g.max(rg);
        norm_inv = norm_inv.max(ri);
    }
    Ok(ExactBasis { p0, h, coeffs, cond: norm_g * norm_inv, exact_identity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ln_factorial;

    #[test]
    fn ginibre_moments_are_factorials() {
        let n = 7;
        let mom = exact_moments(1.0, 0.0, n, 10).unwrap();
        for j in 0..=10 {
            for k in 0..=10 {
                let v = ratio_to_f64(&mom.m[j][k]) * mom.m00;
                if j == k {
                    let want = (ln_factorial(j) - (j as f64 + 1.0) * (n as f64).ln()).exp();
                    assert!((v / want - 1.0).abs() < 1e-14, "j={j}");
                } else {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn elliptic_low_moments() {
        // Q = x² + 3y², compared against Gaussian integrals in x and y
        let (a, b) = (1.0, 3.0);
        let n = 5;
        let mom = exact_moments(0.5 * (a + b), 0.5 * (a - b), n, 4).unwrap();
        let nf = n as f64;
        let m00 = 1.0 / (nf * (a * b).sqrt());
        assert!((mom.m00 - m00).abs() < 1e-16);
        // ⟨x²⟩ = 1/(2na), ⟨y²⟩ = 1/(2nb)
        let x2 = 1.0 / (2.0 * nf * a);
        let y2 = 1.0 / (2.0 * nf * b);
        let m02 = ratio_to_f64(&mom.m[0][2]);
        let m11 = ratio_to_f64(&mom.m[1][1]);
        assert!((m02 - (x2 - y2)).abs() < 1e-15);
        assert!((m11 - (x2 + y2)).abs() < 1e-15);
        // ⟨|z|⁴⟩ = 3⟨x²⟩² + 2⟨x²⟩⟨y²⟩ + 3⟨y²⟩²
        let m22 = ratio_to_f64(&mom.m[2][2]);
        assert!((m22 - (3.0 * x2 * x2 + 2.0 * x2 * y2 + 3.0 * y2 * y2)).abs() < 1e-15);
    }

    #[test]
    fn exact_factorization_is_exact() {
        let mom = exact_moments(2.0, -1.0, 20, 20).unwrap();
        let eb = exact_basis(&mom, 20).unwrap();
        assert!(eb.exact_identity);
        assert!(eb.cond > 1.0 && eb.cond.is_finite());
        for (j, col) in eb.h.iter().enumerate() {
            assert!(col[j + 1].re > 0.0);
            for (i, c) in col.iter().enumerate().take(j + 1) {
                if (i + j) % 2 == 0 {
                    assert_eq!(*c, Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn huge_ratios_convert() {
        let big = BigRational::new(BigInt::one() << 1500usize, BigInt::one() << 1490usize);
        assert_eq!(ratio_to_f64(&big), 1024.0);
        let tiny = BigRational::new(BigInt::from(3) << 1200usize, BigInt::one() << 2200usize);
        assert!((ratio_to_f64(&tiny) / (3.0 * 2f64.powi(-1000)) - 1.0).abs() < 1e-15);
    }
}
