use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadKind {
    GaussLegendre,
    PeriodicTrapezoid,
    /// Gauss-Legendre on [0, R] with the polar Jacobian r folded into the weights.
    RadialLaguerreLike,
}

#[derive(Clone, Debug)]
pub struct Quadrature1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: QuadKind,
}

/// Legendre P_m(x) and its derivative by the three-term recurrence.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

pub fn quad_gauss_legendre(m: usize) -> Quadrature1D {
    assert!(m >= 1, "Gauss rule needs at least one node");
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let half = m.div_ceil(2);
    for i in 0..half {
        // Tricomi's initial guess, then Newton
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Quadrature1D { nodes, weights, kind: QuadKind::GaussLegendre }
}

pub fn quad_trapezoid_periodic(m: usize) -> Quadrature1D {
    assert!(m >= 1);
    let h = 2.0 * PI / m as f64;
    Quadrature1D {
        nodes: (0..m).map(|k| k as f64 * h).collect(),
        weights: vec![h; m],
        kind: QuadKind::PeriodicTrapezoid,
    }
}

/// Gauss-Legendre on [0, r_max] with weights w_i * r_i, for integrals of f(r) r dr.
pub fn quad_radial(m: usize, r_max: f64) -> Quadrature1D {
    let g = quad_gauss_legendre(m).mapped(0.0, r_max);
    let weights = g.nodes.iter().zip(&g.weights).map(|(r, w)| r * w).collect();
    Quadrature1D { nodes: g.nodes, weights, kind: QuadKind::RadialLaguerreLike }
}

impl Quadrature1D {
    /// Affine image of a rule on [-1, 1].
    pub fn mapped(&self, a: f64, b: f64) -> Quadrature1D {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        Quadrature1D {
            nodes: self.nodes.iter().map(|x| c + h * x).collect(),
            weights: self.weights.iter().map(|w| h * w).collect(),
            kind: self.kind,
        }
    }

    /// Composite Gauss-Legendre with `panels` equal panels of `m` nodes each.
    pub fn composite(a: f64, b: f64, panels: usize, m: usize) -> Quadrature1D {
        let base = quad_gauss_legendre(m);
        let mut nodes = Vec::with_capacity(panels * m);
        let mut weights = Vec::with_capacity(panels * m);
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let q = base.mapped(lo, lo + h);
            nodes.extend(q.nodes);
            weights.extend(q.weights);
        }
        Quadrature1D { nodes, weights, kind: QuadKind::GaussLegendre }
    }

    /// Composite rule on arbitrary breakpoints.
    pub fn on_breaks(breaks: &[f64], m: usize) -> Quadrature1D {
        let base = quad_gauss_legendre(m);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in breaks.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let q = base.mapped(w[0], w[1]);
            nodes.extend(q.nodes);
            weights.extend(q.weights);
        }
        Quadrature1D { nodes, weights, kind: QuadKind::GaussLegendre }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let terms: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).collect();
        crate::numerics::sum::pairwise_sum_real(&terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_rules() {
        let g1 = quad_gauss_legendre(1);
        assert_eq!(g1.nodes, vec![0.0]);
        assert!((g1.weights[0] - 2.0).abs() < 1e-15);
        let g2 = quad_gauss_legendre(2);
        assert!((g2.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((g2.nodes[0] + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((g2.weights[0] - 1.0).abs() < 1e-15 && (g2.weights[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_low_harmonics() {
        let t = quad_trapezoid_periodic(8);
        let v = t.integrate(|x| x.cos().powi(2));
        assert!((v - PI).abs() < 1e-14);
        assert!((t.weights.iter().sum::<f64>() - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_and_positive() {
        for m in [1, 2, 5, 16, 33, 64, 128] {
            let g = quad_gauss_legendre(m);
            assert!(g.weights.iter().all(|&w| w > 0.0));
            assert!((g.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14, "m={m}");
        }
    }

    #[test]
    fn nodes_are_legendre_roots() {
        for m in [7, 20, 50] {
            let g = quad_gauss_legendre(m);
            for &x in &g.nodes {
                assert!(legendre_with_derivative(m, x).0.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn radial_rule_reproduces_area() {
        let r = quad_radial(12, 2.0);
        assert!((r.integrate(|_| 1.0) - 2.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn exact_for_degree_2m_minus_1(m in 1usize..40, d in 0usize..80) {
            prop_assume!(d < 2 * m);
            let g = quad_gauss_legendre(m);
            let v = g.integrate(|x| x.powi(d as i32));
            let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
            prop_assert!((v - exact).abs() < 1e-13);
        }
    }
}
