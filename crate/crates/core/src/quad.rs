//! Quadrature rules and order-independent summation.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::Vec3;

/// Gauss–Legendre nodes and weights mapped to an interval.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// `n`-point Gauss–Legendre rule on `[a, b]`, nodes ascending.
    pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Rule {
        let n = NonZeroUsize::new(n.max(1)).expect("non-zero");
        let gl = GaussLegendre::new(n);
        let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        Rule {
            nodes: pairs.iter().map(|p| mid + half * p.0).collect(),
            weights: pairs.iter().map(|p| half * p.1).collect(),
        }
    }

    /// Composite rule: `panels` equal panels of `per_panel`-point Gauss–Legendre.
    pub fn composite(panels: usize, per_panel: usize, a: f64, b: f64) -> Rule {
        let panels = panels.max(1);
        let base = Rule::gauss_legendre(per_panel, 0.0, 1.0);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * per_panel);
        let mut weights = Vec::with_capacity(panels * per_panel);
        for p in 0..panels {
            let lo = a + h * p as f64;
            for (x, w) in base.nodes.iter().zip(&base.weights) {
                nodes.push(lo + h * x);
                weights.push(h * w);
            }
        }
        Rule { nodes, weights }
    }

    /// Periodic trapezoid rule on `[0, 2π)`.
    pub fn periodic(n: usize) -> Rule {
        let n = n.max(1);
        let h = std::f64::consts::TAU / n as f64;
        Rule {
            nodes: (0..n).map(|i| h * i as f64).collect(),
            weights: vec![h; n],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .collect();
        pairwise_sum(&terms)
    }
}

/// Pairwise (cascade) summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Product rule on the unit sphere: Gauss–Legendre in cos θ, trapezoid in φ.
/// Weights sum to 4π.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub dirs: Vec<Vec3>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// Directions are expressed in the orthonormal frame `(e1, e2, axis)`.
    pub fn new(n_polar: usize, n_azimuth: usize, axis: &Vec3) -> SphereRule {
        let axis = axis.normalize();
        let e1 = crate::any_orthogonal(&axis);
        let e2 = axis.cross(&e1);
        let ct = Rule::gauss_legendre(n_polar, -1.0, 1.0);
        let ph = Rule::periodic(n_azimuth);
        let mut dirs = Vec::with_capacity(ct.len() * ph.len());
        let mut weights = Vec::with_capacity(ct.len() * ph.len());
        for (c, wc) in ct.nodes.iter().zip(&ct.weights) {
            let s = (1.0 - c * c).max(0.0).sqrt();
            for (p, wp) in ph.nodes.iter().zip(&ph.weights) {
                dirs.push(axis * *c + e1 * (s * p.cos()) + e2 * (s * p.sin()));
                weights.push(wc * wp);
            }
        }
        SphereRule { dirs, weights }
    }
}
