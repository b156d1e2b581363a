//! Tensor-product quadrature on the cube `(-a, a)^d` and the weighted
//! unordered-pair grid that discretizes the symmetric two-particle space.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadratureRule {
    Midpoint,
    GaussLegendre,
}

impl QuadratureRule {
    pub fn name(self) -> &'static str {
        match self {
            QuadratureRule::Midpoint => "midpoint",
            QuadratureRule::GaussLegendre => "gauss-legendre",
        }
    }
}

impl std::str::FromStr for QuadratureRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(QuadratureRule::Midpoint),
            "gauss-legendre" | "gl" => Ok(QuadratureRule::GaussLegendre),
            other => Err(Error::InvalidGrid(format!("unknown quadrature rule `{other}`"))),
        }
    }
}

/// One-dimensional rule on `(-a, a)`, nodes ascending.
pub fn rule_1d(a: f64, n: usize, rule: QuadratureRule) -> (Vec<f64>, Vec<f64>) {
    match rule {
        QuadratureRule::Midpoint => {
            let h = 2.0 * a / n as f64;
            let nodes = (0..n).map(|k| -a + (k as f64 + 0.5) * h).collect();
            (nodes, vec![h; n])
        }
        QuadratureRule::GaussLegendre => gauss_legendre_on(-a, a, n),
    }
}

/// Gauss-Legendre nodes and weights on `[lo, hi]`, nodes ascending.
pub fn gauss_legendre_on(lo: f64, hi: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let quad = GaussLegendre::new(NonZeroUsize::new(n.max(1)).expect("n >= 1"));
    let mut pairs: Vec<(f64, f64)> = quad.as_node_weight_pairs().to_vec();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    pairs
        .into_iter()
        .map(|(t, w)| (mid + half * t, half * w))
        .unzip()
}

/// Quadrature grid on `Omega = (-a, a)^d`.
///
/// Points are stored row-major: the last coordinate varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    d: usize,
    a: f64,
    rule: QuadratureRule,
    n_per_dim: usize,
    axis: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// Builds the tensor-product grid (`make_grid`).
    pub fn new(d: usize, a: f64, n_per_dim: usize, rule: QuadratureRule) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidGrid("dimension must be positive".into()));
        }
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidGrid(format!("half-width a = {a} must be positive")));
        }
        if n_per_dim < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 nodes per dimension, got {n_per_dim}"
            )));
        }
        let (axis, axis_w) = rule_1d(a, n_per_dim, rule);
        let total = n_per_dim
            .checked_pow(d as u32)
            .ok_or_else(|| Error::InvalidGrid("grid too large".into()))?;

        let mut nodes = Vec::with_capacity(total * d);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            let mut w = 1.0;
            for &k in &idx {
                nodes.push(axis[k]);
                w *= axis_w[k];
            }
            weights.push(w);
            for pos in (0..d).rev() {
                idx[pos] += 1;
                if idx[pos] < n_per_dim {
                    break;
                }
                idx[pos] = 0;
            }
        }

        Ok(Self {
            d,
            a,
            rule,
            n_per_dim,
            axis,
            nodes,
            weights,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn n_per_dim(&self) -> usize {
        self.n_per_dim
    }

    /// Total number of nodes `N = n_per_dim^d`.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.d..(i + 1) * self.d]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.nodes.chunks_exact(self.d)
    }

    /// The one-dimensional nodes shared by every axis.
    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    /// Largest gap between adjacent one-dimensional nodes.
    pub fn spacing(&self) -> f64 {
        self.axis
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Measure of `Omega`, `(2a)^d`.
    pub fn volume(&self) -> f64 {
        (2.0 * self.a).powi(self.d as i32)
    }

    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let mut idx = vec![0; self.d];
        for pos in (0..self.d).rev() {
            idx[pos] = i % self.n_per_dim;
            i /= self.n_per_dim;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &k| acc * self.n_per_dim + k)
    }

    /// Whether `x` lies in the open cube.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.d && x.iter().all(|c| c.abs() < self.a)
    }
}

/// Unordered node pairs `{i, j}` (`i <= j`) with weights
/// `W_ij = (2 - delta_ij) w_i w_j`, so that for symmetric `f`
/// `sum_{i<=j} W_ij |f_ij|^2` is the quadrature of `||f||^2` over `Omega^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGrid {
    base: Grid,
    pairs: Vec<(usize, usize)>,
    pair_weights: Vec<f64>,
}

impl PairGrid {
    /// Enumerates the pairs (`make_pair_grid`).
    pub fn new(base: &Grid) -> Self {
        let n = base.len();
        let mut pairs = Vec::with_capacity(n * (n + 1) / 2);
        let mut pair_weights = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                pairs.push((i, j));
                let mult = if i == j { 1.0 } else { 2.0 };
                pair_weights.push(mult * base.weight(i) * base.weight(j));
            }
        }
        Self {
            base: base.clone(),
            pairs,
            pair_weights,
        }
    }

    pub fn base(&self) -> &Grid {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair_weights(&self) -> &[f64] {
        &self.pair_weights
    }

    /// Position of the unordered pair `{i, j}` in [`PairGrid::pairs`].
    pub fn index_of(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let n = self.base.len();
        // rows r < i contribute n - r pairs each
        i * n - i * (i.saturating_sub(1)) / 2 + (j - i)
    }
}
