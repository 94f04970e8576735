//! Tensor-product Gauss–Legendre rules on boxes.

use crate::error::{Error, Result};

/// Default nodes per axis.
pub const DEFAULT_NODES: usize = 32;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess for the i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// One axis of a product rule, mapped onto `[a, b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AxisRule {
    pub fn new(n: usize, a: f64, b: f64) -> Self {
        let (x, w) = gauss_legendre(n);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        Self {
            nodes: x.iter().map(|t| mid + half * t).collect(),
            weights: w.iter().map(|v| half * v).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        sum_compensated(self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    axes: Vec<AxisRule>,
}

impl QuadratureRule {
    /// One rule per axis of `domain`, with `nodes[i]` points on axis `i`.
    pub fn new(nodes: &[usize], domain: &[(f64, f64)]) -> Result<Self> {
        if nodes.len() != domain.len() {
            return Err(Error::DimensionMismatch {
                expected: domain.len(),
                found: nodes.len(),
            });
        }
        if nodes.contains(&0) {
            return Err(Error::Invalid("quadrature needs at least one node per axis".into()));
        }
        Ok(Self {
            axes: nodes
                .iter()
                .zip(domain)
                .map(|(&n, &(a, b))| AxisRule::new(n, a, b))
                .collect(),
        })
    }

    pub fn uniform(n: usize, domain: &[(f64, f64)]) -> Self {
        Self::new(&vec![n.max(1); domain.len()], domain).expect("matching lengths")
    }

    pub fn axes(&self) -> &[AxisRule] {
        &self.axes
    }

    pub fn nodes_per_axis(&self) -> Vec<usize> {
        self.axes.iter().map(AxisRule::len).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(AxisRule::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The `k`-th node of the product grid (last axis fastest) and its weight.
    pub fn point(&self, mut k: usize) -> (Vec<f64>, f64) {
        let mut u = vec![0.0; self.axes.len()];
        let mut w = 1.0;
        for (i, axis) in self.axes.iter().enumerate().rev() {
            let j = k % axis.len();
            k /= axis.len();
            u[i] = axis.nodes[j];
            w *= axis.weights[j];
        }
        (u, w)
    }

    pub fn points(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        (0..self.len()).map(|k| self.point(k))
    }
}

/// Neumaier-compensated sum; the result does not depend on how the terms
/// were produced, only on their order.
pub fn sum_compensated(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}
