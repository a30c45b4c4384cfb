//! Composite Gauss-Legendre quadrature with frequency-aware panels.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes per panel.
pub const NODES_PER_PANEL: usize = 16;
/// Relative change allowed between a rule and its panel-halved refinement.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-9;
const MAX_DOUBLINGS: usize = 6;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n` from the Tricomi initial guesses.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let n = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = order as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Flattened nodes and weights of a composite rule over `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub panels: usize,
}

impl CompositeRule {
    pub fn new(base: &GaussLegendre, a: f64, b: f64, panels: usize) -> Self {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        let mut points = Vec::with_capacity(panels * base.nodes.len());
        let mut weights = Vec::with_capacity(points.capacity());
        for p in 0..panels {
            let lo = a + p as f64 * width;
            for (x, w) in base.nodes.iter().zip(&base.weights) {
                points.push(lo + 0.5 * width * (x + 1.0));
                weights.push(0.5 * width * w);
            }
        }
        Self {
            points,
            weights,
            panels,
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&t, w)| w * f(t))
            .sum()
    }
}

/// Panels of length at most a quarter period of angular frequency `omega`.
pub fn panel_count(length: f64, omega: f64) -> usize {
    let quarter = PI / (2.0 * omega.abs().max(1e-12));
    ((length / quarter).ceil() as usize).max(1)
}

/// Evaluates `f` on composite rules over `[a, b]`, halving the panel width
/// until two successive results agree to [`CONVERGENCE_TOLERANCE`] relative
/// to their largest entry. Returns the finer result.
pub fn integrate_converged<F>(a: f64, b: f64, fastest_frequency: f64, f: F) -> Result<Vec<f64>>
where
    F: Fn(&CompositeRule) -> Vec<f64>,
{
    let base = GaussLegendre::new(NODES_PER_PANEL);
    let mut panels = panel_count(b - a, fastest_frequency);
    let mut coarse = f(&CompositeRule::new(&base, a, b, panels));
    for _ in 0..MAX_DOUBLINGS {
        panels *= 2;
        let fine = f(&CompositeRule::new(&base, a, b, panels));
        let scale = fine.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = fine
            .iter()
            .zip(&coarse)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        if diff <= CONVERGENCE_TOLERANCE * scale || scale == 0.0 {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::QuadratureNotConverged(format!(
        "no agreement after {panels} panels on [{a}, {b}]"
    )))
}

/// Scalar convenience wrapper around [`integrate_converged`].
pub fn integrate_scalar<F: Fn(f64) -> f64>(
    a: f64,
    b: f64,
    fastest_frequency: f64,
    f: F,
) -> Result<f64> {
    integrate_converged(a, b, fastest_frequency, |rule| vec![rule.integrate(&f)]).map(|v| v[0])
}
