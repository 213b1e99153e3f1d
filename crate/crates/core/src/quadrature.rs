//! Composite Gauss–Legendre quadrature with panel doubling.

use crate::error::{Error, Result};

/// Nodes and weights of the `order`-point rule on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates a vector-valued `f` over `[a, b]` with `panels` equal panels.
pub fn composite<F>(f: &F, a: f64, b: f64, order: usize, panels: usize) -> Vec<f64>
where
    F: Fn(f64) -> Vec<f64>,
{
    let (nodes, weights) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut acc: Vec<f64> = Vec::new();
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (&x, &w) in nodes.iter().zip(&weights) {
            let v = f(mid + 0.5 * h * x);
            if acc.is_empty() {
                acc = vec![0.0; v.len()];
            }
            for (s, vi) in acc.iter_mut().zip(v) {
                *s += 0.5 * h * w * vi;
            }
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub order: usize,
    pub initial_panels: usize,
    /// Accept when successive refinements agree to `accept_tol · max(1, |I|)`.
    pub accept_tol: f64,
    /// After `max_doublings`, fail if they still disagree by more than this.
    pub fail_tol: f64,
    pub max_doublings: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            order: 8,
            initial_panels: 8,
            accept_tol: 1e-10,
            fail_tol: 1e-9,
            max_doublings: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult {
    pub values: Vec<f64>,
    pub panels: usize,
    /// Largest componentwise change in the last doubling.
    pub last_change: f64,
}

/// Doubles the panel count until two successive estimates agree.
pub fn adaptive<F>(f: &F, a: f64, b: f64, opts: &QuadratureOptions) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Vec<f64>,
{
    let mut panels = opts.initial_panels.max(1);
    let mut prev = composite(f, a, b, opts.order, panels);
    let mut change = f64::INFINITY;
    for _ in 0..opts.max_doublings {
        panels *= 2;
        let next = composite(f, a, b, opts.order, panels);
        change = prev
            .iter()
            .zip(&next)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        let scale = next.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prev = next;
        if change <= opts.accept_tol * scale {
            return Ok(QuadratureResult { values: prev, panels, last_change: change });
        }
    }
    let scale = prev.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if change > opts.fail_tol * scale || !change.is_finite() {
        return Err(Error::Quadrature { delta: change });
    }
    Ok(QuadratureResult { values: prev, panels, last_change: change })
}
