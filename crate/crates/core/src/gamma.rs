//! Pointwise operators of the Γ-calculus.
//!
//! All evaluations read a fixed neighbourhood of the point: Δ and Γ read the
//! 1-ball, Γ₂ and Γ̃₂ the 2-ball. Sums run over neighbours in index order.
//!
//! Dense functions (`*_at`, `*_all`) take a value for every vertex of the
//! graph in index order; the [`ScalarField`] wrappers resolve ids and
//! defaults first.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{ScalarField, VertexSet, WeightedGraph};

/// `Δf(x) = (1/μ(x)) Σ_{y∼x} ω_xy (f(y) − f(x))`.
pub fn laplacian_at(g: &WeightedGraph, f: &[f64], x: usize) -> f64 {
    let fx = f[x];
    let s: f64 = g.neighbors(x).iter().map(|&(y, w)| w * (f[y] - fx)).sum();
    s / g.mu()[x]
}

pub fn laplacian_all(g: &WeightedGraph, f: &[f64]) -> Vec<f64> {
    (0..g.num_vertices()).map(|x| laplacian_at(g, f, x)).collect()
}

/// `Γ(f,h)(x) = (1/2μ(x)) Σ_{y∼x} ω_xy (f(y) − f(x))(h(y) − h(x))`.
pub fn gamma_at(g: &WeightedGraph, f: &[f64], h: &[f64], x: usize) -> f64 {
    let (fx, hx) = (f[x], h[x]);
    let s: f64 = g
        .neighbors(x)
        .iter()
        .map(|&(y, w)| w * (f[y] - fx) * (h[y] - hx))
        .sum();
    0.5 * s / g.mu()[x]
}

pub fn gamma_all(g: &WeightedGraph, f: &[f64], h: &[f64]) -> Vec<f64> {
    (0..g.num_vertices()).map(|x| gamma_at(g, f, h, x)).collect()
}

/// Evaluates `op` at `x` and each of its neighbours, leaving other entries 0.
fn on_one_ball(g: &WeightedGraph, x: usize, op: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; g.num_vertices()];
    out[x] = op(x);
    for &(y, _) in g.neighbors(x) {
        out[y] = op(y);
    }
    out
}

/// `2Γ₂(f,h) = ΔΓ(f,h) − Γ(f,Δh) − Γ(Δf,h)`.
pub fn gamma2_at(g: &WeightedGraph, f: &[f64], h: &[f64], x: usize) -> f64 {
    let gam = on_one_ball(g, x, |y| gamma_at(g, f, h, y));
    let lf = on_one_ball(g, x, |y| laplacian_at(g, f, y));
    let lh = on_one_ball(g, x, |y| laplacian_at(g, h, y));
    0.5 * (laplacian_at(g, &gam, x) - gamma_at(g, f, &lh, x) - gamma_at(g, &lf, h, x))
}

pub fn gamma2_all(g: &WeightedGraph, f: &[f64], h: &[f64]) -> Vec<f64> {
    let gam = gamma_all(g, f, h);
    let lf = laplacian_all(g, f);
    let lh = laplacian_all(g, h);
    (0..g.num_vertices())
        .map(|x| 0.5 * (laplacian_at(g, &gam, x) - gamma_at(g, f, &lh, x) - gamma_at(g, &lf, h, x)))
        .collect()
}

/// `Γ̃₂(f) = ½ΔΓ(f) − Γ(f, Δ(f²)/(2f))` for positive `f`.
///
/// Positivity on the 2-ball is the caller's responsibility; see
/// [`gamma2_tilde`] for the checked variant.
pub fn gamma2_tilde_at(g: &WeightedGraph, f: &[f64], x: usize) -> f64 {
    let gam = on_one_ball(g, x, |y| gamma_at(g, f, f, y));
    let q = on_one_ball(g, x, |y| log_drift(g, f, y));
    0.5 * laplacian_at(g, &gam, x) - gamma_at(g, f, &q, x)
}

pub fn gamma2_tilde_all(g: &WeightedGraph, f: &[f64]) -> Vec<f64> {
    let gam = gamma_all(g, f, f);
    let q: Vec<f64> = (0..g.num_vertices()).map(|y| log_drift(g, f, y)).collect();
    (0..g.num_vertices())
        .map(|x| 0.5 * laplacian_at(g, &gam, x) - gamma_at(g, f, &q, x))
        .collect()
}

/// `Δ(f²)(y) / (2f(y))`, evaluated from the differences `f(z) − f(y)`.
fn log_drift(g: &WeightedGraph, f: &[f64], y: usize) -> f64 {
    let fy = f[y];
    let s: f64 = g
        .neighbors(y)
        .iter()
        .map(|&(z, w)| w * (f[z] - fy) * (f[z] + fy))
        .sum();
    s / (2.0 * g.mu()[y] * fy)
}

/// `Δ(log f)(x)` for positive `f`.
pub fn laplacian_log_at(g: &WeightedGraph, f: &[f64], x: usize) -> f64 {
    let lx = f[x].ln();
    let s: f64 = g.neighbors(x).iter().map(|&(y, w)| w * (f[y].ln() - lx)).sum();
    s / g.mu()[x]
}

fn check_positive_on(g: &WeightedGraph, f: &[f64], set: &VertexSet) -> Result<()> {
    match set.indices().iter().find(|&&i| !(f[i] > 0.0)) {
        Some(&i) => Err(Error::NonPositiveField { vertex: g.id(i).to_string(), value: f[i] }),
        None => Ok(()),
    }
}

pub fn laplacian(g: &WeightedGraph, f: &ScalarField, x: &str) -> Result<f64> {
    let x = g.index_of(x)?;
    Ok(laplacian_at(g, &f.to_dense(g)?, x))
}

/// `Δf` on every vertex of `set`, in set order.
pub fn laplacian_on(g: &WeightedGraph, f: &ScalarField, set: &VertexSet) -> Result<Vec<f64>> {
    let dense = f.to_dense(g)?;
    Ok(set.indices().iter().map(|&x| laplacian_at(g, &dense, x)).collect())
}

pub fn gamma(g: &WeightedGraph, f: &ScalarField, h: &ScalarField, x: &str) -> Result<f64> {
    let x = g.index_of(x)?;
    Ok(gamma_at(g, &f.to_dense(g)?, &h.to_dense(g)?, x))
}

pub fn gamma2(g: &WeightedGraph, f: &ScalarField, h: &ScalarField, x: &str) -> Result<f64> {
    let x = g.index_of(x)?;
    Ok(gamma2_at(g, &f.to_dense(g)?, &h.to_dense(g)?, x))
}

pub fn gamma2_tilde(g: &WeightedGraph, f: &ScalarField, x: &str) -> Result<f64> {
    let x = g.index_of(x)?;
    let dense = f.to_dense(g)?;
    check_positive_on(g, &dense, &g.ball_indices(x, 2))?;
    Ok(gamma2_tilde_at(g, &dense, x))
}

/// Quadratic forms of Δ, Γ and Γ₂ at a vertex, as matrices over its 2-ball.
#[derive(Debug, Clone)]
pub struct LocalForms {
    pub vertex: usize,
    pub support: VertexSet,
    /// Row of Δ at the vertex: `Δf(x) = laplacian_row · f`.
    pub laplacian_row: DVector<f64>,
    /// `Γ(f)(x) = fᵀ gamma_form f`.
    pub gamma_form: DMatrix<f64>,
    /// `Γ₂(f)(x) = fᵀ gamma2_form f`.
    pub gamma2_form: DMatrix<f64>,
}

impl LocalForms {
    /// Restricts a dense function to the support, in support order.
    pub fn restrict(&self, f: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.support.len(), self.support.indices().iter().map(|&i| f[i]))
    }

    /// Extends a support vector to a dense function with `fill` elsewhere.
    pub fn extend(&self, v: &DVector<f64>, n: usize, fill: f64) -> Vec<f64> {
        let mut out = vec![fill; n];
        for (k, &i) in self.support.indices().iter().enumerate() {
            out[i] = v[k];
        }
        out
    }
}

pub fn local_forms(g: &WeightedGraph, x: &str) -> Result<LocalForms> {
    Ok(local_forms_at(g, g.index_of(x)?))
}

/// Assembles the forms from per-vertex pieces: with `A_y` the Γ form at `y`,
/// `ℓ_y` the Laplacian row at `y` and `c = ℓ_x`,
/// `Γ₂ = ½(Σ_y c_y A_y − (M + Mᵀ))` where
/// `M = (1/2μ(x)) Σ_{y∼x} ω_xy (e_y − e_x)(ℓ_y − ℓ_x)ᵀ`.
pub fn local_forms_at(g: &WeightedGraph, x: usize) -> LocalForms {
    let support = g.ball_indices(x, 2);
    let n = support.len();
    let pos = |i: usize| support.position(i).expect("vertex within the 2-ball");

    let lap_row = |y: usize| {
        let mut row = DVector::zeros(n);
        let inv = 1.0 / g.mu()[y];
        for &(z, w) in g.neighbors(y) {
            row[pos(z)] += w * inv;
            row[pos(y)] -= w * inv;
        }
        row
    };
    let gamma_form_at = |y: usize| {
        let mut a = DMatrix::zeros(n, n);
        let scale = 0.5 / g.mu()[y];
        let py = pos(y);
        for &(z, w) in g.neighbors(y) {
            let pz = pos(z);
            let c = scale * w;
            a[(pz, pz)] += c;
            a[(py, py)] += c;
            a[(pz, py)] -= c;
            a[(py, pz)] -= c;
        }
        a
    };

    let row_x = lap_row(x);
    let gamma_form = gamma_form_at(x);

    let mut delta_gamma = row_x[pos(x)] * &gamma_form;
    let mut m = DMatrix::zeros(n, n);
    let scale = 0.5 / g.mu()[x];
    for &(y, w) in g.neighbors(x) {
        delta_gamma += row_x[pos(y)] * gamma_form_at(y);
        let mut diff = DVector::zeros(n);
        diff[pos(y)] += 1.0;
        diff[pos(x)] -= 1.0;
        let drow = lap_row(y) - &row_x;
        m += (scale * w) * diff * drow.transpose();
    }
    let mut gamma2_form = 0.5 * (delta_gamma - &m - m.transpose());
    // exact symmetry
    let sym = 0.5 * (&gamma2_form + gamma2_form.transpose());
    gamma2_form = sym;

    LocalForms {
        vertex: x,
        support,
        laplacian_row: row_x,
        gamma_form,
        gamma2_form,
    }
}
