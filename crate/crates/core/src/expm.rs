//! Matrix exponential by scaling and squaring of a truncated Taylor series.
//!
//! Works on the non-symmetric matrix of Δ directly, so it shares no code
//! path with the spectral semigroup and serves as its cross-check.

use nalgebra::DMatrix;

use crate::graph::WeightedGraph;

/// Dense matrix of Δ: `(Δf)_x = Σ_y L[x,y] f_y`.
pub fn laplacian_matrix(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.num_vertices();
    let mut l = DMatrix::zeros(n, n);
    for x in 0..n {
        let inv = 1.0 / g.mu()[x];
        for &(y, w) in g.neighbors(x) {
            l[(x, y)] += w * inv;
            l[(x, x)] -= w * inv;
        }
    }
    l
}

/// `e^{A}`.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = (0..n)
        .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    // scale until ‖A/2^s‖ ≤ 1/2, where 20 Taylor terms reach round-off
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.5 {
        scaled_norm /= 2.0;
        squarings += 1;
    }
    let scaled = a / 2f64.powi(squarings as i32);
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..=20 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `e^{tΔ}` of the whole graph.
pub fn heat_semigroup_matrix(g: &WeightedGraph, t: f64) -> DMatrix<f64> {
    expm(&(laplacian_matrix(g) * t))
}
