#![allow(dead_code)]

use cdforge::generate::{generate, Family, GenerateParams};
use cdforge::rng::{seeded, Rng};
use cdforge::{ScalarField, WeightedGraph};
use rand::Rng as _;

/// P₂, K₃, S₄, C₅, Q₃.
pub fn corpus() -> Vec<(&'static str, WeightedGraph)> {
    let g = |family, params: GenerateParams| generate(family, &params).unwrap();
    vec![
        ("P2", g(Family::Path, GenerateParams::with_n(2))),
        ("K3", g(Family::Complete, GenerateParams::with_n(3))),
        ("S4", g(Family::Star, GenerateParams::with_n(4))),
        ("C5", g(Family::Cycle, GenerateParams::with_n(5))),
        ("Q3", g(Family::Hypercube, GenerateParams::with_dim(3))),
    ]
}

/// Connected graph on `n` vertices: a random tree plus extra edges with
/// probability `p`, weights and measures in `[0.5, 2]`.
pub fn random_graph(rng: &mut Rng, n: usize, p: f64) -> WeightedGraph {
    let ids: Vec<String> = (0..n).map(|i| format!("v{i:02}")).collect();
    let vertices: Vec<(String, f64)> = ids.iter().map(|id| (id.clone(), rng.gen_range(0.5..2.0))).collect();
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((ids[j].clone(), ids[i].clone(), rng.gen_range(0.5..2.0)));
    }
    for i in 0..n {
        for j in i + 1..n {
            let in_tree = edges.iter().any(|(a, b, _)| (a == &ids[i] && b == &ids[j]) || (a == &ids[j] && b == &ids[i]));
            if !in_tree && rng.gen_bool(p) {
                edges.push((ids[i].clone(), ids[j].clone(), rng.gen_range(0.5..2.0)));
            }
        }
    }
    WeightedGraph::new(&vertices, &edges).unwrap()
}

pub fn random_positive(rng: &mut Rng, g: &WeightedGraph, lo: f64, hi: f64) -> Vec<f64> {
    (0..g.num_vertices()).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn random_field(rng: &mut Rng, g: &WeightedGraph) -> Vec<f64> {
    (0..g.num_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn positive_field(rng: &mut Rng, g: &WeightedGraph) -> ScalarField {
    ScalarField::from_dense(g, &random_positive(rng, g, 0.5, 3.0))
}

pub fn rng(seed: u64) -> Rng {
    seeded(seed)
}

/// Δ assembled from the edge list.
pub fn oracle_laplacian(g: &WeightedGraph, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; g.num_vertices()];
    for &(u, v, w) in g.edges() {
        out[u] += w * (f[v] - f[u]);
        out[v] += w * (f[u] - f[v]);
    }
    out.iter().zip(g.mu()).map(|(s, m)| s / m).collect()
}

/// Γ(f,h) = ½(Δ(fh) − fΔh − hΔf).
pub fn oracle_gamma(g: &WeightedGraph, f: &[f64], h: &[f64]) -> Vec<f64> {
    let fh: Vec<f64> = f.iter().zip(h).map(|(a, b)| a * b).collect();
    let (lfh, lf, lh) = (oracle_laplacian(g, &fh), oracle_laplacian(g, f), oracle_laplacian(g, h));
    (0..f.len()).map(|x| 0.5 * (lfh[x] - f[x] * lh[x] - h[x] * lf[x])).collect()
}

/// 2Γ₂(f,h) = ΔΓ(f,h) − Γ(f,Δh) − Γ(Δf,h).
pub fn oracle_gamma2(g: &WeightedGraph, f: &[f64], h: &[f64]) -> Vec<f64> {
    let (lf, lh) = (oracle_laplacian(g, f), oracle_laplacian(g, h));
    let a = oracle_laplacian(g, &oracle_gamma(g, f, h));
    let b = oracle_gamma(g, f, &lh);
    let c = oracle_gamma(g, &lf, h);
    (0..f.len()).map(|x| 0.5 * (a[x] - b[x] - c[x])).collect()
}
