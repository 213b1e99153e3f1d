mod common;

use cdforge::generate::{generate, Family, GenerateParams};
use cdforge::graph::parse_graph;
use cdforge::{VertexSet, WeightedGraph};
use proptest::prelude::*;

use common::{random_graph, rng};

fn graph_strategy(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (any::<u64>(), 1..=max_n, 0.0..0.6f64).prop_map(|(seed, n, p)| random_graph(&mut rng(seed), n, p))
}

/// `m(x)` accumulated from the edge list rather than the adjacency.
fn degrees_from_edges(g: &WeightedGraph) -> Vec<f64> {
    let mut m = vec![0.0; g.num_vertices()];
    for &(u, v, w) in g.edges() {
        m[u] += w;
        m[v] += w;
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn degrees_and_d_mu_recompute(g in graph_strategy(30)) {
        let m = degrees_from_edges(&g);
        let mut d_mu = 0.0f64;
        for x in 0..g.num_vertices() {
            prop_assert!((m[x] - g.degree(x)).abs() <= 1e-12 * m[x].max(1.0));
            let from_neighbors: f64 = g.neighbors(x).iter().map(|&(_, w)| w).sum();
            prop_assert!((from_neighbors - m[x]).abs() <= 1e-12 * m[x].max(1.0));
            d_mu = d_mu.max(m[x] / g.mu()[x]);
        }
        prop_assert!((g.stats().d_mu - d_mu).abs() <= 1e-12 * d_mu.max(1.0));
        let omega_min = g.edges().iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(g.stats().omega_min, omega_min);
    }

    #[test]
    fn balls_are_nested_and_exhaust(g in graph_strategy(25), c in any::<prop::sample::Index>()) {
        let x = c.index(g.num_vertices());
        let diameter = g.hop_distances(x).into_iter().map(|d| d.unwrap()).max().unwrap();
        for r in 0..=diameter {
            let inner = g.ball_indices(x, r);
            let outer = g.ball_indices(x, r + 1);
            prop_assert!(inner.is_subset(&outer));
            prop_assert!(inner.contains(x));
        }
        prop_assert_eq!(g.ball_indices(x, 0).indices().to_vec(), vec![x]);
        prop_assert_eq!(g.ball_indices(x, diameter), VertexSet::all(&g));
    }

    #[test]
    fn interior_and_boundary_partition(g in graph_strategy(25), c in any::<prop::sample::Index>(), r in 1usize..5) {
        let x = c.index(g.num_vertices());
        let ball = g.ball_indices(x, r);
        let (interior, boundary) = g.interior_boundary(&ball).unwrap();
        for &i in ball.indices() {
            prop_assert!(interior.contains(i) != boundary.contains(i));
        }
        prop_assert_eq!(interior.len() + boundary.len(), ball.len());
        prop_assert!(g.ball_indices(x, r - 1).is_subset(&interior));
        for &i in interior.indices() {
            prop_assert!(g.neighbors(i).iter().all(|&(y, _)| ball.contains(y)));
        }
    }

    #[test]
    fn json_round_trip(g in graph_strategy(20)) {
        let text = g.to_json();
        let back = parse_graph(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.to_json(), text);
        prop_assert_eq!(parse_graph(&g.to_json_versioned(1)).unwrap(), g);
    }
}

#[test]
fn generated_families_round_trip() {
    let cases = [
        (Family::Path, GenerateParams::with_n(1)),
        (Family::Path, GenerateParams::with_n(7)),
        (Family::Cycle, GenerateParams::with_n(3)),
        (Family::Cycle, GenerateParams::with_n(12)),
        (Family::Complete, GenerateParams::with_n(6)),
        (Family::Star, GenerateParams::with_n(2)),
        (Family::Star, GenerateParams::with_n(9)),
        (Family::Hypercube, GenerateParams::with_dim(4)),
        (Family::LatticeBall, GenerateParams::lattice(2, 4)),
        (Family::LatticeBall, GenerateParams::lattice(3, 2)),
    ];
    for (family, params) in cases {
        let g = generate(family, &params).unwrap();
        let back = parse_graph(&g.to_json()).unwrap();
        assert_eq!(back, g, "{family}");
    }
    // |B_r(0)| in Z² is 2r² + 2r + 1
    let z2 = generate(Family::LatticeBall, &GenerateParams::lattice(2, 4)).unwrap();
    assert_eq!(z2.num_vertices(), 41);
    let q4 = generate(Family::Hypercube, &GenerateParams::with_dim(4)).unwrap();
    assert_eq!((q4.num_vertices(), q4.num_edges()), (16, 32));
}

#[test]
fn parse_rejects_bad_documents() {
    let bad = [
        (r#"{"vertices":[{"id":"a"},{"id":"a"}],"edges":[]}"#, "duplicate vertex"),
        (r#"{"vertices":[{"id":"a"}],"edges":[{"u":"a","v":"z","w":1}]}"#, "unknown vertex"),
        (r#"{"vertices":[{"id":"a"},{"id":"b"}],"edges":[{"u":"a","v":"b","w":0}]}"#, "edge weight"),
        (r#"{"vertices":[{"id":"a","mu":-1},{"id":"b"}],"edges":[{"u":"a","v":"b","w":1}]}"#, "measure"),
        (r#"{"vertices":[{"id":"a"},{"id":"b"}],"edges":[{"u":"a","v":"b","w":1},{"u":"b","v":"a","w":2}]}"#, "duplicate edge"),
        (r#"{"vertices":[{"id":"a"}],"edges":[{"u":"a","v":"a","w":1}]}"#, "self-loop"),
        (r#"{"vertices":[{"id":"a"},{"id":"b"},{"id":"c"}],"edges":[{"u":"a","v":"b","w":1}]}"#, "disconnected"),
        (r#"{"vertices":[{"id":"a"}],"edges":[],"extra":1}"#, "malformed"),
        (r#"{"vertices":[{"id":"a"}]"#, "malformed"),
    ];
    for (text, needle) in bad {
        let err = parse_graph(text).unwrap_err().to_string();
        assert!(err.contains(needle), "{text}: {err}");
    }
}
