//! Deterministic graph families used as a test corpus.
//!
//! Numeric vertex ids are zero-padded so that sorted id order matches
//! numeric order. Lattice vertices use comma-joined coordinates.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Path,
    Cycle,
    Complete,
    Star,
    Hypercube,
    LatticeBall,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "path" => Family::Path,
            "cycle" => Family::Cycle,
            "complete" => Family::Complete,
            "star" => Family::Star,
            "hypercube" => Family::Hypercube,
            "lattice_ball" | "lattice-ball" => Family::LatticeBall,
            other => return Err(Error::InvalidParams(format!("unknown family {other:?}"))),
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Path => "path",
            Family::Cycle => "cycle",
            Family::Complete => "complete",
            Family::Star => "star",
            Family::Hypercube => "hypercube",
            Family::LatticeBall => "lattice_ball",
        })
    }
}

/// Family parameters. `n` counts vertices for path, cycle, complete and star
/// (hub plus `n − 1` leaves); `dim` is the cube or lattice dimension and
/// `radius` the hop radius of the lattice ball.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerateParams {
    pub n: Option<usize>,
    pub dim: Option<usize>,
    pub radius: Option<usize>,
    pub weight: f64,
    pub mu: f64,
}

impl Default for GenerateParams {
    fn default() -> Self {
        GenerateParams { n: None, dim: None, radius: None, weight: 1.0, mu: 1.0 }
    }
}

impl GenerateParams {
    pub fn with_n(n: usize) -> Self {
        GenerateParams { n: Some(n), ..Default::default() }
    }

    pub fn with_dim(dim: usize) -> Self {
        GenerateParams { dim: Some(dim), ..Default::default() }
    }

    pub fn lattice(dim: usize, radius: usize) -> Self {
        GenerateParams { dim: Some(dim), radius: Some(radius), ..Default::default() }
    }
}

fn require(v: Option<usize>, name: &str, family: Family, min: usize) -> Result<usize> {
    match v {
        Some(v) if v >= min => Ok(v),
        Some(v) => Err(Error::InvalidParams(format!("{family}: {name} = {v} must be >= {min}"))),
        None => Err(Error::InvalidParams(format!("{family}: missing parameter {name}"))),
    }
}

fn padded(n: usize) -> impl Fn(usize) -> String {
    let width = n.saturating_sub(1).to_string().len();
    move |i| format!("{i:0width$}")
}

pub fn generate(family: Family, params: &GenerateParams) -> Result<WeightedGraph> {
    if !(params.weight.is_finite() && params.weight > 0.0) {
        return Err(Error::InvalidParams(format!("weight {} must be > 0", params.weight)));
    }
    if !(params.mu.is_finite() && params.mu > 0.0) {
        return Err(Error::InvalidParams(format!("mu {} must be > 0", params.mu)));
    }
    let (ids, pairs): (Vec<String>, Vec<(usize, usize)>) = match family {
        Family::Path => {
            let n = require(params.n, "n", family, 1)?;
            let id = padded(n);
            ((0..n).map(&id).collect(), (1..n).map(|i| (i - 1, i)).collect())
        }
        Family::Cycle => {
            let n = require(params.n, "n", family, 3)?;
            let id = padded(n);
            ((0..n).map(&id).collect(), (0..n).map(|i| (i, (i + 1) % n)).collect())
        }
        Family::Complete => {
            let n = require(params.n, "n", family, 1)?;
            let id = padded(n);
            let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            ((0..n).map(&id).collect(), pairs)
        }
        Family::Star => {
            let n = require(params.n, "n", family, 2)?;
            let id = padded(n);
            ((0..n).map(&id).collect(), (1..n).map(|i| (0, i)).collect())
        }
        Family::Hypercube => {
            let d = require(params.dim, "dim", family, 1)?;
            if d > 16 {
                return Err(Error::InvalidParams(format!("hypercube: dim = {d} must be <= 16")));
            }
            let n = 1usize << d;
            let ids = (0..n).map(|i| format!("{i:0d$b}")).collect();
            let pairs = (0..n)
                .flat_map(|i| (0..d).map(move |b| (i, i ^ (1 << b))))
                .filter(|&(i, j)| i < j)
                .collect();
            (ids, pairs)
        }
        Family::LatticeBall => {
            let d = require(params.dim, "dim", family, 1)?;
            let r = require(params.radius, "radius", family, 0)?;
            lattice_ball(d, r)
        }
    };
    let vertices: Vec<(String, f64)> = ids.iter().map(|id| (id.clone(), params.mu)).collect();
    let edges: Vec<(String, String, f64)> = pairs
        .into_iter()
        .map(|(i, j)| (ids[i].clone(), ids[j].clone(), params.weight))
        .collect();
    WeightedGraph::new(&vertices, &edges)
}

/// Points of `ℤ^dim` with `‖p‖₁ ≤ radius`, joined by unit steps.
fn lattice_ball(dim: usize, radius: usize) -> (Vec<String>, Vec<(usize, usize)>) {
    let r = radius as i64;
    let mut points: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..dim {
        points = points
            .into_iter()
            .flat_map(|p| {
                let used: i64 = p.iter().map(|c| c.abs()).sum();
                (-(r - used)..=(r - used)).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    let lookup: HashMap<Vec<i64>, usize> =
        points.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    let mut pairs = Vec::new();
    for (i, p) in points.iter().enumerate() {
        for axis in 0..dim {
            let mut q = p.clone();
            q[axis] += 1;
            if let Some(&j) = lookup.get(&q) {
                pairs.push((i, j));
            }
        }
    }
    let ids = points
        .iter()
        .map(|p| p.iter().map(i64::to_string).collect::<Vec<_>>().join(","))
        .collect();
    (ids, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_families() {
        let k3 = generate(Family::Complete, &GenerateParams::with_n(3)).unwrap();
        assert_eq!((k3.num_vertices(), k3.num_edges()), (3, 3));
        assert_eq!(k3.stats().d_mu, 2.0);

        let p2 = generate(Family::Path, &GenerateParams::with_n(2)).unwrap();
        assert_eq!((p2.num_vertices(), p2.num_edges()), (2, 1));

        let c5 = generate(Family::Cycle, &GenerateParams::with_n(5)).unwrap();
        assert_eq!(c5.num_edges(), 5);

        let s4 = generate(Family::Star, &GenerateParams::with_n(4)).unwrap();
        assert_eq!(s4.num_edges(), 3);
        assert_eq!(s4.degree(0), 3.0);

        let q3 = generate(Family::Hypercube, &GenerateParams::with_dim(3)).unwrap();
        assert_eq!((q3.num_vertices(), q3.num_edges()), (8, 12));
    }

    #[test]
    fn lattice_segment() {
        let z = generate(Family::LatticeBall, &GenerateParams::lattice(1, 30)).unwrap();
        assert_eq!(z.num_vertices(), 61);
        assert_eq!(z.num_edges(), 60);
        assert!(z.index_of("0").is_ok());
        assert!(z.index_of("-30").is_ok());

        let z2 = generate(Family::LatticeBall, &GenerateParams::lattice(2, 2)).unwrap();
        assert_eq!(z2.num_vertices(), 13);
        assert_eq!(z2.ball("0,0", 2).unwrap().len(), 13);
    }

    #[test]
    fn sorted_ids_follow_numeric_order() {
        let p = generate(Family::Path, &GenerateParams::with_n(12)).unwrap();
        assert_eq!(p.id(2), "02");
        assert_eq!(p.id(11), "11");
        assert_eq!(p.neighbors(2).iter().map(|&(y, _)| y).collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn invalid_params() {
        assert!(generate(Family::Cycle, &GenerateParams::with_n(2)).is_err());
        assert!(generate(Family::Path, &GenerateParams::default()).is_err());
        let bad_w = GenerateParams { weight: 0.0, ..GenerateParams::with_n(3) };
        assert!(generate(Family::Path, &bad_w).is_err());
        assert!("nope".parse::<Family>().is_err());
    }
}
