//! Weighted graphs, vertex subsets and scalar fields.
//!
//! Vertices carry string ids. Internally every vertex gets a dense index
//! assigned by sorted id order, so matrices built from a graph are laid out
//! identically from run to run.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    mu: Vec<f64>,
    /// Neighbours of each vertex, sorted by index.
    adj: Vec<Vec<(usize, f64)>>,
    /// Undirected edges `(u, v, w)` with `u < v`, sorted.
    edges: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema: Option<u32>,
    vertices: Vec<VertexDoc>,
    #[serde(default)]
    edges: Vec<EdgeDoc>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    id: String,
    #[serde(default = "default_mu", serialize_with = "crate::format::sig17")]
    mu: f64,
}

fn default_mu() -> f64 {
    1.0
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    u: String,
    v: String,
    #[serde(serialize_with = "crate::format::sig17")]
    w: f64,
}

/// Summary constants of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphStats {
    pub num_vertices: usize,
    pub num_edges: usize,
    /// Smallest edge weight; `+inf` for an edgeless graph.
    #[serde(serialize_with = "crate::format::sig17")]
    pub omega_min: f64,
    /// `max_x m(x)/μ(x)`.
    #[serde(rename = "D_mu", serialize_with = "crate::format::sig17")]
    pub d_mu: f64,
}

impl WeightedGraph {
    /// Builds and validates a graph.
    ///
    /// Rejects duplicate ids, nonpositive measures or weights, self-loops,
    /// duplicate edges, edges to unknown vertices and disconnected graphs.
    pub fn new<S: AsRef<str>>(vertices: &[(S, f64)], edges: &[(S, S, f64)]) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut sorted: Vec<(String, f64)> = vertices
            .iter()
            .map(|(id, mu)| (id.as_ref().to_string(), *mu))
            .collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for pair in sorted.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::DuplicateVertex(pair[0].0.clone()));
            }
        }
        for (id, mu) in &sorted {
            if !(mu.is_finite() && *mu > 0.0) {
                return Err(Error::NonPositiveMeasure { id: id.clone(), mu: *mu });
            }
        }
        let ids: Vec<String> = sorted.iter().map(|(id, _)| id.clone()).collect();
        let mu: Vec<f64> = sorted.iter().map(|(_, mu)| *mu).collect();
        let index: HashMap<String, usize> =
            ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();

        let mut edge_list = Vec::with_capacity(edges.len());
        for (u, v, w) in edges {
            let (u, v) = (u.as_ref(), v.as_ref());
            let iu = *index.get(u).ok_or_else(|| Error::UnknownVertex(u.to_string()))?;
            let iv = *index.get(v).ok_or_else(|| Error::UnknownVertex(v.to_string()))?;
            if iu == iv {
                return Err(Error::SelfLoop(u.to_string()));
            }
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::NonPositiveWeight {
                    u: u.to_string(),
                    v: v.to_string(),
                    w: *w,
                });
            }
            edge_list.push((iu.min(iv), iu.max(iv), *w));
        }
        edge_list.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for pair in edge_list.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(Error::DuplicateEdge(
                    ids[pair[0].0].clone(),
                    ids[pair[0].1].clone(),
                ));
            }
        }

        let mut adj = vec![Vec::new(); ids.len()];
        for &(u, v, w) in &edge_list {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        for nbrs in &mut adj {
            nbrs.sort_by_key(|&(y, _)| y);
        }

        let g = WeightedGraph { ids, index, mu, adj, edges: edge_list };
        if g.hop_distances(0).iter().any(Option::is_none) {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn num_vertices(&self) -> usize {
        self.ids.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Weighted degree `m(x) = Σ_{y∼x} ω_xy`.
    pub fn degree(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|&(_, w)| w).sum()
    }

    pub fn stats(&self) -> GraphStats {
        let omega_min = self
            .edges
            .iter()
            .map(|&(_, _, w)| w)
            .fold(f64::INFINITY, f64::min);
        let d_mu = (0..self.num_vertices())
            .map(|i| self.degree(i) / self.mu[i])
            .fold(0.0, f64::max);
        GraphStats {
            num_vertices: self.num_vertices(),
            num_edges: self.num_edges(),
            omega_min,
            d_mu,
        }
    }

    /// Hop distances from `source`; `None` for unreachable vertices.
    pub fn hop_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_vertices()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].unwrap_or(0);
            for &(y, _) in &self.adj[x] {
                if dist[y].is_none() {
                    dist[y] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Vertices at hop distance at most `radius` from `center`.
    pub fn ball_indices(&self, center: usize, radius: usize) -> VertexSet {
        let dist = self.hop_distances(center);
        VertexSet::from_sorted(
            dist.iter()
                .enumerate()
                .filter(|(_, d)| matches!(d, Some(d) if *d <= radius))
                .map(|(i, _)| i)
                .collect(),
        )
    }

    pub fn ball(&self, center: &str, radius: usize) -> Result<VertexSet> {
        Ok(self.ball_indices(self.index_of(center)?, radius))
    }

    /// Splits `set` into its interior (vertices whose neighbours all lie in
    /// the set) and its boundary.
    pub fn interior_boundary(&self, set: &VertexSet) -> Result<(VertexSet, VertexSet)> {
        if let Some(&bad) = set.indices().iter().find(|&&i| i >= self.num_vertices()) {
            return Err(Error::NotSubset(format!("#{bad}")));
        }
        let mut member = vec![false; self.num_vertices()];
        for &i in set.indices() {
            member[i] = true;
        }
        let (interior, boundary): (Vec<usize>, Vec<usize>) = set
            .indices()
            .iter()
            .partition(|&&i| self.adj[i].iter().all(|&(y, _)| member[y]));
        Ok((VertexSet::from_sorted(interior), VertexSet::from_sorted(boundary)))
    }

    pub fn to_json(&self) -> String {
        self.document(None)
    }

    /// Like [`to_json`](Self::to_json) with a leading `"schema"` field.
    pub fn to_json_versioned(&self, schema: u32) -> String {
        self.document(Some(schema))
    }

    fn document(&self, schema: Option<u32>) -> String {
        let doc = GraphDoc {
            schema,
            vertices: self
                .ids
                .iter()
                .zip(&self.mu)
                .map(|(id, &mu)| VertexDoc { id: id.clone(), mu })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|&(u, v, w)| EdgeDoc {
                    u: self.ids[u].clone(),
                    v: self.ids[v].clone(),
                    w,
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("graph serialization cannot fail")
    }
}

/// Parses the graph JSON schema
/// `{"vertices":[{"id":"a","mu":1.0}],"edges":[{"u":"a","v":"b","w":1.0}]}`.
pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    let doc: GraphDoc = serde_json::from_str(text)?;
    if let Some(v) = doc.schema.filter(|&v| v != 1) {
        return Err(Error::InvalidParams(format!("unsupported graph schema {v}")));
    }
    let vertices: Vec<(String, f64)> = doc.vertices.into_iter().map(|v| (v.id, v.mu)).collect();
    let edges: Vec<(String, String, f64)> =
        doc.edges.into_iter().map(|e| (e.u, e.v, e.w)).collect();
    WeightedGraph::new(&vertices, &edges)
}

/// A sorted, duplicate-free set of vertex indices of some graph.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VertexSet {
    indices: Vec<usize>,
}

impl VertexSet {
    pub fn from_indices(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        VertexSet { indices }
    }

    fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        VertexSet { indices }
    }

    pub fn from_ids<S: AsRef<str>>(g: &WeightedGraph, ids: &[S]) -> Result<Self> {
        let indices = ids
            .iter()
            .map(|id| {
                g.index_of(id.as_ref())
                    .map_err(|_| Error::NotSubset(id.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_indices(indices))
    }

    pub fn all(g: &WeightedGraph) -> Self {
        VertexSet { indices: (0..g.num_vertices()).collect() }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Position of vertex `i` inside the set.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.indices.binary_search(&i).ok()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.indices.iter().all(|&i| other.contains(i))
    }

    pub fn ids<'g>(&self, g: &'g WeightedGraph) -> Vec<&'g str> {
        self.indices.iter().map(|&i| g.id(i)).collect()
    }
}

/// A real function on the vertices of a graph, given by explicit values and
/// a default for unlisted vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarField {
    #[serde(serialize_with = "crate::format::sig17_map")]
    pub values: BTreeMap<String, f64>,
    #[serde(default, serialize_with = "crate::format::sig17")]
    pub default: f64,
}

impl ScalarField {
    pub fn constant(c: f64) -> Self {
        ScalarField { values: BTreeMap::new(), default: c }
    }

    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, f64)], default: f64) -> Self {
        ScalarField {
            values: pairs.iter().map(|(k, v)| (k.as_ref().to_string(), *v)).collect(),
            default,
        }
    }

    /// Lists every vertex of `g` explicitly.
    pub fn from_dense(g: &WeightedGraph, values: &[f64]) -> Self {
        ScalarField {
            values: g.ids().iter().cloned().zip(values.iter().copied()).collect(),
            default: 0.0,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let field: ScalarField = serde_json::from_str(text)?;
        Ok(field)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("field serialization cannot fail")
    }

    /// Dense values in the graph's index order.
    pub fn to_dense(&self, g: &WeightedGraph) -> Result<Vec<f64>> {
        let mut out = vec![self.default; g.num_vertices()];
        for (id, &v) in &self.values {
            out[g.index_of(id)?] = v;
        }
        if !self.default.is_finite() {
            return Err(Error::NonFiniteField { vertex: "<default>".into(), value: self.default });
        }
        if let Some((i, &v)) = out.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteField { vertex: g.id(i).to_string(), value: v });
        }
        Ok(out)
    }

    /// Dense values, additionally requiring every value and the default to
    /// be strictly positive.
    pub fn to_dense_positive(&self, g: &WeightedGraph) -> Result<Vec<f64>> {
        let dense = self.to_dense(g)?;
        if self.default <= 0.0 && self.values.len() < g.num_vertices() {
            return Err(Error::NonPositiveField { vertex: "<default>".into(), value: self.default });
        }
        ensure_positive(g, &dense)?;
        Ok(dense)
    }
}

pub(crate) fn ensure_positive(g: &WeightedGraph, f: &[f64]) -> Result<()> {
    match f.iter().enumerate().find(|(_, &v)| v.is_nan() || v <= 0.0) {
        Some((i, &v)) => Err(Error::NonPositiveField { vertex: g.id(i).to_string(), value: v }),
        None => Ok(()),
    }
}

/// Centre and radii of an exhaustion of the graph by metric balls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExhaustionPlan {
    center: String,
    radii: Vec<usize>,
}

impl ExhaustionPlan {
    /// Radii must increase strictly; consecutive balls then satisfy
    /// `B_{r_k} ⊂ interior(B_{r_{k+1}})`.
    pub fn new(center: impl Into<String>, radii: Vec<usize>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InvalidParams("exhaustion plan needs at least one radius".into()));
        }
        if radii.windows(2).any(|w| w[1] < w[0] + 1) {
            return Err(Error::InvalidParams("exhaustion radii must be strictly increasing".into()));
        }
        Ok(ExhaustionPlan { center: center.into(), radii })
    }

    pub fn center(&self) -> &str {
        &self.center
    }

    pub fn radii(&self) -> &[usize] {
        &self.radii
    }
}
