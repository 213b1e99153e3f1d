//! Dirichlet heat kernels and the heat semigroup.
//!
//! On a finite subset `U` the Dirichlet Laplacian acts on `interior(U)` with
//! zero values on `∂U`. It is self-adjoint in `ℓ²(μ)`, so after conjugating
//! by `μ^{1/2}` a dense symmetric eigendecomposition gives
//! `p_U(t,x,y) = Σ_i e^{−λ_i t} φ_i(x) φ_i(y)` with μ-orthonormal `φ_i`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ExhaustionPlan, ScalarField, VertexSet, WeightedGraph};
use crate::linalg::symmetric_eigen;

/// Default cap on the number of interior vertices of a decomposed subset.
pub const DEFAULT_SIZE_LIMIT: usize = 2000;

/// Kernel values above `-NEGATIVE_CLAMP` are reported as at least zero.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Interior vertices carrying the Dirichlet problem.
    pub subset: VertexSet,
    /// Eigenvalues of `−Δ_U`, ascending and nonnegative.
    pub eigenvalues: Vec<f64>,
    /// Column `i` is `φ_i` over `subset`, μ-orthonormal.
    pub eigenvectors: DMatrix<f64>,
    /// `Φᵀ diag(μ)`: maps a function on `subset` to its spectral coefficients.
    analysis: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.subset.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subset.is_empty()
    }

    /// `p_U(t, ·, ·)` at subset positions `(i, j)`, unclamped.
    pub fn kernel(&self, t: f64, i: usize, j: usize) -> f64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &lam)| (-lam * t).exp() * self.eigenvectors[(i, k)] * self.eigenvectors[(j, k)])
            .sum()
    }

    /// `∂_t p_U(t, ·, ·)` at subset positions `(i, j)`.
    pub fn kernel_time_derivative(&self, t: f64, i: usize, j: usize) -> f64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &lam)| -lam * (-lam * t).exp() * self.eigenvectors[(i, k)] * self.eigenvectors[(j, k)])
            .sum()
    }

    /// The full kernel matrix over the subset.
    pub fn kernel_matrix(&self, t: f64) -> DMatrix<f64> {
        let decay = DVector::from_iterator(self.len(), self.eigenvalues.iter().map(|&l| (-l * t).exp()));
        let scaled = DMatrix::from_fn(self.len(), self.len(), |i, k| self.eigenvectors[(i, k)] * decay[k]);
        &scaled * self.eigenvectors.transpose()
    }

    /// `e^{tΔ_U} f` for `f` given over the subset. Any real `t` is accepted.
    pub fn evolve(&self, t: f64, f: &[f64]) -> Vec<f64> {
        let coeffs = &self.analysis * DVector::from_column_slice(f);
        let decayed = DVector::from_iterator(
            self.len(),
            coeffs.iter().zip(&self.eigenvalues).map(|(c, &l)| c * (-l * t).exp()),
        );
        (&self.eigenvectors * decayed).as_slice().to_vec()
    }
}

/// Spectral decomposition of the Dirichlet Laplacian of `set`.
pub fn dirichlet_spectrum(g: &WeightedGraph, set: &VertexSet) -> Result<SpectralDecomposition> {
    dirichlet_spectrum_limited(g, set, DEFAULT_SIZE_LIMIT)
}

pub fn dirichlet_spectrum_limited(
    g: &WeightedGraph,
    set: &VertexSet,
    limit: usize,
) -> Result<SpectralDecomposition> {
    let (interior, _) = g.interior_boundary(set)?;
    if interior.is_empty() {
        return Err(Error::EmptyInterior);
    }
    if interior.len() > limit {
        return Err(Error::TooLarge { size: interior.len(), limit });
    }
    let n = interior.len();
    let mu = g.mu();
    let sqrt_mu: Vec<f64> = interior.indices().iter().map(|&i| mu[i].sqrt()).collect();
    let mut sym = DMatrix::zeros(n, n);
    for (a, &x) in interior.indices().iter().enumerate() {
        sym[(a, a)] = g.degree(x) / mu[x];
        for &(y, w) in g.neighbors(x) {
            if let Some(b) = interior.position(y) {
                sym[(a, b)] = -w / (sqrt_mu[a] * sqrt_mu[b]);
            }
        }
    }
    let eig = symmetric_eigen(&sym)?;
    let top = eig.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut eigenvalues = Vec::with_capacity(n);
    for &lam in eig.values.iter() {
        if lam < -1e-10 * top {
            return Err(Error::Eigen(format!("negative Dirichlet eigenvalue {lam:e}")));
        }
        eigenvalues.push(lam.max(0.0));
    }
    let eigenvectors = DMatrix::from_fn(n, n, |i, k| eig.vectors[(i, k)] / sqrt_mu[i]);
    let analysis = DMatrix::from_fn(n, n, |k, i| eig.vectors[(i, k)] * sqrt_mu[i]);
    Ok(SpectralDecomposition { subset: interior, eigenvalues, eigenvectors, analysis })
}

/// The heat semigroup `P_t = e^{tΔ}` of a whole finite graph (no boundary).
#[derive(Debug, Clone)]
pub struct HeatSemigroup<'g> {
    graph: &'g WeightedGraph,
    spectrum: SpectralDecomposition,
}

impl<'g> HeatSemigroup<'g> {
    pub fn new(graph: &'g WeightedGraph) -> Result<Self> {
        Self::with_limit(graph, DEFAULT_SIZE_LIMIT)
    }

    pub fn with_limit(graph: &'g WeightedGraph, limit: usize) -> Result<Self> {
        let spectrum = dirichlet_spectrum_limited(graph, &VertexSet::all(graph), limit)?;
        Ok(HeatSemigroup { graph, spectrum })
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    /// `P_t f` for `t ≥ 0`.
    pub fn apply(&self, t: f64, f: &[f64]) -> Result<Vec<f64>> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidTime(t));
        }
        Ok(self.evolve(t, f))
    }

    /// `e^{tΔ} f` without the sign check on `t`.
    pub fn evolve(&self, t: f64, f: &[f64]) -> Vec<f64> {
        if t == 0.0 {
            return f.to_vec();
        }
        self.spectrum.evolve(t, f)
    }

    pub fn kernel(&self, t: f64, x: usize, y: usize) -> f64 {
        self.spectrum.kernel(t, x, y)
    }
}

/// A heat-kernel value; `subset_radius` is `None` for the full graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatKernelValue {
    #[serde(serialize_with = "crate::format::sig17")]
    pub t: f64,
    #[serde(skip)]
    pub x: usize,
    #[serde(skip)]
    pub y: usize,
    /// Reported value; tiny negative round-off clamped to zero.
    #[serde(serialize_with = "crate::format::sig17")]
    pub value: f64,
    #[serde(skip)]
    pub raw: f64,
    pub subset_radius: Option<usize>,
}

fn clamp_kernel(raw: f64) -> f64 {
    if raw < 0.0 && raw >= -NEGATIVE_CLAMP {
        0.0
    } else {
        raw
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTime(t))
    }
}

fn interior_position(g: &WeightedGraph, spec: &SpectralDecomposition, v: &str) -> Result<usize> {
    let i = g.index_of(v)?;
    spec.subset.position(i).ok_or_else(|| Error::OutsideInterior(v.to_string()))
}

/// `p_U(t, x, y)` for `x, y` in the interior of `set`.
pub fn heat_kernel(g: &WeightedGraph, set: &VertexSet, t: f64, x: &str, y: &str) -> Result<HeatKernelValue> {
    check_time(t)?;
    let spec = dirichlet_spectrum(g, set)?;
    let (i, j) = (interior_position(g, &spec, x)?, interior_position(g, &spec, y)?);
    let raw = spec.kernel(t, i, j);
    Ok(HeatKernelValue {
        t,
        x: spec.subset.indices()[i],
        y: spec.subset.indices()[j],
        value: clamp_kernel(raw),
        raw,
        subset_radius: None,
    })
}

/// Applies the Dirichlet semigroup of `set` to `f`. The result lives on the
/// interior; it is zero elsewhere.
pub fn apply_semigroup(g: &WeightedGraph, set: &VertexSet, t: f64, f: &ScalarField) -> Result<ScalarField> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidTime(t));
    }
    let spec = dirichlet_spectrum(g, set)?;
    let dense = f.to_dense(g)?;
    let local: Vec<f64> = spec.subset.indices().iter().map(|&i| dense[i]).collect();
    let out = if t == 0.0 { local } else { spec.evolve(t, &local) };
    let pairs: Vec<(&str, f64)> = spec
        .subset
        .indices()
        .iter()
        .zip(out)
        .map(|(&i, v)| (g.id(i), v))
        .collect();
    Ok(ScalarField::from_pairs(&pairs, 0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExhaustionDiagnostics {
    /// `(radius, raw p_k(t,x,y))` for every ball evaluated.
    pub sequence: Vec<(usize, f64)>,
    pub converged: bool,
    /// Every step `p_{k+1} − p_k` is at least `-NEGATIVE_CLAMP`.
    pub monotone: bool,
    pub min_step: Option<f64>,
    pub last_change: Option<f64>,
}

/// `p_t(x,y)` as the limit of Dirichlet kernels on the balls of `plan`.
///
/// Stops at the first radius whose value differs from the previous one by
/// less than `tol`; nonconvergence within the plan is reported in the
/// diagnostics, not as an error.
pub fn exhaustion_kernel(
    g: &WeightedGraph,
    plan: &ExhaustionPlan,
    t: f64,
    x: &str,
    y: &str,
    tol: f64,
) -> Result<(HeatKernelValue, ExhaustionDiagnostics)> {
    check_time(t)?;
    let center = g.index_of(plan.center())?;
    let (xi, yi) = (g.index_of(x)?, g.index_of(y)?);
    let mut sequence: Vec<(usize, f64)> = Vec::new();
    let mut converged = false;
    for (k, &radius) in plan.radii().iter().enumerate() {
        let ball = g.ball_indices(center, radius);
        let (interior, _) = g.interior_boundary(&ball)?;
        if k == 0 {
            for (v, vi) in [(x, xi), (y, yi)] {
                if !interior.contains(vi) {
                    return Err(Error::OutsideInterior(v.to_string()));
                }
            }
        }
        let spec = dirichlet_spectrum(g, &ball)?;
        let (i, j) = (
            spec.subset.position(xi).expect("interiors grow"),
            spec.subset.position(yi).expect("interiors grow"),
        );
        let value = spec.kernel(t, i, j);
        let done = sequence.last().is_some_and(|&(_, prev)| (value - prev).abs() < tol);
        sequence.push((radius, value));
        if done {
            converged = true;
            break;
        }
    }
    let steps: Vec<f64> = sequence.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let min_step = steps.iter().copied().reduce(f64::min);
    let diagnostics = ExhaustionDiagnostics {
        monotone: steps.iter().all(|&s| s >= -NEGATIVE_CLAMP),
        min_step,
        last_change: steps.last().map(|s| s.abs()),
        converged,
        sequence,
    };
    let &(radius, raw) = diagnostics.sequence.last().expect("plan has a radius");
    Ok((
        HeatKernelValue {
            t,
            x: xi,
            y: yi,
            value: clamp_kernel(raw),
            raw,
            subset_radius: Some(radius),
        },
        diagnostics,
    ))
}
