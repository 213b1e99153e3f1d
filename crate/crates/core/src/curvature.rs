//! Curvature-dimension conditions at a vertex.
//!
//! `CD(n,κ)` at `x`: `Γ₂(f)(x) ≥ (1/n)(Δf(x))² + κΓ(f)(x)` for every `f`.
//! `CDE′(n,κ)` at `x`: `Γ̃₂(f)(x) ≥ (1/n)f(x)²(Δlog f)(x)² + κΓ(f)(x)` for
//! every positive `f`.
//!
//! The optimal CD constant is the smallest eigenvalue of the pencil
//! `(Γ₂ − (1/n)ℓℓᵀ, Γ)` of local forms. The Γ form is singular: it ignores
//! the values of `f` on the sphere of radius 2, which Γ₂ still sees. Those
//! directions are minimised out exactly through a Schur complement before
//! the reduced symmetric problem is solved.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamma::{
    gamma2_at, gamma2_tilde_at, gamma_at, laplacian_at, laplacian_log_at, local_forms_at,
};
use crate::graph::{ScalarField, WeightedGraph};
use crate::linalg::{psd_pseudo_inverse, symmetric_eigen};
use crate::optimize::nelder_mead;
use crate::rng::{derive_seed, seeded};

/// Relative cut-off below which eigenvalues of the Γ form count as zero.
pub const GAMMA_KERNEL_TOL: f64 = 1e-12;

/// The dimension parameter `n ∈ (0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dimension {
    Finite(f64),
    Infinite,
}

impl Dimension {
    pub fn new(n: f64) -> Result<Self> {
        if n.is_nan() || n <= 0.0 {
            return Err(Error::InvalidDimension(n));
        }
        Ok(if n.is_infinite() { Dimension::Infinite } else { Dimension::Finite(n) })
    }

    /// `1/n`, exactly zero for `n = ∞`.
    pub fn inverse(self) -> f64 {
        match self {
            Dimension::Finite(n) => 1.0 / n,
            Dimension::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Dimension::Infinite)
    }

    fn validate(self) -> Result<Self> {
        match self {
            Dimension::Finite(n) if n.is_nan() || n <= 0.0 || n.is_infinite() => {
                Err(Error::InvalidDimension(n))
            }
            d => Ok(d),
        }
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Dimension::Infinite);
        }
        let n: f64 = t
            .parse()
            .map_err(|_| Error::InvalidParams(format!("invalid dimension {s:?}")))?;
        Dimension::new(n)
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimension::Finite(n) => write!(f, "{n}"),
            Dimension::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Dimension {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dimension::Finite(n) => crate::format::sig17(n, s),
            Dimension::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GeneralizedEigen,
    HeuristicSearch,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureResult {
    pub vertex: String,
    pub n: Dimension,
    /// Best constant: exact for the eigen method, an upper bound for the
    /// heuristic search.
    #[serde(serialize_with = "crate::format::sig17")]
    pub k_max: f64,
    #[serde(skip)]
    pub minimizer: ScalarField,
    pub method: Method,
    pub certified: bool,
    /// Heuristic search only: gap between the two best starts.
    #[serde(serialize_with = "crate::format::sig17_opt", skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
    /// Heuristic search only: whether the winning start converged.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
}

/// `Γ₂(f)(x) − (1/n)(Δf(x))² − κΓ(f)(x)`; CD(n,κ) holds at `x` for `f` iff
/// the margin is nonnegative.
pub fn cd_check(g: &WeightedGraph, x: &str, n: Dimension, kappa: f64, f: &ScalarField) -> Result<f64> {
    let n = n.validate()?;
    let xi = g.index_of(x)?;
    Ok(cd_margin_at(g, xi, n, kappa, &f.to_dense(g)?))
}

pub fn cd_margin_at(g: &WeightedGraph, x: usize, n: Dimension, kappa: f64, f: &[f64]) -> f64 {
    let lap = laplacian_at(g, f, x);
    gamma2_at(g, f, f, x) - n.inverse() * lap * lap - kappa * gamma_at(g, f, f, x)
}

/// `Γ̃₂(f)(x) − (1/n)f(x)²(Δlog f)(x)² − κΓ(f)(x)` for positive `f`.
///
/// The margin is 2-homogeneous: scaling `f` by `c > 0` scales it by `c²`,
/// so its sign does not depend on the scale of `f`.
pub fn cde_check(g: &WeightedGraph, x: &str, n: Dimension, kappa: f64, f: &ScalarField) -> Result<f64> {
    let n = n.validate()?;
    let xi = g.index_of(x)?;
    let dense = f.to_dense(g)?;
    if let Some(&y) = g.ball_indices(xi, 2).indices().iter().find(|&&y| !(dense[y] > 0.0)) {
        return Err(Error::NonPositiveField { vertex: g.id(y).to_string(), value: dense[y] });
    }
    Ok(cde_margin_at(g, xi, n, kappa, &dense))
}

pub fn cde_margin_at(g: &WeightedGraph, x: usize, n: Dimension, kappa: f64, f: &[f64]) -> f64 {
    let ll = laplacian_log_at(g, f, x);
    gamma2_tilde_at(g, f, x) - n.inverse() * f[x] * f[x] * ll * ll - kappa * gamma_at(g, f, f, x)
}

/// Optimal CD(n,·) constant at `x` via the generalised eigenproblem.
pub fn cd_max_k(g: &WeightedGraph, x: &str, n: Dimension) -> Result<CurvatureResult> {
    cd_max_k_at(g, g.index_of(x)?, n)
}

pub fn cd_max_k_at(g: &WeightedGraph, x: usize, n: Dimension) -> Result<CurvatureResult> {
    let n = n.validate()?;
    if g.neighbors(x).is_empty() {
        return Err(Error::IsolatedVertex(g.id(x).to_string()));
    }
    let lf = local_forms_at(g, x);
    let dim = lf.support.len();
    let row = &lf.laplacian_row;
    let a = &lf.gamma2_form - n.inverse() * row * row.transpose();

    let b_eig = symmetric_eigen(&lf.gamma_form)?;
    let top = b_eig.values.max();
    let (range, kernel): (Vec<usize>, Vec<usize>) =
        (0..dim).partition(|&k| b_eig.values[k] > GAMMA_KERNEL_TOL * top);
    if range.is_empty() {
        return Err(Error::IsolatedVertex(g.id(x).to_string()));
    }
    let r = b_eig.vectors.select_columns(&range);
    let k = b_eig.vectors.select_columns(&kernel);
    let inv_sqrt = DVector::from_iterator(range.len(), range.iter().map(|&i| b_eig.values[i].powf(-0.5)));

    let a_rr = r.transpose() * &a * &r;
    let a_rk = r.transpose() * &a * &k;
    let a_kk = k.transpose() * &a * &k;
    // the kernel block is PSD; anything below round-off of `a` counts as zero
    let a_scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let a_kk_pinv = psd_pseudo_inverse(&a_kk, 1e-10 * a_scale.max(f64::MIN_POSITIVE))?;
    let schur = &a_rr - &a_rk * &a_kk_pinv * a_rk.transpose();

    let scaled = DMatrix::from_fn(range.len(), range.len(), |i, j| {
        inv_sqrt[i] * schur[(i, j)] * inv_sqrt[j]
    });
    let scaled = 0.5 * (&scaled + scaled.transpose());
    let red = symmetric_eigen(&scaled)?;
    let k_max = red.values[0];

    let coeff = red.vectors.column(0).component_mul(&inv_sqrt);
    let kernel_part = -(&a_kk_pinv * a_rk.transpose() * &coeff);
    let mut local = &r * &coeff + &k * kernel_part;
    let centre = local[lf.support.position(x).expect("x in its own ball")];
    local.add_scalar_mut(-centre);
    let minimizer = ScalarField::from_pairs(
        &lf.support
            .indices()
            .iter()
            .zip(local.iter())
            .map(|(&i, &v)| (g.id(i), v))
            .collect::<Vec<_>>(),
        0.0,
    );

    Ok(CurvatureResult {
        vertex: g.id(x).to_string(),
        n,
        k_max,
        minimizer,
        method: Method::GeneralizedEigen,
        certified: true,
        spread: None,
        converged: None,
    })
}

/// `cd_max_k` at every vertex, in vertex order.
pub fn cd_max_k_all(g: &WeightedGraph, n: Dimension) -> Result<Vec<CurvatureResult>> {
    (0..g.num_vertices())
        .into_par_iter()
        .map(|x| cd_max_k_at(g, x, n))
        .collect()
}

/// Smallest `k_max` over all vertices: the graph satisfies CD(n, κ) for
/// every κ up to this value.
pub fn cd_global_k(g: &WeightedGraph, n: Dimension) -> Result<f64> {
    Ok(cd_max_k_all(g, n)?
        .iter()
        .map(|r| r.k_max)
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub starts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { starts: 16, seed: 1, max_iter: 4000, tol: 1e-12 }
    }
}

/// Log-parameterised CDE′ quotient at `x`: `f = exp(u)` on the 2-ball with
/// `u(x) = 0`.
struct CdeObjective<'g> {
    g: &'g WeightedGraph,
    x: usize,
    n: Dimension,
    /// Support positions other than `x`.
    free: Vec<usize>,
}

/// Box for the log-parameters; keeps `f` within `e^{±LOG_BOX}` of `f(x)`.
const LOG_BOX: f64 = 12.0;

impl CdeObjective<'_> {
    fn field(&self, u: &[f64]) -> Vec<f64> {
        let mut f = vec![1.0; self.g.num_vertices()];
        for (&i, &v) in self.free.iter().zip(u) {
            f[i] = v.clamp(-LOG_BOX, LOG_BOX).exp();
        }
        f
    }

    fn value(&self, u: &[f64]) -> f64 {
        let f = self.field(u);
        let gam = gamma_at(self.g, &f, &f, self.x);
        if !(gam > 1e-300) {
            return f64::INFINITY;
        }
        let ll = laplacian_log_at(self.g, &f, self.x);
        (gamma2_tilde_at(self.g, &f, self.x) - self.n.inverse() * ll * ll) / gam
    }
}

/// Heuristic upper bound on the optimal CDE′(n,·) constant at `x`.
///
/// Multi-start Nelder–Mead over log-parameterised positive fields on the
/// 2-ball. Start `s` draws its initial point from a per-vertex stream
/// derived from `(seed, vertex id, s)`; a start that lands on a degenerate
/// point (`Γ(f)(x) = 0`) is perturbed until the quotient is finite. Ties go
/// to the lowest start index.
pub fn cde_search_k(g: &WeightedGraph, x: &str, n: Dimension, opts: &SearchOptions) -> Result<CurvatureResult> {
    cde_search_k_at(g, g.index_of(x)?, n, opts)
}

pub fn cde_search_k_at(g: &WeightedGraph, x: usize, n: Dimension, opts: &SearchOptions) -> Result<CurvatureResult> {
    let n = n.validate()?;
    if g.neighbors(x).is_empty() {
        return Err(Error::IsolatedVertex(g.id(x).to_string()));
    }
    if opts.starts == 0 {
        return Err(Error::InvalidParams("cde search needs at least one start".into()));
    }
    let support = g.ball_indices(x, 2);
    let free: Vec<usize> = support.indices().iter().copied().filter(|&i| i != x).collect();
    let obj = CdeObjective { g, x, n, free };
    let dim = obj.free.len();
    let scales = [1e-2, 0.1, 0.5, 1.0, 2.0, 4.0];

    let mut results: Vec<(f64, Vec<f64>, bool)> = Vec::with_capacity(opts.starts);
    for s in 0..opts.starts {
        let mut rng = seeded(derive_seed(opts.seed, &format!("{}#{s}", g.id(x))));
        let scale = scales[s % scales.len()];
        let mut start: Vec<f64> = (0..dim).map(|_| rng.gen_range(-scale..=scale)).collect();
        let mut tries = 0;
        while !obj.value(&start).is_finite() && tries < 64 {
            for v in &mut start {
                *v += rng.gen_range(-scale..=scale);
            }
            tries += 1;
        }
        // restart from the best vertex until the simplex stops moving
        let mut best = nelder_mead(|u| obj.value(u), &start, scale.max(1e-2), opts.tol, 1e-10, opts.max_iter);
        for _ in 0..4 {
            let step = (0.1 * scale).max(1e-3);
            let again = nelder_mead(|u| obj.value(u), &best.point, step, opts.tol, 1e-10, opts.max_iter);
            let improved = again.value < best.value - opts.tol * (best.value.abs() + opts.tol);
            best = if again.value <= best.value { again } else { best };
            if !improved {
                break;
            }
        }
        results.push((best.value, best.point, best.converged));
    }

    let winner = (0..results.len())
        .min_by(|&a, &b| results[a].0.total_cmp(&results[b].0).then(a.cmp(&b)))
        .expect("at least one start");
    let mut sorted: Vec<f64> = results.iter().map(|r| r.0).collect();
    sorted.sort_by(f64::total_cmp);
    let spread = sorted.get(1).map(|&second| second - sorted[0]);

    let (k_upper, point, converged) = results.swap_remove(winner);
    let f = obj.field(&point);
    let minimizer = ScalarField::from_pairs(
        &support.indices().iter().map(|&i| (g.id(i), f[i])).collect::<Vec<_>>(),
        1.0,
    );
    Ok(CurvatureResult {
        vertex: g.id(x).to_string(),
        n,
        k_max: k_upper,
        minimizer,
        method: Method::HeuristicSearch,
        certified: false,
        spread,
        converged: Some(converged),
    })
}

pub fn cde_search_k_all(g: &WeightedGraph, n: Dimension, opts: &SearchOptions) -> Result<Vec<CurvatureResult>> {
    (0..g.num_vertices())
        .into_par_iter()
        .map(|x| cde_search_k_at(g, x, n, opts))
        .collect()
}
