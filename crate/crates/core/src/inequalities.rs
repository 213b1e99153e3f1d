//! Semigroup inequalities equivalent to curvature-dimension conditions.
//!
//! Everything here runs on a whole finite graph through [`HeatSemigroup`].
//! Curvature enters as a lower bound `κ`; with `K = −κ` the bounds checked
//! for `CD(n,κ)` are
//!
//! 1. `Γ(P_t f) ≤ e^{2Kt} P_tΓ(f) − (2/n)∫₀ᵗ e^{2Ks} P_s(P_{t−s}Δf)² ds`
//! 2. `Γ(P_t f) ≤ e^{2Kt} P_tΓ(f) − ((e^{2Kt}−1)/(Kn)) (P_tΔf)²`
//! 3. `P_t f² − (P_t f)² ≤ ((e^{2Kt}−1)/K) P_tΓ(f) − ((e^{2Kt}−1−2Kt)/(K²n)) (P_tΔf)²`
//! 4. `P_t f² − (P_t f)² ≥ ((1−e^{−2Kt})/K) Γ(P_t f) + ((e^{−2Kt}−1+2Kt)/(K²n)) (P_tΔf)²`
//!
//! and for `CDE′(∞,κ)` the gradient bound
//! `Γ(√(P_t f)) ≤ e^{2Kt} P_t(Γ(√f))`.
//!
//! Every `K`-dependent coefficient goes through [`expm1_ratio`] and
//! [`expm1_ratio2`], so `κ = 0` yields the exact limiting coefficients.

use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::Dimension;
use crate::error::{Error, Result};
use crate::gamma::{gamma2_all, gamma2_tilde_all, gamma_all, laplacian_all};
use crate::graph::{ensure_positive, ScalarField, VertexSet};
use crate::heat::HeatSemigroup;
use crate::quadrature::{adaptive, QuadratureOptions};

/// `(e^z − 1)/z`, continuous at 0.
pub fn expm1_ratio(z: f64) -> f64 {
    if z.abs() < 1e-5 {
        1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        z.exp_m1() / z
    }
}

/// `(e^z − 1 − z)/z²`, continuous at 0.
pub fn expm1_ratio2(z: f64) -> f64 {
    if z.abs() < 0.1 {
        // Σ z^k/(k+2)!
        let mut term = 0.5;
        let mut sum = 0.5;
        for k in 1..16 {
            term *= z / (k as f64 + 2.0);
            sum += term;
        }
        sum
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// Coefficients of items 1–4 at time `t`, for curvature bound `κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    /// `e^{2Kt}`
    pub growth: f64,
    /// `(e^{2Kt}−1)/(Kn)`
    pub item2: f64,
    /// `(e^{2Kt}−1)/K`
    pub item3_gamma: f64,
    /// `(e^{2Kt}−1−2Kt)/(K²n)`
    pub item3_laplacian: f64,
    /// `(1−e^{−2Kt})/K`
    pub item4_gamma: f64,
    /// `(e^{−2Kt}−1+2Kt)/(K²n)`
    pub item4_laplacian: f64,
}

impl Coefficients {
    pub fn new(kappa: f64, n: Dimension, t: f64) -> Self {
        let z = -2.0 * kappa * t;
        let inv_n = n.inverse();
        Coefficients {
            growth: z.exp(),
            item2: 2.0 * t * expm1_ratio(z) * inv_n,
            item3_gamma: 2.0 * t * expm1_ratio(z),
            item3_laplacian: 4.0 * t * t * expm1_ratio2(z) * inv_n,
            item4_gamma: 2.0 * t * expm1_ratio(-z),
            item4_laplacian: 4.0 * t * t * expm1_ratio2(-z) * inv_n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Item {
    T31_1,
    T31_2,
    T31_3,
    T31_4,
    C31_1,
    C31_2,
    /// Upper (Poincaré) half of the two-sided bound.
    C31_3Upper,
    /// Lower (reverse Poincaré) half.
    C31_3Lower,
    C32_1,
    C32_2Upper,
    C32_2Lower,
    T32,
}

impl Item {
    pub fn as_str(self) -> &'static str {
        match self {
            Item::T31_1 => "T31_1",
            Item::T31_2 => "T31_2",
            Item::T31_3 => "T31_3",
            Item::T31_4 => "T31_4",
            Item::C31_1 => "C31_1",
            Item::C31_2 => "C31_2",
            Item::C31_3Upper => "C31_3_upper",
            Item::C31_3Lower => "C31_3_lower",
            Item::C32_1 => "C32_1",
            Item::C32_2Upper => "C32_2_upper",
            Item::C32_2Lower => "C32_2_lower",
            Item::T32 => "T32",
        }
    }
}

/// One checked inequality `lhs ≤ rhs`; `margin = rhs − lhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    #[serde(serialize_with = "item_name")]
    pub item: Item,
    pub vertex: String,
    #[serde(serialize_with = "crate::format::sig17")]
    pub t: f64,
    #[serde(serialize_with = "crate::format::sig17")]
    pub lhs: f64,
    #[serde(serialize_with = "crate::format::sig17")]
    pub rhs: f64,
    #[serde(serialize_with = "crate::format::sig17")]
    pub margin: f64,
}

fn item_name<S: serde::Serializer>(item: &Item, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(item.as_str())
}

impl InequalityReport {
    fn new(item: Item, vertex: &str, t: f64, lhs: f64, rhs: f64) -> Self {
        InequalityReport { item, vertex: vertex.to_string(), t, lhs, rhs, margin: rhs - lhs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    #[serde(serialize_with = "crate::format::sig17")]
    pub min_margin: f64,
    pub argmin: Option<ArgMin>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArgMin {
    #[serde(serialize_with = "item_name")]
    pub item: Item,
    pub vertex: String,
    #[serde(serialize_with = "crate::format::sig17")]
    pub t: f64,
}

/// Smallest margin; ties resolve to the first report in canonical order.
pub fn summarize(reports: &[InequalityReport]) -> Summary {
    let best = reports
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.margin.total_cmp(&b.margin).then(ia.cmp(ib)));
    match best {
        Some((_, r)) => Summary {
            min_margin: r.margin,
            argmin: Some(ArgMin { item: r.item, vertex: r.vertex.clone(), t: r.t }),
        },
        None => Summary { min_margin: f64::INFINITY, argmin: None },
    }
}

fn square(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x * x).collect()
}

fn sorted_grid(t_grid: &[f64]) -> Result<Vec<f64>> {
    if t_grid.is_empty() {
        return Err(Error::EmptyTimeGrid);
    }
    if let Some(&bad) = t_grid.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidTime(bad));
    }
    let mut grid = t_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    Ok(grid)
}

/// Shifts `f` so its range is centred at zero. Every quantity in items 1–4
/// is invariant under adding constants, and centring reduces cancellation
/// in `P_t f² − (P_t f)²`.
fn centred(f: &[f64]) -> Vec<f64> {
    let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    f.iter().map(|v| v - mid).collect()
}

/// `∫₀ᵗ e^{−2κs} P_s(P_{t−s}Δf)² ds` at every vertex.
pub fn item1_integral_all(
    sg: &HeatSemigroup<'_>,
    f: &[f64],
    kappa: f64,
    t: f64,
    quad: &QuadratureOptions,
) -> Result<Vec<f64>> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidTime(t));
    }
    let lap = laplacian_all(sg.graph(), f);
    let integrand = |s: f64| {
        let inner = square(&sg.evolve(t - s, &lap));
        let outer = sg.evolve(s, &inner);
        let w = (-2.0 * kappa * s).exp();
        outer.into_iter().map(|v| w * v).collect::<Vec<f64>>()
    };
    let opts = QuadratureOptions {
        initial_panels: quad.initial_panels.max(8),
        ..*quad
    };
    Ok(adaptive(&integrand, 0.0, t, &opts)?.values)
}

/// The time integral of item 1 at a single vertex.
pub fn item1_integral(
    sg: &HeatSemigroup<'_>,
    f: &ScalarField,
    kappa: f64,
    t: f64,
    x: &str,
    quad: &QuadratureOptions,
) -> Result<f64> {
    let g = sg.graph();
    let xi = g.index_of(x)?;
    Ok(item1_integral_all(sg, &f.to_dense(g)?, kappa, t, quad)?[xi])
}

/// The vectors entering items 1–4 at one time.
struct FlowTerms {
    gamma_pf: Vec<f64>,
    p_gamma_f: Vec<f64>,
    variance: Vec<f64>,
    p_lap_sq: Vec<f64>,
    integral: Option<Vec<f64>>,
}

fn flow_terms(
    sg: &HeatSemigroup<'_>,
    f: &[f64],
    n: Dimension,
    kappa: f64,
    t: f64,
    quad: &QuadratureOptions,
) -> Result<FlowTerms> {
    let g = sg.graph();
    let pf = sg.evolve(t, f);
    let pf2 = sg.evolve(t, &square(f));
    let variance = pf2.iter().zip(&pf).map(|(a, b)| a - b * b).collect();
    let gamma_pf = gamma_all(g, &pf, &pf);
    let p_gamma_f = sg.evolve(t, &gamma_all(g, f, f));
    let p_lap_sq = square(&sg.evolve(t, &laplacian_all(g, f)));
    let integral = if n.is_infinite() {
        None
    } else {
        Some(item1_integral_all(sg, f, kappa, t, quad)?)
    };
    Ok(FlowTerms { gamma_pf, p_gamma_f, variance, p_lap_sq, integral })
}

fn labels(n: Dimension, kappa: f64) -> [Option<Item>; 4] {
    if n.is_infinite() {
        // items 1 and 2 coincide when 1/n = 0
        [Some(Item::C32_1), None, Some(Item::C32_2Upper), Some(Item::C32_2Lower)]
    } else if kappa == 0.0 {
        [Some(Item::C31_1), Some(Item::C31_2), Some(Item::C31_3Upper), Some(Item::C31_3Lower)]
    } else {
        [Some(Item::T31_1), Some(Item::T31_2), Some(Item::T31_3), Some(Item::T31_4)]
    }
}

fn vertex_list(sg: &HeatSemigroup<'_>, vertices: Option<&VertexSet>) -> Result<Vec<usize>> {
    let n = sg.graph().num_vertices();
    match vertices {
        Some(set) => {
            if let Some(&bad) = set.indices().iter().find(|&&i| i >= n) {
                return Err(Error::NotSubset(format!("#{bad}")));
            }
            Ok(set.indices().to_vec())
        }
        None => Ok((0..n).collect()),
    }
}

/// Margins of items 1–4 at each vertex and time, assuming `CD(n, κ)`.
///
/// With `n = ∞` the items are labelled as the dimension-free corollary
/// (item 2 is then identical to item 1 and omitted); with `κ = 0` and finite
/// `n` as the curvature-free corollary. Output is ordered by vertex, then
/// time, then item.
pub fn verify_thm31(
    sg: &HeatSemigroup<'_>,
    f: &ScalarField,
    n: Dimension,
    kappa: f64,
    t_grid: &[f64],
    vertices: Option<&VertexSet>,
    quad: &QuadratureOptions,
) -> Result<Vec<InequalityReport>> {
    let g = sg.graph();
    let dense = f.to_dense_positive(g)?;
    let grid = sorted_grid(t_grid)?;
    let xs = vertex_list(sg, vertices)?;
    let work = centred(&dense);
    let names = labels(n, kappa);

    let per_time: Vec<FlowTerms> = grid
        .par_iter()
        .map(|&t| flow_terms(sg, &work, n, kappa, t, quad))
        .collect::<Result<_>>()?;

    let mut out = Vec::with_capacity(xs.len() * grid.len() * 4);
    for &x in &xs {
        let id = g.id(x);
        for (&t, terms) in grid.iter().zip(&per_time) {
            let c = Coefficients::new(kappa, n, t);
            let gpf = terms.gamma_pf[x];
            let pgf = terms.p_gamma_f[x];
            let var = terms.variance[x];
            let lap2 = terms.p_lap_sq[x];
            let item1_rhs = c.growth * pgf
                - 2.0 * n.inverse() * terms.integral.as_ref().map_or(0.0, |v| v[x]);
            let rows = [
                (gpf, item1_rhs),
                (gpf, c.growth * pgf - c.item2 * lap2),
                (var, c.item3_gamma * pgf - c.item3_laplacian * lap2),
                (c.item4_gamma * gpf + c.item4_laplacian * lap2, var),
            ];
            for (name, (lhs, rhs)) in names.iter().zip(rows) {
                if let Some(item) = name {
                    out.push(InequalityReport::new(*item, id, t, lhs, rhs));
                }
            }
        }
    }
    Ok(out)
}

/// Margins of the gradient bound `Γ(√(P_t f)) ≤ e^{−2κt} P_t(Γ(√f))`,
/// which holds under `CDE′(∞, κ)`.
pub fn verify_thm32(
    sg: &HeatSemigroup<'_>,
    f: &ScalarField,
    kappa: f64,
    t_grid: &[f64],
    vertices: Option<&VertexSet>,
) -> Result<Vec<InequalityReport>> {
    let g = sg.graph();
    let dense = f.to_dense_positive(g)?;
    let grid = sorted_grid(t_grid)?;
    let xs = vertex_list(sg, vertices)?;
    let root: Vec<f64> = dense.iter().map(|v| v.sqrt()).collect();
    let gamma_root = gamma_all(g, &root, &root);

    let per_time: Vec<(Vec<f64>, Vec<f64>)> = grid
        .par_iter()
        .map(|&t| {
            let pf = sg.evolve(t, &dense);
            let root_pf: Vec<f64> = pf.iter().map(|v| v.max(0.0).sqrt()).collect();
            (gamma_all(g, &root_pf, &root_pf), sg.evolve(t, &gamma_root))
        })
        .collect();

    let mut out = Vec::with_capacity(xs.len() * grid.len());
    for &x in &xs {
        for (&t, (lhs, p_rhs)) in grid.iter().zip(&per_time) {
            let rhs = (-2.0 * kappa * t).exp() * p_rhs[x];
            out.push(InequalityReport::new(Item::T32, g.id(x), t, lhs[x], rhs));
        }
    }
    Ok(out)
}

/// `sup_x |Δu/(2√u)|` for `u = P_t u₀` at each time of the grid. Bounded
/// for positive bounded solutions on graphs satisfying CDE′.
pub fn lemma31_bound(sg: &HeatSemigroup<'_>, u0: &ScalarField, t_grid: &[f64]) -> Result<Vec<f64>> {
    let g = sg.graph();
    let dense = u0.to_dense_positive(g)?;
    let grid = sorted_grid(t_grid)?;
    Ok(grid
        .iter()
        .map(|&t| {
            let u = sg.evolve(t, &dense);
            let lap = laplacian_all(g, &u);
            lap.iter()
                .zip(&u)
                .map(|(l, v)| (l / (2.0 * v.sqrt())).abs())
                .fold(0.0, f64::max)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// `φ(s) = P_s(P_{t−s}f)²`, derivative `2P_sΓ(P_{t−s}f)`.
    Square,
    /// `ϕ(s) = P_sΓ(P_{t−s}f)`, derivative `2P_sΓ₂(P_{t−s}f)`.
    Gradient,
    /// `ψ(s) = P_sΓ(√(P_{t−s}f))`, derivative `2P_sΓ̃₂(√(P_{t−s}f))`.
    RootGradient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeSample {
    pub functional: Functional,
    #[serde(serialize_with = "crate::format::sig17")]
    pub s: f64,
    #[serde(serialize_with = "crate::format::sig17")]
    pub finite_difference: f64,
    #[serde(serialize_with = "crate::format::sig17")]
    pub identity: f64,
    /// Relative error, or absolute error when the identity's value is
    /// below `1e-9`.
    #[serde(serialize_with = "crate::format::sig17")]
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma32Report {
    pub vertex: String,
    #[serde(serialize_with = "crate::format::sig17")]
    pub t: f64,
    #[serde(serialize_with = "crate::format::sig17")]
    pub max_error: f64,
    pub samples: Vec<DerivativeSample>,
}

/// Compares centred finite differences (step `1e-5·t`) of `φ`, `ϕ`, `ψ` in
/// `s` against their derivative identities at vertex `x`.
pub fn lemma32_derivative_check(
    sg: &HeatSemigroup<'_>,
    f: &ScalarField,
    t: f64,
    s_grid: &[f64],
    x: &str,
) -> Result<Lemma32Report> {
    let g = sg.graph();
    let xi = g.index_of(x)?;
    let dense = f.to_dense_positive(g)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidTime(t));
    }
    if let Some(&bad) = s_grid.iter().find(|&&s| !(0.0..t).contains(&s)) {
        return Err(Error::InvalidParams(format!("s = {bad} outside [0, t)")));
    }
    // φ and ϕ have shift-invariant derivatives; centring keeps the finite
    // differences free of the O(f²) constant part.
    let work = centred(&dense);
    let h = 1e-5 * t;

    let square_fn = |s: f64| sg.evolve(s, &square(&sg.evolve(t - s, &work)))[xi];
    let gradient_fn = |s: f64| {
        let u = sg.evolve(t - s, &work);
        sg.evolve(s, &gamma_all(g, &u, &u))[xi]
    };
    let root_fn = |s: f64| {
        let r: Vec<f64> = sg.evolve(t - s, &dense).iter().map(|v| v.sqrt()).collect();
        sg.evolve(s, &gamma_all(g, &r, &r))[xi]
    };

    let mut samples = Vec::with_capacity(3 * s_grid.len());
    for &s in s_grid {
        let u = sg.evolve(t - s, &work);
        let root: Vec<f64> = sg.evolve(t - s, &dense).iter().map(|v| v.sqrt()).collect();
        let identities = [
            (Functional::Square, 2.0 * sg.evolve(s, &gamma_all(g, &u, &u))[xi]),
            (Functional::Gradient, 2.0 * sg.evolve(s, &gamma2_all(g, &u, &u))[xi]),
            (Functional::RootGradient, 2.0 * sg.evolve(s, &gamma2_tilde_all(g, &root))[xi]),
        ];
        for (functional, identity) in identities {
            let eval = |s: f64| match functional {
                Functional::Square => square_fn(s),
                Functional::Gradient => gradient_fn(s),
                Functional::RootGradient => root_fn(s),
            };
            let fd = (eval(s + h) - eval(s - h)) / (2.0 * h);
            let abs = (fd - identity).abs();
            let error = if identity.abs() > 1e-9 { abs / identity.abs() } else { abs };
            samples.push(DerivativeSample { functional, s, finite_difference: fd, identity, error });
        }
    }
    let max_error = samples.iter().map(|s| s.error).fold(0.0, f64::max);
    Ok(Lemma32Report { vertex: x.to_string(), t, max_error, samples })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorCheck {
    /// Extrapolated `t → 0` limit of the item-3 defect divided by `t²`.
    #[serde(serialize_with = "crate::format::sig17")]
    pub estimate: f64,
    /// `−2Γ₂(f) + 2κΓ(f) + (2/n)(Δf)²` at the vertex.
    #[serde(serialize_with = "crate::format::sig17")]
    pub reference: f64,
    /// Gap relative to the largest of `|reference|` and its three terms, or
    /// the absolute gap when all of them are below `1e-10`.
    #[serde(serialize_with = "crate::format::sig17")]
    pub error: f64,
    pub relative: bool,
    /// `−estimate`: negative exactly when the small-t expansion violates
    /// the Poincaré bound, i.e. when CD(n, κ) fails for `f` at the vertex.
    #[serde(serialize_with = "crate::format::sig17")]
    pub margin: f64,
}

/// Small-time expansion of item 3. Its `t²` coefficient is
/// `−2(Γ₂(f) − (1/n)(Δf)² − κΓ(f))`, so the sign of the limit decides
/// `CD(n, κ)` for `f` at `x`.
pub fn taylor_limit_check(
    sg: &HeatSemigroup<'_>,
    f: &ScalarField,
    n: Dimension,
    kappa: f64,
    x: &str,
) -> Result<TaylorCheck> {
    let g = sg.graph();
    let xi = g.index_of(x)?;
    let dense = f.to_dense(g)?;
    let work = centred(&dense);
    let gam = gamma_all(g, &work, &work);
    let lap = laplacian_all(g, &work);
    let inv_n = n.inverse();

    let quotient = |t: f64| {
        let c = Coefficients::new(kappa, n, t);
        let pf = sg.evolve(t, &work)[xi];
        let pf2 = sg.evolve(t, &square(&work))[xi];
        let pg = sg.evolve(t, &gam)[xi];
        let pl = sg.evolve(t, &lap)[xi];
        (pf2 - pf * pf - c.item3_gamma * pg + c.item3_laplacian * pl * pl) / (t * t)
    };
    // Richardson table on t0, t0/2, t0/4, t0/8
    let t0 = 1e-2;
    let mut table: Vec<f64> = (0..4).map(|k| quotient(t0 / f64::powi(2.0, k))).collect();
    for level in 1..4 {
        let factor = f64::powi(2.0, level);
        table = table.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
    }
    let estimate = table[0];

    let terms = [
        -2.0 * crate::gamma::gamma2_at(g, &work, &work, xi),
        2.0 * kappa * gam[xi],
        2.0 * inv_n * lap[xi] * lap[xi],
    ];
    let reference: f64 = terms.iter().sum();
    let scale = terms.iter().map(|v| v.abs()).fold(reference.abs(), f64::max);
    let gap = (estimate - reference).abs();
    let relative = scale >= 1e-10;
    Ok(TaylorCheck {
        estimate,
        reference,
        error: if relative { gap / scale } else { gap },
        relative,
        margin: -estimate,
    })
}

/// Checks that `f` is positive on the whole graph.
pub fn require_positive(sg: &HeatSemigroup<'_>, f: &[f64]) -> Result<()> {
    ensure_positive(sg.graph(), f)
}
