//! Residuals of the structural heat-kernel and semigroup identities on a
//! whole finite graph.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;
use crate::expm::{heat_semigroup_matrix, laplacian_matrix};
use crate::heat::HeatSemigroup;

/// Kernel properties at times `t` and `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelProperties {
    /// `max |p_t(x,y) − p_t(y,x)|`
    #[serde(serialize_with = "crate::format::sig17")]
    pub symmetry: f64,
    /// `min p_t(x,y)`
    #[serde(serialize_with = "crate::format::sig17")]
    pub min_value: f64,
    /// `max_x |Σ_y μ(y)p_t(x,y) − 1|`
    #[serde(serialize_with = "crate::format::sig17")]
    pub row_sum_deviation: f64,
    /// `max_x |Σ_y μ(y)p_τ(x,y) − 1|` at `τ = 1e-8`
    #[serde(serialize_with = "crate::format::sig17")]
    pub small_time_row_sum_deviation: f64,
    /// `max |μ(y)p_τ(x,y) − δ_xy|` at `τ = 1e-8`
    #[serde(serialize_with = "crate::format::sig17")]
    pub small_time_identity: f64,
    /// Relative sup-error between a centred difference of `p_t` in `t` and
    /// `Δ_x p_t`, `Δ_y p_t`, and the spectral derivative.
    #[serde(serialize_with = "crate::format::sig17")]
    pub heat_equation: f64,
    /// `max |Σ_z μ(z)p_t(x,z)p_s(z,y) − p_{t+s}(x,y)|`
    #[serde(serialize_with = "crate::format::sig17")]
    pub chapman_kolmogorov: f64,
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

pub fn kernel_properties(sg: &HeatSemigroup<'_>, t: f64, s: f64) -> KernelProperties {
    let g = sg.graph();
    let spec = sg.spectrum();
    let n = g.num_vertices();
    let mu = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(g.mu()));
    let p = spec.kernel_matrix(t);

    let symmetry = max_abs(&(&p - p.transpose()));
    let min_value = p.iter().copied().fold(f64::INFINITY, f64::min);
    let row_sums = &p * nalgebra::DVector::from_column_slice(g.mu());
    let row_sum_deviation = row_sums.iter().fold(0.0f64, |a, v| a.max((v - 1.0).abs()));

    let tiny = 1e-8;
    let p_tiny = spec.kernel_matrix(tiny);
    let small_rows = &p_tiny * nalgebra::DVector::from_column_slice(g.mu());
    let small_time_row_sum_deviation = small_rows.iter().fold(0.0f64, |a, v| a.max((v - 1.0).abs()));
    let small_time_identity = max_abs(&(&p_tiny * &mu - DMatrix::identity(n, n)));

    let h = 1e-5 * t;
    let fd = (spec.kernel_matrix(t + h) - spec.kernel_matrix(t - h)) / (2.0 * h);
    let lap = laplacian_matrix(g);
    let dx = &lap * &p;
    let dy = &p * lap.transpose();
    let spectral = DMatrix::from_fn(n, n, |i, j| spec.kernel_time_derivative(t, i, j));
    let scale = max_abs(&dx).max(1e-300);
    let heat_equation = [max_abs(&(&fd - &dx)), max_abs(&(&fd - &dy)), max_abs(&(&fd - &spectral))]
        .into_iter()
        .fold(0.0, f64::max)
        / scale;

    let ck = &p * &mu * spec.kernel_matrix(s) - spec.kernel_matrix(t + s);
    KernelProperties {
        symmetry,
        min_value,
        row_sum_deviation,
        small_time_row_sum_deviation,
        small_time_identity,
        heat_equation,
        chapman_kolmogorov: max_abs(&ck),
    }
}

/// Semigroup properties for one function `f` at times `t` and `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SemigroupProperties {
    /// `‖P_t P_s f − P_{t+s} f‖_∞`
    #[serde(serialize_with = "crate::format::sig17")]
    pub semigroup_law: f64,
    /// `‖ΔP_t f − P_tΔf‖_∞`
    #[serde(serialize_with = "crate::format::sig17")]
    pub commutation: f64,
    /// `‖P_t f − e^{tΔ}f‖_∞` against the Taylor scaling-and-squaring oracle.
    #[serde(serialize_with = "crate::format::sig17")]
    pub matrix_exponential: f64,
    /// `‖P_t f‖_∞ − ‖f‖_∞`; nonpositive for a contraction.
    #[serde(serialize_with = "crate::format::sig17")]
    pub contraction_excess: f64,
}

pub fn semigroup_properties(sg: &HeatSemigroup<'_>, f: &[f64], t: f64, s: f64) -> Result<SemigroupProperties> {
    let g = sg.graph();
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));

    let pt = sg.apply(t, f)?;
    let ps = sg.apply(s, f)?;
    let pts = sg.apply(t, &ps)?;
    let p_sum = sg.apply(t + s, f)?;
    let lap_pt = crate::gamma::laplacian_all(g, &pt);
    let pt_lap = sg.apply(t, &crate::gamma::laplacian_all(g, f))?;
    let oracle = heat_semigroup_matrix(g, t) * nalgebra::DVector::from_column_slice(f);

    Ok(SemigroupProperties {
        semigroup_law: diff(&pts, &p_sum),
        commutation: diff(&lap_pt, &pt_lap),
        matrix_exponential: diff(&pt, oracle.as_slice()),
        contraction_excess: sup(&pt) - sup(f),
    })
}
