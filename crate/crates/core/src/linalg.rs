//! Thin wrappers over nalgebra's symmetric eigensolver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenpairs of a symmetric matrix, eigenvalues ascending; column `i` of
/// `vectors` belongs to `values[i]`.
#[derive(Debug, Clone)]
pub struct SortedEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<SortedEigen> {
    let n = m.nrows();
    if n == 0 {
        return Ok(SortedEigen { values: DVector::zeros(0), vectors: DMatrix::zeros(0, 0) });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen(format!("no convergence for {n}x{n} symmetric matrix")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        // deterministic sign: largest-magnitude component positive
        let lead = col.iamax();
        if col[lead] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(k, &col);
    }
    Ok(SortedEigen { values, vectors })
}

/// Moore–Penrose pseudo-inverse of a symmetric positive semidefinite matrix,
/// discarding eigenvalues at or below `cutoff`.
pub fn psd_pseudo_inverse(m: &DMatrix<f64>, cutoff: f64) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let eig = symmetric_eigen(m)?;
    let mut out = DMatrix::zeros(n, n);
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam > cutoff && lam > 0.0 {
            let v = eig.vectors.column(k);
            out += (1.0 / lam) * v * v.transpose();
        }
    }
    Ok(out)
}
