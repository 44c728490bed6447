//! Hermitian eigenvalue helpers shared by the PSD checks.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance of the PSD verdict:
/// pass iff `min_eig >= -PSD_TOL * max(1, max_eig)`.
pub const PSD_TOL: f64 = 1e-8;

const EIGEN_MAX_ITER: usize = 10_000;

pub fn psd_verdict(min_eig: f64, max_eig: f64) -> bool {
    min_eig >= -PSD_TOL * max_eig.max(1.0)
}

/// Largest `|a_kl - conj(a_lk)|`.
pub fn hermitian_gap(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut gap: f64 = 0.0;
    for k in 0..n {
        for l in k..n {
            gap = gap.max((m[(k, l)] - m[(l, k)].conj()).norm());
        }
    }
    gap
}

/// Eigenvalues of the Hermitian part `(A + A^H) / 2`, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let herm = DMatrix::from_fn(n, n, |k, l| (m[(k, l)] + m[(l, k)].conj()) * 0.5);
    let eig = SymmetricEigen::try_new(herm, f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(Error::EigenConvergence(EIGEN_MAX_ITER))?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.total_cmp(b));
    Ok(values)
}

/// `(min_eig, max_eig)` of the Hermitian part.
pub fn eigen_extremes(m: &DMatrix<Complex64>) -> Result<(f64, f64)> {
    let values = hermitian_eigenvalues(m)?;
    Ok((*values.first().unwrap_or(&0.0), *values.last().unwrap_or(&0.0)))
}
