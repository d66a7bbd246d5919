//! Dense real-symmetric and complex-Hermitian matrix services.

mod complex;
mod factor;
mod jacobi;
mod real;

pub use complex::{CMatrix, HermMatrix, HERMITIAN_TOL};
pub use factor::{cholesky, cholesky_inverse, cholesky_solve, congruence_inverse, singular_values};
pub use jacobi::{eig_herm, eig_sym, EigenDecomposition, HermEigenDecomposition, MAX_SWEEPS};
pub use real::{Mat, SymMatrix};

use crate::error::{Error, Result};

/// Default PSD tolerance: a matrix counts as PSD when its minimum eigenvalue
/// is at least `-PSD_TOL`.
pub const PSD_TOL: f64 = 1e-9;

/// Matrices with a real spectrum.
pub trait Spectrum {
    /// Eigenvalues in ascending order.
    fn eigenvalues(&self) -> Result<Vec<f64>>;

    fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }
}

impl Spectrum for SymMatrix {
    fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eig_sym(self)?.eigenvalues)
    }
}

impl Spectrum for HermMatrix {
    fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eig_herm(self)?.eigenvalues)
    }
}

pub fn min_eigenvalue<M: Spectrum + ?Sized>(m: &M) -> Result<f64> {
    m.min_eigenvalue()
}

/// PSD verdict together with the eigenvalue it was decided on.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PsdVerdict {
    pub psd: bool,
    pub min_eigenvalue: f64,
}

pub fn psd_verdict<M: Spectrum + ?Sized>(m: &M, tol: f64) -> Result<PsdVerdict> {
    let min_eigenvalue = m.min_eigenvalue()?;
    Ok(PsdVerdict {
        psd: min_eigenvalue >= -tol,
        min_eigenvalue,
    })
}

/// Trace norm `Σ |λ_i|`.
pub fn trace_norm(m: &HermMatrix) -> Result<f64> {
    Ok(m.eigenvalues()?.iter().map(|l| l.abs()).sum())
}

pub fn frobenius_distance(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    Ok(a.as_mat().sub(b.as_mat()).frobenius_norm())
}

/// Principal square root of a PSD matrix.
///
/// Eigenvalues in `[-PSD_TOL, 0)` are treated as zero; anything more negative
/// is an error.
pub fn sqrt_psd(m: &SymMatrix) -> Result<SymMatrix> {
    let e = eig_sym(m)?;
    let min = e.eigenvalues[0];
    if min < -PSD_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(SymMatrix::symmetrized(e.reconstruct_with(|l| l.max(0.0).sqrt())))
}

/// Projection onto the PSD cone by clipping negative eigenvalues.
pub fn clip_to_psd(m: &SymMatrix) -> Result<SymMatrix> {
    let e = eig_sym(m)?;
    Ok(SymMatrix::symmetrized(e.reconstruct_with(|l| l.max(0.0))))
}

/// Numerical rank: singular values `≤ rel_tol · σ_max` count as zero.
pub fn numerical_rank(a: &Mat, rel_tol: f64) -> usize {
    let sv = singular_values(a);
    let max = sv.first().copied().unwrap_or(0.0);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}
