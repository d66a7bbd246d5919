//! Cyclic Jacobi eigensolvers for real symmetric and complex Hermitian matrices.
//!
//! Each sweep visits every off-diagonal pair once and applies the plane
//! rotation that annihilates it. Off-diagonal mass decreases quadratically
//! once the sweeps are close to diagonal, so a few dozen sweeps suffice for
//! the dimensions used here (≤ 64).

use num_complex::Complex64;
use serde::Serialize;

use super::complex::{CMatrix, HermMatrix};
use super::real::{Mat, SymMatrix};
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone, Serialize)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the unit eigenvector for `eigenvalues[k]`.
    pub eigenvectors: Mat,
}

impl EigenDecomposition {
    /// `V diag(f(λ)) Vᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Mat {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        Mat::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)]).sum())
    }

    pub fn reconstruct(&self) -> Mat {
        self.reconstruct_with(|l| l)
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone, Serialize)]
pub struct HermEigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl HermEigenDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        CMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * self.eigenvalues[k] * v[(j, k)].conj())
                .sum()
        })
    }
}

fn off_diagonal_norm(a: &Mat) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Rotation `(c, s)` zeroing the `(p, q)` entry of a symmetric 2×2 block.
fn rotation(app: f64, aqq: f64, apq: f64) -> (f64, f64) {
    let tau = (aqq - app) / (2.0 * apq);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c)
}

pub fn eig_sym(m: &SymMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    let mut a = m.as_mat().clone();
    let mut v = Mat::identity(n);
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return Ok(EigenDecomposition {
            eigenvalues: vec![0.0; n],
            eigenvectors: v,
        });
    }
    if !scale.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let target = f64::EPSILON * scale * 0.5;
    let mut converged = off_diagonal_norm(&a) <= target;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                // skip entries that are negligible against both diagonals
                if apq.abs() < f64::EPSILON * 1e-3 * (a[(p, p)].abs() + a[(q, q)].abs()) {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let (c, s) = rotation(a[(p, p)], a[(q, q)], apq);
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        converged = off_diagonal_norm(&a) <= target;
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps,
            residual: off_diagonal_norm(&a),
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let eigenvalues = order.iter().map(|&k| a[(k, k)]).collect();
    let eigenvectors = Mat::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm_c(a: &CMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Complex Jacobi: each step is a phase change making `a_pq` real followed by
/// the real rotation, i.e. the unitary `J = diag(1, e^{-iφ}) R(θ)` on `(p, q)`.
pub fn eig_herm(m: &HermMatrix) -> Result<HermEigenDecomposition> {
    let n = m.dim();
    let mut a = m.as_cmatrix().clone();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm();
    if !scale.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let target = f64::EPSILON * scale * 0.5;
    let mut converged = off_diagonal_norm_c(&a) <= target;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if g < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = Complex64::new(0.0, 0.0);
                    a[(q, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let phase = apq / g; // e^{iφ}
                let (c, s) = rotation(app, aqq, g);
                // J columns: J[:,p] = (c, -s e^{-iφ}), J[:,q] = (s, c e^{-iφ}) on rows (p, q)
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                // A ← A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                // A ← J† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
        converged = off_diagonal_norm_c(&a) <= target;
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps,
            residual: off_diagonal_norm_c(&a),
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&k| a[(k, k)].re).collect();
    let eigenvectors = CMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    Ok(HermEigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}
