//! Primal-dual interior point solver for the unit-diagonal PSD program
//!
//! ```text
//! maximize   Σ_ij λ_ij X_ij          minimize   Σ_i y_i
//! subject to X ⪰ 0, X_ii = 1         subject to S = Diag(y) − Λ ⪰ 0
//! ```
//!
//! The solver follows the HKM (XZ) search direction with a Mehrotra
//! predictor-corrector. With constraint matrices `e_i e_iᵀ` the Schur
//! complement reduces to the Hadamard product `X ∘ S⁻¹`, which is positive
//! definite whenever both iterates are, so a Cholesky factorisation suffices.
//! Iterates start at the strictly feasible pair `X = I`, `y = (1 + ‖Λ‖_F)·1`
//! and stay feasible; the duality gap `Σ y − ⟨Λ, X⟩ = ⟨X, S⟩` certifies the
//! answer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixcore::{
    cholesky, cholesky_inverse, cholesky_solve, congruence_inverse, eig_sym, Mat, Spectrum,
    SymMatrix, PSD_TOL,
};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const STEP_FRACTION: f64 = 0.98;
/// Step halvings allowed when an iterate fails to factor.
pub const BACKTRACK_CAP: usize = 30;
/// Tolerance on `|X_ii − 1|` for a primal point to count as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Tolerance on `|⟨X, S⟩|` for a pair to count as complementary.
pub const COMPLEMENTARITY_TOL: f64 = 1e-9;

/// Unit-diagonal PSD maximisation instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    objective: SymMatrix,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    dim: usize,
    lambda: Vec<Vec<f64>>,
}

impl SdpProblem {
    /// The coefficient matrix must have an exactly zero diagonal.
    pub fn new(objective: SymMatrix) -> Result<Self> {
        if let Some(i) = (0..objective.dim()).find(|&i| objective[(i, i)] != 0.0) {
            return Err(Error::invalid(format!(
                "objective has nonzero diagonal entry λ_{i}{i} = {}",
                objective[(i, i)]
            )));
        }
        if objective.as_mat().as_slice().iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("objective has non-finite entries"));
        }
        Ok(SdpProblem { objective })
    }

    /// Parses `{"dim": N, "lambda": [[...], ...]}`. A one-sided `lambda` is
    /// accepted and symmetrised, which leaves `Σ λ_ij X_ij` unchanged on
    /// symmetric `X`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(s)?;
        if file.lambda.len() != file.dim {
            return Err(Error::DimensionMismatch {
                expected: file.dim,
                actual: file.lambda.len(),
            });
        }
        Self::new(SymMatrix::from_rows(&file.lambda)?)
    }

    pub fn to_json_string(&self) -> String {
        let file = ProblemFile {
            dim: self.dim(),
            lambda: self.objective.to_rows(),
        };
        serde_json::to_string(&file).expect("problem serialises")
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn objective(&self) -> &SymMatrix {
        &self.objective
    }

    /// `Σ_ij λ_ij X_ij`.
    pub fn objective_value(&self, x: &SymMatrix) -> f64 {
        self.objective.inner(x)
    }

    /// `Diag(y) − Λ`.
    pub fn dual_slack(&self, y: &[f64]) -> SymMatrix {
        SymMatrix::diag(y).sub(&self.objective)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Debug, Clone, Serialize)]
pub struct SdpSolution {
    pub primal: SymMatrix,
    pub dual: Vec<f64>,
    pub dual_slack: SymMatrix,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub step_fraction: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            step_fraction: STEP_FRACTION,
        }
    }
}

pub fn solve(p: &SdpProblem, tol: f64, max_iter: usize) -> Result<SdpSolution> {
    solve_with(
        p,
        &SolverOptions {
            tol,
            max_iter,
            ..SolverOptions::default()
        },
    )
}

/// Largest `α` with `M + α D ⪰ 0`, given the Cholesky factor of `M ≻ 0`.
fn max_step(l: &Mat, d: &Mat) -> Result<f64> {
    let scaled = SymMatrix::symmetrized(congruence_inverse(l, d));
    let min = eig_sym(&scaled)?.eigenvalues[0];
    Ok(if min < 0.0 { -1.0 / min } else { f64::INFINITY })
}

struct Direction {
    dx: Mat,
    dy: Vec<f64>,
}

/// Solves `ΔX S + X ΔS = R`, `diag(ΔX) = r_p`, `ΔS = Diag(Δy)`, given
/// `R S⁻¹` directly; forming `R` first would cancel badly when `S` is
/// nearly singular.
fn direction(x: &Mat, s_inv: &Mat, schur_chol: &Mat, r_sinv: &Mat, r_p: &[f64]) -> Direction {
    let rhs: Vec<f64> = r_sinv
        .diagonal()
        .iter()
        .zip(r_p)
        .map(|(a, b)| a - b)
        .collect();
    let dy = cholesky_solve(schur_chol, &rhs);
    let n = x.rows();
    // X Diag(Δy) S⁻¹
    let x_dy = Mat::from_fn(n, n, |i, j| x[(i, j)] * dy[j]);
    let dx = r_sinv.sub(&x_dy.matmul(s_inv)).symmetric_part();
    Direction { dx, dy }
}

pub fn solve_with(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let n = p.dim();
    let c = p.objective().as_mat();
    let mut x = Mat::identity(n);
    let mut y = vec![1.0 + c.frobenius_norm(); n];
    let slack = |y: &[f64]| Mat::diag(y).sub(c);
    let mut s = slack(&y);

    let mut iterations = 0;
    let mut status = SolveStatus::MaxIter;
    loop {
        let r_p: Vec<f64> = x.diagonal().iter().map(|d| 1.0 - d).collect();
        let primal_res = r_p.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let gap = y.iter().sum::<f64>() - c.inner(&x);
        log::trace!("iter {iterations}: gap {gap:e}, primal residual {primal_res:e}");
        if gap <= opts.tol && primal_res <= FEASIBILITY_TOL {
            status = SolveStatus::Optimal;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let singular = |detail: &str| Error::SingularNewton {
            iteration: iterations,
            detail: detail.to_string(),
        };
        let l_s = cholesky(&s).ok_or_else(|| singular("dual slack lost definiteness"))?;
        let l_x = cholesky(&x).ok_or_else(|| singular("primal iterate lost definiteness"))?;
        let s_inv = cholesky_inverse(&l_s);
        let schur_chol = cholesky(&x.hadamard(&s_inv))
            .ok_or_else(|| singular("Schur complement X∘S⁻¹ not positive definite"))?;
        let mu = x.inner(&s) / n as f64;

        // predictor
        let pred = direction(&x, &s_inv, &schur_chol, &x.scale(-1.0), &r_p);
        let ds_pred = Mat::diag(&pred.dy);
        let ap = max_step(&l_x, &pred.dx)?.min(1.0);
        let ad = max_step(&l_s, &ds_pred)?.min(1.0);
        let mu_aff = x
            .add(&pred.dx.scale(ap))
            .inner(&s.add(&ds_pred.scale(ad)))
            / n as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        // R S⁻¹ = σμ S⁻¹ − X − ΔX_p Diag(Δy_p) S⁻¹
        let dxp_dy = Mat::from_fn(n, n, |i, j| pred.dx[(i, j)] * pred.dy[j]);
        let r_sinv = s_inv
            .scale(sigma * mu)
            .sub(&x)
            .sub(&dxp_dy.matmul(&s_inv));
        let corr = direction(&x, &s_inv, &schur_chol, &r_sinv, &r_p);
        let ds = Mat::diag(&corr.dy);
        let ap = (opts.step_fraction * max_step(&l_x, &corr.dx)?).min(1.0);
        let ad = (opts.step_fraction * max_step(&l_s, &ds)?).min(1.0);

        // Roundoff near the boundary can defeat the eigenvalue step bound;
        // backtrack until the factorization succeeds.
        let (mut ap, mut ad) = (ap, ad);
        let mut x_next = x.add(&corr.dx.scale(ap)).symmetric_part();
        let mut halvings = 0;
        while cholesky(&x_next).is_none() {
            halvings += 1;
            if halvings > BACKTRACK_CAP {
                return Err(singular("no positive definite primal step"));
            }
            ap *= 0.5;
            x_next = x.add(&corr.dx.scale(ap)).symmetric_part();
        }
        let step_y = |a: f64| -> Vec<f64> { y.iter().zip(&corr.dy).map(|(yi, d)| yi + a * d).collect() };
        let mut y_next = step_y(ad);
        let mut halvings = 0;
        while cholesky(&slack(&y_next)).is_none() {
            halvings += 1;
            if halvings > BACKTRACK_CAP {
                return Err(singular("dual slack lost definiteness"));
            }
            ad *= 0.5;
            y_next = step_y(ad);
        }
        x = x_next;
        y = y_next;
        s = slack(&y);
        if !x.as_slice().iter().chain(&y).all(|v| v.is_finite()) {
            return Err(singular("iterate became non-finite"));
        }
    }

    let primal = SymMatrix::symmetrized(x);
    let dual_slack = SymMatrix::symmetrized(s);
    let primal_value = p.objective_value(&primal);
    let dual_value: f64 = y.iter().sum();
    Ok(SdpSolution {
        primal,
        dual: y,
        dual_slack,
        primal_value,
        dual_value,
        gap: dual_value - primal_value,
        iterations,
        status,
    })
}

/// Feasibility and complementary-slackness evidence for a candidate pair.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateVerdict {
    /// `max_i |X_ii − 1|`.
    pub primal_residual: f64,
    pub primal_min_eigenvalue: f64,
    pub primal_feasible: bool,
    pub dual_slack_min_eigenvalue: f64,
    pub dual_feasible: bool,
    /// `⟨X, S⟩` with `S = Diag(y) − Λ`.
    pub complementarity: f64,
    pub primal_value: f64,
    pub dual_value: f64,
    pub optimal_pair: bool,
}

pub fn check_certificate(p: &SdpProblem, x: &SymMatrix, y: &[f64]) -> Result<CertificateVerdict> {
    let n = p.dim();
    if x.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: x.dim(),
        });
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: y.len(),
        });
    }
    let primal_residual = x
        .diagonal()
        .iter()
        .fold(0.0f64, |m, d| m.max((d - 1.0).abs()));
    let primal_min_eigenvalue = x.min_eigenvalue()?;
    let primal_feasible = primal_residual <= FEASIBILITY_TOL && primal_min_eigenvalue >= -PSD_TOL;
    let s = p.dual_slack(y);
    let dual_slack_min_eigenvalue = s.min_eigenvalue()?;
    let dual_feasible = dual_slack_min_eigenvalue >= -PSD_TOL;
    let complementarity = x.inner(&s);
    Ok(CertificateVerdict {
        primal_residual,
        primal_min_eigenvalue,
        primal_feasible,
        dual_slack_min_eigenvalue,
        dual_feasible,
        complementarity,
        primal_value: p.objective_value(x),
        dual_value: y.iter().sum(),
        optimal_pair: primal_feasible
            && dual_feasible
            && complementarity.abs() <= COMPLEMENTARITY_TOL,
    })
}

/// Environment variable overriding [`DEFAULT_TOL`].
pub const TOL_ENV: &str = "TEMPORAL_CERT_TOL";

/// Parses a solver tolerance given as a decimal literal; must be positive and
/// finite.
pub fn parse_tolerance(s: &str) -> Result<f64> {
    let t = s.trim();
    let tol: f64 = t
        .parse()
        .map_err(|e| Error::invalid(format!("tolerance {t:?} is not a decimal literal: {e}")))?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid(format!("tolerance {tol} must be positive and finite")));
    }
    Ok(tol)
}

/// [`DEFAULT_TOL`] unless [`TOL_ENV`] is set.
pub fn tolerance_from_env() -> Result<f64> {
    match std::env::var(TOL_ENV) {
        Ok(v) => parse_tolerance(&v),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_TOL),
        Err(e) => Err(Error::invalid(format!("{TOL_ENV}: {e}"))),
    }
}
