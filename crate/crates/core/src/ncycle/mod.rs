//! The N-cycle sequential inequality: bounds, optimizer, dual certificate,
//! uniqueness and robustness.

mod robustness;

pub use robustness::{
    project_to_feasible, robustness_experiment, RobustnessCurve, RobustnessSample,
    BISECTION_CAP, DEFICIT_BAND, ENVELOPE_FACTOR, EXPONENT_RANGE, FEASIBILITY_TOL, MAX_STEP,
};

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrixcore::{
    eig_sym, frobenius_distance, numerical_rank, sqrt_psd, Mat, Spectrum, SymMatrix, PSD_TOL,
};
use crate::qsim::{random::random_density, seq_corr_simple, BlochObservable, DensityMatrix};
use crate::sdpsolve::{self, SdpProblem, SolveStatus};

pub const OBJECTIVE_TOL: f64 = 1e-10;
pub const SLACKNESS_TOL: f64 = 1e-9;
/// Relative singular-value threshold of the nondegeneracy rank test.
pub const NULLSPACE_REL_TOL: f64 = 1e-9;

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::invalid(format!("cycle length n = {n} must be at least 3")));
    }
    Ok(())
}

/// `S_N = Σ_{i<N} ⟨A_i A_{i+1}⟩ − ⟨A_N A_1⟩` as a symmetric coefficient matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NCycleInequality {
    pub n: usize,
    /// `±½` on each cycle edge, stored on both sides so `⟨Λ, X⟩ = S_N`.
    pub coefficients: SymMatrix,
    pub classical_bound: f64,
    pub quantum_bound: f64,
}

impl NCycleInequality {
    /// `S_N` on a symmetric correlation matrix.
    pub fn evaluate(&self, x: &SymMatrix) -> Result<f64> {
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: x.dim(),
            });
        }
        Ok(self.coefficients.inner(x))
    }

    pub fn problem(&self) -> SdpProblem {
        SdpProblem::new(self.coefficients.clone()).expect("cycle objective has zero diagonal")
    }
}

pub fn build(n: usize) -> Result<NCycleInequality> {
    check_n(n)?;
    let mut m = Mat::zeros(n, n);
    for i in 0..n - 1 {
        m[(i, i + 1)] = 0.5;
        m[(i + 1, i)] = 0.5;
    }
    m[(0, n - 1)] = -0.5;
    m[(n - 1, 0)] = -0.5;
    Ok(NCycleInequality {
        n,
        coefficients: SymMatrix::from_mat(m)?,
        classical_bound: (n - 2) as f64,
        quantum_bound: n as f64 * (PI / n as f64).cos(),
    })
}

/// `X_opt[i][j] = cos((i − j)π/n)`: Gram matrix of planar unit vectors at
/// angles `iπ/n`.
pub fn analytic_optimizer(n: usize) -> Result<SymMatrix> {
    check_n(n)?;
    SymMatrix::from_fn(n, |i, j| ((i as f64 - j as f64) * PI / n as f64).cos())
}

/// `T_N`: −1 on the path off-diagonals, +1 on the corners `(1, N)`, `(N, 1)`.
pub fn cycle_matrix(n: usize) -> Result<SymMatrix> {
    check_n(n)?;
    let mut m = Mat::zeros(n, n);
    for i in 0..n - 1 {
        m[(i, i + 1)] = -1.0;
        m[(i + 1, i)] = -1.0;
    }
    m[(0, n - 1)] = 1.0;
    m[(n - 1, 0)] = 1.0;
    SymMatrix::from_mat(m)
}

/// `(W_N, T_N)` with `W_N = cos(π/N)·I + ½·T_N`.
pub fn dual_certificate(n: usize) -> Result<(SymMatrix, SymMatrix)> {
    let t = cycle_matrix(n)?;
    let c = (PI / n as f64).cos();
    let w = SymMatrix::identity(n).scale(c).add(&t.scale(0.5));
    Ok((w, t))
}

/// `{−2cos((2m+1)π/N) : m = 0…N−1}` in ascending order.
pub fn t_spectrum_analytic(n: usize) -> Result<Vec<f64>> {
    check_n(n)?;
    let mut ev: Vec<f64> = (0..n)
        .map(|m| -2.0 * ((2 * m + 1) as f64 * PI / n as f64).cos())
        .collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Linear system `M·W = 0` over symmetric zero-diagonal `M`, one column per
/// free entry `m_ab` (`a < b`), one row per entry of `M·W`.
fn annihilator_system(w: &SymMatrix) -> Mat {
    let n = w.dim();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
        .collect();
    let mut sys = Mat::zeros(n * n, pairs.len());
    for (col, &(a, b)) in pairs.iter().enumerate() {
        for j in 0..n {
            sys[(a * n + j, col)] += w[(b, j)];
            sys[(b * n + j, col)] += w[(a, j)];
        }
    }
    sys
}

/// Dimension of `{M symmetric, diag(M) = 0, M·W = 0}` by numerical rank.
pub fn annihilator_nullspace_dim(w: &SymMatrix) -> usize {
    let sys = annihilator_system(w);
    sys.cols() - numerical_rank(&sys, NULLSPACE_REL_TOL)
}

/// Nondegeneracy test of `W_N`; zero means the primal optimizer is unique.
pub fn nondegeneracy_nullspace(n: usize) -> Result<usize> {
    let (w, _) = dual_certificate(n)?;
    Ok(annihilator_nullspace_dim(&w))
}

/// Analytic optimizer, dual certificate and every check tying them together.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateBundle {
    pub n: usize,
    pub x_opt: SymMatrix,
    pub w: SymMatrix,
    pub t: SymMatrix,
    pub objective: f64,
    pub slackness: f64,
    pub w_min_eig: f64,
    pub w_trace: f64,
    /// `‖W − (Diag(w_ii) − Λ)‖_F`: zero iff `W` has the dual-slack form.
    pub dual_form_residual: f64,
    pub x_min_eig: f64,
    pub x_diag_residual: f64,
    pub nullspace_dim: usize,
    pub passed: bool,
    pub failures: Vec<String>,
}

impl CertificateBundle {
    /// Checks an arbitrary `(X, W, T)` triple against the `n`-cycle problem.
    pub fn assemble(n: usize, x_opt: SymMatrix, w: SymMatrix, t: SymMatrix) -> Result<Self> {
        let ineq = build(n)?;
        for m in [&x_opt, &w, &t] {
            if m.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: m.dim(),
                });
            }
        }
        let objective = ineq.evaluate(&x_opt)?;
        let slackness = x_opt.inner(&w);
        let w_min_eig = w.min_eigenvalue()?;
        let w_trace = w.trace();
        let dual_form = SymMatrix::diag(&w.diagonal()).sub(&ineq.coefficients);
        let dual_form_residual = frobenius_distance(&w, &dual_form)?;
        let x_min_eig = x_opt.min_eigenvalue()?;
        let x_diag_residual = x_opt
            .diagonal()
            .iter()
            .fold(0.0f64, |m, d| m.max((d - 1.0).abs()));
        let nullspace_dim = annihilator_nullspace_dim(&w);

        let mut failures = Vec::new();
        if !((objective - ineq.quantum_bound).abs() <= OBJECTIVE_TOL) {
            failures.push(format!(
                "objective: {objective} differs from n·cos(π/n) = {}",
                ineq.quantum_bound
            ));
        }
        if !(x_min_eig >= -PSD_TOL && x_diag_residual <= PSD_TOL) {
            failures.push(format!(
                "primal_infeasible: min eigenvalue {x_min_eig}, diagonal residual {x_diag_residual}"
            ));
        }
        if !(w_min_eig >= -PSD_TOL && dual_form_residual <= PSD_TOL) {
            failures.push(format!(
                "dual_infeasible: min eigenvalue {w_min_eig}, dual-form residual {dual_form_residual}"
            ));
        }
        if !((w_trace - ineq.quantum_bound).abs() <= OBJECTIVE_TOL) {
            failures.push(format!("dual_trace: trace(W) = {w_trace}"));
        }
        if !(slackness.abs() <= SLACKNESS_TOL) {
            failures.push(format!("slackness: ⟨X, W⟩ = {slackness}"));
        }
        if nullspace_dim != 0 {
            failures.push(format!("degenerate: nullspace dimension {nullspace_dim}"));
        }
        Ok(CertificateBundle {
            n,
            x_opt,
            w,
            t,
            objective,
            slackness,
            w_min_eig,
            w_trace,
            dual_form_residual,
            x_min_eig,
            x_diag_residual,
            nullspace_dim,
            passed: failures.is_empty(),
            failures,
        })
    }
}

pub fn certificate_bundle(n: usize) -> Result<CertificateBundle> {
    let x = analytic_optimizer(n)?;
    let (w, t) = dual_certificate(n)?;
    CertificateBundle::assemble(n, x, w, t)
}

/// Unit vectors whose Gram matrix is `x`: the columns of `√x`.
pub fn gram_vectors(x: &SymMatrix) -> Result<Vec<Vec<f64>>> {
    let worst = x
        .diagonal()
        .iter()
        .fold(0.0f64, |m, d| m.max((d - 1.0).abs()));
    if !(worst <= 1e-9) {
        return Err(Error::invalid(format!(
            "Gram extraction needs a unit diagonal (deviation {worst})"
        )));
    }
    let root = sqrt_psd(x)?;
    Ok((0..x.dim()).map(|j| root.as_mat().column(j)).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct QubitRealizationReport {
    pub n: usize,
    pub seed: u64,
    pub states: usize,
    /// `max |½Tr[ρ{A_i, A_j}] − X_opt[i][j]|` over all states and pairs.
    pub max_deviation: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub quantum_bound: f64,
    pub passed: bool,
}

pub const REALIZATION_RANDOM_STATES: usize = 50;
pub const REALIZATION_TOL: f64 = 1e-10;

/// Planar Bloch observables at angles `iπ/n` reproduce `X_opt` for every
/// state: `|0⟩⟨0|`, `I/2` and [`REALIZATION_RANDOM_STATES`] random states.
pub fn qubit_realization_check(n: usize, seed: u64) -> Result<QubitRealizationReport> {
    let ineq = build(n)?;
    let x_opt = analytic_optimizer(n)?;
    let obs: Vec<BlochObservable> = (0..n)
        .map(|i| BlochObservable::in_xy_plane(i as f64 * PI / n as f64))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = vec![DensityMatrix::zero(), DensityMatrix::maximally_mixed()];
    states.extend((0..REALIZATION_RANDOM_STATES).map(|_| random_density(&mut rng)));

    let mut max_deviation: f64 = 0.0;
    let (mut s_min, mut s_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for rho in &states {
        let corr = SymMatrix::from_fn(n, |i, j| seq_corr_simple(rho, &obs[i], &obs[j]))?;
        max_deviation = max_deviation.max(corr.as_mat().sub(x_opt.as_mat()).max_abs());
        let s = ineq.evaluate(&corr)?;
        s_min = s_min.min(s);
        s_max = s_max.max(s);
    }
    let passed = max_deviation <= REALIZATION_TOL
        && (s_min - ineq.quantum_bound).abs() <= REALIZATION_TOL
        && (s_max - ineq.quantum_bound).abs() <= REALIZATION_TOL;
    Ok(QubitRealizationReport {
        n,
        seed,
        states: states.len(),
        max_deviation,
        s_min,
        s_max,
        quantum_bound: ineq.quantum_bound,
        passed,
    })
}

/// Classical, quantum and numerically solved bounds side by side.
#[derive(Debug, Clone, Serialize)]
pub struct BoundSummary {
    pub n: usize,
    pub classical: f64,
    pub quantum: f64,
    pub sdp: f64,
    pub sdp_dual: f64,
    pub gap: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub passed: bool,
}

pub const BOUND_AGREEMENT_TOL: f64 = 1e-6;

pub fn bound_summary(n: usize, tol: f64) -> Result<BoundSummary> {
    let ineq = build(n)?;
    let sol = sdpsolve::solve(&ineq.problem(), tol, sdpsolve::DEFAULT_MAX_ITER)?;
    Ok(BoundSummary {
        n,
        classical: ineq.classical_bound,
        quantum: ineq.quantum_bound,
        sdp: sol.primal_value,
        sdp_dual: sol.dual_value,
        gap: sol.gap,
        iterations: sol.iterations,
        status: sol.status,
        passed: sol.status == SolveStatus::Optimal
            && (sol.primal_value - ineq.quantum_bound).abs() <= BOUND_AGREEMENT_TOL
            && (sol.dual_value - ineq.quantum_bound).abs() <= BOUND_AGREEMENT_TOL,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub n: usize,
    pub nullspace_dim: usize,
    pub solver_distance: f64,
    pub solver_status: SolveStatus,
    pub passed: bool,
}

pub const SOLVER_DISTANCE_TOL: f64 = 1e-4;

/// Nondegeneracy of `W_N` together with the solver's optimizer landing on
/// `X_opt`.
pub fn uniqueness_report(n: usize, tol: f64) -> Result<UniquenessReport> {
    let ineq = build(n)?;
    let nullspace_dim = nondegeneracy_nullspace(n)?;
    let sol = sdpsolve::solve(&ineq.problem(), tol, sdpsolve::DEFAULT_MAX_ITER)?;
    let solver_distance = frobenius_distance(&sol.primal, &analytic_optimizer(n)?)?;
    Ok(UniquenessReport {
        n,
        nullspace_dim,
        solver_distance,
        solver_status: sol.status,
        passed: nullspace_dim == 0 && solver_distance <= SOLVER_DISTANCE_TOL,
    })
}

/// Numerical spectrum of `T_N` next to the closed form.
pub fn t_spectrum_numeric(n: usize) -> Result<Vec<f64>> {
    Ok(eig_sym(&cycle_matrix(n)?)?.eigenvalues)
}
