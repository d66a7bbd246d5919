use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::channel::KrausChannel;
use super::pdm::{pdm_correlation, pdm_correlation_matrices, pdm_two_events};
use super::random::{haar_unitary, random_channel, random_density, random_observable};
use super::state::{BlochObservable, DensityMatrix, Pauli};
use crate::error::{Error, Result};
use crate::matrixcore::CMatrix;

pub const UNITARY_CHECK_TOL: f64 = 1e-12;

/// `½ Tr(ρ{A, B})`.
pub fn seq_corr_simple(rho: &DensityMatrix, a: &BlochObservable, b: &BlochObservable) -> f64 {
    0.5 * rho.expectation(&a.matrix().anticommutator(&b.matrix()))
}

/// `½ Tr[(Aρ + ρA) E†(B)]`.
pub fn seq_corr_channel(
    rho: &DensityMatrix,
    a: &BlochObservable,
    b: &BlochObservable,
    ch: &KrausChannel,
) -> f64 {
    seq_corr_channel_ops(rho.matrix(), &a.matrix(), &b.matrix(), ch)
}

pub(crate) fn seq_corr_channel_ops(rho: &CMatrix, a: &CMatrix, b: &CMatrix, ch: &KrausChannel) -> f64 {
    0.5 * a.anticommutator(rho).trace_product(&ch.adjoint_apply(b)).re
}

fn axis(p: Pauli) -> Result<BlochObservable> {
    BlochObservable::axis(p)
}

/// Two-event Pauli correlation against
/// `½[⟨σ_k⟩_ρ Tr(σ_l E(σ₀)) + Tr(σ_l E(σ_k))]`; returns `(lhs, rhs)`.
pub fn pauli_corr_lemma_check(
    rho: &DensityMatrix,
    ch: &KrausChannel,
    k: Pauli,
    l: Pauli,
) -> Result<(f64, f64)> {
    let lhs = pdm_correlation(&pdm_two_events(rho, ch), &axis(k)?, &axis(l)?)?;
    let (sk, sl) = (k.matrix(), l.matrix());
    let e0 = ch.apply(&Pauli::I.matrix());
    let ek = ch.apply(&sk);
    let rhs = 0.5 * (rho.expectation(&sk) * sl.trace_product(&e0).re + sl.trace_product(&ek).re);
    Ok((lhs, rhs))
}

/// Correlation before and after `ρ → VρV†`, `A → VAV†`, `B → UBU†`,
/// `K → U K V†`; returns `(before, after)`.
pub fn isometry_in_time_check(
    rho: &DensityMatrix,
    ch: &KrausChannel,
    a: &BlochObservable,
    b: &BlochObservable,
    v_choice: Pauli,
    u: &CMatrix,
) -> Result<(f64, f64)> {
    if v_choice == Pauli::I {
        return Err(Error::invalid("V must be one of X, Y, Z"));
    }
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: u.dim(),
        });
    }
    let deviation = u.unitarity_deviation();
    if !(deviation <= UNITARY_CHECK_TOL) {
        return Err(Error::NotUnitary { deviation });
    }
    let v = v_choice.matrix();
    let before = pdm_correlation(&pdm_two_events(rho, ch), a, b)?;
    let after = pdm_correlation_matrices(
        &rho.matrix().conjugate_by(&v),
        &ch.conjugated(u, &v)?,
        &a.matrix().conjugate_by(&v),
        &b.matrix().conjugate_by(u),
    );
    Ok((before, after))
}

/// Largest residual over a seeded batch of random scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub scenarios: usize,
    pub seed: u64,
    pub max_residual: f64,
}

/// `max |Tr[(A⊗B)R_AB] − ⟨AB⟩_seq|` over random states, two-Kraus channels
/// and observables.
pub fn lemma1_residual(seed: u64, count: usize) -> ResidualReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual: f64 = 0.0;
    for _ in 0..count {
        let rho = random_density(&mut rng);
        let ch = random_channel(&mut rng);
        let a = random_observable(&mut rng);
        let b = random_observable(&mut rng);
        let lhs = pdm_correlation(&pdm_two_events(&rho, &ch), &a, &b).expect("two-event PDM");
        let rhs = seq_corr_channel(&rho, &a, &b, &ch);
        max_residual = max_residual.max((lhs - rhs).abs());
    }
    ResidualReport {
        scenarios: count,
        seed,
        max_residual,
    }
}

/// `max |before − after|` for the isometry-in-time identity; V cycles through
/// X, Y, Z and U is Haar random.
pub fn isometry_residual(seed: u64, count: usize) -> ResidualReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual: f64 = 0.0;
    for i in 0..count {
        let rho = random_density(&mut rng);
        let ch = random_channel(&mut rng);
        let a = random_observable(&mut rng);
        let b = random_observable(&mut rng);
        let u = haar_unitary(&mut rng);
        let v = Pauli::AXES[i % 3];
        let (before, after) =
            isometry_in_time_check(&rho, &ch, &a, &b, v, &u).expect("Haar unitary passes the check");
        max_residual = max_residual.max((before - after).abs());
    }
    ResidualReport {
        scenarios: count,
        seed,
        max_residual,
    }
}

/// Spread `max − min` of `seq_corr_simple(ρ, a, b)` over random states.
pub fn state_independence_spread(seed: u64, count: usize, a: &BlochObservable, b: &BlochObservable) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..count)
        .map(|_| seq_corr_simple(&random_density(&mut rng), a, b))
        .collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() {
        0.0
    } else {
        max - min
    }
}
