//! Qubit states, observables, channels and pseudo-density matrices.

mod channel;
mod correlation;
mod pdm;
pub mod random;
mod state;

pub use channel::{
    pauli_channel, KrausChannel, PauliChannelParams, KRAUS_ZERO_TOL, TRACE_PRESERVING_TOL,
};
pub use correlation::{
    isometry_in_time_check, isometry_residual, lemma1_residual, pauli_corr_lemma_check,
    seq_corr_channel, seq_corr_simple, state_independence_spread, ResidualReport,
};
pub(crate) use correlation::seq_corr_channel_ops;
pub use pdm::{
    causality_monotone, pdm_correlation, pdm_example, pdm_general, pdm_summary, pdm_two_events,
    pseudo_bell, EventScenario, MeasurementEvent, Pdm, PdmSummary, MAX_EVENTS,
};
pub use state::{pauli, BlochObservable, DensityMatrix, Pauli};
