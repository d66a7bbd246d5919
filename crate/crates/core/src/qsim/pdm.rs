use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::channel::KrausChannel;
use super::state::{BlochObservable, DensityMatrix, Pauli, STATE_PSD_TOL};
use crate::error::{Error, Result};
use crate::matrixcore::{min_eigenvalue, trace_norm, CMatrix, HermMatrix};

pub const PDM_TRACE_TOL: f64 = 1e-10;
pub const MAX_EVENTS: usize = 4;
pub const MAX_QUBITS: usize = 4;

/// Pseudo-density matrix over `events` qubit measurement events.
///
/// Unit trace and Hermitian, but not necessarily PSD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PdmRepr", into = "PdmRepr")]
pub struct Pdm {
    events: usize,
    matrix: HermMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PdmRepr {
    events: usize,
    matrix: HermMatrix,
}

impl TryFrom<PdmRepr> for Pdm {
    type Error = Error;

    fn try_from(r: PdmRepr) -> Result<Self> {
        Pdm::new(r.events, r.matrix)
    }
}

impl From<Pdm> for PdmRepr {
    fn from(p: Pdm) -> Self {
        PdmRepr {
            events: p.events,
            matrix: p.matrix,
        }
    }
}

impl Pdm {
    pub fn new(events: usize, matrix: HermMatrix) -> Result<Self> {
        if events == 0 || events > MAX_EVENTS {
            return Err(Error::invalid(format!(
                "PDM event count {events} outside 1..={MAX_EVENTS}"
            )));
        }
        if matrix.dim() != 1 << events {
            return Err(Error::DimensionMismatch {
                expected: 1 << events,
                actual: matrix.dim(),
            });
        }
        let trace = matrix.trace();
        if !((trace - 1.0).abs() <= PDM_TRACE_TOL) {
            return Err(Error::invalid(format!("PDM trace {trace} ≠ 1")));
        }
        Ok(Pdm { events, matrix })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn events(&self) -> usize {
        self.events
    }

    pub fn matrix(&self) -> &HermMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        use crate::matrixcore::Spectrum;
        self.matrix.eigenvalues()
    }
}

/// `{ρ ⊗ I/2, S}` with `S = ½ Σ σ_i ⊗ σ_i` (the swap), followed by
/// `I ⊗ E` on the second factor.
pub fn pdm_two_events(rho: &DensityMatrix, ch: &KrausChannel) -> Pdm {
    two_event_matrix(rho.matrix(), ch)
}

fn two_event_matrix(rho: &CMatrix, ch: &KrausChannel) -> Pdm {
    let swap = Pauli::ALL
        .iter()
        .fold(CMatrix::zeros(4), |acc, p| acc.add(&p.matrix().kron(&p.matrix())))
        .scale_real(0.5);
    let m = rho.kron(&CMatrix::identity(2).scale_real(0.5)).anticommutator(&swap);
    let id = CMatrix::identity(2);
    let out = ch
        .kraus()
        .iter()
        .fold(CMatrix::zeros(4), |acc, k| acc.add(&m.conjugate_by(&id.kron(k))));
    let herm = HermMatrix::new(out).expect("two-event PDM is Hermitian by construction");
    Pdm::new(2, herm).expect("two-event PDM has unit trace by construction")
}

/// `Tr[(A ⊗ B) R]` for a two-event PDM.
pub fn pdm_correlation(r: &Pdm, a: &BlochObservable, b: &BlochObservable) -> Result<f64> {
    correlation_ops(r, &a.matrix(), &b.matrix())
}

fn correlation_ops(r: &Pdm, a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if r.events != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: r.events,
        });
    }
    Ok(a.kron(b).trace_product(r.matrix.as_cmatrix()).re)
}

pub(crate) fn pdm_correlation_matrices(
    rho: &CMatrix,
    ch: &KrausChannel,
    a: &CMatrix,
    b: &CMatrix,
) -> f64 {
    correlation_ops(&two_event_matrix(rho, ch), a, b).expect("two-event PDM")
}

/// `‖R‖_tr − 1`.
pub fn causality_monotone(r: &Pdm) -> Result<f64> {
    Ok(trace_norm(&r.matrix)? - 1.0)
}

/// `¼(I ± X⊗X ± Y⊗Y ± Z⊗Z)` with sign patterns (+++), (+−−), (−+−), (−−+)
/// for `index` 1 through 4.
pub fn pseudo_bell(index: usize) -> Result<Pdm> {
    let signs = match index {
        1 => [1.0, 1.0, 1.0],
        2 => [1.0, -1.0, -1.0],
        3 => [-1.0, 1.0, -1.0],
        4 => [-1.0, -1.0, 1.0],
        _ => return Err(Error::invalid(format!("pseudo-Bell index {index} outside 1..=4"))),
    };
    let m = Pauli::AXES
        .iter()
        .zip(signs)
        .fold(CMatrix::identity(4), |acc, (p, s)| {
            acc.add(&p.matrix().kron(&p.matrix()).scale_real(s))
        })
        .scale_real(0.25);
    Pdm::new(2, HermMatrix::new(m)?)
}

/// Named PDMs: `rex` (two events on `|0⟩⟨0|`, no channel) and `bell1`
/// through `bell4`.
pub fn pdm_example(name: &str) -> Result<Pdm> {
    match name {
        "rex" => Ok(pdm_two_events(&DensityMatrix::zero(), &KrausChannel::identity())),
        _ => match name.strip_prefix("bell").map(str::parse::<usize>) {
            Some(Ok(i)) => pseudo_bell(i),
            _ => Err(Error::invalid(format!(
                "unknown PDM example {name:?} (expected rex or bell1..bell4)"
            ))),
        },
    }
}

/// Spectrum and causality monotone of a PDM.
#[derive(Debug, Clone, Serialize)]
pub struct PdmSummary {
    pub events: usize,
    pub matrix: HermMatrix,
    pub eigenvalues: Vec<f64>,
    pub trace_norm: f64,
    pub causality_monotone: f64,
    /// Minimum eigenvalue at least `-1e-10`.
    pub psd: bool,
}

pub fn pdm_summary(r: &Pdm) -> Result<PdmSummary> {
    let eigenvalues = r.eigenvalues()?;
    let trace_norm: f64 = eigenvalues.iter().map(|l| l.abs()).sum();
    Ok(PdmSummary {
        events: r.events,
        matrix: r.matrix.clone(),
        psd: eigenvalues[0] >= -STATE_PSD_TOL,
        eigenvalues,
        trace_norm,
        causality_monotone: trace_norm - 1.0,
    })
}

/// A measurement event: which qubit is measured and in which time slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementEvent {
    pub qubit: usize,
    pub time: usize,
}

/// Initial register state plus an ordered event list for [`pdm_general`].
///
/// Qubit 0 is the most significant tensor factor of `state`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventScenario {
    pub qubits: usize,
    pub state: CMatrix,
    pub events: Vec<MeasurementEvent>,
}

impl EventScenario {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let scenario: EventScenario = serde_json::from_str(s)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits == 0 || self.qubits > MAX_QUBITS {
            return Err(Error::invalid(format!(
                "register size {} outside 1..={MAX_QUBITS}",
                self.qubits
            )));
        }
        if self.events.is_empty() || self.events.len() > MAX_EVENTS {
            return Err(Error::invalid(format!(
                "unsupported event count {} (1..={MAX_EVENTS})",
                self.events.len()
            )));
        }
        if self.state.dim() != 1 << self.qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.qubits,
                actual: self.state.dim(),
            });
        }
        for (i, e) in self.events.iter().enumerate() {
            if e.qubit >= self.qubits {
                return Err(Error::invalid(format!(
                    "event {i} names qubit {} of a {}-qubit register",
                    e.qubit, self.qubits
                )));
            }
            if self.events[..i].contains(e) {
                return Err(Error::invalid(format!(
                    "event {i} repeats qubit {} at time {}",
                    e.qubit, e.time
                )));
            }
        }
        let herm = HermMatrix::new(self.state.clone())?;
        let trace = herm.trace();
        if !((trace - 1.0).abs() <= PDM_TRACE_TOL) {
            return Err(Error::invalid(format!("initial state trace {trace} ≠ 1")));
        }
        let min = min_eigenvalue(&herm)?;
        if min < -STATE_PSD_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
        Ok(())
    }
}

fn embed(op: &CMatrix, qubit: usize, qubits: usize) -> CMatrix {
    (0..qubits).fold(CMatrix::identity(1), |acc, q| {
        if q == qubit {
            acc.kron(op)
        } else {
            acc.kron(&CMatrix::identity(2))
        }
    })
}

/// PDM `R = 2⁻ⁿ Σ ⟨{σ_{i_1} … σ_{i_n}}⟩ σ_{i_1} ⊗ … ⊗ σ_{i_n}` over the
/// event list, tensor factors in list order.
///
/// Each correlation is the expected product of ±1 outcomes under sequential
/// Lüders measurements applied in time order. The signed post-measurement
/// map `P₊ρP₊ − P₋ρP₋` equals `½{σ, ρ}`, which reduces to the symmetrized
/// two-time correlation in the two-event case.
pub fn pdm_general(scenario: &EventScenario) -> Result<Pdm> {
    scenario.validate()?;
    let n = scenario.events.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&e| scenario.events[e].time);
    let ops: Vec<Vec<CMatrix>> = scenario
        .events
        .iter()
        .map(|e| {
            Pauli::ALL
                .iter()
                .map(|p| embed(&p.matrix(), e.qubit, scenario.qubits))
                .collect()
        })
        .collect();

    let dim = 1 << n;
    let mut r = CMatrix::zeros(dim);
    for code in 0..(1usize << (2 * n)) {
        let idx: Vec<usize> = (0..n).map(|e| (code >> (2 * (n - 1 - e))) & 3).collect();
        let mut rho = scenario.state.clone();
        for &e in &order {
            if idx[e] != 0 {
                rho = ops[e][idx[e]].anticommutator(&rho).scale_real(0.5);
            }
        }
        let corr = rho.trace().re;
        if corr == 0.0 {
            continue;
        }
        let term = idx
            .iter()
            .fold(CMatrix::identity(1), |acc, &i| acc.kron(&Pauli::ALL[i].matrix()));
        r = r.add(&term.scale(Complex64::new(corr, 0.0)));
    }
    Pdm::new(n, HermMatrix::new(r.scale_real(1.0 / dim as f64))?)
}
