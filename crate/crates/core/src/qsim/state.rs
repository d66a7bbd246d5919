use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixcore::{min_eigenvalue, CMatrix, HermMatrix};

pub const TRACE_TOL: f64 = 1e-12;
pub const STATE_PSD_TOL: f64 = 1e-10;
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Pauli basis with the index convention `(0, 1, 2, 3) = (I, X, Y, Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    pub const AXES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_index(i: usize) -> Option<Pauli> {
        Self::ALL.get(i).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn matrix(self) -> CMatrix {
        let (o, z, i) = ((1.0, 0.0), (0.0, 0.0), (0.0, 1.0));
        match self {
            Pauli::I => CMatrix::from_pairs([[o, z], [z, o]]),
            Pauli::X => CMatrix::from_pairs([[z, o], [o, z]]),
            Pauli::Y => CMatrix::from_pairs([[z, (0.0, -1.0)], [i, z]]),
            Pauli::Z => CMatrix::from_pairs([[o, z], [z, (-1.0, 0.0)]]),
        }
    }
}

pub fn pauli(i: usize) -> CMatrix {
    Pauli::from_index(i)
        .expect("Pauli index must be in 0..4")
        .matrix()
}

/// Single-qubit density matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: matrix.dim(),
            });
        }
        let herm = HermMatrix::new(matrix)?;
        let trace = herm.as_cmatrix().trace();
        if (trace - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::invalid(format!("density matrix trace {trace} ≠ 1")));
        }
        let min = min_eigenvalue(&herm)?;
        if min < -STATE_PSD_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
        Ok(DensityMatrix {
            matrix: herm.into_cmatrix(),
        })
    }

    /// `|0⟩⟨0|`.
    pub fn zero() -> Self {
        Self::from_bloch([0.0, 0.0, 1.0]).expect("valid state")
    }

    /// `I/2`.
    pub fn maximally_mixed() -> Self {
        Self::from_bloch([0.0, 0.0, 0.0]).expect("valid state")
    }

    /// `(I + r·σ)/2` for `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm <= 1.0 + UNIT_NORM_TOL) {
            return Err(Error::invalid(format!("Bloch vector norm {norm} exceeds 1")));
        }
        let m = Pauli::I
            .matrix()
            .add(&bloch_operator(r))
            .scale_real(0.5);
        Ok(DensityMatrix { matrix: m })
    }

    pub fn pure(psi: [Complex64; 2]) -> Result<Self> {
        let norm = psi.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("state vector must be nonzero"));
        }
        let psi = psi.map(|c| c / norm);
        Self::new(CMatrix::from_fn(2, |i, j| psi[i] * psi[j].conj()))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `Tr(ρ A)` (real part; `A` is expected Hermitian).
    pub fn expectation(&self, a: &CMatrix) -> f64 {
        self.matrix.trace_product(a).re
    }

    /// Conjugated state `V ρ V†`.
    pub fn conjugated(&self, v: &CMatrix) -> Result<Self> {
        Self::new(self.matrix.conjugate_by(v))
    }
}

fn bloch_operator(a: [f64; 3]) -> CMatrix {
    Pauli::AXES
        .iter()
        .zip(a)
        .fold(CMatrix::zeros(2), |acc, (p, c)| acc.add(&p.matrix().scale_real(c)))
}

/// `±1`-valued qubit observable `a·σ` with unit Bloch vector `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochObservable {
    bloch: [f64; 3],
}

impl BlochObservable {
    pub fn new(bloch: [f64; 3]) -> Result<Self> {
        let norm = bloch.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() <= UNIT_NORM_TOL) {
            return Err(Error::invalid(format!(
                "observable direction has norm {norm}, expected 1"
            )));
        }
        Ok(BlochObservable { bloch })
    }

    /// Normalises `v` onto the unit sphere.
    pub fn from_direction(v: [f64; 3]) -> Result<Self> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::invalid("direction must be a nonzero finite vector"));
        }
        Ok(BlochObservable {
            bloch: v.map(|x| x / norm),
        })
    }

    pub fn axis(p: Pauli) -> Result<Self> {
        match p {
            Pauli::I => Err(Error::invalid("identity is not a ±1 observable direction")),
            Pauli::X => Ok(BlochObservable { bloch: [1.0, 0.0, 0.0] }),
            Pauli::Y => Ok(BlochObservable { bloch: [0.0, 1.0, 0.0] }),
            Pauli::Z => Ok(BlochObservable { bloch: [0.0, 0.0, 1.0] }),
        }
    }

    /// Planar direction `(cos θ, sin θ, 0)`.
    pub fn in_xy_plane(theta: f64) -> Self {
        BlochObservable {
            bloch: [theta.cos(), theta.sin(), 0.0],
        }
    }

    pub fn bloch(&self) -> [f64; 3] {
        self.bloch
    }

    pub fn dot(&self, other: &BlochObservable) -> f64 {
        self.bloch.iter().zip(other.bloch).map(|(a, b)| a * b).sum()
    }

    pub fn matrix(&self) -> CMatrix {
        bloch_operator(self.bloch)
    }
}

impl TryFrom<[f64; 3]> for BlochObservable {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        BlochObservable::new(v)
    }
}

impl From<BlochObservable> for [f64; 3] {
    fn from(b: BlochObservable) -> Self {
        b.bloch
    }
}
