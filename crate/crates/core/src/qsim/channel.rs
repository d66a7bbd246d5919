use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::state::Pauli;
use crate::error::{Error, Result};
use crate::matrixcore::{eig_herm, CMatrix, HermMatrix};

/// Tolerance on `‖Σ K†K − I‖_max`.
pub const TRACE_PRESERVING_TOL: f64 = 1e-10;
/// Kraus operators with Frobenius norm below this count as vanishing.
pub const KRAUS_ZERO_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-12;

/// Single-qubit CPTP map `E(ρ) = Σ K ρ K†`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelRepr", into = "ChannelRepr")]
pub struct KrausChannel {
    kraus: Vec<CMatrix>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelRepr {
    kraus: Vec<CMatrix>,
}

impl TryFrom<ChannelRepr> for KrausChannel {
    type Error = Error;

    fn try_from(r: ChannelRepr) -> Result<Self> {
        KrausChannel::new(r.kraus)
    }
}

impl From<KrausChannel> for ChannelRepr {
    fn from(c: KrausChannel) -> Self {
        ChannelRepr { kraus: c.kraus }
    }
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::invalid("channel needs at least one Kraus operator"));
        }
        if let Some(k) = kraus.iter().find(|k| k.dim() != 2) {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: k.dim(),
            });
        }
        let sum = kraus
            .iter()
            .fold(CMatrix::zeros(2), |acc, k| acc.add(&k.adjoint().matmul(k)));
        let deviation = sum.max_abs_diff(&CMatrix::identity(2));
        if !(deviation <= TRACE_PRESERVING_TOL) {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(KrausChannel { kraus })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn identity() -> Self {
        KrausChannel {
            kraus: vec![CMatrix::identity(2)],
        }
    }

    /// Completely depolarising channel with Kraus operators `σ_i / 2`.
    pub fn depolarizing() -> Self {
        KrausChannel {
            kraus: Pauli::ALL.iter().map(|p| p.matrix().scale_real(0.5)).collect(),
        }
    }

    pub fn unitary(u: &CMatrix) -> Result<Self> {
        let deviation = u.unitarity_deviation();
        if !(deviation <= UNITARY_TOL) {
            return Err(Error::NotUnitary { deviation });
        }
        Self::new(vec![u.clone()])
    }

    /// Convex combination `p·E_a + (1 − p)·E_b`.
    pub fn mixture(a: &KrausChannel, p: f64, b: &KrausChannel) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("mixing weight {p} outside [0, 1]")));
        }
        let (sa, sb) = (p.sqrt(), (1.0 - p).sqrt());
        let kraus = a
            .kraus
            .iter()
            .map(|k| k.scale_real(sa))
            .chain(b.kraus.iter().map(|k| k.scale_real(sb)))
            .collect();
        Self::new(kraus)
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn kraus_norms(&self) -> Vec<f64> {
        self.kraus.iter().map(CMatrix::frobenius_norm).collect()
    }

    /// `E(ρ) = Σ K ρ K†`.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        self.kraus
            .iter()
            .fold(CMatrix::zeros(2), |acc, k| acc.add(&rho.conjugate_by(k)))
    }

    /// Heisenberg picture `E†(A) = Σ K† A K`.
    pub fn adjoint_apply(&self, a: &CMatrix) -> CMatrix {
        self.kraus.iter().fold(CMatrix::zeros(2), |acc, k| {
            acc.add(&k.adjoint().matmul(a).matmul(k))
        })
    }

    /// Channel with Kraus operators `{U K V†}`.
    pub fn conjugated(&self, u: &CMatrix, v: &CMatrix) -> Result<Self> {
        let v_dag = v.adjoint();
        Self::new(self.kraus.iter().map(|k| u.matmul(k).matmul(&v_dag)).collect())
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`.
    pub fn choi(&self) -> HermMatrix {
        let mut choi = CMatrix::zeros(4);
        for i in 0..2 {
            for j in 0..2 {
                let mut eij = CMatrix::zeros(2);
                eij[(i, j)] = Complex64::new(1.0, 0.0);
                let out = self.apply(&eij);
                for a in 0..2 {
                    for b in 0..2 {
                        choi[(2 * i + a, 2 * j + b)] = out[(a, b)];
                    }
                }
            }
        }
        HermMatrix::new(choi).expect("Choi matrix of a CP map is Hermitian")
    }

    /// Minimal number of Kraus operators: rank of the Choi matrix, counting
    /// eigenvalues above `tol`.
    pub fn kraus_rank(&self, tol: f64) -> Result<usize> {
        let ev = eig_herm(&self.choi())?.eigenvalues;
        Ok(ev.iter().filter(|&&l| l > tol).count())
    }
}

/// Angles of the two-Kraus extremal qubit channel family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliChannelParams {
    u: f64,
    v: f64,
}

impl PauliChannelParams {
    /// `u ∈ [0, 2π]`, `v ∈ [0, π]` (1e-12 slack for grid endpoints).
    pub fn new(u: f64, v: f64) -> Result<Self> {
        const SLACK: f64 = 1e-12;
        if !(-SLACK..=2.0 * PI + SLACK).contains(&u) {
            return Err(Error::invalid(format!("u = {u} outside [0, 2π]")));
        }
        if !(-SLACK..=PI + SLACK).contains(&v) {
            return Err(Error::invalid(format!("v = {v} outside [0, π]")));
        }
        Ok(PauliChannelParams { u, v })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }
}

/// Kraus pair
///
/// ```text
/// K₊ = cos(v/2)cos(u/2)·σ₀ + sin(v/2)sin(u/2)·σ₃
/// K₋ = sin(v/2)cos(u/2)·σ₁ + i·cos(v/2)sin(u/2)·σ₂
/// ```
///
/// whose action is `E(σ₀) = σ₀ + sin u sin v·σ₃`, `E(σ₁) = cos u·σ₁`,
/// `E(σ₂) = cos v·σ₂`, `E(σ₃) = cos u cos v·σ₃`. The `+i` on the `σ₂` term
/// is what makes `Σ K†K = I`.
pub fn pauli_channel(params: PauliChannelParams) -> KrausChannel {
    let (hu, hv) = (params.u / 2.0, params.v / 2.0);
    let k_plus = Pauli::I
        .matrix()
        .scale_real(hv.cos() * hu.cos())
        .add(&Pauli::Z.matrix().scale_real(hv.sin() * hu.sin()));
    let k_minus = Pauli::X
        .matrix()
        .scale_real(hv.sin() * hu.cos())
        .add(&Pauli::Y.matrix().scale(Complex64::new(0.0, hv.cos() * hu.sin())));
    KrausChannel::new(vec![k_plus, k_minus]).expect("Pauli channel family is trace preserving")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_action(u: f64, v: f64) -> [CMatrix; 4] {
        let (su, cu, sv, cv) = (u.sin(), u.cos(), v.sin(), v.cos());
        [
            Pauli::I.matrix().add(&Pauli::Z.matrix().scale_real(su * sv)),
            Pauli::X.matrix().scale_real(cu),
            Pauli::Y.matrix().scale_real(cv),
            Pauli::Z.matrix().scale_real(cu * cv),
        ]
    }

    #[test]
    fn action_matches_closed_form() {
        for &(u, v) in &[(0.3, 1.1), (4.0, 2.9), (PI / 2.0, PI / 2.0), (6.0, 0.2)] {
            let ch = pauli_channel(PauliChannelParams::new(u, v).unwrap());
            for (p, want) in Pauli::ALL.iter().zip(pauli_action(u, v)) {
                let got = ch.apply(&p.matrix());
                assert!(got.max_abs_diff(&want) < 1e-12, "u={u} v={v} {p:?}");
            }
        }
    }

    #[test]
    fn origin_is_identity() {
        let ch = pauli_channel(PauliChannelParams::new(0.0, 0.0).unwrap());
        assert!(ch.kraus()[0].max_abs_diff(&CMatrix::identity(2)) < 1e-15);
        assert!(ch.kraus()[1].frobenius_norm() < 1e-15);
    }

    #[test]
    fn pi_pi_is_z_rotation() {
        let ch = pauli_channel(PauliChannelParams::new(PI, PI).unwrap());
        let x = Pauli::X.matrix();
        assert!(ch.apply(&x).max_abs_diff(&x.scale_real(-1.0)) < 1e-12);
        let y = Pauli::Y.matrix();
        assert!(ch.apply(&y).max_abs_diff(&y.scale_real(-1.0)) < 1e-12);
        let z = Pauli::Z.matrix();
        assert!(ch.apply(&z).max_abs_diff(&z) < 1e-12);
        assert_eq!(ch.kraus_rank(1e-9).unwrap(), 1);
    }

    #[test]
    fn half_pi_is_full_damping() {
        let ch = pauli_channel(PauliChannelParams::new(PI / 2.0, PI / 2.0).unwrap());
        let i = Pauli::I.matrix();
        assert!(ch.apply(&i).max_abs_diff(&i.add(&Pauli::Z.matrix())) < 1e-12);
        for p in Pauli::AXES {
            assert!(ch.apply(&p.matrix()).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn paper_sign_is_not_trace_preserving() {
        // the −i variant of K₋ breaks Σ K†K = I away from the corners
        let (u, v) = (1.0f64, 2.0f64);
        let (hu, hv) = (u / 2.0, v / 2.0);
        let kp = Pauli::I
            .matrix()
            .scale_real(hv.cos() * hu.cos())
            .add(&Pauli::Z.matrix().scale_real(hv.sin() * hu.sin()));
        let km = Pauli::X
            .matrix()
            .scale_real(hv.sin() * hu.cos())
            .add(&Pauli::Y.matrix().scale(Complex64::new(0.0, -hv.cos() * hu.sin())));
        assert!(matches!(
            KrausChannel::new(vec![kp, km]),
            Err(Error::NotTracePreserving { .. })
        ));
    }

    #[test]
    fn params_validated() {
        assert!(PauliChannelParams::new(-0.1, 0.0).is_err());
        assert!(PauliChannelParams::new(0.0, 3.2).is_err());
        assert!(PauliChannelParams::new(2.0 * PI, PI).is_ok());
    }

    #[test]
    fn channel_validation() {
        assert!(KrausChannel::new(vec![]).is_err());
        assert!(KrausChannel::new(vec![CMatrix::identity(2).scale_real(0.9)]).is_err());
        assert!(KrausChannel::new(vec![CMatrix::identity(3)]).is_err());
        assert!(KrausChannel::unitary(&CMatrix::identity(2).scale_real(1.1)).is_err());
    }

    #[test]
    fn depolarizing_kills_traceless() {
        let ch = KrausChannel::depolarizing();
        for p in Pauli::AXES {
            assert!(ch.adjoint_apply(&p.matrix()).frobenius_norm() < 1e-15);
        }
        assert_eq!(ch.kraus_rank(1e-9).unwrap(), 4);
    }

    #[test]
    fn json_round_trip() {
        let ch = pauli_channel(PauliChannelParams::new(1.0, 0.5).unwrap());
        let s = serde_json::to_string(&ch).unwrap();
        let back = KrausChannel::from_json_str(&s).unwrap();
        for (a, b) in ch.kraus().iter().zip(back.kraus()) {
            assert!(a.max_abs_diff(b) < 1e-15);
        }
        assert!(KrausChannel::from_json_str(r#"{"kraus": [[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]]}"#).is_err());
    }
}
