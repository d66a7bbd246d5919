//! Seeded random qubit objects for residual experiments.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::channel::KrausChannel;
use super::state::{BlochObservable, DensityMatrix};
use crate::matrixcore::CMatrix;

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Gram–Schmidt on the columns of a complex Gaussian `rows × cols` matrix.
/// The result is Haar distributed on the Stiefel manifold.
fn gaussian_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    while basis.len() < cols {
        let mut v: Vec<Complex64> = (0..rows).map(|_| complex_gaussian(rng)).collect();
        for b in &basis {
            let proj: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= proj * bi;
            }
        }
        let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        basis.push(v.into_iter().map(|x| x / norm).collect());
    }
    basis
}

/// `G G† / Tr(G G†)` for a complex Ginibre `G`; full-rank almost surely.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let g = CMatrix::from_fn(2, |_, _| complex_gaussian(rng));
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / tr)).expect("Ginibre state is a valid density matrix")
}

pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R) -> CMatrix {
    let cols = gaussian_isometry(rng, 2, 2);
    CMatrix::from_fn(2, |i, j| cols[j][i])
}

/// Two Kraus operators from the upper and lower halves of a Haar 4×2 isometry.
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R) -> KrausChannel {
    let cols = gaussian_isometry(rng, 4, 2);
    let k0 = CMatrix::from_fn(2, |i, j| cols[j][i]);
    let k1 = CMatrix::from_fn(2, |i, j| cols[j][i + 2]);
    KrausChannel::new(vec![k0, k1]).expect("isometry blocks form a trace-preserving pair")
}

pub fn random_observable<R: Rng + ?Sized>(rng: &mut R) -> BlochObservable {
    loop {
        let v = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        if let Ok(b) = BlochObservable::from_direction(v) {
            return b;
        }
    }
}
