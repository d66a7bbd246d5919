use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense row-major complex square matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        CMatrix { dim, data }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        Ok(CMatrix {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Convenience constructor for small literal matrices given as (re, im) pairs.
    pub fn from_pairs<const N: usize>(rows: [[(f64, f64); N]; N]) -> Self {
        Self::from_fn(N, |i, j| Complex64::new(rows[i][j].0, rows[i][j].1))
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        self.data.chunks(self.dim.max(1)).map(<[Complex64]>::to_vec).collect()
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matmul shape mismatch");
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &CMatrix) -> CMatrix {
        let (a, b) = (self.dim, rhs.dim);
        Self::from_fn(a * b, |i, j| self[(i / b, j / b)] * rhs[(i % b, j % b)])
    }

    pub fn add(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "shape mismatch");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "shape mismatch");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> CMatrix {
        self.scale(Complex64::new(s, 0.0))
    }

    /// `AB + BA`.
    pub fn anticommutator(&self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).add(&rhs.matmul(self))
    }

    /// `U M U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> CMatrix {
        u.matmul(self).matmul(&u.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `Tr(A B)` without forming the product.
    pub fn trace_product(&self, rhs: &CMatrix) -> Complex64 {
        assert_eq!(self.dim, rhs.dim, "shape mismatch");
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * rhs.data[k * n + i];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, rhs: &CMatrix) -> f64 {
        assert_eq!(self.dim, rhs.dim, "shape mismatch");
        self.data
            .iter()
            .zip(&rhs.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Largest `|m_ij − conj(m_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_deviation(&self) -> f64 {
        self.adjoint()
            .matmul(self)
            .max_abs_diff(&CMatrix::identity(self.dim))
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.dim, self.dim)?;
        for row in self.data.chunks(self.dim.max(1)) {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:>9.5}{:+.5}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<Complex64>>::deserialize(d)?;
        CMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Dense complex Hermitian matrix (checked to [`HERMITIAN_TOL`] on construction).
#[derive(Clone, PartialEq)]
pub struct HermMatrix {
    inner: CMatrix,
}

impl HermMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.dim() == 0 {
            return Err(Error::invalid("matrix dimension must be at least 1"));
        }
        let deviation = m.hermitian_deviation();
        if !(deviation <= HERMITIAN_TOL * m.frobenius_norm().max(1.0)) {
            return Err(Error::NotHermitian { deviation });
        }
        let n = m.dim();
        // remove the rounding-level anti-Hermitian part
        let inner = CMatrix::from_fn(n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
        Ok(HermMatrix { inner })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn as_cmatrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_cmatrix(self) -> CMatrix {
        self.inner
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace().re
    }
}

impl Index<(usize, usize)> for HermMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.inner[idx]
    }
}

impl fmt::Debug for HermMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Herm{:?}", self.inner)
    }
}

impl Serialize for HermMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.inner.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = CMatrix::deserialize(d)?;
        HermMatrix::new(m).map_err(serde::de::Error::custom)
    }
}
