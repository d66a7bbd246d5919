use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense row-major real matrix.
#[derive(Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                expected: c,
                actual: bad.len(),
            });
        }
        Ok(Mat {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        self.data
            .chunks(self.cols)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, rhs: &Mat) -> Mat {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Mat) -> Mat {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, rhs: &Mat) -> Mat {
        self.zip_with(rhs, |a, b| a * b)
    }

    fn zip_with(&self, rhs: &Mat, f: impl Fn(f64, f64) -> f64) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    /// Frobenius inner product `Σ a_ij b_ij`.
    pub fn inner(&self, rhs: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        self.data.iter().zip(&rhs.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `(M + Mᵀ) / 2`.
    pub fn symmetric_part(&self) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for row in self.data.chunks(self.cols.max(1)) {
            write!(f, "  ")?;
            for x in row {
                write!(f, "{x:>12.6} ")?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Serialize for Mat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

/// Dense real symmetric matrix.
///
/// Construction from an arbitrary square matrix stores `(M + Mᵀ)/2` and keeps
/// the largest entrywise asymmetry `|m_ij − m_ji|` that was removed.
/// Equality compares entries only.
#[derive(Clone)]
pub struct SymMatrix {
    inner: Mat,
    asymmetry: f64,
}

impl SymMatrix {
    pub fn from_mat(m: Mat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                actual: m.cols(),
            });
        }
        if m.rows() == 0 {
            return Err(Error::invalid("matrix dimension must be at least 1"));
        }
        let n = m.rows();
        let mut asymmetry: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                asymmetry = asymmetry.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        let inner = if asymmetry == 0.0 { m } else { m.symmetric_part() };
        Ok(SymMatrix { inner, asymmetry })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_mat(Mat::from_rows(rows)?)
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::from_mat(Mat::from_fn(n, n, f))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        SymMatrix {
            inner: Mat::zeros(n, n),
            asymmetry: 0.0,
        }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        SymMatrix {
            inner: Mat::identity(n),
            asymmetry: 0.0,
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "dimension must be at least 1");
        SymMatrix {
            inner: Mat::diag(values),
            asymmetry: 0.0,
        }
    }

    /// Wraps a matrix that is symmetric by construction up to rounding.
    pub(crate) fn symmetrized(m: Mat) -> Self {
        SymMatrix {
            inner: m.symmetric_part(),
            asymmetry: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    /// Largest asymmetry removed at construction.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn as_mat(&self) -> &Mat {
        &self.inner
    }

    pub fn into_mat(self) -> Mat {
        self.inner
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.inner.to_rows()
    }

    pub fn add(&self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix::symmetrized(self.inner.add(&rhs.inner))
    }

    pub fn sub(&self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix::symmetrized(self.inner.sub(&rhs.inner))
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix {
            inner: self.inner.scale(s),
            asymmetry: 0.0,
        }
    }

    /// `⟨A, B⟩ = Tr(AB)` for symmetric matrices.
    pub fn inner(&self, rhs: &SymMatrix) -> f64 {
        self.inner.inner(&rhs.inner)
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.inner.diagonal()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    /// `vᵀ M v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        self.inner.matvec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

impl PartialEq for SymMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.inner[idx]
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sym{:?}", self.inner)
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.inner.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        SymMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
