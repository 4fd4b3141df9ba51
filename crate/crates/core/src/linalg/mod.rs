//! Dense complex linear algebra shared by the rest of the crate.
//!
//! [`ComplexMatrix`] stores a square matrix row-major. The supported envelope
//! is `dim <= 1024` (ten spins), where dense storage is both simpler and fast
//! enough; the multiplication kernel skips zero entries of the left factor so
//! that products with sparse spin Hamiltonians stay cheap.

mod eigen;
mod expm;
mod ops;

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use eigen::{hermitian_eigen, min_eigenvalue_exceeds, HermitianEigen};
pub use expm::{
    complex_expm1, matrix_expm1, matrix_exponential, matrix_exponential_with, normal_eigen,
    ExpmOptions, NormalEigen,
};
pub use ops::{anticommutator, commutator, hermitian_split, partial_trace, tensor_product};

pub type C64 = Complex64;

/// The imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix with row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    /// # Panics
    /// If `dim == 0`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from `dim * dim` row-major entries.
    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                context: "ComplexMatrix::from_vec (dim must be positive)",
                expected: 1,
                actual: 0,
            });
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                context: "ComplexMatrix::from_vec",
                expected: dim * dim,
                actual: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from nested rows; every row must have as many entries
    /// as there are rows.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "ComplexMatrix::from_rows",
                    expected: dim,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(dim, data)
    }

    /// Real-valued convenience constructor.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = x;
        }
        m
    }

    /// Outer product `|ket><ket|` (no normalisation).
    pub fn projector(ket: &[C64]) -> Self {
        Self::from_fn(ket.len(), |i, j| ket[i] * ket[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// `Tr(self * other)` in `O(dim^2)`.
    pub fn trace_product(&self, other: &Self) -> C64 {
        self.check_same_dim(other, "trace_product");
        let n = self.dim;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            for (j, &a) in row.iter().enumerate() {
                acc += a * other.data[j * n + i];
            }
        }
        acc
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * factor).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .map(|j| (0..n).map(|i| self.data[i * n + j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Entrywise maximum of `|self - other|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.check_same_dim(other, "max_abs_diff");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        self.check_same_dim(other, "frobenius_distance");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `max |m_ij - conj(m_ji)| <= tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim;
        for i in 0..n {
            for j in i..n {
                if (self.data[i * n + j] - self.data[j * n + i].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// `(m + m^dag) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        Self::from_fn(n, |i, j| (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.re == 0.0 && x.im == 0.0)
    }

    /// Matrix product.
    ///
    /// # Panics
    /// If the dimensions differ.
    pub fn matmul(&self, other: &Self) -> Self {
        self.check_same_dim(other, "matmul");
        let mut out = Self::zeros(self.dim);
        matmul_kernel(&self.data, &other.data, &mut out.data, self.dim);
        out
    }

    /// `self * other^dag` without materialising the adjoint.
    pub fn matmul_adjoint(&self, other: &Self) -> Self {
        self.check_same_dim(other, "matmul_adjoint");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let a = &self.data[i * n..(i + 1) * n];
            for j in 0..n {
                let b = &other.data[j * n..(j + 1) * n];
                out.data[i * n + j] = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
            }
        }
        out
    }

    /// `U * self * U^dag`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul_adjoint(u)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "vector length must match matrix dimension");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `<v| self |v>` without normalisation.
    pub fn quadratic_form(&self, v: &[C64]) -> C64 {
        let mv = self.mul_vec(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    fn check_same_dim(&self, other: &Self, op: &str) {
        assert_eq!(
            self.dim, other.dim,
            "{op}: dimension mismatch ({} vs {})",
            self.dim, other.dim
        );
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &nalgebra::DMatrix<C64>) -> Self {
        let n = m.nrows();
        Self::from_fn(n, |i, j| m[(i, j)])
    }
}

fn matmul_kernel(a: &[C64], b: &[C64], out: &mut [C64], n: usize) {
    for i in 0..n {
        let out_row = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik.re == 0.0 && aik.im == 0.0 {
                continue;
            }
            let b_row = &b[k * n..(k + 1) * n];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o += aik * bkj;
            }
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_dim(rhs, "add");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.check_same_dim(rhs, "sub");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Mul<C64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: C64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: f64) -> ComplexMatrix {
        self.scale_real(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.check_same_dim(rhs, "add_assign");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        self.check_same_dim(rhs, "sub_assign");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

/// The Pauli matrices and identity in the convention `sigma_z |0> = +|0>`.
pub mod pauli {
    use super::{ComplexMatrix, C64};

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        let z = C64::new(0.0, 0.0);
        ComplexMatrix::from_rows(&[[z, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), z]]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, -1.0]]).unwrap()
    }
}
