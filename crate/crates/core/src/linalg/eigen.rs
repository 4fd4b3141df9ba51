use nalgebra::SymmetricEigen;

use super::{ComplexMatrix, C64};

/// Spectral decomposition `m = V diag(values) V†` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.dim()).map(|i| self.vectors[(i, k)]).collect()
    }

    /// Rebuilds `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.vectors.dim();
        let scaled = ComplexMatrix::from_fn(n, |i, k| self.vectors[(i, k)] * f(self.values[k]));
        scaled.matmul_adjoint(&self.vectors)
    }
}

/// Eigendecomposition of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &ComplexMatrix) -> HermitianEigen {
    let eig = SymmetricEigen::new(m.hermitian_part().to_nalgebra());
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, |i, j| eig.eigenvectors[(i, order[j])]);
    HermitianEigen { values, vectors }
}

/// Whether the Hermitian matrix `m` has every eigenvalue strictly above
/// `threshold`, decided by attempting a Cholesky factorisation of
/// `m − threshold·I`.
pub fn min_eigenvalue_exceeds(m: &ComplexMatrix, threshold: f64) -> bool {
    let n = m.dim();
    let mut l = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut diag = m[(j, j)].re - threshold;
        for k in 0..j {
            diag -= l[j * n + k].norm_sqr();
        }
        if !(diag > 0.0) {
            return false;
        }
        let ljj = diag.sqrt();
        l[j * n + j] = C64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / ljj;
        }
    }
    true
}
