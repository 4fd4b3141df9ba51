#![allow(dead_code)]

use mixedness::linalg::{matrix_exponential, ComplexMatrix, C64};
use mixedness::states::DensityMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, |_, _| complex(rng))
}

pub fn random_hermitian(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    random_matrix(rng, d).hermitian_part()
}

/// Full-rank state `G G† / Tr(G G†)`.
pub fn random_density(rng: &mut impl Rng, d: usize) -> DensityMatrix {
    let g = random_matrix(rng, d);
    let m = g.matmul_adjoint(&g);
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / tr).hermitian_part()).unwrap()
}

pub fn random_ket(rng: &mut impl Rng, d: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| complex(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

pub fn random_pure(rng: &mut impl Rng, d: usize) -> DensityMatrix {
    DensityMatrix::from_ket(&random_ket(rng, d)).unwrap()
}

pub fn random_unitary(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    let h = random_hermitian(rng, d);
    matrix_exponential(&h.scale(C64::new(0.0, 3.0))).unwrap()
}

/// Relative error with an absolute floor for values near zero.
pub fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(1e-12)
}
