//! Density matrices, purity-based functionals and the probe states.
//!
//! Basis convention: `|0> = (1, 0)^T` with `sigma_z |0> = +|0>`; in the
//! driven qubit `|1>` is the excited level.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, min_eigenvalue_exceeds, ComplexMatrix, HermitianEigen, C64};

/// Validation tolerances for [`DensityMatrix`].
///
/// The defaults (`1e-10` each) suit states assembled in double precision;
/// callers with noisier inputs can relax them via
/// [`DensityMatrix::with_tolerances`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Bound on `max |ρ_ij − conj(ρ_ji)|`.
    pub hermitian: f64,
    /// Bound on `|Tr ρ − 1|`.
    pub trace: f64,
    /// Most negative eigenvalue tolerated.
    pub psd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            trace: 1e-10,
            psd: 1e-10,
        }
    }
}

/// Eigenvalues in `[-CLIP, 0)` are treated as exact zeros.
pub const CLIP: f64 = 1e-10;

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    rho: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(rho, Tolerances::default())
    }

    pub fn with_tolerances(rho: ComplexMatrix, tol: Tolerances) -> Result<Self> {
        if !rho.is_hermitian(tol.hermitian) {
            return Err(Error::InvalidState(format!(
                "not Hermitian within {:e}",
                tol.hermitian
            )));
        }
        let tr = rho.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol.trace {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        if !min_eigenvalue_exceeds(&rho, -tol.psd) {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite within {:e}",
                tol.psd
            )));
        }
        Ok(Self { rho })
    }

    /// Wraps a matrix that is a density matrix by construction, after
    /// symmetrising away rounding noise in the anti-Hermitian part.
    pub(crate) fn from_trusted(rho: ComplexMatrix) -> Self {
        Self {
            rho: rho.hermitian_part(),
        }
    }

    /// `|ψ><ψ| / <ψ|ψ>`.
    pub fn from_ket(ket: &[C64]) -> Result<Self> {
        let norm2: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if ket.is_empty() || !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::InvalidState("ket must be nonzero and finite".into()));
        }
        Self::new(ComplexMatrix::projector(ket).scale_real(1.0 / norm2))
    }

    /// `I_d / d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            rho: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.rho
    }

    /// `Tr(ρ A)`.
    pub fn expectation(&self, a: &ComplexMatrix) -> C64 {
        self.rho.trace_product(a)
    }

    /// Eigendecomposition with eigenvalues in `[-CLIP, 0)` set to zero.
    pub fn eigen(&self) -> HermitianEigen {
        let mut e = hermitian_eigen(&self.rho);
        for v in &mut e.values {
            if *v < 0.0 && *v >= -CLIP {
                *v = 0.0;
            }
        }
        e
    }

    /// Clipped eigenvalues in ascending order.
    pub fn spectrum(&self) -> Vec<f64> {
        self.eigen().values
    }

    /// Marginal on the subsystems `keep` of a state on `dims`.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        Ok(Self::from_trusted(crate::linalg::partial_trace(&self.rho, dims, keep)?))
    }
}

/// `Tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.rho.trace_product(&rho.rho).re
}

/// `d/(d−1) · (1 − Tr ρ²)`.
pub fn linear_entropy(rho: &DensityMatrix) -> Result<f64> {
    linear_entropy_from_purity(purity(rho), rho.dim())
}

pub fn linear_entropy_from_purity(purity: f64, dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::UndefinedForDimensionOne);
    }
    let d = dim as f64;
    Ok(d / (d - 1.0) * (1.0 - purity))
}

/// Collision entropy `S2 = −ln Tr ρ²` together with the linear entropy
/// recovered from it, `d/(d−1)(1 − e^{−S2})`.
pub fn renyi2_consistency(rho: &DensityMatrix) -> Result<(f64, f64)> {
    let s2 = -purity(rho).ln();
    let d = rho.dim() as f64;
    if rho.dim() < 2 {
        return Err(Error::UndefinedForDimensionOne);
    }
    Ok((s2, d / (d - 1.0) * (1.0 - (-s2).exp())))
}

/// Bloch-ball coordinates of a qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochParams {
    r: f64,
    theta: f64,
    phi: f64,
}

impl BlochParams {
    /// `r ∈ [0, 1]`, `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::OutOfRange {
                name: "r",
                value: r,
                allowed: "[0, 1]",
            });
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::OutOfRange {
                name: "theta",
                value: theta,
                allowed: "[0, pi]",
            });
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::OutOfRange {
                name: "phi",
                value: phi,
                allowed: "[0, 2 pi)",
            });
        }
        Ok(Self { r, theta, phi })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Cartesian Bloch vector.
    pub fn vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [self.r * st * cp, self.r * st * sp, self.r * ct]
    }
}

/// `(I + r·σ)/2`.
pub fn qubit_from_bloch(b: BlochParams) -> DensityMatrix {
    let [x, y, z] = b.vector();
    let rho = ComplexMatrix::from_rows(&[
        [C64::new(0.5 * (1.0 + z), 0.0), C64::new(0.5 * x, -0.5 * y)],
        [C64::new(0.5 * x, 0.5 * y), C64::new(0.5 * (1.0 - z), 0.0)],
    ])
    .expect("2x2 rows");
    DensityMatrix { rho }
}

/// `(1−p)/2^N · I + p |GHZ><GHZ|` with `|GHZ> = (|0…0> + |1…1>)/√2`.
pub fn ghz_mixed_state(n: usize, p: f64) -> Result<DensityMatrix> {
    if !(2..=10).contains(&n) {
        return Err(Error::OutOfRange {
            name: "N",
            value: n as f64,
            allowed: "2..=10",
        });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            allowed: "[0, 1]",
        });
    }
    let dim = 1usize << n;
    let mut rho = ComplexMatrix::identity(dim).scale_real((1.0 - p) / dim as f64);
    let last = dim - 1;
    for (i, j) in [(0, 0), (0, last), (last, 0), (last, last)] {
        rho[(i, j)] += C64::new(0.5 * p, 0.0);
    }
    Ok(DensityMatrix { rho })
}

fn check_generator(rho: &DensityMatrix, lambda: &ComplexMatrix) -> Result<()> {
    if lambda.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "generator dimension",
            expected: rho.dim(),
            actual: lambda.dim(),
        });
    }
    if !lambda.is_hermitian(1e-12) {
        return Err(Error::NonHermitian("generator"));
    }
    Ok(())
}

/// Quantum Fisher information of `ρ` for the unitary family generated by `Λ`,
/// from the spectral decomposition of `ρ`. Pairs whose eigenvalue sum does
/// not exceed `1e-12` are skipped.
pub fn qfi_mixed(rho: &DensityMatrix, lambda: &ComplexMatrix) -> Result<f64> {
    check_generator(rho, lambda)?;
    let e = rho.eigen();
    let n = rho.dim();
    // Λ in the eigenbasis of ρ.
    let lam = e.vectors.adjoint().matmul(lambda).matmul(&e.vectors);
    let mut f = 0.0;
    for j in 0..n {
        for k in 0..n {
            let (pj, pk) = (e.values[j], e.values[k]);
            if pj + pk <= 1e-12 {
                continue;
            }
            f += (pj - pk).powi(2) / (pj + pk) * lam[(j, k)].norm_sqr();
        }
    }
    Ok(2.0 * f)
}

/// Outcome of comparing the linear entropy against its QFI lower bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyQfiBound {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `S_L(ρ) ≥ 2d/(d−1) · (Var_ρ Λ − F/4) / (λ_max − λ_min)²`.
pub fn entropy_qfi_bound(rho: &DensityMatrix, lambda: &ComplexMatrix) -> Result<EntropyQfiBound> {
    check_generator(rho, lambda)?;
    let values = hermitian_eigen(lambda).values;
    let width = values[values.len() - 1] - values[0];
    if !(width > 0.0) {
        return Err(Error::DegenerateSpectrum);
    }
    let f = qfi_mixed(rho, lambda)?;
    let mean = rho.expectation(lambda).re;
    let second = rho.expectation(&lambda.matmul(lambda)).re;
    let d = rho.dim() as f64;
    let rhs = 2.0 * d / (d - 1.0) * (second - mean * mean - f / 4.0) / (width * width);
    let lhs = linear_entropy(rho)?;
    Ok(EntropyQfiBound {
        lhs,
        rhs,
        holds: lhs >= rhs - 1e-10,
    })
}

/// `d(d−2)/(d−1)²`: linear entropies above this value certify separability.
pub fn separability_threshold(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::UndefinedForDimensionOne);
    }
    let d = d as f64;
    Ok(d * (d - 2.0) / ((d - 1.0) * (d - 1.0)))
}
