//! Short-time coefficients of the linear entropy.
//!
//! For the normalised flow the purity behaves as
//! `f(t) = f(0) + t/T1 + t²/T2² + O(t³)`, so the linear entropy follows
//! `S_L(t) ≈ S_L(0) − d/(d−1)·(t/T1 + t²/T2²)`. Everything here is computed
//! from traces of operator products at `t = 0`; nothing is differentiated
//! numerically. Coefficients are signed.

use crate::error::{Error, Result};
use crate::hamiltonians::NonHermitianHamiltonian;
use crate::linalg::{partial_trace, ComplexMatrix, C64};
use crate::states::{linear_entropy, linear_entropy_from_purity, purity, BlochParams, DensityMatrix};

/// Imaginary parts above this (relative to `max(1, |re|)`) indicate invalid
/// input rather than rounding.
pub const IMAGINARY_TOL: f64 = 1e-10;

const I: C64 = C64::new(0.0, 1.0);

fn real_part(quantity: &'static str, z: C64) -> Result<f64> {
    if z.im.abs() > IMAGINARY_TOL * z.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidue { quantity, imag: z.im });
    }
    Ok(z.re)
}

fn check_dims(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        });
    }
    Ok(())
}

/// `cov_A(B, C) = ½ Tr(A{B, C}) − Tr(AB) Tr(AC)`.
pub fn cov(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix) -> Result<C64> {
    check_dims("cov", a.dim(), b.dim())?;
    check_dims("cov", a.dim(), c.dim())?;
    let ab = a.matmul(b);
    let ac = a.matmul(c);
    Ok((ab.trace_product(c) + ac.trace_product(b)) * 0.5 - ab.trace() * ac.trace())
}

/// `1/T1 = 4 cov_ρ(ρ, H2)`.
pub fn t1_inverse(rho0: &DensityMatrix, h2: &ComplexMatrix) -> Result<f64> {
    let r = rho0.matrix();
    real_part("t1_inverse", cov(r, r, h2)? * 4.0)
}

/// `1/T2² = −4 f var_ρ(H2) − 8 <H2> cov_ρ(ρ, H2) + 8 cov_ρ(H2, ρH2)
///          − 2i cov_ρ(ρ, [H2, H1])`.
pub fn t2_inverse_sq(rho0: &DensityMatrix, h1: &ComplexMatrix, h2: &ComplexMatrix) -> Result<f64> {
    let r = rho0.matrix();
    check_dims("t2_inverse_sq", r.dim(), h1.dim())?;
    let f = purity(rho0);
    let mean = rho0.expectation(h2);
    let rho_h2 = r.matmul(h2);
    let h2h1 = h2.matmul(h1);
    let comm = &h2h1 - &h2h1.adjoint();
    let total = -cov(r, h2, h2)? * (4.0 * f) - mean * cov(r, r, h2)? * 8.0 + cov(r, h2, &rho_h2)? * 8.0
        - I * 2.0 * cov(r, r, &comm)?;
    real_part("t2_inverse_sq", total)
}

/// `c0 + c1 t + c2 t²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticExpansion {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl QuadraticExpansion {
    pub fn eval(&self, t: f64) -> f64 {
        self.c0 + t * (self.c1 + t * self.c2)
    }
}

/// The four marginal-purity coefficients, split into contributions from
/// `H1` (`*h`) and those that vanish with `H2` (`*nh`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BipartiteCoefficients {
    pub t1h_inv: f64,
    pub t1nh_inv: f64,
    pub t2h_inv_sq: f64,
    pub t2nh_inv_sq: f64,
}

impl BipartiteCoefficients {
    pub fn t1_inv(&self) -> f64 {
        self.t1h_inv + self.t1nh_inv
    }

    pub fn t2_inv_sq(&self) -> f64 {
        self.t2h_inv_sq + self.t2nh_inv_sq
    }
}

/// Short-time description of a linear-entropy curve.
#[derive(Clone, Debug, PartialEq)]
pub struct TimescaleReport {
    /// `S_L` at `t = 0`.
    pub entropy0: f64,
    pub t1_inv: f64,
    pub t2_inv_sq: f64,
    /// Dimension of the system whose entropy is described.
    pub dim: usize,
    /// Present for marginal reports.
    pub split: Option<BipartiteCoefficients>,
}

impl TimescaleReport {
    pub fn expansion(&self) -> QuadraticExpansion {
        let d = self.dim as f64;
        let w = d / (d - 1.0);
        QuadraticExpansion {
            c0: self.entropy0,
            c1: -w * self.t1_inv,
            c2: -w * self.t2_inv_sq,
        }
    }

    /// Predicted `S_L(t)`.
    pub fn predict(&self, t: f64) -> f64 {
        self.expansion().eval(t)
    }
}

/// Report for the whole system.
pub fn short_time_entropy(rho0: &DensityMatrix, h: &NonHermitianHamiltonian) -> Result<TimescaleReport> {
    check_dims("short_time_entropy", h.dim(), rho0.dim())?;
    Ok(TimescaleReport {
        entropy0: linear_entropy(rho0)?,
        t1_inv: t1_inverse(rho0, h.h2())?,
        t2_inv_sq: t2_inverse_sq(rho0, h.h1(), h.h2())?,
        dim: rho0.dim(),
        split: None,
    })
}

/// Dimensionless `(1/(γT1), 1/(γ²T2²))` for the decaying driven qubit.
pub fn qubit_coefficients(b: BlochParams, omega_over_gamma: f64) -> (f64, f64) {
    let r = b.r();
    let (st, ct) = b.theta().sin_cos();
    let sp = b.phi().sin();
    let w = 1.0 - r * r;
    let t1 = 0.5 * w * r * ct;
    let t2 = 0.125 * w * (1.0 - 3.0 * r * r * ct * ct + 2.0 * omega_over_gamma * r * st * sp);
    (t1, t2)
}

fn check_bipartite(rho: &DensityMatrix, dims: (usize, usize), h1: &ComplexMatrix, h2: &ComplexMatrix) -> Result<()> {
    check_dims("bipartite dims", rho.dim(), dims.0 * dims.1)?;
    check_dims("bipartite h1", rho.dim(), h1.dim())?;
    check_dims("bipartite h2", rho.dim(), h2.dim())?;
    if dims.0 < 2 {
        return Err(Error::UndefinedForDimensionOne);
    }
    Ok(())
}

/// `M − M†`.
fn anti_hermitian_double(m: &ComplexMatrix) -> ComplexMatrix {
    m - &m.adjoint()
}

/// `M + M†`.
fn hermitian_double(m: &ComplexMatrix) -> ComplexMatrix {
    m + &m.adjoint()
}

/// Marginal-purity coefficients for subsystem A of `dims = (d_A, d_B)`.
///
/// Every `<Tr_B X>_A` is evaluated as `Tr(X (ρ_A ⊗ I_B))` and nested
/// commutators are unrolled by trace cyclicity, so the cost is four
/// matrix products.
pub fn bipartite_coefficients(
    rho0: &DensityMatrix,
    dims: (usize, usize),
    h1: &ComplexMatrix,
    h2: &ComplexMatrix,
) -> Result<BipartiteCoefficients> {
    check_bipartite(rho0, dims, h1, h2)?;
    let (da, db) = dims;
    let r = rho0.matrix();
    let rho_a = partial_trace(r, &[da, db], &[0])?;
    let f_a = rho_a.trace_product(&rho_a).re;
    let lifted = crate::linalg::tensor_product(&rho_a, &ComplexMatrix::identity(db));

    // [ρ, H1] and {ρ, H2}
    let comm = anti_hermitian_double(&r.matmul(h1));
    let rho_h2 = r.matmul(h2);
    let anti = hermitian_double(&rho_h2);
    // [H1, M] and {H2, M}
    let h1m = anti_hermitian_double(&h1.matmul(&lifted));
    let h2m = hermitian_double(&h2.matmul(&lifted));

    let comm_a = partial_trace(&comm, &[da, db], &[0])?;
    let anti_a = partial_trace(&anti, &[da, db], &[0])?;

    let mean_h2 = r.trace_product(h2);
    let mean_h2_sq = rho_h2.trace_product(h2);
    // <[H2, H1]> = Tr([H1, ρ] H2)
    let mean_h2h1 = -comm.trace_product(h2);

    let exp_comm = lifted.trace_product(&comm);
    let exp_anti = lifted.trace_product(&anti);

    let t1h = I * 2.0 * exp_comm;
    let t1nh = exp_anti * 2.0 - mean_h2 * (4.0 * f_a);
    let t2h = -comm.trace_product(&h1m) - comm_a.trace_product(&comm_a);
    let t2nh = anti.trace_product(&h2m) + anti_a.trace_product(&anti_a) + I * comm.trace_product(&h2m)
        + I * anti.trace_product(&h1m)
        - mean_h2 * 8.0 * (exp_anti + I * exp_comm)
        + (I * mean_h2h1 - (mean_h2_sq - mean_h2 * mean_h2 * 3.0) * 2.0) * (2.0 * f_a)
        + I * 2.0 * comm_a.trace_product(&anti_a);

    Ok(BipartiteCoefficients {
        t1h_inv: real_part("t1h_inv", t1h)?,
        t1nh_inv: real_part("t1nh_inv", t1nh)?,
        t2h_inv_sq: real_part("t2h_inv_sq", t2h)?,
        t2nh_inv_sq: real_part("t2nh_inv_sq", t2nh)?,
    })
}

/// Report for the marginal on the first factor of `dims`.
pub fn short_time_entropy_bipartite(
    rho0: &DensityMatrix,
    dims: (usize, usize),
    h: &NonHermitianHamiltonian,
) -> Result<TimescaleReport> {
    let split = bipartite_coefficients(rho0, dims, h.h1(), h.h2())?;
    let rho_a = partial_trace(rho0.matrix(), &[dims.0, dims.1], &[0])?;
    Ok(TimescaleReport {
        entropy0: linear_entropy_from_purity(rho_a.trace_product(&rho_a).re, dims.0)?,
        t1_inv: split.t1_inv(),
        t2_inv_sq: split.t2_inv_sq(),
        dim: dims.0,
        split: Some(split),
    })
}

/// `Tr(ρ X Y) − Tr(ρ X) Tr(ρ Y)` for a local pure state.
fn local_cov(rho: &ComplexMatrix, x: &ComplexMatrix, y: &ComplexMatrix) -> C64 {
    rho.matmul(x).trace_product(y) - rho.trace_product(x) * rho.trace_product(y)
}

fn check_pure(rho: &DensityMatrix, which: &'static str) -> Result<()> {
    if (purity(rho) - 1.0).abs() > 1e-10 {
        return Err(Error::NotPure(which));
    }
    Ok(())
}

/// `(1/T2,h², 1/T2,nh²)` for the product of pure states `ρ_A ⊗ ρ_B` under
/// `H1 = Σ A_n ⊗ B_n` and `H2 = Σ C_n ⊗ D_n`. The first-order coefficients
/// vanish identically for such inputs.
pub fn separable_pure_coefficients(
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    h1_terms: &[(ComplexMatrix, ComplexMatrix)],
    h2_terms: &[(ComplexMatrix, ComplexMatrix)],
) -> Result<(f64, f64)> {
    check_pure(rho_a, "rho_a")?;
    check_pure(rho_b, "rho_b")?;
    for (a, b) in h1_terms.iter().chain(h2_terms) {
        check_dims("local operator on A", rho_a.dim(), a.dim())?;
        check_dims("local operator on B", rho_b.dim(), b.dim())?;
        if !a.is_hermitian(1e-12) || !b.is_hermitian(1e-12) {
            return Err(Error::NonHermitian("local operator"));
        }
    }
    let (ra, rb) = (rho_a.matrix(), rho_b.matrix());
    let correlated = |left: &[(ComplexMatrix, ComplexMatrix)], right: &[(ComplexMatrix, ComplexMatrix)]| {
        let mut acc = C64::new(0.0, 0.0);
        for (ak, bk) in left {
            for (cl, dl) in right {
                acc += local_cov(ra, ak, cl) * local_cov(rb, bk, dl);
            }
        }
        acc
    };
    let t2h = correlated(h1_terms, h1_terms) * -2.0;
    let t2nh = correlated(h2_terms, h2_terms) * -2.0 + C64::new(4.0 * correlated(h1_terms, h2_terms).im, 0.0);
    Ok((real_part("t2h_inv_sq", t2h)?, real_part("t2nh_inv_sq", t2nh)?))
}

/// Closed-form marginal coefficients for the first `k` of `N` spins, starting
/// from the GHZ mixture with weight `p`, under the open XY chain (coupling
/// `J`, anisotropy `γ`) plus `i` times the all-to-all Ising coupling `Jz`.
///
/// The field `h` of the chain drops out. `t1h_inv` is identically zero.
pub fn ghz_xy_coefficients(
    n: usize,
    k: usize,
    p: f64,
    j: f64,
    gamma_anis: f64,
    jz: f64,
) -> Result<BipartiteCoefficients> {
    if !(2..=10).contains(&n) {
        return Err(Error::OutOfRange {
            name: "N",
            value: n as f64,
            allowed: "2..=10",
        });
    }
    if !(2..n).contains(&k) {
        return Err(Error::OutOfRange {
            name: "k",
            value: k as f64,
            allowed: "2 <= k < N",
        });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            name: "p",
            value: p,
            allowed: "[0, 1]",
        });
    }
    let nf = n as f64;
    let kf = k as f64;
    let big_k = 2f64.powi(k as i32 - 1);
    let kk = kf * (kf - 1.0);
    let nn = nf * (nf - 1.0);

    let t1nh = jz * p * (1.0 - p) / (big_k * nf) * (kk + nn * (big_k - 1.0) * p);

    let db_is_two = if n - k == 1 { 1.0 } else { 0.0 };
    let t2h = (db_is_two - 1.0) * (gamma_anis * j * p).powi(2);

    let p2 = p * p;
    let poly = 3.0 * nn * nn * (1.0 - big_k) * p2 * p2
        + nn * ((big_k - 1.0) * (5.0 * nn - 2.0) - 4.0 * kk) * p2 * p
        + (kf * (kf * kf * (kf - 6.0) + kf + 4.0) + 2.0 * nf * kk * (3.0 * nf - 1.0)
            - 2.0 * nf * (big_k - 1.0) * (nf.powi(3) - 2.0 * nf * nf + 1.0))
            * p2
        - 2.0 * kk
        - kk * (kf * (kf - 5.0) + 2.0 * ((nf - 1.0) * (nf + 2.0) - 1.0)) * p;
    let t2nh = -jz * jz / (2.0 * big_k * nf * nf) * poly;

    Ok(BipartiteCoefficients {
        t1h_inv: 0.0,
        t1nh_inv: t1nh,
        t2h_inv_sq: t2h,
        t2nh_inv_sq: t2nh,
    })
}
