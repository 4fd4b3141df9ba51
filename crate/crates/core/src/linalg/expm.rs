use super::{hermitian_eigen, hermitian_split, ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Settings for [`matrix_exponential_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpmOptions {
    /// Relative tolerance used by the backend residual checks.
    pub tolerance: f64,
}

impl Default for ExpmOptions {
    fn default() -> Self {
        Self { tolerance: 1e-12 }
    }
}

/// Unitary diagonalisation `m = V diag(values) V†` of a normal matrix.
#[derive(Clone, Debug)]
pub struct NormalEigen {
    pub values: Vec<C64>,
    pub vectors: ComplexMatrix,
}

impl NormalEigen {
    /// Rebuilds `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(C64) -> C64) -> ComplexMatrix {
        let n = self.vectors.dim();
        let fv: Vec<C64> = self.values.iter().map(|&x| f(x)).collect();
        let scaled = ComplexMatrix::from_fn(n, |i, k| self.vectors[(i, k)] * fv[k]);
        scaled.matmul_adjoint(&self.vectors)
    }
}

// Irrational mixing weight so that the spectrum of h1 + w*h2 has no
// accidental degeneracies that h1 + i*h2 lacks.
const MIX: f64 = 0.618_033_988_749_894_9;

/// Diagonalises `m` if it is normal, returning `None` otherwise.
///
/// The Hermitian and anti-Hermitian parts of a normal matrix commute, so a
/// generic real combination of them shares their eigenbasis. The result is
/// accepted only if `‖mV − VΛ‖_F ≤ tol·max(1, ‖m‖_F)`.
pub fn normal_eigen(m: &ComplexMatrix, tol: f64) -> Option<NormalEigen> {
    let scale = m.frobenius_norm().max(1.0);
    let commutator = &m.matmul_adjoint(m) - &m.adjoint().matmul(m);
    if commutator.frobenius_norm() > tol * scale * scale {
        return None;
    }
    let (h1, h2) = hermitian_split(m);
    let mixed = &h1 + &h2.scale_real(MIX);
    let eig = hermitian_eigen(&mixed);
    let v = eig.vectors;
    let mv = m.matmul(&v);
    let n = m.dim();
    let values: Vec<C64> = (0..n)
        .map(|k| (0..n).map(|i| v[(i, k)].conj() * mv[(i, k)]).sum())
        .collect();
    let vl = ComplexMatrix::from_fn(n, |i, k| v[(i, k)] * values[k]);
    if mv.frobenius_distance(&vl) > tol * scale {
        return None;
    }
    Some(NormalEigen { values, vectors: v })
}

/// `exp(m)` with the default tolerance.
pub fn matrix_exponential(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    matrix_exponential_with(m, ExpmOptions::default())
}

/// `exp(m)`: diagonalisation for normal matrices, scaling-and-squaring with
/// a degree-13 Padé approximant otherwise.
pub fn matrix_exponential_with(m: &ComplexMatrix, opts: ExpmOptions) -> Result<ComplexMatrix> {
    if m.is_zero() {
        return Ok(ComplexMatrix::identity(m.dim()));
    }
    if let Some(eig) = normal_eigen(m, opts.tolerance) {
        return Ok(eig.map(|z| z.exp()));
    }
    pade_exponential(m, opts.tolerance)
}

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
];
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn combo(terms: &[(f64, &ComplexMatrix)], n: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(n);
    for &(c, m) in terms {
        for (o, x) in out.as_mut_slice().iter_mut().zip(m.as_slice()) {
            *o += x * c;
        }
    }
    out
}

fn add_identity(m: &mut ComplexMatrix, c: f64) {
    for i in 0..m.dim() {
        m[(i, i)] += c;
    }
}

fn pade_exponential(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let n = m.dim();
    let norm = m.one_norm();
    let a2 = m.matmul(m);

    for (deg, theta) in THETA {
        if norm <= theta {
            let coeffs: &[f64] = match deg {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            let mut powers = vec![a2.clone()];
            while powers.len() < deg / 2 {
                let next = powers.last().unwrap().matmul(&a2);
                powers.push(next);
            }
            let odd: Vec<(f64, &ComplexMatrix)> =
                (1..=deg / 2).map(|j| (coeffs[2 * j + 1], &powers[j - 1])).collect();
            let even: Vec<(f64, &ComplexMatrix)> =
                (1..=deg / 2).map(|j| (coeffs[2 * j], &powers[j - 1])).collect();
            let mut u_inner = combo(&odd, n);
            add_identity(&mut u_inner, coeffs[1]);
            let u = m.matmul(&u_inner);
            let mut v = combo(&even, n);
            add_identity(&mut v, coeffs[0]);
            return solve_pade(&u, &v, tol);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let factor = 0.5f64.powi(s);
    let a = m.scale_real(factor);
    let a2 = a2.scale_real(factor * factor);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let b = &B13;
    let u_hi = a6.matmul(&combo(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], n));
    let mut u_inner = combo(&[(1.0, &u_hi), (b[7], &a6), (b[5], &a4), (b[3], &a2)], n);
    add_identity(&mut u_inner, b[1]);
    let u = a.matmul(&u_inner);
    let v_hi = a6.matmul(&combo(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], n));
    let mut v = combo(&[(1.0, &v_hi), (b[6], &a6), (b[4], &a4), (b[2], &a2)], n);
    add_identity(&mut v, b[0]);
    let mut x = solve_pade(&u, &v, tol)?;
    for _ in 0..s {
        x = x.matmul(&x);
    }
    Ok(x)
}

/// Solves `(V − U) X = V + U` and checks the residual.
fn solve_pade(u: &ComplexMatrix, v: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let p = v + u;
    let q = v - u;
    let lu = q.to_nalgebra().lu();
    let x = lu
        .solve(&p.to_nalgebra())
        .ok_or(Error::NonConvergence { residual: f64::INFINITY })?;
    let x = ComplexMatrix::from_nalgebra(&x);
    let residual = q.matmul(&x).frobenius_distance(&p) / p.frobenius_norm().max(f64::MIN_POSITIVE);
    if !(residual <= 1e3 * tol) {
        return Err(Error::NonConvergence { residual });
    }
    Ok(x)
}

/// `exp(z) − 1` without cancellation for small `|z|`.
pub fn complex_expm1(z: C64) -> C64 {
    let (x, y) = (z.re, z.im);
    let half = (0.5 * y).sin();
    C64::new(
        x.exp_m1() * y.cos() - 2.0 * half * half,
        x.exp() * y.sin(),
    )
}

/// `exp(m) − I`, accurate when `‖m‖` is small.
pub fn matrix_expm1(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = m.dim();
    if let Some(eig) = normal_eigen(m, ExpmOptions::default().tolerance) {
        return Ok(eig.map(complex_expm1));
    }
    if m.one_norm() > 0.5 {
        let mut e = matrix_exponential(m)?;
        add_identity(&mut e, -1.0);
        return Ok(e);
    }
    // Taylor series; with ‖m‖ ≤ 1/2 thirty terms are far below roundoff.
    let mut term = m.clone();
    let mut sum = m.clone();
    for k in 2..=30 {
        term = term.matmul(m).scale_real(1.0 / k as f64);
        sum += &term;
        if term.max_abs() <= f64::EPSILON * 1e-3 * sum.max_abs() {
            break;
        }
    }
    debug_assert_eq!(sum.dim(), n);
    Ok(sum)
}
