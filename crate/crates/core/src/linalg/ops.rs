use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Kronecker product with `a`'s indices outermost:
/// `(a ⊗ b)[(i*db + k, j*db + l)] = a[(i, j)] * b[(k, l)]`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim(), b.dim());
    let n = da * db;
    let mut out = ComplexMatrix::zeros(n);
    let data = out.as_mut_slice();
    for i in 0..da {
        for j in 0..da {
            let aij = a[(i, j)];
            if aij.re == 0.0 && aij.im == 0.0 {
                continue;
            }
            for k in 0..db {
                let row = (i * db + k) * n + j * db;
                for (l, &bkl) in b.row(k).iter().enumerate() {
                    data[row + l] = aij * bkl;
                }
            }
        }
    }
    out
}

/// Offsets into the full index space of every multi-index over `subsystems`,
/// enumerated with the first listed subsystem outermost.
fn offsets(strides: &[usize], dims: &[usize], subsystems: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &s in subsystems {
        let mut next = Vec::with_capacity(out.len() * dims[s]);
        for &base in &out {
            for v in 0..dims[s] {
                next.push(base + v * strides[s]);
            }
        }
        out = next;
    }
    out
}

/// Traces out every subsystem not in `keep`.
///
/// `dims` lists the local dimensions with subsystem 0 outermost; `keep`
/// holds 0-based subsystem indices. The kept factors appear in ascending
/// index order in the result regardless of the order given in `keep`.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidSubsystems(format!(
            "subsystem dimensions must be positive, got {dims:?}"
        )));
    }
    let total: usize = dims.iter().product();
    if total != m.dim() {
        return Err(Error::DimensionMismatch {
            context: "partial_trace (product of subsystem dimensions)",
            expected: m.dim(),
            actual: total,
        });
    }
    if keep.is_empty() {
        return Err(Error::InvalidSubsystems("keep set must be nonempty".into()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return Err(Error::InvalidSubsystems(format!("duplicate index in keep set {keep:?}")));
    }
    if let Some(&bad) = kept.iter().find(|&&s| s >= dims.len()) {
        return Err(Error::InvalidSubsystems(format!(
            "subsystem index {bad} out of range for {} subsystems",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|s| !kept.contains(s)).collect();

    let mut strides = vec![1usize; dims.len()];
    for s in (0..dims.len().saturating_sub(1)).rev() {
        strides[s] = strides[s + 1] * dims[s + 1];
    }
    let keep_off = offsets(&strides, dims, &kept);
    let trace_off = offsets(&strides, dims, &traced);

    let n = m.dim();
    let src = m.as_slice();
    let dk = keep_off.len();
    let mut out = ComplexMatrix::zeros(dk);
    for (a, &oa) in keep_off.iter().enumerate() {
        for (b, &ob) in keep_off.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &trace_off {
                acc += src[(oa + t) * n + ob + t];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Splits `h = h1 + i h2` into Hermitian `h1 = (h + h†)/2` and
/// `h2 = (h − h†)/(2i)`.
pub fn hermitian_split(h: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = h.dim();
    let h1 = ComplexMatrix::from_fn(n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    // (x − conj(y)) / 2i = −i (x − conj(y)) / 2
    let h2 = ComplexMatrix::from_fn(n, |i, j| {
        (h[(i, j)] - h[(j, i)].conj()) * C64::new(0.0, -0.5)
    });
    (h1, h2)
}

fn check_dims(a: &ComplexMatrix, b: &ComplexMatrix, context: &'static str) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            context,
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    Ok(())
}

/// `ab − ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(a, b, "commutator")?;
    Ok(&a.matmul(b) - &b.matmul(a))
}

/// `ab + ba`.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(a, b, "anticommutator")?;
    Ok(&a.matmul(b) + &b.matmul(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, I};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_tensor_identity() {
        let id = ComplexMatrix::identity(2);
        assert_eq!(tensor_product(&id, &id), ComplexMatrix::identity(4));
    }

    #[test]
    fn sigma_z_tensor_identity_is_block_diagonal() {
        let zi = tensor_product(&pauli::z(), &ComplexMatrix::identity(2));
        let expected = ComplexMatrix::from_diagonal(&[c(1.0), c(1.0), c(-1.0), c(-1.0)]);
        assert_eq!(zi, expected);
    }

    #[test]
    fn xx_squares_to_identity() {
        let xx = tensor_product(&pauli::x(), &pauli::x());
        // Direct 4x4 product, entry by entry.
        let mut sq = ComplexMatrix::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    sq[(i, j)] += xx[(i, k)] * xx[(k, j)];
                }
            }
        }
        assert_eq!(sq, ComplexMatrix::identity(4));
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let s = 0.5f64.sqrt();
        let ket = [c(s), c(0.0), c(0.0), c(s)];
        let rho = ComplexMatrix::projector(&ket);
        let a = partial_trace(&rho, &[2, 2], &[0]).unwrap();
        assert!(a.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn product_state_marginal() {
        let rho = ComplexMatrix::from_rows(&[[c(0.7), C64::new(0.1, 0.2)], [C64::new(0.1, -0.2), c(0.3)]])
            .unwrap();
        let sigma = ComplexMatrix::from_diagonal(&[c(0.2), c(0.5), c(0.3)]);
        let joint = tensor_product(&rho, &sigma);
        let a = partial_trace(&joint, &[2, 3], &[0]).unwrap();
        assert!(a.max_abs_diff(&rho) < 1e-15);
        let b = partial_trace(&joint, &[2, 3], &[1]).unwrap();
        assert!(b.max_abs_diff(&sigma) < 1e-15);
    }

    #[test]
    fn three_factor_middle_marginal() {
        let a = ComplexMatrix::from_diagonal(&[c(0.25), c(0.75)]);
        let b = ComplexMatrix::from_rows(&[[c(0.5), I * 0.1], [-I * 0.1, c(0.5)]]).unwrap();
        let d = ComplexMatrix::from_diagonal(&[c(0.1), c(0.2), c(0.7)]);
        let joint = tensor_product(&tensor_product(&a, &b), &d);
        let mid = partial_trace(&joint, &[2, 2, 3], &[1]).unwrap();
        assert!(mid.max_abs_diff(&b) < 1e-15);
        let outer = partial_trace(&joint, &[2, 2, 3], &[2, 0]).unwrap();
        assert!(outer.max_abs_diff(&tensor_product(&a, &d)) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let m = ComplexMatrix::identity(4);
        assert!(matches!(
            partial_trace(&m, &[2, 3], &[0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(partial_trace(&m, &[2, 2], &[]).is_err());
        assert!(partial_trace(&m, &[2, 2], &[2]).is_err());
        assert!(partial_trace(&m, &[2, 2], &[0, 0]).is_err());
    }

    #[test]
    fn split_of_decay_term() {
        let g = 0.8;
        let h = ComplexMatrix::from_diagonal(&[c(0.0), C64::new(0.0, -g / 2.0)]);
        let (h1, h2) = hermitian_split(&h);
        assert!(h1.max_abs() == 0.0);
        assert!(h2.max_abs_diff(&ComplexMatrix::from_diagonal(&[c(0.0), c(-g / 2.0)])) == 0.0);
    }

    #[test]
    fn split_of_hermitian_has_zero_antihermitian_part() {
        let h = pauli::y();
        let (h1, h2) = hermitian_split(&h);
        assert_eq!(h1, h);
        assert!(h2.is_zero());
    }

    #[test]
    fn pauli_commutation_relations() {
        let comm = commutator(&pauli::x(), &pauli::y()).unwrap();
        assert!(comm.max_abs_diff(&pauli::z().scale(I * 2.0)) < 1e-15);
        assert!(anticommutator(&pauli::x(), &pauli::y()).unwrap().is_zero());
        assert!(commutator(&pauli::x(), &ComplexMatrix::identity(3)).is_err());
    }
}
