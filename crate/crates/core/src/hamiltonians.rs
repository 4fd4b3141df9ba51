//! Hamiltonian builders and the `H = H1 + i H2` container.
//!
//! Spin chains use site 1 as the outermost tensor factor, i.e. the most
//! significant bit of a basis index. A subsystem "first k sites" is therefore
//! the leading factor of dimension `2^k`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_split, ComplexMatrix, C64};

const HERMITIAN_TOL: f64 = 1e-12;

/// `H = h1 + i h2` with both parts Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct NonHermitianHamiltonian {
    h1: ComplexMatrix,
    h2: ComplexMatrix,
}

impl NonHermitianHamiltonian {
    pub fn new(h1: ComplexMatrix, h2: ComplexMatrix) -> Result<Self> {
        if h1.dim() != h2.dim() {
            return Err(Error::DimensionMismatch {
                context: "NonHermitianHamiltonian parts",
                expected: h1.dim(),
                actual: h2.dim(),
            });
        }
        if !h1.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::NonHermitian("h1"));
        }
        if !h2.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::NonHermitian("h2"));
        }
        Ok(Self { h1, h2 })
    }

    /// A purely Hermitian Hamiltonian (`h2 = 0`).
    pub fn hermitian(h1: ComplexMatrix) -> Result<Self> {
        let n = h1.dim();
        Self::new(h1, ComplexMatrix::zeros(n))
    }

    /// Splits an arbitrary matrix into its two Hermitian parts.
    pub fn from_matrix(h: &ComplexMatrix) -> Self {
        let (h1, h2) = hermitian_split(h);
        Self { h1, h2 }
    }

    pub fn dim(&self) -> usize {
        self.h1.dim()
    }

    pub fn h1(&self) -> &ComplexMatrix {
        &self.h1
    }

    pub fn h2(&self) -> &ComplexMatrix {
        &self.h2
    }

    /// `h1 + i h2`.
    pub fn full(&self) -> ComplexMatrix {
        &self.h1 + &self.h2.scale(C64::new(0.0, 1.0))
    }
}

/// A Lindblad jump channel `(γ, L)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpChannel {
    rate: f64,
    op: ComplexMatrix,
}

impl JumpChannel {
    pub fn new(rate: f64, op: ComplexMatrix) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::OutOfRange {
                name: "rate",
                value: rate,
                allowed: "[0, inf)",
            });
        }
        Ok(Self { rate, op })
    }

    /// Spontaneous emission `|1> → |0>`, i.e. `L = |0><1|`.
    pub fn qubit_decay(rate: f64) -> Result<Self> {
        let mut l = ComplexMatrix::zeros(2);
        l[(0, 1)] = C64::new(1.0, 0.0);
        Self::new(rate, l)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn op(&self) -> &ComplexMatrix {
        &self.op
    }
}

/// `Δ|1><1| + (Ω/2)(|0><1| + |1><0|)`.
pub fn driven_qubit(delta: f64, omega: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[[0.0, 0.5 * omega], [0.5 * omega, delta]]).expect("2x2 rows")
}

/// `h1 = H`, `h2 = −Σ (γ_i/2) L_i† L_i`.
pub fn effective_from_jumps(h: &ComplexMatrix, channels: &[JumpChannel]) -> Result<NonHermitianHamiltonian> {
    let n = h.dim();
    let mut h2 = ComplexMatrix::zeros(n);
    for ch in channels {
        if ch.op.dim() != n {
            return Err(Error::DimensionMismatch {
                context: "jump operator",
                expected: n,
                actual: ch.op.dim(),
            });
        }
        h2 -= &ch.op.adjoint().matmul(&ch.op).scale_real(0.5 * ch.rate);
    }
    NonHermitianHamiltonian::new(h.clone(), h2.hermitian_part())
}

/// Single-site Pauli factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

fn check_spins(n: usize) -> Result<()> {
    if !(1..=10).contains(&n) {
        return Err(Error::OutOfRange {
            name: "N",
            value: n as f64,
            allowed: "1..=10",
        });
    }
    Ok(())
}

fn check_chain(n: usize) -> Result<()> {
    if !(2..=10).contains(&n) {
        return Err(Error::OutOfRange {
            name: "N",
            value: n as f64,
            allowed: "2..=10",
        });
    }
    Ok(())
}

/// A Pauli string as a signed permutation: column `b` maps to row
/// `b ^ flip` with weight `phase[b]`.
struct SparsePauli {
    flip: usize,
    phase: Vec<C64>,
}

impl SparsePauli {
    fn new(n: usize, factors: &[(usize, Pauli)]) -> Result<Self> {
        check_spins(n)?;
        let dim = 1usize << n;
        let mut flip = 0usize;
        let mut phase = vec![C64::new(1.0, 0.0); dim];
        for &(site, p) in factors {
            if site < 1 || site > n {
                return Err(Error::InvalidSite { site, spins: n });
            }
            let bit = 1usize << (n - site);
            match p {
                Pauli::X => flip ^= bit,
                Pauli::Y => {
                    flip ^= bit;
                    // σy|0> = i|1>, σy|1> = −i|0>
                    for (b, ph) in phase.iter_mut().enumerate() {
                        *ph *= if b & bit == 0 {
                            C64::new(0.0, 1.0)
                        } else {
                            C64::new(0.0, -1.0)
                        };
                    }
                }
                Pauli::Z => {
                    for (b, ph) in phase.iter_mut().enumerate() {
                        if b & bit != 0 {
                            *ph = -*ph;
                        }
                    }
                }
            }
        }
        Ok(Self { flip, phase })
    }

    fn add_to(&self, m: &mut ComplexMatrix, coeff: f64) {
        for (b, &ph) in self.phase.iter().enumerate() {
            m[(b ^ self.flip, b)] += ph * coeff;
        }
    }
}

/// Product of single-site Paulis on `n` spins (sites 1-based, site 1
/// outermost), identity elsewhere.
pub fn pauli_string(n: usize, factors: &BTreeMap<usize, Pauli>) -> Result<ComplexMatrix> {
    let list: Vec<(usize, Pauli)> = factors.iter().map(|(&s, &p)| (s, p)).collect();
    let sp = SparsePauli::new(n, &list)?;
    let mut m = ComplexMatrix::zeros(1 << n);
    sp.add_to(&mut m, 1.0);
    Ok(m)
}

/// Open transverse-field XY chain
/// `−J Σ_j (γ₊ σx_j σx_{j+1} + γ₋ σy_j σy_{j+1}) − h Σ_j σz_j`,
/// `γ± = (1 ± γ_anis)/2`.
pub fn xy_chain(n: usize, j: f64, gamma_anis: f64, h: f64) -> Result<ComplexMatrix> {
    check_chain(n)?;
    if !(-1.0..=1.0).contains(&gamma_anis) {
        return Err(Error::OutOfRange {
            name: "gamma_anis",
            value: gamma_anis,
            allowed: "[-1, 1]",
        });
    }
    let gp = 0.5 * (1.0 + gamma_anis);
    let gm = 0.5 * (1.0 - gamma_anis);
    let mut m = ComplexMatrix::zeros(1 << n);
    for s in 1..n {
        if gp != 0.0 {
            SparsePauli::new(n, &[(s, Pauli::X), (s + 1, Pauli::X)])?.add_to(&mut m, -j * gp);
        }
        if gm != 0.0 {
            SparsePauli::new(n, &[(s, Pauli::Y), (s + 1, Pauli::Y)])?.add_to(&mut m, -j * gm);
        }
    }
    if h != 0.0 {
        for s in 1..=n {
            SparsePauli::new(n, &[(s, Pauli::Z)])?.add_to(&mut m, -h);
        }
    }
    Ok(m)
}

/// Fully connected Ising coupling `(Jz/N) Σ_{j<l} σz_j σz_l`.
pub fn ising_all_to_all(n: usize, jz: f64) -> Result<ComplexMatrix> {
    check_chain(n)?;
    let dim = 1usize << n;
    // With m up-spins (bit 0) the pair sum is ((2m − N)² − N)/2.
    let diag: Vec<C64> = (0..dim)
        .map(|b| {
            let down = (b as u32).count_ones() as f64;
            let mag = n as f64 - 2.0 * down;
            C64::new(jz / n as f64 * 0.5 * (mag * mag - n as f64), 0.0)
        })
        .collect();
    Ok(ComplexMatrix::from_diagonal(&diag))
}
