//! Linear-entropy dynamics of finite-dimensional quantum systems driven by
//! effective non-Hermitian Hamiltonians `H = H1 + i H2`.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense row-major complex matrices, Kronecker products,
//!   partial traces and the matrix exponential.
//! * [`states`]: validated density matrices, purity / linear entropy and the
//!   probe states (Bloch qubits, GHZ mixtures).
//! * [`hamiltonians`]: the driven qubit, jump-channel effective Hamiltonians,
//!   the open XY chain and the all-to-all Ising coupling.
//! * [`dynamics`]: the trace-normalised non-Hermitian flow, the Lindblad
//!   master equation, reduced dynamics and the metric-operator evolution.
//! * [`timescales`]: first- and second-order short-time coefficients of the
//!   linear entropy, for whole systems and for bipartite marginals.
//!
//! Units: `ħ = 1`, Hamiltonians carry energy units and times inverse energy.
//! Tensor products put the first factor outermost; spin site 1 is the most
//! significant bit of a computational-basis index.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod hamiltonians;
pub mod linalg;
pub mod states;
pub mod timescales;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
