use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("parameter `{name}` = {value} is out of range ({allowed})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        allowed: &'static str,
    },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("operator `{0}` is not Hermitian")]
    NonHermitian(&'static str),

    #[error("the normalised linear entropy is undefined for dimension 1")]
    UndefinedForDimensionOne,

    #[error("generator spectrum is degenerate (largest and smallest eigenvalues coincide)")]
    DegenerateSpectrum,

    #[error("matrix exponential failed its residual check (relative residual {residual:e})")]
    NonConvergence { residual: f64 },

    #[error("state norm collapsed at t = {time}: Tr(U rho U^dag) = {trace:e}")]
    NormCollapse { time: f64, trace: f64 },

    #[error("integrator did not converge by t = {time} after {halvings} step halvings (difference {difference:e})")]
    IntegratorStepFailure {
        time: f64,
        halvings: u32,
        difference: f64,
    },

    #[error("metric operator lost positivity at t = {time}")]
    MetricPositivityLoss { time: f64 },

    #[error("input state `{0}` is not pure")]
    NotPure(&'static str),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("{quantity} has an imaginary residue of {imag:e}")]
    ImaginaryResidue { quantity: &'static str, imag: f64 },

    #[error("site {site} is outside a chain of {spins} spins")]
    InvalidSite { site: usize, spins: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
