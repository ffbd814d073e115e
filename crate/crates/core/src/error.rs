//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spin {0:?}: expected an integer or half-integer like \"1\" or \"3/2\"")]
    InvalidSpin(String),

    #[error("spin must be at least 1/2, got {0}")]
    SpinTooSmall(String),

    #[error("a system holds between 1 and 3 qudits, got {0}")]
    BadQuditCount(usize),

    #[error("j = {j} and m = {m} do not differ by an integer")]
    HalfIntegerMismatch { j: String, m: String },

    #[error("negative angular momentum {0} is not a valid spin or rank")]
    NegativeJ(String),

    #[error("basis label out of range for spin {spin}: {label}")]
    LabelOutOfRange { spin: String, label: String },

    #[error("tensor operator arguments out of range for spin {spin}: k = {k}, q = {q}")]
    TensorArgsOutOfRange { spin: String, k: i32, q: i32 },

    #[error("field index {index} out of bounds for qudit {qudit} (size {size})")]
    FieldIndexOutOfBounds {
        qudit: usize,
        index: usize,
        size: usize,
    },

    #[error("field term has {got} indices but the system has {want} qudits")]
    FieldArityMismatch { got: usize, want: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("density matrix trace {trace} deviates from 1 by more than {tol}")]
    NonUnitTrace { trace: f64, tol: f64 },

    #[error("Bloch component at the all-unit index must be 1, got {0}")]
    BadUnitComponent(f64),

    #[error(
        "initial product state: qudit {qudit} expects {expected} (or 3) components, got {got}"
    )]
    BadLocalVector {
        qudit: usize,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("adaptive step size underflowed at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("integration span is empty or inverted: t0 = {t0}, t1 = {t1}")]
    BadTimeSpan { t0: f64, t1: f64 },

    #[error("invalid integration settings: {0}")]
    BadIntegrationConfig(String),

    #[error("trajectories are on different time grids ({0} vs {1} samples)")]
    GridMismatch(usize, usize),

    #[error("the reference evolution requires the fixed-step rk4 method")]
    OracleNeedsFixedStep,

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
