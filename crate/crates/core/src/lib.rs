//! Real Bloch-vector dynamics of one, two or three coupled qudits in a
//! time-dependent magnetic field.
//!
//! The complex Liouville–von Neumann equation is rewritten as a closed real
//! first-order system for the components of the generalized Bloch vector,
//! using the Hermitian tensor-operator basis of su(2S+1) and its structure
//! constants. A dense complex-matrix evolution is kept alongside as an
//! independent reference for validation.

pub mod algebra;
pub mod basis;
pub mod config;
pub mod convert;
pub mod error;
pub mod field;
pub mod half_integer;
pub mod integrator;
pub mod oracle;
pub mod rhs;
pub mod state;
pub mod system;
pub mod wigner;

pub use error::{Error, Result};
pub use half_integer::HalfInteger;

/// Complex scalar used by the matrix-valued side of the crate.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix (basis elements, Hamiltonians, density matrices).
pub type CMatrix = nalgebra::DMatrix<C64>;
