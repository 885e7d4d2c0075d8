//! Statevector simulation of simulation-based QAOA for cooling-network design.
//!
//! The crate is layered bottom-up:
//!
//! * [`thermal`] models the resistive network and provides the direct solver
//!   used as ground truth.
//! * [`sim`] is a dense statevector simulator with named registers.
//! * [`block`] builds the configuration-controlled LCU block-encoding of `A(x)`.
//! * [`qsvt`] constructs the inversion polynomial, its phase angles, and the
//!   linear-solver circuit.
//! * [`amplitude`] holds amplitude estimation, phase application and the cost
//!   layer (full circuit or the statevector shortcut).
//! * [`qaoa`] runs the variational outer loop.

pub mod amplitude;
pub mod block;
pub mod error;
pub mod qaoa;
pub mod qsvt;
pub mod sim;
pub mod thermal;

pub use error::{QusoError, Result};

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
