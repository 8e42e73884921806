//! Density-matrix simulation of the one-bit Deutsch algorithm with
//! generalized amplitude damping and gate misalignment, single-qubit
//! tomography, fidelity metrics and model fitting.

pub mod channels;
pub mod deutsch;
pub mod error;
pub mod fit;
pub mod metrics;
pub mod numkit;
pub mod qstate;
pub mod reference;
pub mod tomography;

pub use error::{Error, Result};
pub use numkit::{ComplexMatrix, C64};
pub use qstate::{DensityMatrix, PureState};
