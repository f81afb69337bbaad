//! Finite-dimensional quantum mechanics over labeled qubit registers.
//!
//! Basis index convention: the first label of a register is the most
//! significant bit, and bit value `0` is the `+1` eigenvalue of `Z`.

mod dilation;
mod measurement;
mod observable;
mod state;

pub use dilation::{apply_dilation, effective_wing_observable, FriendDilation};
pub use measurement::{born_distribution, collapse, OutcomeLabel, ProjectiveMeasurement};
pub use observable::QubitObservable;
pub use state::PureState;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Dense complex matrix used for local operators and projectors.
pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("amplitude vector has length {len}, expected 2^{qubits}")]
    DimensionMismatch { len: usize, qubits: usize },
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("state has zero norm")]
    ZeroState,
    #[error("qubit label `{0}` appears more than once")]
    LabelCollision(String),
    #[error("unknown qubit label `{0}`")]
    UnknownLabel(String),
    #[error("memory qubit `{0}` is not in its ready state")]
    MemoryNotReady(String),
    #[error("observable angle must be finite")]
    NonFiniteAngle,
    #[error("invalid projective measurement: {0}")]
    InvalidMeasurement(String),
    #[error("outcome {0:?} is not a label of this measurement")]
    UnknownOutcome(Vec<i8>),
    #[error("outcome {outcome:?} has probability {probability:e}; cannot collapse onto it")]
    CollapseOnNull { outcome: Vec<i8>, probability: f64 },
    #[error("state is not a real single-qubit state in the X-Z plane")]
    NotInPlane,
}

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Kronecker product of a list of matrices, first factor most significant.
pub(crate) fn kron_all(factors: &[CMatrix]) -> CMatrix {
    let mut out = CMatrix::from_element(1, 1, c(1.0));
    for f in factors {
        out = out.kronecker(f);
    }
    out
}
