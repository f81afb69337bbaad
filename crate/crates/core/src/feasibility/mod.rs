//! Existence of "absolute" joint assignments, decided exactly.

mod hardy;
mod lp;
mod parity;
mod possibilistic;
mod rational;
mod simplex;

pub use hardy::{hardy_search, hardy_search_for_state, HardyConfig};
pub use lp::{
    best_chsh, joint_feasibility_lp, CellCoefficient, ChshCertificate, FarkasCertificate,
    FeasibilityResult, LpVerdict, PairTargets, RationalTargets, WeightedAssignment, Witness,
    WitnessKind, ASSIGNMENT_VARIABLES, PAIRS, ROUNDING_BOUND, ROUNDING_DENOMINATOR,
};
pub use parity::{parity_assignment_search, Sign, PARITY_VARIABLES, TRIOS};
pub use possibilistic::{
    possibilistic_contradiction, BlockedCell, Completion, PossibilisticResult, Support, SupportTable,
};
pub use rational::{ParseRationalError, Rational};
pub use simplex::{is_farkas_certificate, phase_one, PhaseOne};

use thiserror::Error;

use crate::distribution::DistributionError;
use crate::quantum::QuantumError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeasibilityError {
    #[error("no target table for pair {0}")]
    MissingTarget(String),
    #[error("marginal of {variable} differs by {deviation:e} between tables; the targets signal")]
    MarginalMismatch { variable: String, deviation: f64 },
    #[error("support of {0} is empty")]
    EmptySupport(String),
    #[error("parity {0} is not deterministic")]
    NotDeterministic(f64),
    #[error("LP is infeasible but no CHSH form is violated (best value {0})")]
    NoChshViolation(f64),
    #[error("{0} failed exact verification")]
    CertificateInvalid(String),
    #[error("grid resolution {0} is below the minimum of 8")]
    ResolutionTooSmall(usize),
    #[error("no Hardy configuration found (best probability {best:e})")]
    HardyNotFound { best: f64 },
    #[error("state is not a two-qubit state with real amplitudes")]
    NotRealTwoQubit,
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}
