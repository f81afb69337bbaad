//! Exact laboratory for extended Wigner's-friend experiments.
//!
//! The crate is layered bottom-up:
//!
//! * [`quantum`]: qubit states, friend-measurement dilations and the Born rule.
//! * [`scenario`]: the four named experiments as declarative [`scenario::Scenario`] values.
//! * [`predict`]: unitary predictions per context and per spacelike slice.
//! * [`feasibility`]: exact rational LP, parity search and possibilistic checks.
//! * [`models`]: candidate extensions of quantum mechanics that assign outcomes to observers.
//! * [`checkers`]: executable verdicts for the assumptions the no-go theorems rely on.

pub mod checkers;
pub mod distribution;
pub mod feasibility;
pub mod models;
pub mod predict;
pub mod quantum;
pub mod record;
pub mod scenario;
pub mod stats;

pub use distribution::JointDistribution;

/// Numeric tolerances shared across the crate.
pub mod tolerance {
    /// Algebraic identities (norms, projector relations, exact marginals).
    pub const ALGEBRAIC: f64 = 1e-12;
    /// Results of composed floating-point computations.
    pub const COMPOSED: f64 = 1e-9;
    /// A cell with probability at or below this is outside the support.
    pub const ZERO_SUPPORT: f64 = 1e-9;
}
