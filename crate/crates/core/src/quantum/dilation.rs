use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{c, CMatrix, ProjectiveMeasurement, PureState, QuantumError, QubitObservable};
use crate::tolerance;

/// Unitary model of a friend measuring `system` in `basis` and writing the
/// result into `memory`: `|e_k⟩|0⟩ ↦ |e_k⟩|k⟩`, where `e_0` is the `+1`
/// eigenvector. The memory ready state is `|0⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FriendDilation {
    pub system: String,
    pub memory: String,
    pub basis: QubitObservable,
}

impl FriendDilation {
    pub fn new(system: &str, memory: &str, basis: QubitObservable) -> Self {
        Self {
            system: system.to_string(),
            memory: memory.to_string(),
            basis,
        }
    }

    /// `P₊ ⊗ I + P₋ ⊗ X` on `(system, memory)`; unitary on the whole space.
    pub fn unitary(&self) -> CMatrix {
        let flip = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        self.basis
            .projector(1)
            .kronecker(&CMatrix::identity(2, 2))
            + self.basis.projector(-1).kronecker(&flip)
    }

    /// `+1` vector of the supermeasurement at `super_angle`, expressed in
    /// the lab's logical basis `{|e₀ 0⟩, |e₁ 1⟩}`:
    /// `cos(φ/2)|e₀ 0⟩ + sin(φ/2)|e₁ 1⟩` with `φ = super_angle − basis angle`.
    ///
    /// This is the image under the dilation of the system state that the
    /// observable at `super_angle` accepts, so the supermeasurement reads the
    /// undisturbed system in that direction.
    pub fn logical_plus(&self, super_angle: f64) -> [Complex64; 4] {
        let rel = super_angle - self.basis.angle();
        let (s, co) = (rel / 2.0).sin_cos();
        let e0 = self.basis.eigenvector(1);
        let e1 = self.basis.eigenvector(-1);
        let mut v = [c(0.0); 4];
        for k in 0..2 {
            // memory 0 for e0, memory 1 for e1
            v[2 * k] += e0[k] * co;
            v[2 * k + 1] += e1[k] * s;
        }
        v
    }

    /// Measurement on `(system, memory)` in the rotated logical basis; the
    /// `-1` outcome covers the orthogonal complement of the `+1` vector.
    pub fn supermeasurement(&self, super_angle: f64, variable: &str) -> ProjectiveMeasurement {
        ProjectiveMeasurement::binary(
            vec![self.system.clone(), self.memory.clone()],
            variable,
            &self.logical_plus(super_angle),
        )
        .expect("rank-one projector from a unit vector is a valid measurement")
    }

    /// Reading the memory in its computational basis (asking the friend).
    pub fn readout(&self, variable: &str) -> ProjectiveMeasurement {
        ProjectiveMeasurement::observable(&self.memory, variable, QubitObservable::Z)
    }

    /// The friend's measurement applied directly to the undisturbed system.
    pub fn direct(&self, variable: &str) -> ProjectiveMeasurement {
        ProjectiveMeasurement::observable(&self.system, variable, self.basis)
    }
}

/// Couples the friend's memory to the system. The memory must hold `|0⟩`.
pub fn apply_dilation(state: &PureState, d: &FriendDilation) -> Result<PureState, QuantumError> {
    let sys = state.position(&d.system)?;
    let mem = state.position(&d.memory)?;
    if state.excited_weight(mem) > tolerance::ALGEBRAIC {
        return Err(QuantumError::MemoryNotReady(d.memory.clone()));
    }
    Ok(state.with_amplitudes(state.apply_local(&[sys, mem], &d.unitary())))
}

/// Single-qubit observable on the pre-dilation system with the same
/// statistics as the supermeasurement at `super_angle` on the dilated lab.
///
/// Supermeasurement angles are expressed in the system's own frame, so the
/// reduction is the observable at `super_angle` whatever the friend's basis;
/// in particular `super_angle == basis angle` gives back the friend's own
/// observable.
pub fn effective_wing_observable(
    _dilation: &FriendDilation,
    super_angle: f64,
) -> Result<QubitObservable, QuantumError> {
    QubitObservable::new(super_angle)
}
