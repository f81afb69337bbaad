use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{c, CMatrix, PureState, QuantumError};
use crate::tolerance;

/// The ±1-valued observable `cos(θ)·Z + sin(θ)·X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitObservable {
    angle: f64,
}

impl QubitObservable {
    pub const Z: QubitObservable = QubitObservable { angle: 0.0 };
    pub const X: QubitObservable = QubitObservable { angle: FRAC_PI_2 };

    pub fn new(angle: f64) -> Result<Self, QuantumError> {
        if angle.is_finite() {
            Ok(Self { angle })
        } else {
            Err(QuantumError::NonFiniteAngle)
        }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// The observable whose `+1` eigenvector is the given real one-qubit state.
    pub fn aligned_with(state: &PureState) -> Result<Self, QuantumError> {
        if state.num_qubits() != 1 {
            return Err(QuantumError::NotInPlane);
        }
        let amps = state.amplitudes();
        // strip the global phase using the larger amplitude
        let pivot = if amps[0].norm() >= amps[1].norm() {
            amps[0]
        } else {
            amps[1]
        };
        let phase = pivot / pivot.norm();
        let a = amps[0] / phase;
        let b = amps[1] / phase;
        if a.im.abs() > tolerance::COMPOSED || b.im.abs() > tolerance::COMPOSED {
            return Err(QuantumError::NotInPlane);
        }
        Self::new(2.0 * b.re.atan2(a.re))
    }

    pub fn matrix(&self) -> CMatrix {
        let (s, co) = self.angle.sin_cos();
        CMatrix::from_row_slice(2, 2, &[c(co), c(s), c(s), c(-co)])
    }

    /// Unit eigenvector for `sign = +1` or `sign = -1`.
    pub fn eigenvector(&self, sign: i8) -> [Complex64; 2] {
        let (s, co) = (self.angle / 2.0).sin_cos();
        if sign >= 0 {
            [c(co), c(s)]
        } else {
            [c(-s), c(co)]
        }
    }

    pub fn projector(&self, sign: i8) -> CMatrix {
        let v = self.eigenvector(sign);
        CMatrix::from_fn(2, 2, |i, j| v[i] * v[j].conj())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn z_and_x_matrices() {
        let z = QubitObservable::Z.matrix();
        assert_eq!(z[(0, 0)], c(1.0));
        assert_eq!(z[(1, 1)], c(-1.0));
        let x = QubitObservable::X.matrix();
        assert!((x[(0, 1)] - c(1.0)).norm() < 1e-15);
        assert!(x[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_angles() {
        assert_eq!(
            QubitObservable::new(f64::NAN),
            Err(QuantumError::NonFiniteAngle)
        );
    }

    #[test]
    fn aligned_with_plus_is_x() {
        let obs = QubitObservable::aligned_with(&PureState::plus("s")).unwrap();
        assert!((obs.angle() - FRAC_PI_2).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn involutive_and_traceless(angle in -10.0f64..10.0) {
            let m = QubitObservable::new(angle).unwrap().matrix();
            let sq = &m * &m;
            prop_assert!((sq - CMatrix::identity(2, 2)).norm() < tolerance::ALGEBRAIC);
            prop_assert!(m.trace().norm() < tolerance::ALGEBRAIC);
        }

        #[test]
        fn eigenvectors_have_eigenvalues_pm_one(angle in -10.0f64..10.0) {
            let obs = QubitObservable::new(angle).unwrap();
            let m = obs.matrix();
            for sign in [1i8, -1] {
                let v = obs.eigenvector(sign);
                let col = nalgebra::DVector::from_row_slice(&v);
                let mv = &m * &col;
                prop_assert!((mv - col * c(f64::from(sign))).norm() < tolerance::ALGEBRAIC);
            }
        }
    }
}
