use std::collections::HashSet;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::{c, CMatrix, QuantumError};
use crate::tolerance;

/// A normalized pure state over an ordered register of labeled qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    register: Vec<String>,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Builds a state, checking dimension, label uniqueness and normalization.
    pub fn new(register: Vec<String>, amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        let state = Self::unchecked_norm(register, amplitudes)?;
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > tolerance::ALGEBRAIC {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Like [`PureState::new`] but rescales the amplitudes to unit norm.
    pub fn normalized(
        register: Vec<String>,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, QuantumError> {
        let mut state = Self::unchecked_norm(register, amplitudes)?;
        let norm = state.norm_sqr();
        if norm <= f64::MIN_POSITIVE || !norm.is_finite() {
            return Err(QuantumError::ZeroState);
        }
        let scale = norm.sqrt().recip();
        for a in &mut state.amplitudes {
            *a *= scale;
        }
        Ok(state)
    }

    /// Real-amplitude state, normalized.
    pub fn from_real(register: &[&str], amplitudes: &[f64]) -> Result<Self, QuantumError> {
        Self::normalized(
            register.iter().map(|s| s.to_string()).collect(),
            amplitudes.iter().map(|&a| c(a)).collect(),
        )
    }

    fn unchecked_norm(
        register: Vec<String>,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, QuantumError> {
        let qubits = register.len();
        if qubits >= usize::BITS as usize || amplitudes.len() != 1usize << qubits {
            return Err(QuantumError::DimensionMismatch {
                len: amplitudes.len(),
                qubits,
            });
        }
        let mut seen = HashSet::new();
        for label in &register {
            if !seen.insert(label.as_str()) {
                return Err(QuantumError::LabelCollision(label.clone()));
            }
        }
        Ok(Self {
            register,
            amplitudes,
        })
    }

    /// Computational basis state `|bit⟩` of one qubit.
    pub fn basis(label: &str, bit: u8) -> Self {
        let mut amplitudes = vec![c(0.0); 2];
        amplitudes[usize::from(bit & 1)] = c(1.0);
        Self {
            register: vec![label.to_string()],
            amplitudes,
        }
    }

    /// `|0⟩`, the ready state of every memory qubit.
    pub fn ready(label: &str) -> Self {
        Self::basis(label, 0)
    }

    /// `(|0⟩ + |1⟩)/√2`.
    pub fn plus(label: &str) -> Self {
        Self {
            register: vec![label.to_string()],
            amplitudes: vec![c(FRAC_1_SQRT_2); 2],
        }
    }

    /// `(|01⟩ − |10⟩)/√2`; correlator of X-Z plane observables is `−cos(θa − θb)`.
    pub fn singlet(first: &str, second: &str) -> Self {
        Self {
            register: vec![first.to_string(), second.to_string()],
            amplitudes: vec![c(0.0), c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2), c(0.0)],
        }
    }

    /// `(|0…0⟩ + |1…1⟩)/√2` over the given labels.
    pub fn ghz(labels: &[&str]) -> Self {
        let dim = 1usize << labels.len();
        let mut amplitudes = vec![c(0.0); dim];
        amplitudes[0] = c(FRAC_1_SQRT_2);
        amplitudes[dim - 1] = c(FRAC_1_SQRT_2);
        Self {
            register: labels.iter().map(|s| s.to_string()).collect(),
            amplitudes,
        }
    }

    pub fn register(&self) -> &[String] {
        &self.register
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn num_qubits(&self) -> usize {
        self.register.len()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn position(&self, label: &str) -> Result<usize, QuantumError> {
        self.register
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| QuantumError::UnknownLabel(label.to_string()))
    }

    /// Same amplitudes under new labels.
    pub fn relabeled(&self, labels: &[&str]) -> Result<Self, QuantumError> {
        if labels.len() != self.register.len() {
            return Err(QuantumError::DimensionMismatch {
                len: self.amplitudes.len(),
                qubits: labels.len(),
            });
        }
        Self::unchecked_norm(
            labels.iter().map(|s| s.to_string()).collect(),
            self.amplitudes.clone(),
        )
    }

    /// Kronecker product; the register of `self` comes first.
    pub fn tensor(&self, other: &PureState) -> Result<PureState, QuantumError> {
        if let Some(label) = other.register.iter().find(|l| self.register.contains(l)) {
            return Err(QuantumError::LabelCollision(label.clone()));
        }
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        let mut register = self.register.clone();
        register.extend(other.register.iter().cloned());
        Ok(PureState {
            register,
            amplitudes,
        })
    }

    /// Probability mass on basis states where the qubit at `position` reads 1.
    pub(crate) fn excited_weight(&self, position: usize) -> f64 {
        let shift = self.num_qubits() - 1 - position;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| (i >> shift) & 1 == 1)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Applies `op` (acting on the listed qubit positions, first most
    /// significant) and returns the raw, possibly unnormalized, amplitudes.
    pub(crate) fn apply_local(&self, positions: &[usize], op: &CMatrix) -> Vec<Complex64> {
        let n = self.num_qubits();
        let k = positions.len();
        debug_assert_eq!(op.nrows(), 1 << k);
        let shifts: Vec<usize> = positions.iter().map(|&p| n - 1 - p).collect();
        let mask: usize = shifts.iter().map(|s| 1usize << s).sum();
        let scatter = |sub: usize| -> usize {
            shifts
                .iter()
                .enumerate()
                .filter(|(j, _)| (sub >> (k - 1 - j)) & 1 == 1)
                .map(|(_, s)| 1usize << s)
                .sum()
        };
        let spread: Vec<usize> = (0..1usize << k).map(scatter).collect();
        let mut out = vec![c(0.0); self.dim()];
        for (i, amp) in self.amplitudes.iter().enumerate() {
            if *amp == c(0.0) {
                continue;
            }
            let base = i & !mask;
            let col = shifts
                .iter()
                .fold(0usize, |acc, s| (acc << 1) | ((i >> s) & 1));
            for (row, offset) in spread.iter().enumerate() {
                let m = op[(row, col)];
                if m != c(0.0) {
                    out[base | offset] += m * amp;
                }
            }
        }
        out
    }

    pub(crate) fn with_amplitudes(&self, amplitudes: Vec<Complex64>) -> PureState {
        debug_assert_eq!(amplitudes.len(), self.dim());
        PureState {
            register: self.register.clone(),
            amplitudes,
        }
    }

    /// Inner product `⟨self|other⟩`; registers must match exactly.
    pub fn inner(&self, other: &PureState) -> Option<Complex64> {
        (self.register == other.register).then(|| {
            self.amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a.conj() * b)
                .sum()
        })
    }
}
