use num_complex::Complex64;

use super::{c, kron_all, CMatrix, PureState, QuantumError, QubitObservable};
use crate::distribution::{cell_index, JointDistribution};
use crate::tolerance;

/// Outcome of a (possibly joint) measurement: one `±1` per measured variable.
pub type OutcomeLabel = Vec<i8>;

/// A complete set of orthogonal projectors on some target qubits, each
/// tagged with a tuple of `±1` values for the measurement's variables.
#[derive(Debug, Clone)]
pub struct ProjectiveMeasurement {
    targets: Vec<String>,
    variables: Vec<String>,
    outcomes: Vec<(OutcomeLabel, CMatrix)>,
}

impl ProjectiveMeasurement {
    /// Validates projector algebra: idempotent, Hermitian, mutually
    /// orthogonal and complete, each within the algebraic tolerance.
    pub fn new(
        targets: Vec<String>,
        variables: Vec<String>,
        outcomes: Vec<(OutcomeLabel, CMatrix)>,
    ) -> Result<Self, QuantumError> {
        let bad = |msg: String| Err(QuantumError::InvalidMeasurement(msg));
        let dim = 1usize << targets.len();
        if outcomes.is_empty() {
            return bad("no outcomes".into());
        }
        let mut total = CMatrix::zeros(dim, dim);
        for (i, (label, p)) in outcomes.iter().enumerate() {
            if label.len() != variables.len() || label.iter().any(|v| v.abs() != 1) {
                return bad(format!("label {label:?} is not a ±1 tuple over {variables:?}"));
            }
            if outcomes[..i].iter().any(|(l, _)| l == label) {
                return bad(format!("duplicate label {label:?}"));
            }
            if p.nrows() != dim || p.ncols() != dim {
                return bad(format!("projector for {label:?} has wrong shape"));
            }
            if (p * p - p).norm() > tolerance::ALGEBRAIC {
                return bad(format!("projector for {label:?} is not idempotent"));
            }
            if (p.adjoint() - p).norm() > tolerance::ALGEBRAIC {
                return bad(format!("projector for {label:?} is not Hermitian"));
            }
            for (other_label, q) in &outcomes[..i] {
                if (p * q).norm() > tolerance::ALGEBRAIC {
                    return bad(format!("projectors {other_label:?} and {label:?} overlap"));
                }
            }
            total += p;
        }
        if (total - CMatrix::identity(dim, dim)).norm() > tolerance::ALGEBRAIC {
            return bad("projectors do not sum to the identity".into());
        }
        Ok(Self {
            targets,
            variables,
            outcomes,
        })
    }

    /// Measurement of one qubit observable; outcome labels `[+1]` and `[-1]`.
    pub fn observable(target: &str, variable: &str, obs: QubitObservable) -> Self {
        Self {
            targets: vec![target.to_string()],
            variables: vec![variable.to_string()],
            outcomes: vec![(vec![1], obs.projector(1)), (vec![-1], obs.projector(-1))],
        }
    }

    /// Two-outcome measurement: `+1` projects onto `plus` (unit norm), `-1`
    /// onto its orthogonal complement.
    pub fn binary(
        targets: Vec<String>,
        variable: &str,
        plus: &[Complex64],
    ) -> Result<Self, QuantumError> {
        let dim = plus.len();
        let p = CMatrix::from_fn(dim, dim, |i, j| plus[i] * plus[j].conj());
        let q = CMatrix::identity(dim, dim) - &p;
        Self::new(
            targets,
            vec![variable.to_string()],
            vec![(vec![1], p), (vec![-1], q)],
        )
    }

    /// Joint measurement of independent parts on disjoint targets.
    pub fn product(parts: &[ProjectiveMeasurement]) -> Result<Self, QuantumError> {
        let mut targets: Vec<String> = Vec::new();
        let mut variables = Vec::new();
        for part in parts {
            for t in &part.targets {
                if targets.contains(t) {
                    return Err(QuantumError::LabelCollision(t.clone()));
                }
                targets.push(t.clone());
            }
            variables.extend(part.variables.iter().cloned());
        }
        let mut outcomes: Vec<(OutcomeLabel, Vec<CMatrix>)> = vec![(Vec::new(), Vec::new())];
        for part in parts {
            let mut next = Vec::with_capacity(outcomes.len() * part.outcomes.len());
            for (label, factors) in &outcomes {
                for (l, p) in &part.outcomes {
                    let mut label = label.clone();
                    label.extend_from_slice(l);
                    let mut factors = factors.clone();
                    factors.push(p.clone());
                    next.push((label, factors));
                }
            }
            outcomes = next;
        }
        Ok(Self {
            targets,
            variables,
            outcomes: outcomes
                .into_iter()
                .map(|(l, f)| (l, kron_all(&f)))
                .collect(),
        })
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn outcomes(&self) -> impl Iterator<Item = (&OutcomeLabel, &CMatrix)> {
        self.outcomes.iter().map(|(l, p)| (l, p))
    }

    fn positions(&self, state: &PureState) -> Result<Vec<usize>, QuantumError> {
        self.targets.iter().map(|t| state.position(t)).collect()
    }
}

fn projected(state: &PureState, positions: &[usize], p: &CMatrix) -> (Vec<Complex64>, f64) {
    let v = state.apply_local(positions, p);
    let w = v.iter().map(|a| a.norm_sqr()).sum();
    (v, w)
}

/// Born-rule distribution of `m` on `state`.
pub fn born_distribution(
    state: &PureState,
    m: &ProjectiveMeasurement,
) -> Result<JointDistribution, QuantumError> {
    let positions = m.positions(state)?;
    let mut probs = vec![0.0; 1 << m.variables.len()];
    for (label, p) in &m.outcomes {
        let (_, w) = projected(state, &positions, p);
        probs[cell_index(label)] += w;
    }
    Ok(JointDistribution::from_parts(m.variables.clone(), probs))
}

/// Projects onto `outcome` and renormalizes; returns the state and its Born
/// probability. Outcomes at or below the algebraic tolerance are refused.
pub fn collapse(
    state: &PureState,
    m: &ProjectiveMeasurement,
    outcome: &[i8],
) -> Result<(PureState, f64), QuantumError> {
    let positions = m.positions(state)?;
    let (_, p) = m
        .outcomes
        .iter()
        .find(|(l, _)| l.as_slice() == outcome)
        .ok_or_else(|| QuantumError::UnknownOutcome(outcome.to_vec()))?;
    let (v, w) = projected(state, &positions, p);
    if w <= tolerance::ALGEBRAIC {
        return Err(QuantumError::CollapseOnNull {
            outcome: outcome.to_vec(),
            probability: w,
        });
    }
    let scale = c(w.sqrt().recip());
    let amps = v.into_iter().map(|a| a * scale).collect();
    Ok((state.with_amplitudes(amps), w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    /// Independent Born oracle for two qubits: explicit 4-dim projector
    /// built from eigenvector outer products, no local-operator machinery.
    fn singlet_oracle_correlator(ta: f64, tb: f64) -> f64 {
        let psi = [0.0, std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2, 0.0];
        let ev = |t: f64, s: f64| {
            if s > 0.0 {
                [(t / 2.0).cos(), (t / 2.0).sin()]
            } else {
                [-(t / 2.0).sin(), (t / 2.0).cos()]
            }
        };
        let mut e = 0.0;
        for sa in [1.0, -1.0] {
            for sb in [1.0, -1.0] {
                let (u, v) = (ev(ta, sa), ev(tb, sb));
                let amp: f64 = (0..4).map(|i| u[i >> 1] * v[i & 1] * psi[i]).sum();
                e += sa * sb * amp * amp;
            }
        }
        e
    }

    fn singlet_measure(ta: f64, tb: f64) -> JointDistribution {
        let s = PureState::singlet("a", "b");
        let m = ProjectiveMeasurement::product(&[
            ProjectiveMeasurement::observable("a", "A", QubitObservable::new(ta).unwrap()),
            ProjectiveMeasurement::observable("b", "B", QubitObservable::new(tb).unwrap()),
        ])
        .unwrap();
        born_distribution(&s, &m).unwrap()
    }

    #[test]
    fn eigenstate_is_deterministic() {
        let m = ProjectiveMeasurement::observable("s", "Z", QubitObservable::Z);
        let d = born_distribution(&PureState::ready("s"), &m).unwrap();
        assert_eq!(d.prob(&[1]), 1.0);
        assert_eq!(d.prob(&[-1]), 0.0);
    }

    #[test]
    fn singlet_correlator_matches_oracle_on_grid() {
        for i in 0..8 {
            for j in 0..8 {
                let (ta, tb) = (i as f64 * PI / 4.0, j as f64 * PI / 5.0);
                let e = singlet_measure(ta, tb).correlator(&["A", "B"]).unwrap();
                assert!((e - singlet_oracle_correlator(ta, tb)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ghz_xxx_parity_is_plus_one() {
        let ghz = PureState::ghz(&["a", "b", "c"]);
        let parts: Vec<_> = ["a", "b", "c"]
            .iter()
            .map(|q| ProjectiveMeasurement::observable(q, q, QubitObservable::X))
            .collect();
        let m = ProjectiveMeasurement::product(&parts).unwrap();
        let d = born_distribution(&ghz, &m).unwrap();
        assert!((d.correlator(&["a", "b", "c"]).unwrap() - 1.0).abs() < 1e-12);
        // 8-dim oracle: X^{⊗3} swaps |000> and |111>, so <GHZ|XXX|GHZ> = 2 * (1/√2)^2.
        let amps = ghz.amplitudes();
        let oracle = (amps[0].conj() * amps[7] + amps[7].conj() * amps[0]).re;
        assert!((oracle - 1.0).abs() < 1e-12);
    }

    #[test]
    fn born_distributions_sum_to_one() {
        let d = singlet_measure(0.3, -1.2);
        let total: f64 = d.probabilities().iter().sum();
        assert!((total - 1.0).abs() < tolerance::ALGEBRAIC);
        assert!(d.probabilities().iter().all(|&p| p >= -tolerance::ALGEBRAIC));
    }

    #[test]
    fn collapse_plus_onto_z() {
        let m = ProjectiveMeasurement::observable("s", "Z", QubitObservable::Z);
        let (post, p) = collapse(&PureState::plus("s"), &m, &[1]).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!((post.amplitudes()[0] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn singlet_collapse_gives_anticorrelated_partner() {
        let m = ProjectiveMeasurement::observable("a", "A", QubitObservable::Z);
        let (post, _) = collapse(&PureState::singlet("a", "b"), &m, &[1]).unwrap();
        let zb = ProjectiveMeasurement::observable("b", "B", QubitObservable::Z);
        let d = born_distribution(&post, &zb).unwrap();
        assert!((d.prob(&[-1]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn collapse_on_zero_probability_outcome_fails() {
        let m = ProjectiveMeasurement::observable("s", "Z", QubitObservable::Z);
        let err = collapse(&PureState::ready("s"), &m, &[-1]).unwrap_err();
        assert!(matches!(err, QuantumError::CollapseOnNull { .. }));
    }

    #[test]
    fn collapse_reproduces_conditionals() {
        let (ta, tb) = (0.4, 2.1);
        let joint = singlet_measure(ta, tb);
        let s = PureState::singlet("a", "b");
        let ma = ProjectiveMeasurement::observable("a", "A", QubitObservable::new(ta).unwrap());
        let mb = ProjectiveMeasurement::observable("b", "B", QubitObservable::new(tb).unwrap());
        for a in [1i8, -1] {
            let (post, pa) = collapse(&s, &ma, &[a]).unwrap();
            let cond = born_distribution(&post, &mb).unwrap();
            for b in [1i8, -1] {
                assert!((cond.prob(&[b]) * pa - joint.prob(&[a, b])).abs() < tolerance::ALGEBRAIC);
            }
        }
    }

    #[test]
    fn unknown_target_is_an_error() {
        let m = ProjectiveMeasurement::observable("zz", "Z", QubitObservable::Z);
        assert!(matches!(
            born_distribution(&PureState::ready("s"), &m),
            Err(QuantumError::UnknownLabel(_))
        ));
    }

    #[test]
    fn invalid_projectors_are_rejected() {
        let half = CMatrix::identity(2, 2) * c(0.5);
        let err = ProjectiveMeasurement::new(
            vec!["s".into()],
            vec!["Z".into()],
            vec![(vec![1], half.clone()), (vec![-1], half)],
        )
        .unwrap_err();
        assert!(matches!(err, QuantumError::InvalidMeasurement(_)));
        let ok = ProjectiveMeasurement::new(
            vec!["s".into()],
            vec!["X".into()],
            vec![
                (vec![1], QubitObservable::new(FRAC_PI_2).unwrap().projector(1)),
                (vec![-1], QubitObservable::new(FRAC_PI_2).unwrap().projector(-1)),
            ],
        );
        assert!(ok.is_ok());
    }
}
