//! Search for two-qubit configurations with Hardy's zero pattern.
//!
//! With `C`, `D` measured on the first and second qubit and `A`, `B` on the
//! same qubits in other directions, the three cells `(C+, D+)`, `(A+, D−)`,
//! `(C−, B+)` are required to vanish. Classically this forces `(A+, B+)` to
//! vanish too; the search maximizes its quantum probability.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::FeasibilityError;
use crate::quantum::{born_distribution, ProjectiveMeasurement, PureState, QubitObservable};
use crate::tolerance;

/// A configuration found by the search. Angles follow the
/// [`QubitObservable`] convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyConfig {
    /// Real amplitudes in the order `|00⟩, |01⟩, |10⟩, |11⟩`.
    pub amplitudes: [f64; 4],
    pub c: f64,
    pub d: f64,
    pub a: f64,
    pub b: f64,
    /// Probability of `(A+, B+)`.
    pub probability: f64,
    /// Born probabilities of the three designated zero cells, recomputed
    /// independently of the construction.
    pub zero_cells: [f64; 3],
}

impl HardyConfig {
    pub fn state(&self, first: &str, second: &str) -> PureState {
        PureState::from_real(&[first, second], &self.amplitudes)
            .expect("search amplitudes are normalized")
    }
}

fn eig(angle: f64, sign: i8) -> [f64; 2] {
    let (s, c) = (angle / 2.0).sin_cos();
    if sign >= 0 {
        [c, s]
    } else {
        [-s, c]
    }
}

/// Angle whose `+1` eigenvector is orthogonal to the real vector `v`.
fn orthogonal_angle(v: [f64; 2]) -> Option<f64> {
    if v[0].hypot(v[1]) <= tolerance::ZERO_SUPPORT {
        return None;
    }
    Some(2.0 * (-v[0]).atan2(v[1]))
}

/// Contract the first qubit of `psi` with `e`.
fn contract_first(psi: &[f64; 4], e: [f64; 2]) -> [f64; 2] {
    [e[0] * psi[0] + e[1] * psi[2], e[0] * psi[1] + e[1] * psi[3]]
}

fn contract_second(psi: &[f64; 4], e: [f64; 2]) -> [f64; 2] {
    [e[0] * psi[0] + e[1] * psi[1], e[0] * psi[2] + e[1] * psi[3]]
}

/// Completes `(state, c)` to a Hardy configuration: `d`, `a`, `b` are fixed
/// by the three zero conditions.
fn complete(psi: [f64; 4], c: f64) -> Option<(f64, f64, f64, f64)> {
    let d = orthogonal_angle(contract_first(&psi, eig(c, 1)))?;
    let a = orthogonal_angle(contract_second(&psi, eig(d, -1)))?;
    let b = orthogonal_angle(contract_first(&psi, eig(c, -1)))?;
    let ea = eig(a, 1);
    let eb = eig(b, 1);
    let amp = ea[0] * eb[0] * psi[0]
        + ea[0] * eb[1] * psi[1]
        + ea[1] * eb[0] * psi[2]
        + ea[1] * eb[1] * psi[3];
    Some((d, a, b, amp * amp))
}

fn spherical(alpha: f64, beta: f64, gamma: f64) -> [f64; 4] {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    [ca, sa * cb, sa * sb * cg, sa * sb * sg]
}

/// Re-evaluates the four relevant cells with the Born rule on labeled states.
fn certify(psi: [f64; 4], c: f64, d: f64, a: f64, b: f64) -> Result<HardyConfig, FeasibilityError> {
    let state = PureState::from_real(&["L", "R"], &psi)?;
    let cell = |left: f64, right: f64, signs: [i8; 2]| -> Result<f64, FeasibilityError> {
        let m = ProjectiveMeasurement::product(&[
            ProjectiveMeasurement::observable("L", "x", QubitObservable::new(left)?),
            ProjectiveMeasurement::observable("R", "y", QubitObservable::new(right)?),
        ])?;
        Ok(born_distribution(&state, &m)?.prob(&signs))
    };
    let zero_cells = [
        cell(c, d, [1, 1])?,
        cell(a, d, [1, -1])?,
        cell(c, b, [-1, 1])?,
    ];
    let probability = cell(a, b, [1, 1])?;
    Ok(HardyConfig {
        amplitudes: psi,
        c,
        d,
        a,
        b,
        probability,
        zero_cells,
    })
}

#[derive(Clone)]
struct Candidate {
    params: Vec<f64>,
    value: f64,
}

impl Candidate {
    /// Larger value wins; ties go to the lexicographically smaller point.
    fn beats(&self, other: &Candidate) -> bool {
        self.value > other.value
            || (self.value == other.value
                && self
                    .params
                    .iter()
                    .zip(&other.params)
                    .find(|(x, y)| x != y)
                    .is_some_and(|(x, y)| x < y))
    }
}

fn grid_points(dims: &[(f64, f64)], resolution: usize) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for &(lo, hi) in dims {
        let step = (hi - lo) / resolution as f64;
        points = points
            .into_iter()
            .flat_map(|p| {
                (0..resolution).map(move |i| {
                    let mut q = p.clone();
                    q.push(lo + step * (i as f64 + 0.5));
                    q
                })
            })
            .collect();
    }
    points
}

/// Grid scan followed by a compass search with halving steps.
fn optimize(
    dims: &[(f64, f64)],
    resolution: usize,
    refinement: usize,
    f: impl Fn(&[f64]) -> Option<f64>,
) -> Option<Candidate> {
    let eval = |p: &[f64]| {
        f(p).map(|value| Candidate {
            params: p.to_vec(),
            value,
        })
    };
    let mut best: Option<Candidate> = None;
    for p in grid_points(dims, resolution) {
        if let Some(cand) = eval(&p) {
            if best.as_ref().is_none_or(|b| cand.beats(b)) {
                best = Some(cand);
            }
        }
    }
    let mut best = best?;
    let mut step = PI / resolution as f64;
    for _ in 0..refinement {
        let mut improved: Option<Candidate> = None;
        for k in 0..dims.len() {
            for dir in [1.0, -1.0] {
                let mut p = best.params.clone();
                p[k] += dir * step;
                if let Some(cand) = eval(&p) {
                    let current = improved.as_ref().unwrap_or(&best);
                    if cand.value > current.value {
                        improved = Some(cand);
                    }
                }
            }
        }
        match improved {
            Some(c) => best = c,
            None => step /= 2.0,
        }
        if step < 1e-12 {
            break;
        }
    }
    Some(best)
}

fn finish(psi: [f64; 4], c: f64) -> Result<HardyConfig, FeasibilityError> {
    let (d, a, b, _) = complete(psi, c).ok_or(FeasibilityError::HardyNotFound { best: 0.0 })?;
    let config = certify(psi, c, d, a, b)?;
    let worst_zero = config.zero_cells.iter().copied().fold(0.0, f64::max);
    if worst_zero > tolerance::ZERO_SUPPORT || config.probability <= tolerance::ZERO_SUPPORT {
        return Err(FeasibilityError::HardyNotFound {
            best: config.probability,
        });
    }
    Ok(config)
}

/// Searches real two-qubit states and the angle `c`; the other angles are
/// determined by the zero conditions. `resolution` points per dimension,
/// then `refinement` compass-search iterations.
pub fn hardy_search(resolution: usize, refinement: usize) -> Result<HardyConfig, FeasibilityError> {
    if resolution < 8 {
        return Err(FeasibilityError::ResolutionTooSmall(resolution));
    }
    let dims = [(0.0, PI), (0.0, PI), (0.0, 2.0 * PI), (0.0, 2.0 * PI)];
    let best = optimize(&dims, resolution, refinement, |p| {
        complete(spherical(p[0], p[1], p[2]), p[3]).map(|r| r.3)
    })
    .ok_or(FeasibilityError::HardyNotFound { best: 0.0 })?;
    let p = &best.params;
    finish(spherical(p[0], p[1], p[2]), p[3])
}

/// Like [`hardy_search`] with the state held fixed. The state must be a
/// two-qubit state with real amplitudes up to a global phase.
pub fn hardy_search_for_state(
    state: &PureState,
    resolution: usize,
    refinement: usize,
) -> Result<HardyConfig, FeasibilityError> {
    if resolution < 8 {
        return Err(FeasibilityError::ResolutionTooSmall(resolution));
    }
    let psi = real_amplitudes(state)?;
    let best = optimize(&[(0.0, 2.0 * PI)], resolution, refinement, |p| {
        complete(psi, p[0]).map(|r| r.3)
    })
    .ok_or(FeasibilityError::HardyNotFound { best: 0.0 })?;
    finish(psi, best.params[0])
}

fn real_amplitudes(state: &PureState) -> Result<[f64; 4], FeasibilityError> {
    if state.num_qubits() != 2 {
        return Err(FeasibilityError::NotRealTwoQubit);
    }
    let amps = state.amplitudes();
    let pivot = amps
        .iter()
        .copied()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .expect("four amplitudes");
    let phase = pivot / pivot.norm();
    let mut out = [0.0; 4];
    for (o, a) in out.iter_mut().zip(amps) {
        let r = a / phase;
        if r.im.abs() > tolerance::COMPOSED {
            return Err(FeasibilityError::NotRealTwoQubit);
        }
        *o = r.re;
    }
    Ok(out)
}
