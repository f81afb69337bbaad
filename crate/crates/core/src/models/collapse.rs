use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;

use super::{
    sample_index, sample_table, Capabilities, DynamicalState, ExtensionModel, ModelError,
    RecordDistribution,
};
use crate::distribution::cell_index;
use crate::quantum::{apply_dilation, born_distribution, collapse, ProjectiveMeasurement, PureState};
use crate::record::{Outcome, OutcomeRecord};
use crate::scenario::{Context, Event, MenuOption, Scenario};
use crate::{tolerance, JointDistribution};

/// Each friend's measurement is a physical collapse. Superobservers then act
/// on the collapsed labs: asking returns the collapsed value, a
/// supermeasurement is applied to the collapsed state.
#[derive(Debug, Clone)]
pub struct CollapseAtFriend {
    scenario: Scenario,
    /// `plus[k][prefix]`: probability that friend `k` records `+1` given the
    /// earlier friends' records `prefix` (index as in [`cell_index`]).
    plus: Vec<Vec<f64>>,
    /// `leaves[context][record]`: distribution of the supermeasurement
    /// results on the lab collapsed onto the friends' `record`.
    leaves: Vec<Vec<Option<JointDistribution>>>,
}

fn super_measurement(s: &Scenario, context: &Context) -> Option<ProjectiveMeasurement> {
    let parts: Vec<ProjectiveMeasurement> = s
        .wings()
        .iter()
        .zip(&context.options)
        .filter_map(|(w, o)| match o {
            MenuOption::Super(angle) => Some(w.dilation.supermeasurement(*angle, &w.super_var)),
            MenuOption::Ask => None,
        })
        .collect();
    if parts.is_empty() {
        None
    } else {
        Some(ProjectiveMeasurement::product(&parts).expect("wings act on disjoint qubits"))
    }
}

impl CollapseAtFriend {
    /// Builds the tree of sequential collapses, one friend at a time.
    pub fn new(s: &Scenario) -> Result<Self, ModelError> {
        let n = s.wings().len();
        let mut level: Vec<Option<PureState>> = vec![Some(s.lab_state())];
        let mut plus = Vec::with_capacity(n);
        for wing in s.wings() {
            let readout = wing.dilation.readout(&wing.friend_var);
            let mut next = Vec::with_capacity(level.len() * 2);
            let mut probs = Vec::with_capacity(level.len());
            for state in &level {
                let Some(state) = state else {
                    probs.push(0.0);
                    next.extend([None, None]);
                    continue;
                };
                let dilated = apply_dilation(state, &wing.dilation)?;
                let dist = born_distribution(&dilated, &readout)?;
                probs.push(dist.prob(&[1]));
                for v in [1i8, -1] {
                    next.push(if dist.prob(&[v]) > tolerance::ALGEBRAIC {
                        Some(collapse(&dilated, &readout, &[v])?.0)
                    } else {
                        None
                    });
                }
            }
            plus.push(probs);
            level = next;
        }
        let leaves = s
            .contexts()
            .iter()
            .map(|ctx| {
                let m = super_measurement(s, ctx);
                level
                    .iter()
                    .map(|state| match (state, &m) {
                        (None, _) => Ok(None),
                        (Some(_), None) => Ok(Some(JointDistribution::from_fn(&[], |_| 1.0))),
                        (Some(st), Some(m)) => Ok(Some(born_distribution(st, m)?)),
                    })
                    .collect::<Result<Vec<_>, ModelError>>()
            })
            .collect::<Result<_, _>>()?;
        Ok(Self {
            scenario: s.clone(),
            plus,
            leaves,
        })
    }

    fn record(context: &Context, friends: &[i8], supers: &[i8]) -> Vec<Outcome> {
        let n = context.options.len();
        let mut rec: Vec<Outcome> = friends.iter().map(|&v| Outcome::from_sign(v)).collect();
        rec.resize(2 * n, Outcome::Null);
        let mut supers = supers.iter();
        for (w, o) in context.options.iter().enumerate() {
            rec[n + w] = match o {
                MenuOption::Ask => Outcome::from_sign(friends[w]),
                MenuOption::Super(_) => Outcome::from_sign(*supers.next().expect("one value per super wing")),
            };
        }
        rec
    }
}

impl ExtensionModel for CollapseAtFriend {
    fn name(&self) -> &str {
        "collapse-at-friend"
    }

    fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            has_analytic: true,
            emits_null: false,
        }
    }

    /// Joint friend distribution from one Born evaluation on the dilated
    /// state, then the supermeasurements on each collapsed branch.
    fn analytic(&self, context: &Context) -> Option<RecordDistribution> {
        let s = &self.scenario;
        let readouts: Vec<ProjectiveMeasurement> = s
            .wings()
            .iter()
            .map(|w| w.dilation.readout(&w.friend_var))
            .collect();
        let all = ProjectiveMeasurement::product(&readouts).ok()?;
        let dilated = s.dilated_state();
        let friends = born_distribution(&dilated, &all).ok()?;
        let sup = super_measurement(s, context);
        let mut map = BTreeMap::new();
        for (f, p) in friends.cells() {
            if p <= tolerance::ALGEBRAIC {
                continue;
            }
            let (branch, _) = collapse(&dilated, &all, &f).ok()?;
            let supers = match &sup {
                Some(m) => born_distribution(&branch, m).ok()?,
                None => JointDistribution::from_fn(&[], |_| 1.0),
            };
            for (a, q) in supers.cells() {
                *map.entry(Self::record(context, &f, &a)).or_insert(0.0) += p * q;
            }
        }
        Some(RecordDistribution::from_map(self.layout(context), map))
    }

    /// Walks the collapse tree friend by friend, then measures the
    /// collapsed labs.
    fn sample(&self, context: &Context, rng: &mut ChaCha8Rng) -> OutcomeRecord {
        let mut friends: Vec<i8> = Vec::with_capacity(self.plus.len());
        for level in &self.plus {
            let p = level[cell_index(&friends)];
            // branches at or below the algebraic tolerance were not built
            let p = if p <= tolerance::ALGEBRAIC {
                0.0
            } else if p >= 1.0 - tolerance::ALGEBRAIC {
                1.0
            } else {
                p
            };
            friends.push(if sample_index(&[p, 1.0 - p], rng) == 0 { 1 } else { -1 });
        }
        let leaf = self.leaves[context.index][cell_index(&friends)]
            .as_ref()
            .expect("sampled branches have positive probability");
        let supers = sample_table(leaf, rng);
        OutcomeRecord::from_outcomes(Self::record(context, &friends, &supers))
    }

    fn dynamical_state(&self, _context: &Context, _wing: usize) -> DynamicalState {
        DynamicalState::CollapsedOnRecord
    }

    fn context_dependencies(&self) -> Vec<(Event, Event)> {
        (0..self.scenario.wings().len())
            .map(|w| (Event::SuperMeasurement(w), Event::Choice(w)))
            .collect()
    }
}
