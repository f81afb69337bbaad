use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;

use super::{
    sample_table, Capabilities, DynamicalState, ExtensionModel, ModelError, QuantumTables,
    RecordDistribution,
};
use crate::record::{Outcome, OutcomeRecord};
use crate::scenario::{Context, Event, MenuOption, Scenario};

/// Events occur only if they leave a record in the final measurement. A
/// friend whose lab is supermeasured has no outcome at all (Null); every
/// surviving outcome is drawn jointly from the quantum prediction for the
/// surviving events, which is the context's prediction.
#[derive(Debug, Clone)]
pub struct KentFinalMeasurement {
    scenario: Scenario,
    tables: QuantumTables,
}

impl KentFinalMeasurement {
    pub fn new(s: &Scenario) -> Result<Self, ModelError> {
        Ok(Self {
            scenario: s.clone(),
            tables: QuantumTables::new(s)?,
        })
    }

    fn record(context: &Context, surviving: &[i8]) -> Vec<Outcome> {
        let n = context.options.len();
        let mut rec = vec![Outcome::Null; 2 * n];
        for (w, o) in context.options.iter().enumerate() {
            let v = Outcome::from_sign(surviving[w]);
            if *o == MenuOption::Ask {
                rec[w] = v;
            }
            rec[n + w] = v;
        }
        rec
    }
}

impl ExtensionModel for KentFinalMeasurement {
    fn name(&self) -> &str {
        "kent"
    }

    fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            has_analytic: true,
            emits_null: true,
        }
    }

    fn analytic(&self, context: &Context) -> Option<RecordDistribution> {
        let mut map = BTreeMap::new();
        for (v, p) in self.tables.contexts[context.index].cells() {
            *map.entry(Self::record(context, &v)).or_insert(0.0) += p;
        }
        Some(RecordDistribution::from_map(self.layout(context), map))
    }

    fn sample(&self, context: &Context, rng: &mut ChaCha8Rng) -> OutcomeRecord {
        let v = sample_table(&self.tables.contexts[context.index], rng);
        OutcomeRecord::from_outcomes(Self::record(context, &v))
    }

    fn dynamical_state(&self, _context: &Context, _wing: usize) -> DynamicalState {
        DynamicalState::Unitary(self.scenario.dilated_state())
    }

    /// Whether a friend's outcome exists depends on that wing's choice;
    /// superobserver outcomes depend on every choice through the joint.
    fn context_dependencies(&self) -> Vec<(Event, Event)> {
        let n = self.scenario.wings().len();
        let mut deps: Vec<(Event, Event)> = (0..n)
            .map(|w| (Event::FriendMeasurement(w), Event::Choice(w)))
            .collect();
        for w in 0..n {
            for v in 0..n {
                deps.push((Event::SuperMeasurement(w), Event::Choice(v)));
            }
        }
        deps
    }
}
