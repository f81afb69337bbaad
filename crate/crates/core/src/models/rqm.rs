use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;

use super::{
    sample_table, Capabilities, DynamicalState, ExtensionModel, ModelError, QuantumTables,
    RecordDistribution,
};
use crate::distribution::cell_label;
use crate::record::{Outcome, OutcomeRecord};
use crate::scenario::{Context, Event, MenuOption, Scenario};

fn all_pairs(wings: usize, outcome: fn(usize) -> Event) -> Vec<(Event, Event)> {
    (0..wings)
        .flat_map(|w| (0..wings).map(move |v| (outcome(w), Event::Choice(v))))
        .collect()
}

/// Relative facts with cross-perspective links. In each context the
/// superobservers' outcomes are drawn jointly from the quantum prediction
/// for that context; a friend who is asked holds the value the asker hears;
/// a friend whose lab is supermeasured holds a value drawn from its own Born
/// marginal, independently of everything else.
#[derive(Debug, Clone)]
pub struct RqmCpl {
    scenario: Scenario,
    tables: QuantumTables,
}

impl RqmCpl {
    pub fn new(s: &Scenario) -> Result<Self, ModelError> {
        Ok(Self {
            scenario: s.clone(),
            tables: QuantumTables::new(s)?,
        })
    }

    fn record(context: &Context, accessed: &[i8], free: &[i8]) -> Vec<Outcome> {
        let n = context.options.len();
        let mut rec = vec![Outcome::Null; 2 * n];
        let mut free = free.iter();
        for (w, o) in context.options.iter().enumerate() {
            rec[w] = match o {
                MenuOption::Ask => Outcome::from_sign(accessed[w]),
                MenuOption::Super(_) => Outcome::from_sign(*free.next().expect("one value per free friend")),
            };
            rec[n + w] = Outcome::from_sign(accessed[w]);
        }
        rec
    }

    fn free_wings(context: &Context) -> Vec<usize> {
        context
            .options
            .iter()
            .enumerate()
            .filter(|(_, o)| matches!(o, MenuOption::Super(_)))
            .map(|(w, _)| w)
            .collect()
    }
}

impl ExtensionModel for RqmCpl {
    fn name(&self) -> &str {
        "rqm-cpl"
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

    fn analytic(&self, context: &Context) -> Option<RecordDistribution> {
        let joint = &self.tables.contexts[context.index];
        let free = Self::free_wings(context);
        let mut map = BTreeMap::new();
        for (accessed, p) in joint.cells() {
            for f in 0..1usize << free.len() {
                let values = cell_label(f, free.len());
                let q: f64 = free
                    .iter()
                    .zip(&values)
                    .map(|(&w, &v)| self.tables.friend_marginals[w].prob(&[v]))
                    .product();
                *map.entry(Self::record(context, &accessed, &values)).or_insert(0.0) += p * q;
            }
        }
        Some(RecordDistribution::from_map(self.layout(context), map))
    }

    fn sample(&self, context: &Context, rng: &mut ChaCha8Rng) -> OutcomeRecord {
        let accessed = sample_table(&self.tables.contexts[context.index], rng);
        let free: Vec<i8> = Self::free_wings(context)
            .iter()
            .map(|&w| sample_table(&self.tables.friend_marginals[w], rng)[0])
            .collect();
        OutcomeRecord::from_outcomes(Self::record(context, &accessed, &free))
    }

    fn dynamical_state(&self, _context: &Context, _wing: usize) -> DynamicalState {
        DynamicalState::Unitary(self.scenario.dilated_state())
    }

    fn context_dependencies(&self) -> Vec<(Event, Event)> {
        let n = self.scenario.wings().len();
        let mut deps = all_pairs(n, Event::FriendMeasurement);
        deps.extend(all_pairs(n, Event::SuperMeasurement));
        deps
    }
}

/// Relative facts without cross-perspective links: friends' records follow
/// the quantum joint of their own measurements in every context, and what
/// the superobservers see (including what they hear when asking) follows
/// the context's quantum prediction independently of those records.
#[derive(Debug, Clone)]
pub struct RqmNoCpl {
    scenario: Scenario,
    tables: QuantumTables,
}

impl RqmNoCpl {
    pub fn new(s: &Scenario) -> Result<Self, ModelError> {
        Ok(Self {
            scenario: s.clone(),
            tables: QuantumTables::new(s)?,
        })
    }
}

fn concat(friends: &[i8], supers: &[i8]) -> Vec<Outcome> {
    friends
        .iter()
        .chain(supers)
        .map(|&v| Outcome::from_sign(v))
        .collect()
}

impl ExtensionModel for RqmNoCpl {
    fn name(&self) -> &str {
        "rqm-no-cpl"
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

    fn analytic(&self, context: &Context) -> Option<RecordDistribution> {
        let mut map = BTreeMap::new();
        for (f, p) in self.tables.friend_joint.cells() {
            for (a, q) in self.tables.contexts[context.index].cells() {
                *map.entry(concat(&f, &a)).or_insert(0.0) += p * q;
            }
        }
        Some(RecordDistribution::from_map(self.layout(context), map))
    }

    fn sample(&self, context: &Context, rng: &mut ChaCha8Rng) -> OutcomeRecord {
        let f = sample_table(&self.tables.friend_joint, rng);
        let a = sample_table(&self.tables.contexts[context.index], rng);
        OutcomeRecord::from_outcomes(concat(&f, &a))
    }

    fn dynamical_state(&self, _context: &Context, _wing: usize) -> DynamicalState {
        DynamicalState::Unitary(self.scenario.dilated_state())
    }

    fn context_dependencies(&self) -> Vec<(Event, Event)> {
        all_pairs(self.scenario.wings().len(), Event::SuperMeasurement)
    }
}
