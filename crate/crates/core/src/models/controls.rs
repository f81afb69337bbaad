//! Deliberately broken models. Each wraps a working model and breaks one
//! assumption, so that the matching checker has something to catch.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Capabilities, DynamicalState, ExtensionModel, RecordDistribution};
use crate::record::{Outcome, OutcomeRecord};
use crate::scenario::{Context, Event, OptionKind, Scenario};

fn flip(o: Outcome) -> Outcome {
    match o {
        Outcome::Plus => Outcome::Minus,
        Outcome::Minus => Outcome::Plus,
        Outcome::Null => Outcome::Null,
    }
}

fn remap(
    d: RecordDistribution,
    f: impl Fn(&[Outcome]) -> Vec<(Vec<Outcome>, f64)>,
) -> RecordDistribution {
    let mut map = BTreeMap::new();
    for (rec, p) in &d.support {
        for (r, q) in f(rec) {
            *map.entry(r).or_insert(0.0) += p * q;
        }
    }
    RecordDistribution::from_map(d.layout, map)
}

/// The friend of `wing` ends every run holding both the outcome the inner
/// model gave and its opposite.
pub struct TwoValued {
    inner: Box<dyn ExtensionModel>,
    wing: usize,
}

impl TwoValued {
    pub fn new(inner: Box<dyn ExtensionModel>, wing: usize) -> Self {
        Self { inner, wing }
    }
}

impl ExtensionModel for TwoValued {
    fn name(&self) -> &str {
        "two-valued"
    }

    fn scenario(&self) -> &Scenario {
        self.inner.scenario()
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            has_analytic: false,
            ..self.inner.capabilities()
        }
    }

    fn analytic(&self, _context: &Context) -> Option<RecordDistribution> {
        None
    }

    fn sample(&self, context: &Context, rng: &mut ChaCha8Rng) -> OutcomeRecord {
        let mut rec = self.inner.sample(context, rng);
        let slot = self.layout(context).friend_slot(self.wing);
        let first = rec.values(slot)[0];
        rec.push_extra(slot, flip(first));
        rec
    }

    fn dynamical_state(&self, context: &Context, wing: usize) -> DynamicalState {
        self.inner.dynamical_state(context, wing)
    }

    fn context_dependencies(&self) -> Vec<(Event, Event)> {
        self.inner.context_dependencies()
    }
}

/// The friend of wing `to` records `+1` whenever the distant wing `from` is
/// supermeasured, and anyone who asks hears that `+1`.
pub struct LeakySetting {
    inner: Box<dyn ExtensionModel>,
    from: usize,
    to: usize,
}

impl LeakySetting {
    pub fn new(inner: Box<dyn ExtensionModel>, from: usize, to: usize) -> Self {
        Self { inner, from, to }
    }

    fn leaks(&self, context: &Context) -> bool {
        context.options[self.from].kind() == OptionKind::Super
    }

    fn apply(&self, context: &Context, rec: &[Outcome]) -> Vec<Outcome> {
        let mut out = rec.to_vec();
        if self.leaks(context) {
            let n = context.options.len();
            out[self.to] = Outcome::Plus;
            if context.options[self.to].kind() == OptionKind::Ask {
                out[n + self.to] = Outcome::Plus;
            }
        }
        out
    }
}

impl ExtensionModel for LeakySetting {
    fn name(&self) -> &str {
        "leaky-setting"
    }

    fn scenario(&self) -> &Scenario {
        self.inner.scenario()
    }

    fn capabilities(&self) -> Capabilities {
        self.inner.capabilities()
    }

    fn analytic(&self, context: &Context) -> Option<RecordDistribution> {
        let d = self.inner.analytic(context)?;
        Some(remap(d, |rec| vec![(self.apply(context, rec), 1.0)]))
    }

    fn sample(&self, context: &Context, rng: &mut ChaCha8Rng) -> OutcomeRecord {
        let rec = self.inner.sample(context, rng);
        let single: Vec<Outcome> = (0..rec.len()).map(|s| rec.values(s)[0]).collect();
        OutcomeRecord::from_outcomes(self.apply(context, &single))
    }

    fn dynamical_state(&self, context: &Context, wing: usize) -> DynamicalState {
        self.inner.dynamical_state(context, wing)
    }

    fn context_dependencies(&self) -> Vec<(Event, Event)> {
        let mut deps = self.inner.context_dependencies();
        deps.push((Event::FriendMeasurement(self.to), Event::Choice(self.from)));
        deps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tamper {
    /// The asker hears the opposite of the friend's record.
    Flip,
    /// The asker hears a fair coin.
    Uniform,
}

/// Corrupts what a superobserver hears when asking.
pub struct AnswerTampering {
    inner: Box<dyn ExtensionModel>,
    tamper: Tamper,
}

impl AnswerTampering {
    pub fn new(inner: Box<dyn ExtensionModel>, tamper: Tamper) -> Self {
        Self { inner, tamper }
    }
}

impl ExtensionModel for AnswerTampering {
    fn name(&self) -> &str {
        "answer-tampering"
    }

    fn scenario(&self) -> &Scenario {
        self.inner.scenario()
    }

    fn capabilities(&self) -> Capabilities {
        self.inner.capabilities()
    }

    fn analytic(&self, context: &Context) -> Option<RecordDistribution> {
        let d = self.inner.analytic(context)?;
        let n = context.options.len();
        let asked: Vec<usize> = (0..n)
            .filter(|&w| context.options[w].kind() == OptionKind::Ask)
            .map(|w| n + w)
            .collect();
        Some(remap(d, |rec| match self.tamper {
            Tamper::Flip => {
                let mut r = rec.to_vec();
                for &s in &asked {
                    r[s] = flip(r[s]);
                }
                vec![(r, 1.0)]
            }
            Tamper::Uniform => {
                let weight = 0.5f64.powi(asked.len() as i32);
                (0..1usize << asked.len())
                    .map(|bits| {
                        let mut r = rec.to_vec();
                        for (k, &s) in asked.iter().enumerate() {
                            r[s] = if bits >> k & 1 == 0 { Outcome::Plus } else { Outcome::Minus };
                        }
                        (r, weight)
                    })
                    .collect()
            }
        }))
    }

    fn sample(&self, context: &Context, rng: &mut ChaCha8Rng) -> OutcomeRecord {
        let mut rec = self.inner.sample(context, rng);
        let n = context.options.len();
        for w in 0..n {
            if context.options[w].kind() != OptionKind::Ask {
                continue;
            }
            let s = n + w;
            let heard = match self.tamper {
                Tamper::Flip => flip(rec.values(s)[0]),
                Tamper::Uniform => {
                    if rng.random::<bool>() {
                        Outcome::Plus
                    } else {
                        Outcome::Minus
                    }
                }
            };
            rec.set(s, heard);
        }
        rec
    }

    fn dynamical_state(&self, context: &Context, wing: usize) -> DynamicalState {
        self.inner.dynamical_state(context, wing)
    }

    fn context_dependencies(&self) -> Vec<(Event, Event)> {
        self.inner.context_dependencies()
    }
}
