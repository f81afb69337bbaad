//! Declarative descriptions of the four named experiments.
//!
//! A scenario is a list of *wings*. Each wing has one friend measuring a
//! system qubit inside a sealed lab, and one superobserver who either asks the
//! friend for the result or performs a supermeasurement on the whole lab.
//! Lawrence's experiment has a single friend (Alice) and a single
//! superobserver (Bob) but three wings, one per slot.

mod builders;
mod graph;
mod spec;

pub use builders::{build_bong, build_lawrence, build_ormrod_barrett, build_wigner_friend, MerminBasis};
pub use graph::{DependencyGraph, Event, Link};
pub use spec::{AmplitudeValue, HardySettings, ScenarioSpec, SpecError, StateSpec, StateValue};

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{apply_dilation, FriendDilation, PureState, QuantumError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("expected a {expected}-qubit state, got {got} qubits")]
    WrongStateSize { expected: usize, got: usize },
    #[error("party `{0}` is declared twice")]
    DuplicateParty(String),
    #[error("friend `{0}` must answer to exactly one superobserver")]
    Supervision(String),
    #[error("menu of `{0}` is empty")]
    EmptyMenu(String),
    #[error("menu of `{0}` lists {1} more than once")]
    DuplicateOption(String, &'static str),
    #[error("dependency graph has a cycle")]
    Cyclic,
    #[error("slice `{0}` contains causally related events")]
    SliceNotSpacelike(String),
    #[error("unknown slice `{0}`")]
    UnknownSlice(String),
    #[error("event {0:?} is not part of this scenario")]
    UnknownEvent(Event),
    #[error("unknown party `{0}`")]
    UnknownParty(String),
    #[error("{0}")]
    Quantum(#[from] QuantumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Wigner,
    Bong,
    Lawrence,
    OrmrodBarrett,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [
        ScenarioKind::Wigner,
        ScenarioKind::Bong,
        ScenarioKind::Lawrence,
        ScenarioKind::OrmrodBarrett,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            ScenarioKind::Wigner => "wigner",
            ScenarioKind::Bong => "bong",
            ScenarioKind::Lawrence => "lawrence",
            ScenarioKind::OrmrodBarrett => "ormrod-barrett",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.id() == id)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Friend,
    Superobserver,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Party {
    pub name: String,
    pub role: Role,
    /// Wing indices this party acts in.
    pub wings: Vec<usize>,
}

/// What a superobserver does in one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MenuOption {
    Ask,
    /// Supermeasurement at the given angle (system frame).
    Super(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptionKind {
    Ask,
    Super,
}

impl MenuOption {
    pub fn kind(&self) -> OptionKind {
        match self {
            MenuOption::Ask => OptionKind::Ask,
            MenuOption::Super(_) => OptionKind::Super,
        }
    }
}

impl fmt::Display for OptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptionKind::Ask => "ask",
            OptionKind::Super => "super",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceMenu {
    pub superobserver: String,
    pub options: Vec<MenuOption>,
}

impl ChoiceMenu {
    /// At most one `Ask` and one `Super` per menu; at least one option.
    pub fn new(superobserver: &str, options: Vec<MenuOption>) -> Result<Self, ScenarioError> {
        if options.is_empty() {
            return Err(ScenarioError::EmptyMenu(superobserver.to_string()));
        }
        for (kind, name) in [(OptionKind::Ask, "Ask"), (OptionKind::Super, "Super")] {
            if options.iter().filter(|o| o.kind() == kind).count() > 1 {
                return Err(ScenarioError::DuplicateOption(superobserver.to_string(), name));
            }
        }
        Ok(Self {
            superobserver: superobserver.to_string(),
            options,
        })
    }

    pub fn super_angle(&self) -> Option<f64> {
        self.options.iter().find_map(|o| match o {
            MenuOption::Super(a) => Some(*a),
            MenuOption::Ask => None,
        })
    }

    /// Keeps only options of the listed kinds, in the original order.
    pub fn restricted(&self, kinds: &[OptionKind]) -> Result<Self, ScenarioError> {
        let options = self
            .options
            .iter()
            .copied()
            .filter(|o| kinds.contains(&o.kind()))
            .collect();
        Self::new(&self.superobserver, options)
    }
}

/// One friend, one lab, one superobserver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wing {
    pub friend: String,
    /// Variable name of the friend's own result (e.g. `C`).
    pub friend_var: String,
    pub superobserver: String,
    /// Variable name of the supermeasurement result (e.g. `A`).
    pub super_var: String,
    pub dilation: FriendDilation,
    pub menu: ChoiceMenu,
}

impl Wing {
    /// Variable the superobserver learns under `option`.
    pub fn observed_var(&self, option: MenuOption) -> &str {
        match option {
            MenuOption::Ask => &self.friend_var,
            MenuOption::Super(_) => &self.super_var,
        }
    }
}

/// One option per wing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Context {
    pub index: usize,
    pub options: Vec<MenuOption>,
}

impl Context {
    pub fn kinds(&self) -> Vec<OptionKind> {
        self.options.iter().map(MenuOption::kind).collect()
    }

    /// Stable identifier such as `ask-super`.
    pub fn label(&self) -> String {
        self.kinds()
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("-")
    }
}

/// A named set of pairwise spacelike measurement events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub name: String,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    kind: ScenarioKind,
    initial: PureState,
    wings: Vec<Wing>,
    parties: Vec<Party>,
    final_observer: String,
    contexts: Vec<Context>,
    slices: Vec<Slice>,
    graph: DependencyGraph,
}

impl Scenario {
    /// Validates the party structure, builds the standard dependency graph
    /// and enumerates contexts as the product of the menus.
    pub(crate) fn assemble(
        kind: ScenarioKind,
        initial: PureState,
        wings: Vec<Wing>,
        final_observer: &str,
        slices: Vec<Slice>,
    ) -> Result<Self, ScenarioError> {
        let mut parties: Vec<Party> = Vec::new();
        let mut supervisor: Vec<(String, String)> = Vec::new();
        for (w, wing) in wings.iter().enumerate() {
            for (name, role) in [
                (&wing.friend, Role::Friend),
                (&wing.superobserver, Role::Superobserver),
            ] {
                match parties.iter_mut().find(|p| &p.name == name) {
                    Some(p) if p.role == role => p.wings.push(w),
                    Some(_) => return Err(ScenarioError::DuplicateParty(name.clone())),
                    None => parties.push(Party {
                        name: name.clone(),
                        role,
                        wings: vec![w],
                    }),
                }
            }
            match supervisor.iter().find(|(f, _)| f == &wing.friend) {
                Some((_, s)) if s != &wing.superobserver => {
                    return Err(ScenarioError::Supervision(wing.friend.clone()))
                }
                Some(_) => {}
                None => supervisor.push((wing.friend.clone(), wing.superobserver.clone())),
            }
        }
        if !parties.iter().any(|p| p.name == final_observer) {
            return Err(ScenarioError::UnknownParty(final_observer.to_string()));
        }

        let graph = DependencyGraph::standard(wings.len());
        let contexts = enumerate_contexts(&wings);
        let scenario = Self {
            kind,
            initial,
            wings,
            parties,
            final_observer: final_observer.to_string(),
            contexts,
            slices,
            graph,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if !self.graph.is_acyclic() {
            return Err(ScenarioError::Cyclic);
        }
        for slice in &self.slices {
            for (i, &a) in slice.events.iter().enumerate() {
                if !self.graph.contains(a) {
                    return Err(ScenarioError::UnknownEvent(a));
                }
                if slice.events[..i].iter().any(|&b| !self.graph.spacelike(a, b)) {
                    return Err(ScenarioError::SliceNotSpacelike(slice.name.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }

    /// State of the system qubits before any friend acts.
    pub fn initial_state(&self) -> &PureState {
        &self.initial
    }

    pub fn wings(&self) -> &[Wing] {
        &self.wings
    }

    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    pub fn party(&self, name: &str) -> Option<&Party> {
        self.parties.iter().find(|p| p.name == name)
    }

    /// The observer who collects the superobservers' records.
    pub fn final_observer(&self) -> &str {
        &self.final_observer
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn context(&self, index: usize) -> Option<&Context> {
        self.contexts.get(index)
    }

    pub fn context_by_kinds(&self, kinds: &[OptionKind]) -> Option<&Context> {
        self.contexts.iter().find(|c| c.kinds() == kinds)
    }

    pub fn context_by_label(&self, label: &str) -> Option<&Context> {
        self.contexts.iter().find(|c| c.label() == label)
    }

    pub fn slices(&self) -> &[Slice] {
        &self.slices
    }

    pub fn slice(&self, name: &str) -> Result<&Slice, ScenarioError> {
        self.slices
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| ScenarioError::UnknownSlice(name.to_string()))
    }

    pub fn graph(&self) -> &DependencyGraph {
        &self.graph
    }

    /// Systems followed by every memory in its ready state.
    pub fn lab_state(&self) -> PureState {
        self.wings.iter().fold(self.initial.clone(), |acc, w| {
            acc.tensor(&PureState::ready(&w.dilation.memory))
                .expect("memory labels are distinct from system labels")
        })
    }

    /// Lab state after every friend has measured unitarily.
    pub fn dilated_state(&self) -> PureState {
        self.wings.iter().fold(self.lab_state(), |acc, w| {
            apply_dilation(&acc, &w.dilation).expect("memories start ready")
        })
    }

    /// Party performing an event; the preparation has no performer.
    pub fn performer(&self, event: Event) -> Option<&str> {
        match event {
            Event::Preparation => None,
            Event::FriendMeasurement(w) => self.wings.get(w).map(|x| x.friend.as_str()),
            Event::Choice(w) | Event::SuperMeasurement(w) => {
                self.wings.get(w).map(|x| x.superobserver.as_str())
            }
            Event::Comparison => Some(&self.final_observer),
        }
    }

    /// Variable produced by an outcome event in `context`, if any.
    pub fn event_variable(&self, event: Event, context: &Context) -> Option<&str> {
        match event {
            Event::FriendMeasurement(w) => self.wings.get(w).map(|x| x.friend_var.as_str()),
            Event::SuperMeasurement(w) => {
                let wing = self.wings.get(w)?;
                Some(wing.observed_var(*context.options.get(w)?))
            }
            _ => None,
        }
    }

    /// Variables the final observer sees in `context`, in wing order.
    pub fn context_variables(&self, context: &Context) -> Vec<String> {
        self.wings
            .iter()
            .zip(&context.options)
            .map(|(w, &o)| w.observed_var(o).to_string())
            .collect()
    }

    /// Outcome variables whose records reach an event performed by
    /// `observer` in `context`.
    pub fn accessible_variables(&self, observer: &str, context: &Context) -> BTreeSet<String> {
        let performed: Vec<Event> = self
            .graph
            .events()
            .filter(|&e| self.performer(e) == Some(observer))
            .collect();
        let mut out = BTreeSet::new();
        for w in 0..self.wings.len() {
            for source in [Event::FriendMeasurement(w), Event::SuperMeasurement(w)] {
                if matches!(source, Event::SuperMeasurement(_))
                    && context.options[w] == MenuOption::Ask
                {
                    // asking reveals the friend's record, not a new outcome
                    continue;
                }
                if performed
                    .iter()
                    .any(|&t| self.graph.record_reaches(source, t, context))
                {
                    if let Some(v) = self.event_variable(source, context) {
                        out.insert(v.to_string());
                    }
                }
            }
        }
        out
    }

    /// Copy with each named superobserver's menu restricted to `kinds`.
    pub fn with_menus(&self, restrict: &[(&str, Vec<OptionKind>)]) -> Result<Self, ScenarioError> {
        let mut out = self.clone();
        for (name, kinds) in restrict {
            let mut found = false;
            for wing in out.wings.iter_mut().filter(|w| &w.superobserver == name) {
                wing.menu = wing.menu.restricted(kinds)?;
                found = true;
            }
            if !found {
                return Err(ScenarioError::UnknownParty(name.to_string()));
            }
        }
        out.contexts = enumerate_contexts(&out.wings);
        Ok(out)
    }

    /// Copy with one extra record edge. Used to build adversarial scenarios
    /// in which a setting depends on an outcome.
    pub fn with_leak(&self, from: Event, to: Event) -> Result<Self, ScenarioError> {
        let mut out = self.clone();
        for e in [from, to] {
            if !out.graph.contains(e) {
                return Err(ScenarioError::UnknownEvent(e));
            }
        }
        out.graph.add_edge(from, to, Link::Record);
        Ok(out)
    }
}

fn enumerate_contexts(wings: &[Wing]) -> Vec<Context> {
    let mut combos: Vec<Vec<MenuOption>> = vec![Vec::new()];
    for wing in wings {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                wing.menu.options.iter().map(move |&o| {
                    let mut next = prefix.clone();
                    next.push(o);
                    next
                })
            })
            .collect();
    }
    combos
        .into_iter()
        .enumerate()
        .map(|(index, options)| Context { index, options })
        .collect()
}
