use std::collections::{BTreeSet, HashMap};

use petgraph::algo::{has_path_connecting, is_cyclic_directed};
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::visit::{Dfs, EdgeFiltered, EdgeRef, Reversed};
use serde::{Deserialize, Serialize};

use super::{Context, MenuOption};

/// A node of the run's causal structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "event", content = "wing")]
pub enum Event {
    Preparation,
    FriendMeasurement(usize),
    Choice(usize),
    SuperMeasurement(usize),
    Comparison,
}

/// What an edge transports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "link", content = "wing")]
pub enum Link {
    /// A quantum system; carries no classical record.
    System,
    /// A setting from a choice node to the measurement it configures.
    Control,
    /// The sealed lab of a wing. It carries the friend's record only when the
    /// superobserver asks; a supermeasurement consumes the lab coherently.
    Lab(usize),
    /// A classical record.
    Record,
}

impl Link {
    fn carries_record(&self, context: &Context) -> bool {
        match self {
            Link::Record => true,
            Link::Lab(w) => matches!(context.options.get(*w), Some(MenuOption::Ask)),
            Link::System | Link::Control => false,
        }
    }
}

/// Directed acyclic graph over preparation, measurement, choice and
/// comparison events.
#[derive(Debug, Clone)]
pub struct DependencyGraph {
    graph: DiGraph<Event, Link>,
    nodes: HashMap<Event, NodeIndex>,
}

impl DependencyGraph {
    /// Preparation feeds every friend; each wing's lab and choice feed its
    /// superobserver; every superobserver result is reported to the comparison.
    pub fn standard(wings: usize) -> Self {
        let mut g = Self {
            graph: DiGraph::new(),
            nodes: HashMap::new(),
        };
        g.add_node(Event::Preparation);
        for w in 0..wings {
            g.add_node(Event::FriendMeasurement(w));
            g.add_node(Event::Choice(w));
            g.add_node(Event::SuperMeasurement(w));
        }
        g.add_node(Event::Comparison);
        for w in 0..wings {
            g.add_edge(Event::Preparation, Event::FriendMeasurement(w), Link::System);
            g.add_edge(Event::FriendMeasurement(w), Event::SuperMeasurement(w), Link::Lab(w));
            g.add_edge(Event::Choice(w), Event::SuperMeasurement(w), Link::Control);
            g.add_edge(Event::SuperMeasurement(w), Event::Comparison, Link::Record);
        }
        g
    }

    fn add_node(&mut self, e: Event) {
        let idx = self.graph.add_node(e);
        self.nodes.insert(e, idx);
    }

    /// Adds an edge between existing events; returns false for unknown events.
    pub fn add_edge(&mut self, from: Event, to: Event, link: Link) -> bool {
        match (self.nodes.get(&from), self.nodes.get(&to)) {
            (Some(&a), Some(&b)) => {
                self.graph.add_edge(a, b, link);
                true
            }
            _ => false,
        }
    }

    pub fn contains(&self, e: Event) -> bool {
        self.nodes.contains_key(&e)
    }

    pub fn is_acyclic(&self) -> bool {
        !is_cyclic_directed(&self.graph)
    }

    /// Whether a directed path leads from `a` to `b` (any edge kind).
    pub fn precedes(&self, a: Event, b: Event) -> bool {
        match (self.nodes.get(&a), self.nodes.get(&b)) {
            (Some(&x), Some(&y)) => x != y && has_path_connecting(&self.graph, x, y, None),
            _ => false,
        }
    }

    /// Neither event precedes the other.
    pub fn spacelike(&self, a: Event, b: Event) -> bool {
        a != b && !self.precedes(a, b) && !self.precedes(b, a)
    }

    /// Whether the classical outcome of `from` reaches `to` in `context`
    /// along record-carrying edges only. An event trivially carries its own
    /// outcome.
    pub fn record_reaches(&self, from: Event, to: Event, context: &Context) -> bool {
        let (Some(&x), Some(&y)) = (self.nodes.get(&from), self.nodes.get(&to)) else {
            return false;
        };
        if x == y {
            return true;
        }
        let filtered = EdgeFiltered::from_fn(&self.graph, |e| e.weight().carries_record(context));
        has_path_connecting(&filtered, x, y, None)
    }

    /// All events with a directed path into `e`.
    pub fn ancestors(&self, e: Event) -> BTreeSet<Event> {
        let mut out = BTreeSet::new();
        let Some(&start) = self.nodes.get(&e) else {
            return out;
        };
        let rev = Reversed(&self.graph);
        let mut dfs = Dfs::new(rev, start);
        while let Some(n) = dfs.next(rev) {
            if n != start {
                out.insert(self.graph[n]);
            }
        }
        out
    }

    pub fn events(&self) -> impl Iterator<Item = Event> + '_ {
        self.graph.node_weights().copied()
    }

    pub fn edges(&self) -> Vec<(Event, Event, Link)> {
        self.graph
            .edge_references()
            .map(|e| (self.graph[e.source()], self.graph[e.target()], *e.weight()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(options: Vec<MenuOption>) -> Context {
        Context { index: 0, options }
    }

    #[test]
    fn standard_graph_is_acyclic() {
        assert!(DependencyGraph::standard(3).is_acyclic());
    }

    #[test]
    fn ask_carries_the_friend_record() {
        let g = DependencyGraph::standard(2);
        let ask = ctx(vec![MenuOption::Ask, MenuOption::Super(0.0)]);
        assert!(g.record_reaches(Event::FriendMeasurement(0), Event::Comparison, &ask));
        assert!(!g.record_reaches(Event::FriendMeasurement(1), Event::Comparison, &ask));
        assert!(g.precedes(Event::FriendMeasurement(1), Event::Comparison));
    }

    #[test]
    fn wings_are_spacelike() {
        let g = DependencyGraph::standard(2);
        assert!(g.spacelike(Event::SuperMeasurement(0), Event::FriendMeasurement(1)));
        assert!(!g.spacelike(Event::FriendMeasurement(0), Event::SuperMeasurement(0)));
    }

    #[test]
    fn leak_edge_can_create_a_cycle() {
        let mut g = DependencyGraph::standard(1);
        assert!(g.add_edge(Event::Comparison, Event::Preparation, Link::Record));
        assert!(!g.is_acyclic());
    }

    #[test]
    fn ancestors_of_super_measurement() {
        let g = DependencyGraph::standard(2);
        let anc = g.ancestors(Event::SuperMeasurement(1));
        let expect: BTreeSet<_> = [
            Event::Preparation,
            Event::FriendMeasurement(1),
            Event::Choice(1),
        ]
        .into_iter()
        .collect();
        assert_eq!(anc, expect);
    }
}
