use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;

use super::{sample_table, Capabilities, DynamicalState, ExtensionModel, ModelError, RecordDistribution};
use crate::distribution::{cell_index, cell_label};
use crate::feasibility::{joint_feasibility_lp, PairTargets, ASSIGNMENT_VARIABLES, PAIRS};
use crate::predict::pair_tables;
use crate::quantum::{born_distribution, effective_wing_observable, ProjectiveMeasurement};
use crate::record::{Outcome, OutcomeRecord};
use crate::scenario::{Context, Event, MenuOption, Scenario, ScenarioKind};
use crate::JointDistribution;

/// How the fixed joint over all variables is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum NaiveStrategy {
    /// For the two-wing scenarios: the LP witness when the quantum pair
    /// tables admit one, otherwise the uniform mixture of the assignments
    /// saturating the most violated CHSH form. Elsewhere the product of
    /// quantum marginals.
    ClassicalOptimal,
    Uniform,
    /// Every variable independent with its quantum single-variable marginal.
    ProductOfMarginals,
    /// A caller-supplied table over all friend and superobserver variables.
    Explicit(JointDistribution),
}

impl NaiveStrategy {
    pub fn from_params(params: &BTreeMap<String, serde_json::Value>) -> Result<Self, ModelError> {
        let err = |message: String| ModelError::Parameter {
            model: "naive-absolute".into(),
            message,
        };
        for k in params.keys() {
            if !["strategy", "variables", "probabilities"].contains(&k.as_str()) {
                return Err(err(format!("unknown parameter `{k}`")));
            }
        }
        let name = match params.get("strategy") {
            None => "classical-optimal",
            Some(v) => v.as_str().ok_or_else(|| err("`strategy` must be a string".into()))?,
        };
        let explicit_keys = params.contains_key("variables") || params.contains_key("probabilities");
        if explicit_keys && name != "explicit" {
            return Err(err("`variables`/`probabilities` need strategy = \"explicit\"".into()));
        }
        Ok(match name {
            "classical-optimal" => NaiveStrategy::ClassicalOptimal,
            "uniform" => NaiveStrategy::Uniform,
            "product-of-marginals" => NaiveStrategy::ProductOfMarginals,
            "explicit" => {
                let variables: Vec<String> = params
                    .get("variables")
                    .and_then(|v| serde_json::from_value(v.clone()).ok())
                    .ok_or_else(|| err("explicit strategy needs `variables` (list of names)".into()))?;
                let probabilities: Vec<f64> = params
                    .get("probabilities")
                    .and_then(|v| serde_json::from_value(v.clone()).ok())
                    .ok_or_else(|| err("explicit strategy needs `probabilities` (list of numbers)".into()))?;
                NaiveStrategy::Explicit(
                    JointDistribution::new(variables, probabilities).map_err(|e| err(e.to_string()))?,
                )
            }
            other => return Err(err(format!("unknown strategy `{other}`"))),
        })
    }
}

/// Every variable of the scenario has a value fixed before any choice is
/// made, drawn from one context-independent joint. Asking returns the
/// friend's value; a supermeasurement reveals the superobserver's value.
#[derive(Debug, Clone)]
pub struct NaiveAbsolute {
    scenario: Scenario,
    /// Over friend variables (wing order) then superobserver variables.
    table: JointDistribution,
}

fn variables(s: &Scenario) -> Vec<String> {
    let mut v: Vec<String> = s.wings().iter().map(|w| w.friend_var.clone()).collect();
    v.extend(s.wings().iter().map(|w| w.super_var.clone()));
    v
}

fn product_of_marginals(s: &Scenario) -> Result<JointDistribution, ModelError> {
    let mut plus = Vec::new();
    for w in s.wings() {
        let d = born_distribution(s.initial_state(), &w.dilation.direct(&w.friend_var))?;
        plus.push(d.prob(&[1]));
    }
    for w in s.wings() {
        plus.push(match w.menu.super_angle() {
            Some(angle) => {
                let obs = effective_wing_observable(&w.dilation, angle)?;
                let m = ProjectiveMeasurement::observable(&w.dilation.system, &w.super_var, obs);
                born_distribution(s.initial_state(), &m)?.prob(&[1])
            }
            None => 0.5,
        });
    }
    let names = variables(s);
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    Ok(JointDistribution::from_fn(&names, |label| {
        label
            .iter()
            .zip(&plus)
            .map(|(&v, &p)| if v > 0 { p } else { 1.0 - p })
            .product()
    }))
}

/// Table over `(C, D, A, B)` from weights over `(A, B, C, D)` assignments.
fn from_abcd(weights: impl Fn(&[i8]) -> f64) -> JointDistribution {
    JointDistribution::from_fn(&["C", "D", "A", "B"], |cdab| {
        weights(&[cdab[2], cdab[3], cdab[0], cdab[1]])
    })
}

fn classical_optimal(s: &Scenario) -> Result<JointDistribution, ModelError> {
    let targets = PairTargets::from_tables(&pair_tables(s)?)?;
    let result = joint_feasibility_lp(&targets)?;
    if let Some(w) = &result.witness {
        let mut weights = [0.0; 16];
        for a in &w.support {
            weights[cell_index(&a.assignment)] = a.weight.to_f64();
        }
        return Ok(from_abcd(|v| weights[cell_index(v)]));
    }
    let chsh = result.chsh.expect("infeasible results carry a CHSH form");
    let value = |v: &[i8]| -> i64 {
        chsh.signs
            .iter()
            .zip(&PAIRS)
            .map(|(&s, &(x, y))| i64::from(s * v[x] * v[y]))
            .sum()
    };
    let bound = (0..16).map(|i| value(&cell_label(i, 4))).max().unwrap_or(0);
    let saturating: Vec<usize> = (0..16).filter(|&i| value(&cell_label(i, 4)) == bound).collect();
    debug_assert_eq!(ASSIGNMENT_VARIABLES, ["A", "B", "C", "D"]);
    let w = 1.0 / saturating.len() as f64;
    Ok(from_abcd(|v| if saturating.contains(&cell_index(v)) { w } else { 0.0 }))
}

impl NaiveAbsolute {
    pub fn new(s: &Scenario, strategy: NaiveStrategy) -> Result<Self, ModelError> {
        let names = variables(s);
        let names_ref: Vec<&str> = names.iter().map(String::as_str).collect();
        let table = match strategy {
            NaiveStrategy::Uniform => {
                let cells = 1usize << names.len();
                JointDistribution::from_fn(&names_ref, |_| 1.0 / cells as f64)
            }
            NaiveStrategy::ProductOfMarginals => product_of_marginals(s)?,
            NaiveStrategy::ClassicalOptimal => match s.kind() {
                ScenarioKind::Bong | ScenarioKind::OrmrodBarrett => classical_optimal(s)?,
                _ => product_of_marginals(s)?,
            },
            NaiveStrategy::Explicit(t) => {
                let mut have: Vec<&String> = t.variables().iter().collect();
                let mut want: Vec<&String> = names.iter().collect();
                have.sort();
                want.sort();
                if have != want {
                    return Err(ModelError::Parameter {
                        model: "naive-absolute".into(),
                        message: format!("explicit table must cover exactly {names:?}"),
                    });
                }
                t.marginal(&names_ref)?
            }
        };
        Ok(Self {
            scenario: s.clone(),
            table,
        })
    }

    pub fn table(&self) -> &JointDistribution {
        &self.table
    }

    fn record(context: &Context, values: &[i8]) -> Vec<Outcome> {
        let n = context.options.len();
        let mut rec: Vec<Outcome> = values[..n].iter().map(|&v| Outcome::from_sign(v)).collect();
        for (w, o) in context.options.iter().enumerate() {
            rec.push(Outcome::from_sign(match o {
                MenuOption::Ask => values[w],
                MenuOption::Super(_) => values[n + w],
            }));
        }
        rec
    }
}

impl ExtensionModel for NaiveAbsolute {
    fn name(&self) -> &str {
        "naive-absolute"
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
        for (v, p) in self.table.cells() {
            *map.entry(Self::record(context, &v)).or_insert(0.0) += p;
        }
        Some(RecordDistribution::from_map(self.layout(context), map))
    }

    fn sample(&self, context: &Context, rng: &mut ChaCha8Rng) -> OutcomeRecord {
        OutcomeRecord::from_outcomes(Self::record(context, &sample_table(&self.table, rng)))
    }

    fn dynamical_state(&self, _context: &Context, _wing: usize) -> DynamicalState {
        DynamicalState::Classical
    }

    fn context_dependencies(&self) -> Vec<(Event, Event)> {
        (0..self.scenario.wings().len())
            .map(|w| (Event::SuperMeasurement(w), Event::Choice(w)))
            .collect()
    }
}
