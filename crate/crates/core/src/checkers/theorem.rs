use serde::{Deserialize, Serialize};

use super::{report_from, CheckError, CheckSettings, DisaccordType, Evaluation, FlagReport, Verdict};
use crate::feasibility::{
    joint_feasibility_lp, parity_assignment_search, possibilistic_contradiction, FeasibilityResult,
    LpVerdict, PairTargets, PossibilisticResult, Sign, SupportTable,
};
use crate::models::ExtensionModel;
use crate::predict::{chsh_value, correlators, mermin_parities, pair_tables, CorrelatorSet};
use crate::scenario::{Scenario, ScenarioKind};
use crate::tolerance;

/// What the unitary predictions alone say about a single context-free
/// assignment of every variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TheoremEvidence {
    Bong {
        correlators: CorrelatorSet,
        chsh: f64,
        feasibility: Box<FeasibilityResult>,
    },
    Lawrence {
        parities: [f64; 4],
        /// Assignments of `A1..A3, B1..B3` reproducing every parity.
        assignments: Vec<[i8; 6]>,
    },
    OrmrodBarrett {
        possibilistic: PossibilisticResult,
    },
    /// A single wing admits a joint trivially.
    None,
}

impl TheoremEvidence {
    pub fn for_scenario(s: &Scenario) -> Result<Self, CheckError> {
        Ok(match s.kind() {
            ScenarioKind::Bong => {
                let c = correlators(s)?;
                let feasibility = joint_feasibility_lp(&PairTargets::from_tables(&pair_tables(s)?)?)?;
                TheoremEvidence::Bong {
                    chsh: chsh_value(&c),
                    correlators: c,
                    feasibility: Box::new(feasibility),
                }
            }
            ScenarioKind::Lawrence => {
                let parities = mermin_parities(s)?;
                let mut signs = [Sign::Plus; 4];
                for (k, &p) in parities.iter().enumerate() {
                    signs[k] = Sign::from_parity(p, tolerance::COMPOSED)?;
                }
                TheoremEvidence::Lawrence {
                    parities,
                    assignments: parity_assignment_search(signs),
                }
            }
            ScenarioKind::OrmrodBarrett => {
                let [ab, ad, cb, cd] = pair_tables(s)?;
                let supports = SupportTable::from_distributions(&[cd, ad, cb])?;
                TheoremEvidence::OrmrodBarrett {
                    possibilistic: possibilistic_contradiction(&supports, &ab)?,
                }
            }
            ScenarioKind::Wigner => TheoremEvidence::None,
        })
    }

    /// Whether no context-free assignment reproduces the predictions.
    pub fn contradiction(&self) -> bool {
        match self {
            TheoremEvidence::Bong { feasibility, .. } => feasibility.verdict == LpVerdict::Infeasible,
            TheoremEvidence::Lawrence { assignments, .. } => assignments.is_empty(),
            TheoremEvidence::OrmrodBarrett { possibilistic } => possibilistic.contradiction,
            TheoremEvidence::None => false,
        }
    }
}

/// The flags a model can give up to evade a contradiction.
pub const THEOREM_FLAGS: [&str; 5] = [
    "aoe1",
    "aoe2",
    "first-person-universality",
    "locality",
    "no-superdeterminism",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub scenario: String,
    pub contradiction: bool,
    pub evidence: TheoremEvidence,
    pub rows: Vec<FlagReport>,
    /// Under a contradiction, models that uphold every assumption (no
    /// violated or Null-qualified flag and no slice-inference disaccord).
    pub upholds_everything: Vec<String>,
}

/// Whether a row keeps every assumption the theorem needs.
pub fn upholds_everything(row: &FlagReport) -> bool {
    let flagged = THEOREM_FLAGS.iter().any(|f| {
        matches!(
            row.verdict(f),
            Some(Verdict::Violated | Verdict::SatisfiedWithNulls)
        )
    });
    !flagged && !row.disaccord.types.contains(&DisaccordType::I)
}

/// The chain from the unitary predictions to the contradiction, with one
/// flag row per model. Each model must be bound to `s`.
pub fn theorem_report(
    s: &Scenario,
    models: &[&dyn ExtensionModel],
    settings: CheckSettings,
) -> Result<TheoremReport, CheckError> {
    let evidence = TheoremEvidence::for_scenario(s)?;
    let contradiction = evidence.contradiction();
    let rows = models
        .iter()
        .map(|m| report_from(&Evaluation::new(*m, settings)?))
        .collect::<Result<Vec<_>, _>>()?;
    let upholds = if contradiction {
        rows.iter()
            .filter(|r| upholds_everything(r))
            .map(|r| r.model.clone())
            .collect()
    } else {
        Vec::new()
    };
    Ok(TheoremReport {
        scenario: s.kind().id().to_string(),
        contradiction,
        evidence,
        rows,
        upholds_everything: upholds,
    })
}
