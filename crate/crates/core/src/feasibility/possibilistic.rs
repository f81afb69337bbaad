//! Support-level (possibilistic) reasoning over `A, B, C, D`.

use serde::{Deserialize, Serialize};

use super::FeasibilityError;
use crate::tolerance;
use crate::JointDistribution;

/// Cells of a pairwise table with probability above the zero threshold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Support {
    pub variables: [String; 2],
    /// Allowed `(x, y)` cells.
    pub cells: Vec<[i8; 2]>,
}

impl Support {
    pub fn from_distribution(d: &JointDistribution) -> Result<Self, FeasibilityError> {
        let vars = d.variables();
        if vars.len() != 2 {
            return Err(FeasibilityError::MissingTarget(vars.join("")));
        }
        let cells: Vec<[i8; 2]> = d
            .cells()
            .filter(|(_, p)| *p > tolerance::ZERO_SUPPORT)
            .map(|(l, _)| [l[0], l[1]])
            .collect();
        if cells.is_empty() {
            return Err(FeasibilityError::EmptySupport(vars.join("")));
        }
        Ok(Self {
            variables: [vars[0].clone(), vars[1].clone()],
            cells,
        })
    }

    pub fn full(x: &str, y: &str) -> Self {
        Self {
            variables: [x.into(), y.into()],
            cells: vec![[1, 1], [1, -1], [-1, 1], [-1, -1]],
        }
    }

    fn allows(&self, value_of: impl Fn(&str) -> Option<i8>) -> Result<bool, FeasibilityError> {
        let get = |v: &String| value_of(v).ok_or_else(|| FeasibilityError::MissingTarget(v.clone()));
        let cell = [get(&self.variables[0])?, get(&self.variables[1])?];
        Ok(self.cells.contains(&cell))
    }

    pub fn name(&self) -> String {
        format!("{}{}", self.variables[0], self.variables[1])
    }
}

/// Supports of the `CD`, `AD` and `CB` tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportTable {
    pub supports: Vec<Support>,
}

impl SupportTable {
    pub fn from_distributions(tables: &[JointDistribution]) -> Result<Self, FeasibilityError> {
        Ok(Self {
            supports: tables
                .iter()
                .map(Support::from_distribution)
                .collect::<Result<_, _>>()?,
        })
    }
}

/// For one completion `(c, d)` of a blocked `(a, b)`, the supports that
/// exclude it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub c: i8,
    pub d: i8,
    pub excluded_by: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockedCell {
    pub a: i8,
    pub b: i8,
    /// Quantum (target) probability of the cell.
    pub target_probability: f64,
    pub completions: Vec<Completion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PossibilisticResult {
    pub contradiction: bool,
    /// `(a, b)` cells reachable by some assignment consistent with every support.
    pub allowed_ab: Vec<[i8; 2]>,
    pub blocked: Vec<BlockedCell>,
}

const PM: [i8; 2] = [1, -1];

/// Enumerates assignments consistent with all supports and compares their
/// `(A, B)` projection against the support of `target`.
pub fn possibilistic_contradiction(
    supports: &SupportTable,
    target: &JointDistribution,
) -> Result<PossibilisticResult, FeasibilityError> {
    let ab = target.marginal(&["A", "B"])?;
    let mut allowed_ab = Vec::new();
    let mut blocked = Vec::new();
    for a in PM {
        for b in PM {
            let mut completions = Vec::new();
            let mut reachable = false;
            for c in PM {
                for d in PM {
                    let value_of = |v: &str| match v {
                        "A" => Some(a),
                        "B" => Some(b),
                        "C" => Some(c),
                        "D" => Some(d),
                        _ => None,
                    };
                    let mut excluded_by = Vec::new();
                    for s in &supports.supports {
                        if !s.allows(value_of)? {
                            excluded_by.push(s.name());
                        }
                    }
                    reachable |= excluded_by.is_empty();
                    completions.push(Completion { c, d, excluded_by });
                }
            }
            let p = ab.prob(&[a, b]);
            if reachable {
                allowed_ab.push([a, b]);
            } else if p > tolerance::ZERO_SUPPORT {
                blocked.push(BlockedCell {
                    a,
                    b,
                    target_probability: p,
                    completions,
                });
            }
        }
    }
    Ok(PossibilisticResult {
        contradiction: !blocked.is_empty(),
        allowed_ab,
        blocked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(x: &str, y: &str) -> JointDistribution {
        JointDistribution::new(vec![x.into(), y.into()], vec![0.25; 4]).unwrap()
    }

    #[test]
    fn full_supports_block_nothing() {
        let table = SupportTable {
            supports: vec![Support::full("C", "D"), Support::full("A", "D"), Support::full("C", "B")],
        };
        let r = possibilistic_contradiction(&table, &uniform("A", "B")).unwrap();
        assert!(!r.contradiction);
        assert_eq!(r.allowed_ab.len(), 4);
    }

    #[test]
    fn hardy_pattern_blocks_plus_plus() {
        let mut cd = Support::full("C", "D");
        cd.cells.retain(|c| c != &[1, 1]);
        let mut ad = Support::full("A", "D");
        ad.cells.retain(|c| c != &[1, -1]);
        let mut cb = Support::full("C", "B");
        cb.cells.retain(|c| c != &[-1, 1]);
        let table = SupportTable {
            supports: vec![cd, ad, cb],
        };
        let r = possibilistic_contradiction(&table, &uniform("A", "B")).unwrap();
        assert!(r.contradiction);
        assert_eq!(r.blocked.len(), 1);
        let cell = &r.blocked[0];
        assert_eq!((cell.a, cell.b), (1, 1));
        assert!(cell.completions.iter().all(|c| !c.excluded_by.is_empty()));
    }

    #[test]
    fn point_mass_has_a_single_cell_support() {
        let d = JointDistribution::new(vec!["C".into(), "D".into()], vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(Support::from_distribution(&d).unwrap().cells, vec![[1, 1]]);
    }
}
