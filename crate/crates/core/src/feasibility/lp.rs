//! Joint distributions over deterministic assignments of `A, B, C, D`
//! reproducing four pairwise tables.

use serde::{Deserialize, Serialize};

use super::simplex::{is_farkas_certificate, phase_one, PhaseOne};
use super::{FeasibilityError, Rational};
use crate::distribution::cell_label;
use crate::JointDistribution;

/// Denominator used to rationalize floating-point targets.
pub const ROUNDING_DENOMINATOR: i64 = 1_000_000;

/// A-priori bound on how far a rationalized cell may move from its
/// floating-point target.
pub const ROUNDING_BOUND: f64 = 4e-6;

/// Variable order of a deterministic assignment.
pub const ASSIGNMENT_VARIABLES: [&str; 4] = ["A", "B", "C", "D"];

/// The four pairs, each as indices into [`ASSIGNMENT_VARIABLES`].
pub const PAIRS: [(usize, usize); 4] = [(0, 1), (0, 3), (2, 1), (2, 3)];

const CELLS: [[i8; 2]; 4] = [[1, 1], [1, -1], [-1, 1], [-1, -1]];

fn pair_name(p: (usize, usize)) -> String {
    format!("{}{}", ASSIGNMENT_VARIABLES[p.0], ASSIGNMENT_VARIABLES[p.1])
}

/// Pairwise tables for `AB, AD, CB, CD` in that order, each with variables
/// in that order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTargets {
    pub tables: [JointDistribution; 4],
}

impl PairTargets {
    /// Picks the four required pairs out of `tables` (any order, any
    /// variable order within a table).
    pub fn from_tables(tables: &[JointDistribution]) -> Result<Self, FeasibilityError> {
        let mut out: Vec<JointDistribution> = Vec::with_capacity(4);
        for p in PAIRS {
            let x = ASSIGNMENT_VARIABLES[p.0];
            let y = ASSIGNMENT_VARIABLES[p.1];
            let found = tables
                .iter()
                .find(|t| {
                    let v = t.variables();
                    v.len() == 2 && v.iter().any(|s| s == x) && v.iter().any(|s| s == y)
                })
                .ok_or_else(|| FeasibilityError::MissingTarget(pair_name(p)))?;
            out.push(found.marginal(&[x, y])?);
        }
        let tables: [JointDistribution; 4] = out.try_into().expect("four pairs");
        Ok(Self { tables })
    }

    /// Tables `(1 + x·y·E)/4` with uniform marginals.
    pub fn from_correlators(e: [f64; 4]) -> Result<Self, FeasibilityError> {
        let tables = PAIRS
            .iter()
            .zip(e)
            .map(|(&p, corr)| {
                let vars = [ASSIGNMENT_VARIABLES[p.0], ASSIGNMENT_VARIABLES[p.1]];
                JointDistribution::new(
                    vars.iter().map(|s| s.to_string()).collect(),
                    CELLS
                        .iter()
                        .map(|c| (1.0 + f64::from(c[0] * c[1]) * corr) / 4.0)
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            tables: tables.try_into().expect("four pairs"),
        })
    }

    /// `P(v = +1)` per variable, checking that both tables containing `v`
    /// agree within `tolerance`. Returns the averaged marginals.
    fn plus_marginals(&self, tolerance: f64) -> Result<[f64; 4], FeasibilityError> {
        let mut seen: [Vec<f64>; 4] = Default::default();
        for (t, &(x, y)) in self.tables.iter().zip(&PAIRS) {
            seen[x].push(t.prob(&[1, 1]) + t.prob(&[1, -1]));
            seen[y].push(t.prob(&[1, 1]) + t.prob(&[-1, 1]));
        }
        let mut out = [0.0; 4];
        for (v, values) in seen.iter().enumerate() {
            let dev = (values[0] - values[1]).abs();
            if dev > tolerance {
                return Err(FeasibilityError::MarginalMismatch {
                    variable: ASSIGNMENT_VARIABLES[v].to_string(),
                    deviation: dev,
                });
            }
            out[v] = (values[0] + values[1]) / 2.0;
        }
        Ok(out)
    }
}

/// Targets in exact arithmetic; cell order `++, +−, −+, −−` per pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTargets {
    pub pairs: Vec<String>,
    pub cells: [[Rational; 4]; 4],
}

impl RationalTargets {
    /// Rounds each `P(v = +1)` and each `P(x = +1, y = +1)` to the grid
    /// `1/ROUNDING_DENOMINATOR`, clamping the joint into the range that keeps
    /// every cell nonnegative. Shared marginals stay exactly shared.
    pub fn rationalize(targets: &PairTargets) -> Result<(Self, f64), FeasibilityError> {
        let marg = targets.plus_marginals(crate::tolerance::COMPOSED)?;
        let pm: Vec<Rational> = marg
            .iter()
            .map(|&p| {
                Rational::round_to(p, ROUNDING_DENOMINATOR).clamp_to(&Rational::zero(), &Rational::one())
            })
            .collect();
        let mut cells: Vec<[Rational; 4]> = Vec::with_capacity(4);
        let mut max_dev: f64 = 0.0;
        for (t, &(x, y)) in targets.tables.iter().zip(&PAIRS) {
            let (px, py) = (&pm[x], &pm[y]);
            let lo = std::cmp::max(Rational::zero(), &(px + py) - &Rational::one());
            let hi = std::cmp::min(px.clone(), py.clone());
            let pp = Rational::round_to(t.prob(&[1, 1]), ROUNDING_DENOMINATOR).clamp_to(&lo, &hi);
            let pm_ = px - &pp;
            let mp = py - &pp;
            let mm = &(&Rational::one() - px) - &mp;
            let row = [pp, pm_, mp, mm];
            for (c, r) in CELLS.iter().zip(&row) {
                max_dev = max_dev.max((t.prob(c) - r.to_f64()).abs());
            }
            cells.push(row);
        }
        Ok((
            Self {
                pairs: PAIRS.iter().map(|&p| pair_name(p)).collect(),
                cells: cells.try_into().expect("four pairs"),
            },
            max_dev,
        ))
    }

    /// Correlator `E = Σ x·y·p(x, y)` for pair `k`.
    pub fn correlator(&self, k: usize) -> Rational {
        CELLS
            .iter()
            .zip(&self.cells[k])
            .map(|(c, p)| &Rational::from_integer(i64::from(c[0] * c[1])) * p)
            .sum()
    }
}

/// One deterministic assignment `(a, b, c, d)` with its weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedAssignment {
    pub assignment: [i8; 4],
    pub weight: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    ProductOfMarginals,
    SimplexVertex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    /// Assignments with nonzero weight, in index order.
    pub support: Vec<WeightedAssignment>,
}

/// Multipliers `y` over the cell constraints (then normalization) with
/// `yᵀA ≤ 0` on every assignment and `yᵀb > 0` on the targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    pub rows: Vec<String>,
    pub multipliers: Vec<Rational>,
    /// `yᵀb`, strictly positive.
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCoefficient {
    pub pair: String,
    pub cell: [i8; 2],
    pub coefficient: Rational,
}

/// `Σ coefficient · p(cell) ≤ bound` for every classical model, evaluated
/// on the targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshCertificate {
    /// Sign of each pair's correlator, order `AB, AD, CB, CD`.
    pub signs: [i8; 4],
    pub coefficients: Vec<CellCoefficient>,
    pub bound: Rational,
    pub achieved: Rational,
    pub violation: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpVerdict {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityResult {
    pub verdict: LpVerdict,
    pub targets: RationalTargets,
    pub rounding_bound: f64,
    pub max_rounding_error: f64,
    pub witness: Option<Witness>,
    pub farkas: Option<FarkasCertificate>,
    pub chsh: Option<ChshCertificate>,
}

fn constraint_system(t: &RationalTargets) -> (Vec<Vec<Rational>>, Vec<Rational>, Vec<String>) {
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut rows = Vec::new();
    for (k, &(x, y)) in PAIRS.iter().enumerate() {
        for (ci, cell) in CELLS.iter().enumerate() {
            a.push(
                (0..16)
                    .map(|i| {
                        let v = cell_label(i, 4);
                        if v[x] == cell[0] && v[y] == cell[1] {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect(),
            );
            b.push(t.cells[k][ci].clone());
            rows.push(format!("{}({:+},{:+})", t.pairs[k], cell[0], cell[1]));
        }
    }
    a.push(vec![Rational::one(); 16]);
    b.push(Rational::one());
    rows.push("normalization".into());
    (a, b, rows)
}

fn reproduces(t: &RationalTargets, weights: &[Rational]) -> bool {
    let (a, b, _) = constraint_system(t);
    weights.iter().all(|w| !w.is_negative())
        && a.iter().zip(&b).all(|(row, bi)| {
            let s: Rational = row.iter().zip(weights).map(|(p, q)| p * q).sum();
            &s == bi
        })
}

fn product_witness(t: &RationalTargets) -> Vec<Rational> {
    // P(v = +1) from the first table containing v.
    let plus = [
        t.cells[0][0].clone() + t.cells[0][1].clone(),
        t.cells[0][0].clone() + t.cells[0][2].clone(),
        t.cells[2][0].clone() + t.cells[2][1].clone(),
        t.cells[1][0].clone() + t.cells[1][2].clone(),
    ];
    (0..16)
        .map(|i| {
            cell_label(i, 4)
                .iter()
                .zip(&plus)
                .map(|(&v, p)| if v > 0 { p.clone() } else { &Rational::one() - p })
                .fold(Rational::one(), |acc, f| acc * f)
        })
        .collect()
}

/// The CHSH form with the largest value on the targets. All eight odd sign
/// patterns are tried; the bound is checked on the 16 assignments.
pub fn best_chsh(t: &RationalTargets) -> ChshCertificate {
    let corr: Vec<Rational> = (0..4).map(|k| t.correlator(k)).collect();
    let mut best: Option<ChshCertificate> = None;
    for mask in 0u8..16 {
        let signs: [i8; 4] = std::array::from_fn(|k| if mask >> (3 - k) & 1 == 1 { -1 } else { 1 });
        if signs.iter().filter(|&&s| s < 0).count() % 2 == 0 {
            continue;
        }
        let achieved: Rational = signs
            .iter()
            .zip(&corr)
            .map(|(&s, e)| &Rational::from_integer(i64::from(s)) * e)
            .sum();
        let bound = (0..16)
            .map(|i| {
                let v = cell_label(i, 4);
                signs
                    .iter()
                    .zip(&PAIRS)
                    .map(|(&s, &(x, y))| i64::from(s * v[x] * v[y]))
                    .sum::<i64>()
            })
            .max()
            .expect("sixteen assignments");
        let coefficients = PAIRS
            .iter()
            .zip(&signs)
            .flat_map(|(&p, &s)| {
                CELLS.iter().map(move |c| CellCoefficient {
                    pair: pair_name(p),
                    cell: *c,
                    coefficient: Rational::from_integer(i64::from(s * c[0] * c[1])),
                })
            })
            .collect();
        let bound = Rational::from_integer(bound);
        let cand = ChshCertificate {
            signs,
            coefficients,
            violation: &achieved - &bound,
            bound,
            achieved,
        };
        if best.as_ref().is_none_or(|b| cand.achieved > b.achieved) {
            best = Some(cand);
        }
    }
    best.expect("eight sign patterns")
}

/// Decides whether a classical joint distribution over `(A, B, C, D)`
/// reproduces the rationalized targets, with a witness or certificates.
pub fn joint_feasibility_lp(targets: &PairTargets) -> Result<FeasibilityResult, FeasibilityError> {
    let (rt, max_dev) = RationalTargets::rationalize(targets)?;
    let (a, b, rows) = constraint_system(&rt);
    let mut result = FeasibilityResult {
        verdict: LpVerdict::Feasible,
        targets: rt.clone(),
        rounding_bound: ROUNDING_BOUND,
        max_rounding_error: max_dev,
        witness: None,
        farkas: None,
        chsh: None,
    };
    match phase_one(&a, &b) {
        PhaseOne::Feasible(x) => {
            let product = product_witness(&rt);
            let (kind, weights) = if reproduces(&rt, &product) {
                (WitnessKind::ProductOfMarginals, product)
            } else {
                (WitnessKind::SimplexVertex, x)
            };
            if !reproduces(&rt, &weights) {
                return Err(FeasibilityError::CertificateInvalid("witness".into()));
            }
            let support = weights
                .into_iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .map(|(i, weight)| WeightedAssignment {
                    assignment: cell_label(i, 4).try_into().expect("four variables"),
                    weight,
                })
                .collect();
            result.witness = Some(Witness { kind, support });
        }
        PhaseOne::Infeasible(y) => {
            if !is_farkas_certificate(&a, &b, &y) {
                return Err(FeasibilityError::CertificateInvalid("farkas".into()));
            }
            let value = b.iter().zip(&y).map(|(bi, yi)| bi * yi).sum();
            let chsh = best_chsh(&rt);
            if !chsh.violation.is_positive() {
                return Err(FeasibilityError::NoChshViolation(chsh.achieved.to_f64()));
            }
            result.verdict = LpVerdict::Infeasible;
            result.farkas = Some(FarkasCertificate {
                rows,
                multipliers: y,
                value,
            });
            result.chsh = Some(chsh);
        }
    }
    Ok(result)
}
