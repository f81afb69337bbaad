//! Probability tables over labeled `±1` variables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tolerance;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistributionError {
    #[error("table has {len} cells, expected 2^{vars}")]
    Shape { len: usize, vars: usize },
    #[error("variable `{0}` appears more than once")]
    DuplicateVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("negative probability {0:e}")]
    Negative(f64),
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("variable sets differ: {0:?} vs {1:?}")]
    VariableMismatch(Vec<String>, Vec<String>),
}

/// Index of a `±1` tuple: the first entry is the most significant bit and
/// `-1` sets the bit.
pub fn cell_index(label: &[i8]) -> usize {
    label
        .iter()
        .fold(0usize, |acc, &v| (acc << 1) | usize::from(v < 0))
}

/// Inverse of [`cell_index`] for `n` variables.
pub fn cell_label(index: usize, n: usize) -> Vec<i8> {
    (0..n)
        .map(|j| if (index >> (n - 1 - j)) & 1 == 1 { -1 } else { 1 })
        .collect()
}

/// Joint distribution of `±1`-valued variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    variables: Vec<String>,
    probabilities: Vec<f64>,
}

impl JointDistribution {
    pub fn new(variables: Vec<String>, probabilities: Vec<f64>) -> Result<Self, DistributionError> {
        if variables.len() >= usize::BITS as usize || probabilities.len() != 1 << variables.len() {
            return Err(DistributionError::Shape {
                len: probabilities.len(),
                vars: variables.len(),
            });
        }
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].contains(v) {
                return Err(DistributionError::DuplicateVariable(v.clone()));
            }
        }
        if let Some(&p) = probabilities
            .iter()
            .find(|&&p| p.is_nan() || p < -tolerance::ALGEBRAIC)
        {
            return Err(DistributionError::Negative(p));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > tolerance::ALGEBRAIC {
            return Err(DistributionError::NotNormalized(total));
        }
        Ok(Self {
            variables,
            probabilities,
        })
    }

    pub(crate) fn from_parts(variables: Vec<String>, probabilities: Vec<f64>) -> Self {
        debug_assert_eq!(probabilities.len(), 1 << variables.len());
        Self {
            variables,
            probabilities,
        }
    }

    /// Builds a table by evaluating `f` on every `±1` tuple.
    pub fn from_fn(variables: &[&str], f: impl Fn(&[i8]) -> f64) -> Self {
        let n = variables.len();
        let probabilities = (0..1usize << n).map(|i| f(&cell_label(i, n))).collect();
        Self::from_parts(variables.iter().map(|s| s.to_string()).collect(), probabilities)
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn prob(&self, outcome: &[i8]) -> f64 {
        self.probabilities[cell_index(outcome)]
    }

    pub fn cells(&self) -> impl Iterator<Item = (Vec<i8>, f64)> + '_ {
        let n = self.variables.len();
        self.probabilities
            .iter()
            .enumerate()
            .map(move |(i, &p)| (cell_label(i, n), p))
    }

    fn index_of(&self, var: &str) -> Result<usize, DistributionError> {
        self.variables
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| DistributionError::UnknownVariable(var.to_string()))
    }

    /// Sums out every variable not listed; the result follows `keep`'s order.
    pub fn marginal(&self, keep: &[&str]) -> Result<Self, DistributionError> {
        let idx: Vec<usize> = keep
            .iter()
            .map(|v| self.index_of(v))
            .collect::<Result<_, _>>()?;
        for (i, v) in keep.iter().enumerate() {
            if keep[..i].contains(v) {
                return Err(DistributionError::DuplicateVariable(v.to_string()));
            }
        }
        let mut out = vec![0.0; 1 << keep.len()];
        for (label, p) in self.cells() {
            let sub: Vec<i8> = idx.iter().map(|&j| label[j]).collect();
            out[cell_index(&sub)] += p;
        }
        Ok(Self::from_parts(
            keep.iter().map(|s| s.to_string()).collect(),
            out,
        ))
    }

    /// Expectation of the product of the listed variables.
    pub fn correlator(&self, vars: &[&str]) -> Result<f64, DistributionError> {
        let idx: Vec<usize> = vars
            .iter()
            .map(|v| self.index_of(v))
            .collect::<Result<_, _>>()?;
        Ok(self
            .cells()
            .map(|(label, p)| {
                let sign: i32 = idx.iter().map(|&j| i32::from(label[j])).product();
                f64::from(sign) * p
            })
            .sum())
    }

    /// Largest cell difference after aligning variable order.
    pub fn max_abs_diff(&self, other: &JointDistribution) -> Result<f64, DistributionError> {
        let mut a = self.variables.clone();
        let mut b = other.variables.clone();
        a.sort();
        b.sort();
        if a != b {
            return Err(DistributionError::VariableMismatch(
                self.variables.clone(),
                other.variables.clone(),
            ));
        }
        let order: Vec<&str> = self.variables.iter().map(String::as_str).collect();
        let aligned = other.marginal(&order)?;
        Ok(self
            .probabilities
            .iter()
            .zip(&aligned.probabilities)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max))
    }

    /// Independent product; variable sets must be disjoint.
    pub fn product(&self, other: &JointDistribution) -> Result<Self, DistributionError> {
        if let Some(v) = other.variables.iter().find(|v| self.variables.contains(v)) {
            return Err(DistributionError::DuplicateVariable(v.clone()));
        }
        let mut variables = self.variables.clone();
        variables.extend(other.variables.iter().cloned());
        let mut probabilities = Vec::with_capacity(self.probabilities.len() * other.probabilities.len());
        for p in &self.probabilities {
            for q in &other.probabilities {
                probabilities.push(p * q);
            }
        }
        Ok(Self::from_parts(variables, probabilities))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(vars: &[&str], probs: &[f64]) -> JointDistribution {
        JointDistribution::new(vars.iter().map(|s| s.to_string()).collect(), probs.to_vec()).unwrap()
    }

    #[test]
    fn index_round_trip() {
        assert_eq!(cell_index(&[1, 1]), 0);
        assert_eq!(cell_index(&[1, -1]), 1);
        assert_eq!(cell_index(&[-1, 1]), 2);
        assert_eq!(cell_label(2, 2), vec![-1, 1]);
    }

    #[test]
    fn marginal_and_correlator() {
        let d = table(&["A", "B"], &[0.4, 0.1, 0.2, 0.3]);
        let a = d.marginal(&["A"]).unwrap();
        assert!((a.prob(&[1]) - 0.5).abs() < 1e-15);
        assert!((d.correlator(&["A", "B"]).unwrap() - 0.4).abs() < 1e-15);
        let swapped = d.marginal(&["B", "A"]).unwrap();
        assert_eq!(swapped.prob(&[-1, 1]), 0.1);
        assert_eq!(d.max_abs_diff(&swapped).unwrap(), 0.0);
    }

    #[test]
    fn validation() {
        assert!(matches!(
            JointDistribution::new(vec!["A".into()], vec![0.5, 0.6]),
            Err(DistributionError::NotNormalized(_))
        ));
        assert!(matches!(
            JointDistribution::new(vec!["A".into()], vec![1.5, -0.5]),
            Err(DistributionError::Negative(_))
        ));
        assert!(matches!(
            JointDistribution::new(vec!["A".into(), "A".into()], vec![0.25; 4]),
            Err(DistributionError::DuplicateVariable(_))
        ));
        assert!(matches!(
            table(&["A"], &[0.5, 0.5]).marginal(&["Q"]),
            Err(DistributionError::UnknownVariable(_))
        ));
    }

    proptest! {
        #[test]
        fn marginalization_preserves_mass(raw in proptest::collection::vec(0.0f64..1.0, 8)) {
            let total: f64 = raw.iter().sum::<f64>() + 1e-3;
            let probs: Vec<f64> = raw.iter().map(|p| (p + 1e-3 / 8.0) / total).collect();
            let d = table(&["A", "B", "C"], &probs);
            for keep in [vec!["A"], vec!["C", "A"], vec!["B", "C"]] {
                let m = d.marginal(&keep).unwrap();
                prop_assert!((m.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
