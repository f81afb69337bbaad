//! Frequentist tests used by the statistical checker paths.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Family-wise significance level of every statistical verdict.
pub const SIGNIFICANCE: f64 = 1e-6;

/// Per-cell sigma multiplier floor for frequency-versus-probability checks.
pub const MIN_SIGMA: f64 = 3.0;

/// Slack added to every per-cell frequency bound.
pub const CELL_SLACK: f64 = 1e-6;

/// Two-sided normal critical value for `cells` simultaneous comparisons at
/// family-wise level `alpha` (Bonferroni), never below [`MIN_SIGMA`].
pub fn cell_sigma(alpha: f64, cells: usize) -> f64 {
    let per_cell = alpha / (2.0 * cells.max(1) as f64);
    let normal = Normal::standard();
    normal.inverse_cdf(1.0 - per_cell).max(MIN_SIGMA)
}

/// Largest acceptable `|frequency - p|` for one cell.
pub fn cell_bound(p: f64, n: usize, sigma: f64) -> f64 {
    sigma * (p * (1.0 - p) / n as f64).sqrt() + CELL_SLACK
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl ChiSquareTest {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Pearson test that every row of `counts` (one row per population, one
/// column per category) comes from the same distribution. Categories never
/// observed are dropped.
pub fn chi_square_homogeneity(counts: &[Vec<u64>]) -> ChiSquareTest {
    let width = counts.iter().map(Vec::len).max().unwrap_or(0);
    let rows: Vec<f64> = counts.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let cols: Vec<f64> = (0..width)
        .map(|c| counts.iter().map(|r| r.get(c).copied().unwrap_or(0)).sum::<u64>() as f64)
        .collect();
    let total: f64 = rows.iter().sum();
    let live_rows = rows.iter().filter(|&&r| r > 0.0).count();
    let live_cols = cols.iter().filter(|&&c| c > 0.0).count();
    let dof = live_rows.saturating_sub(1) * live_cols.saturating_sub(1);
    if dof == 0 {
        return ChiSquareTest {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
        };
    }
    let mut statistic = 0.0;
    for (r, row) in counts.iter().enumerate() {
        if rows[r] == 0.0 {
            continue;
        }
        for (c, &col) in cols.iter().enumerate() {
            if col == 0.0 {
                continue;
            }
            let expected = rows[r] * col / total;
            let observed = row.get(c).copied().unwrap_or(0) as f64;
            statistic += (observed - expected).powi(2) / expected;
        }
    }
    let chi = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    ChiSquareTest {
        statistic,
        dof,
        p_value: chi.sf(statistic),
    }
}
