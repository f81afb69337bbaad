use serde::{Deserialize, Serialize};

use super::FeasibilityError;

/// Names of the six variables, in assignment order.
pub const PARITY_VARIABLES: [&str; 6] = ["A1", "A2", "A3", "B1", "B2", "B3"];

/// Trios whose products are constrained, as indices into
/// [`PARITY_VARIABLES`]: `B1B2B3, B1A2A3, A1B2A3, A1A2B3`.
pub const TRIOS: [[usize; 3]; 4] = [[3, 4, 5], [3, 1, 2], [0, 4, 2], [0, 1, 5]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_value(v: i8) -> Option<Self> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    /// Nearest sign of a real parity; fails unless `|x|` is within
    /// `tolerance` of 1.
    pub fn from_parity(x: f64, tolerance: f64) -> Result<Self, FeasibilityError> {
        if (x.abs() - 1.0).abs() > tolerance {
            return Err(FeasibilityError::NotDeterministic(x));
        }
        Ok(if x > 0.0 { Sign::Plus } else { Sign::Minus })
    }
}

/// All `(A1, A2, A3, B1, B2, B3) ∈ {±1}⁶` whose trio products equal
/// `parities`, in lexicographic order with `+1` first.
pub fn parity_assignment_search(parities: [Sign; 4]) -> Vec<[i8; 6]> {
    (0u8..64)
        .map(|bits| std::array::from_fn(|k| if bits >> (5 - k) & 1 == 1 { -1 } else { 1 }))
        .filter(|v: &[i8; 6]| {
            TRIOS
                .iter()
                .zip(&parities)
                .all(|(trio, p)| trio.iter().map(|&i| v[i]).product::<i8>() == p.value())
        })
        .collect()
}
