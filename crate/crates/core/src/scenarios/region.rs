//! The rate-region inequalities `sum_{i in V} n_i >= C(x_V | x_rest)`.

use serde::{Deserialize, Serialize};

use crate::oracle::{ComplexityProfile, Subset};
use crate::protocol::RateVector;

const ENTROPY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionCheck {
    pub passed: bool,
    /// Every subset whose inequality fails, in profile order.
    pub violated: Vec<Subset>,
}

impl RegionCheck {
    fn from_violations(violated: Vec<Subset>) -> Self {
        RegionCheck {
            passed: violated.is_empty(),
            violated,
        }
    }
}

/// Checks all seven inequalities against an oracle profile, each with `margin` extra bits required.
pub fn validate_rate_region_with_margin(rates: &RateVector, profile: &ComplexityProfile, margin: i64) -> RegionCheck {
    RegionCheck::from_violations(
        Subset::ORDER
            .into_iter()
            .filter(|&v| (rates.sum(v) as i64) < profile.region_bound(v) + margin)
            .collect(),
    )
}

pub fn validate_rate_region(rates: &RateVector, profile: &ComplexityProfile) -> RegionCheck {
    validate_rate_region_with_margin(rates, profile, 0)
}

/// Checks the inequalities against joint entropies given in profile order.
pub fn validate_rate_region_entropy(rates: &RateVector, entropies: &[f64; 7]) -> RegionCheck {
    let joint = |mask: u8| Subset::new(mask).map_or(0.0, |s| entropies[s.position()]);
    RegionCheck::from_violations(
        Subset::ORDER
            .into_iter()
            .filter(|&v| {
                let rest = v.complement().map_or(0, Subset::mask);
                let bound = joint(Subset::ABC.mask()) - joint(rest);
                (rates.sum(v) as f64) < bound - ENTROPY_TOLERANCE
            })
            .collect(),
    )
}
