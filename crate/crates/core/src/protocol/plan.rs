//! Stage bounds for every decoding branch.
//!
//! Branches are indexed `0..18`. For each ordering `(i, j, l)` of the senders
//! (in the order ABC, ACB, BAC, BCA, CAB, CBA) there is
//!
//! * a chain branch (`0..6`) recovering `i`, then `j` given `i`, then `l` given both;
//! * a relay branch (`6..12`) recovering `j` from `p_i`, then `i` given `j`, then `l`;
//! * a pair branch (`12..18`) recovering `l` from `p_i, p_j`, then `j` from `p_i`
//!   and `l`, then `i` given `j, l`.

use serde::{Deserialize, Serialize};

use super::RateVector;
use crate::error::{Error, Result};
use crate::oracle::{ComplexityProfile, Sender, Subset};
use crate::scenarios::region::validate_rate_region_with_margin;

pub const BRANCH_COUNT: usize = 18;

const ORDERS: [[Sender; 3]; 6] = [
    [Sender::A, Sender::B, Sender::C],
    [Sender::A, Sender::C, Sender::B],
    [Sender::B, Sender::A, Sender::C],
    [Sender::B, Sender::C, Sender::A],
    [Sender::C, Sender::A, Sender::B],
    [Sender::C, Sender::B, Sender::A],
];

/// What a stage is allowed to condition on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Given {
    /// A string recovered by an earlier stage.
    Source(Sender),
    /// A received payload.
    Payload(Sender),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StagePlan {
    pub target: Sender,
    pub given: Vec<Given>,
    pub bound: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BranchKind {
    Chain { order: [Sender; 3] },
    Relay { order: [Sender; 3] },
    Pair { order: [Sender; 3] },
}

impl BranchKind {
    pub fn from_index(index: usize) -> Option<BranchKind> {
        let order = *ORDERS.get(index % 6)?;
        match index / 6 {
            0 => Some(BranchKind::Chain { order }),
            1 => Some(BranchKind::Relay { order }),
            2 => Some(BranchKind::Pair { order }),
            _ => None,
        }
    }

    /// Unclamped stage bounds from profile and rates.
    pub fn raw_bounds(&self, p: &ComplexityProfile, rates: &RateVector, slack: u32) -> [i64; 3] {
        let c = |ss: &[Sender]| p.joint(ss.iter().fold(0, |m, s| m | s.bit())) as i64;
        let n = |s: Sender| rates.get(s) as i64;
        let all = p.get(Subset::ABC) as i64;
        let sl = slack as i64;
        match *self {
            BranchKind::Chain { order: [i, j, _] } => [c(&[i]), c(&[i, j]) - c(&[i]) + sl, all - c(&[i, j]) + sl],
            BranchKind::Relay { order: [i, j, _] } => {
                [c(&[i, j]) - n(i) + sl, c(&[i, j]) - c(&[j]) + sl, all - c(&[i, j]) + sl]
            }
            BranchKind::Pair { order: [i, j, l] } => [
                all - n(i) - n(j) + sl,
                all - c(&[l]) - n(i) + sl,
                all - c(&[j, l]) + sl,
            ],
        }
    }

    pub fn bounds(&self, p: &ComplexityProfile, rates: &RateVector, slack: u32) -> [u32; 3] {
        self.raw_bounds(p, rates, slack).map(|b| b.max(0) as u32)
    }

    /// Stage targets and conditioning with the given bounds.
    pub fn stages(&self, bounds: [u32; 3]) -> [StagePlan; 3] {
        use Given::{Payload, Source};
        let (targets, given): ([Sender; 3], [Vec<Given>; 3]) = match *self {
            BranchKind::Chain { order: [i, j, l] } => ([i, j, l], [vec![], vec![Source(i)], vec![Source(i), Source(j)]]),
            BranchKind::Relay { order: [i, j, l] } => {
                ([j, i, l], [vec![Payload(i)], vec![Source(j)], vec![Source(i), Source(j)]])
            }
            BranchKind::Pair { order: [i, j, l] } => (
                [l, j, i],
                [vec![Payload(i), Payload(j)], vec![Payload(i), Source(l)], vec![Source(j), Source(l)]],
            ),
        };
        let [g0, g1, g2] = given;
        [
            StagePlan { target: targets[0], given: g0, bound: bounds[0] },
            StagePlan { target: targets[1], given: g1, bound: bounds[1] },
            StagePlan { target: targets[2], given: g2, bound: bounds[2] },
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchPlan {
    pub index: usize,
    pub kind: BranchKind,
    pub stages: [StagePlan; 3],
}

impl BranchPlan {
    pub fn bounds(&self) -> [u32; 3] {
        [self.stages[0].bound, self.stages[1].bound, self.stages[2].bound]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodingPlan {
    pub profile: ComplexityProfile,
    pub rates: RateVector,
    pub slack: u32,
    pub branches: Vec<BranchPlan>,
}

/// Per-branch stage bounds; fails when the rates miss a rate-region inequality by more than `slack`.
pub fn derive_decoding_bounds(profile: &ComplexityProfile, rates: &RateVector, slack: u32) -> Result<DecodingPlan> {
    let check = validate_rate_region_with_margin(rates, profile, -(slack as i64));
    if !check.passed {
        return Err(Error::RateRegionViolated(check.violated.iter().map(Subset::to_string).collect()));
    }
    let branches = (0..BRANCH_COUNT)
        .map(|index| {
            let kind = BranchKind::from_index(index).expect("index in range");
            BranchPlan {
                index,
                kind,
                stages: kind.stages(kind.bounds(profile, rates, slack)),
            }
        })
        .collect();
    Ok(DecodingPlan {
        profile: *profile,
        rates: *rates,
        slack,
        branches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relay_bound_from_pair_complexity() {
        // C(A,B) = 14, n_A = 6, slack 2.
        let p = ComplexityProfile::new([7, 8, 5, 14, 12, 13, 18]);
        let rates = RateVector::new(6, 7, 5);
        let plan = derive_decoding_bounds(&p, &rates, 2).unwrap();
        let relay_ab = &plan.branches[6];
        assert_eq!(relay_ab.kind, BranchKind::Relay { order: [Sender::A, Sender::B, Sender::C] });
        assert_eq!(relay_ab.stages[0].target, Sender::B);
        assert_eq!(relay_ab.stages[0].given, vec![Given::Payload(Sender::A)]);
        assert_eq!(relay_ab.stages[0].bound, 10);
    }

    #[test]
    fn diagonal_profile_single_sender() {
        let n = 6;
        let p = ComplexityProfile::new([n; 7]);
        let plan = derive_decoding_bounds(&p, &RateVector::new(n, 0, 0), 2).unwrap();
        let chain = &plan.branches[0];
        assert_eq!(chain.bounds(), [n, 2, 2]);
    }

    #[test]
    fn violated_region_is_rejected() {
        let p = ComplexityProfile::new([8, 8, 8, 16, 16, 16, 20]);
        let err = derive_decoding_bounds(&p, &RateVector::new(4, 4, 4), 2).unwrap_err();
        assert!(matches!(err, Error::RateRegionViolated(v) if v.contains(&"ABC".to_string())));
    }

    #[test]
    fn branch_indexing() {
        assert!(BranchKind::from_index(17).is_some());
        assert!(BranchKind::from_index(18).is_none());
        let pair = BranchKind::from_index(12).unwrap();
        let stages = pair.stages([1, 2, 3]);
        assert_eq!(stages.map(|s| s.target), [Sender::C, Sender::B, Sender::A]);
    }
}
