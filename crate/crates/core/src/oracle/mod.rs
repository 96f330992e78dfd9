//! Computable complexity oracles.
//!
//! True Kolmogorov complexity is uncomputable, so profiles, conditional
//! complexities and low-complexity enumerations come from an oracle: either a
//! budgeted toy machine or a counting model over an explicit correlation set.

pub mod counting;
pub mod toy;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::graph::LabeledBipartiteGraph;

pub use counting::{counting_conditional, CorrelationSet, CountingOracle};
pub use toy::{toy_complexity, ToyComplexity, ToyMachineConfig, ToyOracle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sender {
    A,
    B,
    C,
}

impl Sender {
    pub const ALL: [Sender; 3] = [Sender::A, Sender::B, Sender::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Sender> {
        Sender::ALL.get(i).copied()
    }

    pub fn bit(self) -> u8 {
        1 << self.index()
    }

    pub fn parse(s: &str) -> Result<Sender> {
        match s.trim() {
            "A" | "a" => Ok(Sender::A),
            "B" | "b" => Ok(Sender::B),
            "C" | "c" => Ok(Sender::C),
            other => Err(Error::Format(format!("unknown sender {other:?}"))),
        }
    }
}

impl fmt::Display for Sender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["A", "B", "C"][self.index()])
    }
}

/// A nonempty subset of the senders as a bit mask (`A = 1`, `B = 2`, `C = 4`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subset(u8);

impl Subset {
    pub const A: Subset = Subset(1);
    pub const B: Subset = Subset(2);
    pub const C: Subset = Subset(4);
    pub const AB: Subset = Subset(3);
    pub const AC: Subset = Subset(5);
    pub const BC: Subset = Subset(6);
    pub const ABC: Subset = Subset(7);
    /// Canonical profile order.
    pub const ORDER: [Subset; 7] = [
        Subset::A,
        Subset::B,
        Subset::C,
        Subset::AB,
        Subset::AC,
        Subset::BC,
        Subset::ABC,
    ];

    pub fn new(mask: u8) -> Option<Subset> {
        (1..=7).contains(&mask).then_some(Subset(mask))
    }

    pub fn of(senders: &[Sender]) -> Option<Subset> {
        Subset::new(senders.iter().fold(0, |m, s| m | s.bit()))
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn contains(self, s: Sender) -> bool {
        self.0 & s.bit() != 0
    }

    pub fn members(self) -> Vec<Sender> {
        Sender::ALL.into_iter().filter(|s| self.contains(*s)).collect()
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        false
    }

    /// The other senders, or `None` for the full set.
    pub fn complement(self) -> Option<Subset> {
        Subset::new(7 & !self.0)
    }

    pub fn position(self) -> usize {
        Subset::ORDER.iter().position(|s| *s == self).expect("valid subset")
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.members() {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

/// Joint complexities `C(x_V)` for the seven nonempty `V`, in [`Subset::ORDER`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComplexityProfile {
    values: [u32; 7],
    /// Mask over profile positions whose value is only a lower bound (oracle budget exceeded).
    #[serde(default)]
    capped: u8,
}

impl ComplexityProfile {
    pub fn new(values: [u32; 7]) -> Self {
        ComplexityProfile { values, capped: 0 }
    }

    pub(crate) fn with_capped(values: [u32; 7], capped: u8) -> Self {
        ComplexityProfile { values, capped }
    }

    pub fn values(&self) -> [u32; 7] {
        self.values
    }

    pub fn get(&self, v: Subset) -> u32 {
        self.values[v.position()]
    }

    /// `C(x_V)` with `C(empty) = 0`.
    pub fn joint(&self, mask: u8) -> u32 {
        Subset::new(mask).map_or(0, |s| self.get(s))
    }

    pub fn is_capped(&self, v: Subset) -> bool {
        self.capped >> v.position() & 1 == 1
    }

    pub fn any_capped(&self) -> bool {
        self.capped != 0
    }

    /// `C(x_V | x_W) = C(x_{V u W}) - C(x_W)`.
    pub fn conditional(&self, v: Subset, w: Option<Subset>) -> i64 {
        let wm = w.map_or(0, Subset::mask);
        self.joint(v.mask() | wm) as i64 - self.joint(wm) as i64
    }

    /// The right-hand side of the rate-region inequality for `V`.
    pub fn region_bound(&self, v: Subset) -> i64 {
        self.conditional(v, v.complement())
    }

    pub fn is_monotone(&self, slack: u32) -> bool {
        Subset::ORDER.iter().all(|&v| {
            Subset::ORDER
                .iter()
                .filter(|w| w.mask() & v.mask() == v.mask())
                .all(|&w| self.get(v) <= self.get(w) + slack)
        })
    }

    pub fn is_subadditive(&self, slack: u32) -> bool {
        Subset::ORDER.iter().all(|&v| {
            Subset::ORDER
                .iter()
                .all(|&w| self.joint(v.mask() | w.mask()) <= self.get(v) + self.get(w) + slack)
        })
    }
}

impl fmt::Display for ComplexityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = Subset::ORDER
            .iter()
            .map(|&s| {
                let mark = if self.is_capped(s) { ">" } else { "" };
                format!("{s}={mark}{}", self.get(s))
            })
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

impl fmt::Debug for ComplexityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexityProfile{self}")
    }
}

/// The three source strings, indexed by [`Sender::index`].
pub type Triple = [BitString; 3];

/// Concatenation of the members of `v` in sender order.
pub fn joint_string(triple: &Triple, v: Subset) -> Result<BitString> {
    let mut out = BitString::empty();
    for s in v.members() {
        out = out.concat(&triple[s.index()])?;
    }
    Ok(out)
}

/// Side information available to a B-set enumeration.
#[derive(Clone, Debug)]
pub enum Condition {
    /// The decoder already knows this sender's string.
    Source { sender: Sender, value: BitString },
    /// The decoder holds this sender's codeword payload under the given graph.
    Payload {
        sender: Sender,
        payload: BitString,
        graph: LabeledBipartiteGraph,
    },
}

impl Condition {
    pub fn sender(&self) -> Sender {
        match self {
            Condition::Source { sender, .. } | Condition::Payload { sender, .. } => *sender,
        }
    }
}

/// Strings of one sender whose conditional complexity is at most a bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BSet {
    /// Members in increasing order.
    pub members: Vec<BitString>,
    /// False when the enumeration stopped at a budget before exhausting the set.
    pub complete: bool,
    pub note: Option<String>,
}

pub trait ComplexityOracle: Send + Sync {
    fn name(&self) -> String;

    /// Width of each source string.
    fn width(&self) -> u32;

    /// Declared slack budget for chain-rule and symmetry-of-information deviations.
    fn slack(&self) -> u32;

    /// Largest value a profile entry can take under this oracle.
    fn entry_cap(&self) -> u32;

    fn profile_of(&self, triple: &Triple) -> Result<ComplexityProfile>;

    /// The oracle's own `C(x_V | x_W)` (`w = None` is unconditional).
    fn conditional(&self, triple: &Triple, v: Subset, w: Option<Subset>) -> Result<i64>;

    /// Strings `x` of the target sender with `C(x | conditions) <= bound`,
    /// capped at `2^(bound+1)` members.
    fn enumerate_b_set(&self, target: Sender, conditions: &[Condition], bound: u32) -> Result<BSet>;
}

/// Largest `|C(x_{V u W}) - (C(x_W) + C(x_V | x_W))|` over disjoint `V`, `W`.
pub fn chain_rule_slack(oracle: &dyn ComplexityOracle, triple: &Triple) -> Result<u32> {
    let profile = oracle.profile_of(triple)?;
    let mut worst = 0i64;
    for v in Subset::ORDER {
        for wm in 0u8..8 {
            if wm & v.mask() != 0 {
                continue;
            }
            let w = Subset::new(wm);
            let cond = oracle.conditional(triple, v, w)?;
            let joint = profile.joint(v.mask() | wm) as i64;
            let split = profile.joint(wm) as i64 + cond;
            worst = worst.max((joint - split).abs());
        }
    }
    Ok(worst as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_bookkeeping() {
        assert_eq!(Subset::AB.to_string(), "AB");
        assert_eq!(Subset::AB.complement(), Some(Subset::C));
        assert_eq!(Subset::ABC.complement(), None);
        assert_eq!(Subset::of(&[Sender::C, Sender::A]), Some(Subset::AC));
        assert_eq!(Subset::BC.members(), vec![Sender::B, Sender::C]);
    }

    #[test]
    fn profile_conditionals() {
        let p = ComplexityProfile::new([8, 8, 8, 16, 16, 16, 20]);
        assert_eq!(p.conditional(Subset::C, Some(Subset::AB)), 4);
        assert_eq!(p.region_bound(Subset::AB), 12);
        assert_eq!(p.region_bound(Subset::ABC), 20);
        assert!(p.is_monotone(0));
        assert!(p.is_subadditive(0));
        let broken = ComplexityProfile::new([8, 8, 8, 3, 16, 16, 40]);
        assert!(!broken.is_monotone(2));
        assert!(!broken.is_subadditive(2));
    }
}
