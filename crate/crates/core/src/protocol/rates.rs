//! Rate vectors and the rules that derive them from a complexity profile.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{ComplexityProfile, Sender, Subset};
use crate::scenarios::region::validate_rate_region_with_margin;

/// Payload budget `n_i` of each sender, in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RateVector {
    #[serde(rename = "n_A")]
    pub a: u32,
    #[serde(rename = "n_B")]
    pub b: u32,
    #[serde(rename = "n_C")]
    pub c: u32,
}

impl RateVector {
    pub fn new(a: u32, b: u32, c: u32) -> Self {
        RateVector { a, b, c }
    }

    pub fn get(&self, s: Sender) -> u32 {
        match s {
            Sender::A => self.a,
            Sender::B => self.b,
            Sender::C => self.c,
        }
    }

    pub fn as_array(&self) -> [u32; 3] {
        [self.a, self.b, self.c]
    }

    /// `sum_{i in V} n_i`.
    pub fn sum(&self, v: Subset) -> u32 {
        v.members().into_iter().map(|s| self.get(s)).sum()
    }

    pub fn total(&self) -> u32 {
        self.a + self.b + self.c
    }
}

impl fmt::Display for RateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.a, self.b, self.c)
    }
}

impl FromStr for RateVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(Error::Input(format!("rates must look like a,b,c, got {s:?}")));
        };
        let num = |v: &str| v.parse::<u32>().map_err(|e| Error::Input(format!("rate {v:?}: {e}")));
        Ok(RateVector::new(num(a)?, num(b)?, num(c)?))
    }
}

/// How an experiment chooses rates for each instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RateRule {
    Explicit { rates: RateVector },
    /// Smallest rates meeting every rate-region inequality with this many spare bits.
    ProfilePlus { slack: u32 },
    /// Balanced rates whose total falls short of `C(x_ABC)` by this many bits.
    Deficit { bits: u32 },
}

impl RateRule {
    /// Parses `a,b,c`, `profile+s` or `deficit:d`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("profile+") {
            let slack = rest
                .parse()
                .map_err(|e| Error::Input(format!("profile slack {rest:?}: {e}")))?;
            return Ok(RateRule::ProfilePlus { slack });
        }
        if s == "profile" {
            return Ok(RateRule::ProfilePlus { slack: 0 });
        }
        if let Some(rest) = s.strip_prefix("deficit:") {
            let bits = rest
                .parse()
                .map_err(|e| Error::Input(format!("deficit {rest:?}: {e}")))?;
            return Ok(RateRule::Deficit { bits });
        }
        Ok(RateRule::Explicit { rates: s.parse()? })
    }

    pub fn resolve(&self, profile: &ComplexityProfile) -> RateVector {
        match *self {
            RateRule::Explicit { rates } => rates,
            RateRule::ProfilePlus { slack } => profile_rates(profile, slack),
            RateRule::Deficit { bits } => {
                let total = profile.get(Subset::ABC).saturating_sub(bits);
                let base = total / 3;
                let extra = total % 3;
                RateVector::new(base + u32::from(extra > 0), base + u32::from(extra > 1), base)
            }
        }
    }
}

impl fmt::Display for RateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateRule::Explicit { rates } => write!(f, "{rates}"),
            RateRule::ProfilePlus { slack } => write!(f, "profile+{slack}"),
            RateRule::Deficit { bits } => write!(f, "deficit:{bits}"),
        }
    }
}

/// The integer point with the least total, then the least maximum, then the
/// least sum of squares, then the lexicographically smallest, that satisfies every inequality with `slack` spare bits.
pub fn profile_rates(profile: &ComplexityProfile, slack: u32) -> RateVector {
    let need = |v: Subset| (profile.region_bound(v) + slack as i64).max(0) as u32;
    let top = need(Subset::ABC);
    let mut best: Option<(u32, u32, u32, RateVector)> = None;
    for a in need(Subset::A)..=top {
        for b in need(Subset::B)..=top {
            for c in need(Subset::C)..=top {
                let r = RateVector::new(a, b, c);
                if !validate_rate_region_with_margin(&r, profile, slack as i64).passed {
                    continue;
                }
                let key = (r.total(), a.max(b).max(c), a * a + b * b + c * c, r);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
        }
    }
    best.map(|(_, _, _, r)| r).expect("the all-top vector satisfies every inequality")
}
