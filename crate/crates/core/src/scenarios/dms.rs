//! Memoryless sources over bit triples and their entropy profiles.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::oracle::{CorrelationSet, Subset, Triple};
use crate::rational::{parse_rational, to_f64, Rational};

/// Joint distribution of one draw `(b_A, b_B, b_C)`, indexed by `b_A << 2 | b_B << 1 | b_C`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDistribution {
    #[serde(with = "probs_as_strings")]
    probs: [Rational; 8],
}

mod probs_as_strings {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::rational::{parse_rational, Rational};

    pub fn serialize<S: Serializer>(p: &[Rational; 8], s: S) -> Result<S::Ok, S::Error> {
        p.iter().map(|r| r.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Rational; 8], D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        let parsed: Vec<Rational> = raw
            .iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect::<Result<_, _>>()?;
        parsed
            .try_into()
            .map_err(|_| serde::de::Error::custom("expected 8 probabilities"))
    }
}

impl SourceDistribution {
    pub fn new(probs: [Rational; 8]) -> Result<Self> {
        if probs.iter().any(|p| p.is_negative()) {
            return Err(Error::InvalidParameter("negative probability".into()));
        }
        let total: Rational = probs.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}, not 1")));
        }
        Ok(SourceDistribution { probs })
    }

    /// Parses `p000=1/2,p111=1/2`; unnamed outcomes get probability zero.
    /// A leading `dms:` is accepted.
    pub fn parse(spec: &str) -> Result<Self> {
        let body = spec.strip_prefix("dms:").unwrap_or(spec);
        let mut probs = [Rational::zero(); 8];
        for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Input(format!("expected pXYZ=<rational>, got {part:?}")))?;
            let bits = key
                .strip_prefix('p')
                .filter(|b| b.len() == 3 && b.chars().all(|c| c == '0' || c == '1'))
                .ok_or_else(|| Error::Input(format!("bad outcome name {key:?}")))?;
            let idx = usize::from_str_radix(bits, 2).expect("validated binary");
            probs[idx] = parse_rational(value)?;
        }
        SourceDistribution::new(probs)
    }

    pub fn prob(&self, outcome: usize) -> Rational {
        self.probs[outcome]
    }

    pub fn probs(&self) -> &[Rational; 8] {
        &self.probs
    }

    /// Outcomes with nonzero probability.
    pub fn support(&self) -> Vec<usize> {
        (0..8).filter(|&i| !self.probs[i].is_zero()).collect()
    }

    /// Distribution of the projection onto `v`, indexed by the packed projected bits.
    pub fn marginal(&self, v: Subset) -> Vec<Rational> {
        let members = v.members();
        let mut out = vec![Rational::zero(); 1 << members.len()];
        for (outcome, p) in self.probs.iter().enumerate() {
            let key = members
                .iter()
                .fold(0usize, |acc, s| acc << 1 | (outcome >> (2 - s.index()) & 1));
            out[key] += p;
        }
        out
    }

    /// All `n`-draw triples with positive probability, as a correlation set.
    pub fn support_set(&self, n: u32) -> Result<CorrelationSet> {
        let support = self.support();
        let size = (support.len() as u64).checked_pow(n).filter(|&s| s <= 1 << 20);
        let size = size.ok_or_else(|| Error::AuditInfeasible(format!("support of {n} draws is too large")))?;
        let mut members = Vec::with_capacity(size as usize);
        for mut idx in 0..size {
            let mut t = [0u64; 3];
            for _ in 0..n {
                let outcome = support[(idx % support.len() as u64) as usize];
                idx /= support.len() as u64;
                for (k, word) in t.iter_mut().enumerate() {
                    *word = *word << 1 | (outcome >> (2 - k) & 1) as u64;
                }
            }
            members.push(t);
        }
        CorrelationSet::explicit(n, members)
    }
}

impl fmt::Display for SourceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .support()
            .into_iter()
            .map(|i| format!("p{i:03b}={}", self.probs[i]))
            .collect();
        write!(f, "dms:{}", parts.join(","))
    }
}

impl fmt::Debug for SourceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SourceDistribution({self})")
    }
}

/// `n` independent draws; bit `i` of each output (from the most significant end) is draw `i`.
pub fn sample_dms(dist: &SourceDistribution, n: u32, seed: u64) -> Result<Triple> {
    if n > 64 {
        return Err(Error::InvalidParameter(format!("n = {n} exceeds 64")));
    }
    let denom = dist.probs.iter().fold(1i128, |acc, p| acc.lcm(p.denom()));
    let denom = u64::try_from(denom).map_err(|_| Error::InvalidParameter("denominator too large".into()))?;
    let cumulative: Vec<u64> = dist
        .probs
        .iter()
        .scan(0u64, |acc, p| {
            *acc += (p.numer() * (denom as i128 / p.denom())) as u64;
            Some(*acc)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words = [0u64; 3];
    for _ in 0..n {
        let r = rng.gen_range(0..denom);
        let outcome = cumulative.iter().position(|&c| r < c).expect("cumulative reaches denom");
        for (k, w) in words.iter_mut().enumerate() {
            *w = *w << 1 | (outcome >> (2 - k) & 1) as u64;
        }
    }
    Ok(words.map(|w| BitString::new(n, w).expect("n bits drawn")))
}

/// Shannon entropy in bits.
pub fn shannon_entropy(probs: &[Rational]) -> f64 {
    probs
        .iter()
        .filter(|p| !p.is_zero())
        .map(|p| {
            let pf = to_f64(p);
            -pf * pf.log2()
        })
        .sum()
}

/// `n * H(X_V)` for the seven nonempty `V`, in profile order.
pub fn entropy_profile(dist: &SourceDistribution, n: u32) -> [f64; 7] {
    Subset::ORDER.map(|v| n as f64 * shannon_entropy(&dist.marginal(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn parse_and_display() {
        let d = SourceDistribution::parse("dms:p000=1/2,p111=1/2").unwrap();
        assert_eq!(d.support(), vec![0, 7]);
        assert_eq!(SourceDistribution::parse(&d.to_string()).unwrap(), d);
        assert!(SourceDistribution::parse("p000=1/2").is_err());
        assert!(SourceDistribution::parse("p0x0=1").is_err());
    }

    #[test]
    fn concentrated_and_diagonal_samples() {
        let zero = SourceDistribution::parse("p000=1").unwrap();
        let t = sample_dms(&zero, 16, 3).unwrap();
        assert!(t.iter().all(|x| x.value() == 0 && x.width() == 16));
        let diag = SourceDistribution::parse("p000=1/2,p111=1/2").unwrap();
        for seed in 0..50 {
            let [a, b, c] = sample_dms(&diag, 20, seed).unwrap();
            assert!(a == b && b == c);
        }
    }

    #[test]
    fn diagonal_entropies() {
        let diag = SourceDistribution::parse("p000=1/2,p111=1/2").unwrap();
        let h = entropy_profile(&diag, 10);
        assert!(h.iter().all(|&v| close(v, 10.0)));
        let uniform = SourceDistribution::new([rat(1, 8); 8]).unwrap();
        let h = entropy_profile(&uniform, 5);
        assert!(close(h[0], 5.0) && close(h[6], 15.0));
    }

    #[test]
    fn marginal_indexing() {
        let d = SourceDistribution::parse("p000=1/2,p011=1/4,p101=1/4").unwrap();
        assert_eq!(d.marginal(Subset::A), vec![rat(3, 4), rat(1, 4)]);
        assert_eq!(d.marginal(Subset::C), vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(d.marginal(Subset::ABC).iter().filter(|p| !p.is_zero()).count(), 3);
    }

    #[test]
    fn support_set_size() {
        let d = SourceDistribution::parse("p000=1/2,p011=1/4,p101=1/4").unwrap();
        let s = d.support_set(4).unwrap();
        assert_eq!(s.len(), 81);
    }
}
