//! Rich-owner graph construction: random extractor, prefix merging, edge splitting.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::ceil_log2;
use crate::crt::first_primes;
use crate::error::{Error, Result};
use crate::graph::{GraphParams, LabeledBipartiteGraph, SplitMap, Structure};
use crate::rational::{as_string, ceil_u64, derive_seed, in_unit_interval, int, Rational};
use crate::verification::{check_prefix_extractor, BFamily};

/// Default degree constant of the random construction.
pub const DEFAULT_C: u32 = 4;

/// Label width `d` with `2^d` the smallest power of two `>= c n / epsilon^2`.
pub fn label_width(n: u32, epsilon: Rational, c: u32) -> Result<u32> {
    if !in_unit_interval(&epsilon) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0,1], got {epsilon}")));
    }
    if c == 0 {
        return Err(Error::InvalidParameter("degree constant c must be at least 1".into()));
    }
    let target = ceil_u64(&(int(c as i128 * n as i128) / (epsilon * epsilon)));
    Ok(ceil_log2(target))
}

/// Random graph `{0,1}^n x {0,1}^d -> {0,1}^k` with independent uniform edge endpoints.
pub fn build_random_graph(n: u32, k: u32, epsilon: Rational, c: u32, seed: u64) -> Result<LabeledBipartiteGraph> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let d = label_width(n, epsilon, c)?;
    let params = GraphParams {
        n,
        m: k,
        d,
        k,
        delta: int(1),
        epsilon,
        c,
        gamma: 0,
    };
    LabeledBipartiteGraph::seeded(params, seed)
}

/// Merges right nodes sharing a prefix of length `m_prime`.
pub fn prefix_merge(g: &LabeledBipartiteGraph, m_prime: u32) -> Result<LabeledBipartiteGraph> {
    let p = g.params();
    if m_prime == 0 || m_prime > p.m {
        return Err(Error::InvalidParameter(format!(
            "prefix width must be in 1..={}, got {m_prime}",
            p.m
        )));
    }
    if m_prime == p.m {
        return Ok(g.clone());
    }
    if matches!(g.structure(), Structure::Split(_)) {
        return Err(Error::InvalidParameter("split graphs cannot be prefix-merged".into()));
    }
    // Truncating a truncation is the same as truncating the original.
    let base = g.prefix_base().unwrap_or(g);
    let params = GraphParams {
        m: m_prime,
        k: p.k.min(m_prime),
        gamma: 0,
        ..p.clone()
    };
    Ok(LabeledBipartiteGraph::prefix_of(base, params))
}

/// Replaces each edge `(x, z)` by `ell = ceil(s n / delta)` edges landing on
/// `(i, x mod p_i, z)`; right nodes gain `ceil(log2 ell) + n` bits.
pub fn split_edges(g: &LabeledBipartiteGraph, s: u64, delta: Rational) -> Result<LabeledBipartiteGraph> {
    if s == 0 {
        return Err(Error::InvalidParameter("split factor s must be at least 1".into()));
    }
    if !in_unit_interval(&delta) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0,1], got {delta}")));
    }
    let p = g.params();
    let ell = ceil_u64(&(int(s as i128 * p.n as i128) / delta));
    split_with_ell(g, ell)
}

/// Edge splitting with an explicit number of copies per edge.
pub fn split_with_ell(g: &LabeledBipartiteGraph, ell: u64) -> Result<LabeledBipartiteGraph> {
    let p = g.params();
    if ell == 0 {
        return Err(Error::InvalidParameter("split count must be at least 1".into()));
    }
    if matches!(g.structure(), Structure::Split(_)) {
        return Err(Error::InvalidParameter("graph is already split".into()));
    }
    let index_bits = ceil_log2(ell);
    let m = p.m + p.n + index_bits;
    let degree = g.degree().checked_mul(ell).filter(|&d| d < 1u64 << 62).ok_or_else(|| {
        Error::InvalidParameter(format!("split degree {} x {ell} overflows", g.degree()))
    })?;
    if m > 64 {
        return Err(Error::InvalidParameter(format!("split right width {m} exceeds 64 bits")));
    }
    let params = GraphParams {
        m,
        d: ceil_log2(degree),
        gamma: m - p.k.min(m),
        ..p.clone()
    };
    let split = SplitMap {
        base: g.clone(),
        ell,
        primes: first_primes(ell as usize),
        index_bits,
        residue_bits: p.n,
    };
    Ok(LabeledBipartiteGraph::split_of(split, params))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionConfig {
    pub n: u32,
    pub k: u32,
    pub delta: Rational,
    pub c: u32,
    pub seed: u64,
    pub max_retries: u32,
    /// Audit family; defaults to exhaustive for `n <= 4`, sampled otherwise.
    pub family: Option<BFamily>,
}

impl ConstructionConfig {
    pub fn new(n: u32, k: u32, delta: Rational, seed: u64) -> Self {
        ConstructionConfig {
            n,
            k,
            delta,
            c: DEFAULT_C,
            seed,
            max_retries: 10,
            family: None,
        }
    }

    pub fn epsilon(&self) -> Rational {
        self.delta * self.delta / int(2)
    }

    fn family(&self, attempt_seed: u64) -> BFamily {
        self.family.clone().unwrap_or_else(|| {
            if self.n <= 4 {
                BFamily::Exhaustive
            } else {
                BFamily::Sampled {
                    size: 1usize << self.k,
                    count: 256,
                    seed: derive_seed(attempt_seed, 0xb5e7),
                }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub n: u32,
    pub k: u32,
    #[serde(with = "as_string")]
    pub delta: Rational,
    #[serde(with = "as_string")]
    pub epsilon: Rational,
    #[serde(rename = "D")]
    pub degree: u64,
    pub ell: u64,
    pub gamma: u32,
    pub retries: u32,
    pub verified_b_count: u64,
    #[serde(with = "as_string")]
    pub worst_violation: Rational,
    pub seed_used: u64,
}

impl ConstructionReport {
    /// One `key=value` pair per line.
    pub fn to_kv(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ConstructionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={}", self.n)?;
        writeln!(f, "k={}", self.k)?;
        writeln!(f, "delta={}", self.delta)?;
        writeln!(f, "epsilon={}", self.epsilon)?;
        writeln!(f, "D={}", self.degree)?;
        writeln!(f, "ell={}", self.ell)?;
        writeln!(f, "gamma={}", self.gamma)?;
        writeln!(f, "retries={}", self.retries)?;
        writeln!(f, "verified_B_count={}", self.verified_b_count)?;
        writeln!(f, "worst_violation={}", self.worst_violation)?;
        writeln!(f, "seed_used={}", self.seed_used)
    }
}

/// Split factor `ceil((2 / delta^2) D)`.
pub fn split_factor(delta: Rational, degree: u64) -> u64 {
    ceil_u64(&(int(2) / (delta * delta) * int(degree as i128)))
}

/// Builds, verifies and splits; retries with derived seeds on a failed audit.
pub fn construct_rich_owner_graph(cfg: &ConstructionConfig) -> Result<(LabeledBipartiteGraph, ConstructionReport)> {
    let epsilon = cfg.epsilon();
    let c = cfg.c;
    construct_rich_owner_graph_with(cfg, |n, k, seed| build_random_graph(n, k, epsilon, c, seed))
}

/// As [`construct_rich_owner_graph`] with a caller-supplied builder for the unsplit graph.
pub fn construct_rich_owner_graph_with(
    cfg: &ConstructionConfig,
    builder: impl Fn(u32, u32, u64) -> Result<LabeledBipartiteGraph>,
) -> Result<(LabeledBipartiteGraph, ConstructionReport)> {
    if !in_unit_interval(&cfg.delta) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0,1], got {}", cfg.delta)));
    }
    if cfg.k == 0 || cfg.k > cfg.n {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= n, got k={}, n={}", cfg.k, cfg.n)));
    }
    let epsilon = cfg.epsilon();
    let mut worst_seen: Option<Rational> = None;
    for attempt in 0..=cfg.max_retries {
        let seed = if attempt == 0 { cfg.seed } else { derive_seed(cfg.seed, attempt as u64) };
        let g = builder(cfg.n, cfg.k, seed)?;
        let report = check_prefix_extractor(&g, epsilon, &cfg.family(seed))?;
        if !report.passed {
            worst_seen = Some(worst_seen.map_or(report.worst, |w: Rational| w.max(report.worst)));
            continue;
        }
        let mut tagged_params = g.params().clone();
        tagged_params.delta = cfg.delta;
        tagged_params.epsilon = epsilon;
        let tagged = g.with_params(tagged_params);
        let s = split_factor(cfg.delta, g.degree());
        let split = split_edges(&tagged, s, cfg.delta)?;
        let (ell, gamma) = match split.structure() {
            Structure::Split(sm) => (sm.ell, split.params().gamma),
            Structure::Plain => unreachable!("split_edges returns a split graph"),
        };
        let construction = ConstructionReport {
            n: cfg.n,
            k: cfg.k,
            delta: cfg.delta,
            epsilon,
            degree: g.degree(),
            ell,
            gamma,
            retries: attempt,
            verified_b_count: report.checked,
            worst_violation: report.worst,
            seed_used: seed,
        };
        return Ok((split, construction));
    }
    Err(Error::ConstructionFailed {
        attempts: cfg.max_retries + 1,
        worst_violation: worst_seen.map_or_else(|| "none".to_string(), |w| w.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn degree_is_next_power_of_two() {
        assert_eq!(label_width(2, int(1), 1).unwrap(), 1);
        assert_eq!(label_width(10, rat(1, 4), 4).unwrap(), 10);
        assert_eq!(label_width(4, rat(1, 4), 4).unwrap(), 8);
        assert!(label_width(4, int(0), 4).is_err());
        assert!(build_random_graph(4, 5, rat(1, 4), 4, 0).is_err());
    }

    #[test]
    fn seeded_builds_are_identical() {
        let a = build_random_graph(4, 2, rat(1, 4), 4, 42).unwrap();
        let b = build_random_graph(4, 2, rat(1, 4), 4, 42).unwrap();
        assert_eq!(a.to_table().unwrap(), b.to_table().unwrap());
        assert_eq!(a.degree(), 256);
    }

    #[test]
    fn merge_truncates() {
        let g = LabeledBipartiteGraph::from_fn(1, 4, 1, |_, y| if y == 0 { 0b1010 } else { 0b1011 }).unwrap();
        let merged = prefix_merge(&g, 2).unwrap();
        assert_eq!(merged.neighbor_raw(0, 0), 0b10);
        assert_eq!(merged.neighbor_raw(0, 1), 0b10);
        assert_eq!(merged.degree(), 2);
        assert_eq!(prefix_merge(&g, 4).unwrap().to_table().unwrap(), g.to_table().unwrap());
        assert!(prefix_merge(&g, 0).is_err());
    }

    #[test]
    fn split_lands_on_residues() {
        let g = LabeledBipartiteGraph::from_fn(3, 2, 0, |_, _| 0b11).unwrap();
        let s = split_with_ell(&g, 2).unwrap();
        assert_eq!(s.degree(), 2);
        let Structure::Split(map) = s.structure() else { panic!("not split") };
        assert_eq!(map.decode(s.neighbor_raw(5, 0)), (0, 1, 0b11));
        assert_eq!(map.decode(s.neighbor_raw(5, 1)), (1, 2, 0b11));
        assert_eq!(map.decode(s.neighbor_raw(0, 1)), (1, 0, 0b11));
        assert_eq!(s.params().m, 2 + 3 + 1);
    }

    #[test]
    fn split_count_formula() {
        let g = LabeledBipartiteGraph::from_fn(4, 2, 1, |x, _| x & 3).unwrap();
        let s = split_edges(&g, 3, rat(1, 2)).unwrap();
        assert_eq!(s.degree(), 2 * 24);
        assert_eq!(split_factor(rat(7, 10), 512), 2090);
    }

    #[test]
    fn planted_bad_builder_fails() {
        let mut cfg = ConstructionConfig::new(4, 2, rat(7, 10), 1);
        cfg.max_retries = 0;
        let err = construct_rich_owner_graph_with(&cfg, |n, k, _| {
            let d = label_width(n, rat(49, 200), 4)?;
            LabeledBipartiteGraph::from_fn(n, k, d, |_, _| 0)
        })
        .unwrap_err();
        assert!(matches!(err, Error::ConstructionFailed { attempts: 1, .. }));
    }

    #[test]
    fn report_key_values() {
        let (g, report) = construct_rich_owner_graph(&ConstructionConfig::new(4, 2, rat(7, 10), 5)).unwrap();
        let kv = report.to_kv();
        for key in ["n=4", "k=2", "delta=7/10", "epsilon=49/200", "ell=", "gamma=", "verified_B_count="] {
            assert!(kv.contains(key), "{kv}");
        }
        assert_eq!(g.params().m, 2 + report.gamma);
        assert_eq!(g.degree(), report.degree * report.ell);
    }
}
