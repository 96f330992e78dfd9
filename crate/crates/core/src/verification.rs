//! Extractor and rich-owner audits.
//!
//! All pass/fail decisions use exact rational arithmetic. The extractor error
//! of a left set `B` is maximized over right sets `A` by the over-dense nodes
//! `A* = {z : deg_B(z) / (|B| D) > 1 / |R|}`, so the maximum over all `A` is
//! computed exactly without enumerating `A`.

use std::collections::{HashMap, HashSet};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::crt::prime_factors;
use crate::error::{Error, Result};
use crate::graph::{LabeledBipartiteGraph, Structure};
use crate::rational::{as_string, ceil_u64, int, Rational};

/// Largest number of `B` sets an explicit enumeration will visit.
pub const ENUMERATION_LIMIT: u128 = 4_000_000;
/// Failure records kept verbatim in a report; the rest are only counted.
const MAX_RECORDED_FAILURES: usize = 16;

/// Which left sets an audit covers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum BFamily {
    /// Every nonempty subset of the left side; only for `n <= 4`.
    Exhaustive,
    /// Every subset of one size.
    AllOfSize { size: usize },
    /// `count` uniformly random subsets of one size.
    Sampled { size: usize, count: usize, seed: u64 },
}

impl BFamily {
    pub fn validate(&self, n: u32) -> Result<()> {
        let left = 1u128 << n;
        match self {
            BFamily::Exhaustive if n > 4 => Err(Error::AuditInfeasible(format!(
                "exhaustive families need n <= 4, got n={n}"
            ))),
            BFamily::AllOfSize { size } | BFamily::Sampled { size, .. } if *size == 0 || *size as u128 > left => {
                Err(Error::InvalidParameter(format!("set size {size} is outside 1..={left}")))
            }
            _ => Ok(()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            BFamily::Exhaustive => "exhaustive".to_string(),
            BFamily::AllOfSize { size } => format!("all-of-size:{size}"),
            BFamily::Sampled { size, count, seed } => format!("sampled:{size}x{count}@{seed}"),
        }
    }

    /// Inverse of [`BFamily::describe`].
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Format(format!("family must be exhaustive, all-of-size:N or sampled:SIZExCOUNT@SEED, got {s:?}"));
        if s == "exhaustive" {
            return Ok(BFamily::Exhaustive);
        }
        if let Some(size) = s.strip_prefix("all-of-size:") {
            return Ok(BFamily::AllOfSize { size: size.parse().map_err(|_| bad())? });
        }
        let rest = s.strip_prefix("sampled:").ok_or_else(bad)?;
        let (shape, seed) = rest.split_once('@').ok_or_else(bad)?;
        let (size, count) = shape.split_once('x').ok_or_else(bad)?;
        Ok(BFamily::Sampled {
            size: size.parse().map_err(|_| bad())?,
            count: count.parse().map_err(|_| bad())?,
            seed: seed.parse().map_err(|_| bad())?,
        })
    }

    /// Calls `f` on every member set (sorted left nodes). Stops early if `f` returns false.
    fn for_each(&self, n: u32, mut f: impl FnMut(&[u64]) -> bool) -> Result<u64> {
        self.validate(n)?;
        let left = 1u64 << n;
        let mut visited = 0u64;
        match self {
            BFamily::Exhaustive => {
                let mut set = Vec::with_capacity(left as usize);
                for mask in 1u64..(1u64 << left) {
                    set.clear();
                    set.extend((0..left).filter(|x| mask >> x & 1 == 1));
                    visited += 1;
                    if !f(&set) {
                        break;
                    }
                }
            }
            BFamily::AllOfSize { size } => {
                let total = binomial(left, *size as u64);
                if total > ENUMERATION_LIMIT {
                    return Err(Error::AuditInfeasible(format!(
                        "{total} sets of size {size} exceed the enumeration limit"
                    )));
                }
                for_each_combination(left, *size, |set| {
                    visited += 1;
                    f(set)
                });
            }
            BFamily::Sampled { size, count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for _ in 0..*count {
                    let mut set: Vec<u64> =
                        sample(&mut rng, left as usize, *size).into_iter().map(|v| v as u64).collect();
                    set.sort_unstable();
                    visited += 1;
                    if !f(&set) {
                        break;
                    }
                }
            }
        }
        Ok(visited)
    }
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Visits the `k`-subsets of `0..n` in lexicographic order until `f` returns false.
pub fn for_each_combination(n: u64, k: usize, mut f: impl FnMut(&[u64]) -> bool) {
    if k as u64 > n {
        return;
    }
    let mut idx: Vec<u64> = (0..k as u64).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - (k - i) as u64) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn describe_set(set: &[u64]) -> String {
    let items: Vec<String> = set.iter().map(|v| format!("{v:x}")).collect();
    format!("{{{}}}", items.join(","))
}

/// `| |E(B, A)| / (|B| D) - |A| / |R| |` for explicit `B` and `A`.
pub fn extractor_error(g: &LabeledBipartiteGraph, b: &[BitString], a: &[BitString]) -> Result<Rational> {
    if b.is_empty() {
        return Err(Error::Input("extractor error needs a nonempty left set".into()));
    }
    let p = g.params();
    let mut a_set = HashSet::with_capacity(a.len());
    for z in a {
        z.expect_width(p.m)?;
        a_set.insert(z.value());
    }
    let mut edges = 0u64;
    for x in b {
        x.expect_width(p.n)?;
        edges += g
            .right_histogram(x.value())
            .iter()
            .filter(|(z, _)| a_set.contains(z))
            .map(|(_, c)| c)
            .sum::<u64>();
    }
    let hit = Rational::new(edges as i128, b.len() as i128 * g.degree() as i128);
    let density = Rational::new(a_set.len() as i128, g.right_count() as i128);
    Ok(crate::rational::abs(hit - density))
}

/// Worst `A` for a fixed left-set histogram `counts[z]` (with multiplicity).
/// Returns the error and the witness `A`.
fn worst_error(counts: &[u64], set_size: u64, degree: u64) -> (Rational, Vec<u64>) {
    let r = counts.len() as u128;
    let bd = set_size as u128 * degree as u128;
    let mut excess = 0u128;
    let mut witness = Vec::new();
    for (z, &h) in counts.iter().enumerate() {
        let scaled = h as u128 * r;
        if scaled > bd {
            excess += scaled - bd;
            witness.push(z as u64);
        }
    }
    (Rational::new(excess as i128, (bd * r) as i128), witness)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub b_descriptor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rich_fraction: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_prime: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_a: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub k_prime: u32,
    pub checked: u64,
    #[serde(with = "as_string")]
    pub worst_error: Rational,
    pub witness_b: String,
    pub witness_a: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub graph_id: String,
    pub k: u32,
    #[serde(with = "as_string")]
    pub delta: Rational,
    #[serde(with = "as_string")]
    pub epsilon: Rational,
    pub mode: String,
    pub checked: u64,
    pub failures: Vec<FailureRecord>,
    pub failure_count: u64,
    pub passed: bool,
    /// Largest extractor error, or smallest rich fraction, over the checked sets.
    #[serde(with = "as_string")]
    pub worst: Rational,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<LevelSummary>,
}

impl VerificationReport {
    fn record(&mut self, failure: FailureRecord) {
        self.failure_count += 1;
        self.passed = false;
        if self.failures.len() < MAX_RECORDED_FAILURES {
            self.failures.push(failure);
        }
    }
}

/// Audits the extractor inequality for every prefix graph `k' = 1..=m` on the family.
pub fn check_prefix_extractor(
    g: &LabeledBipartiteGraph,
    epsilon: Rational,
    family: &BFamily,
) -> Result<VerificationReport> {
    let p = g.params();
    family.validate(p.n)?;
    let mut report = VerificationReport {
        graph_id: g.describe(),
        k: p.m,
        delta: p.delta,
        epsilon,
        mode: family.describe(),
        checked: 0,
        failures: Vec::new(),
        failure_count: 0,
        passed: true,
        worst: int(0),
        levels: Vec::new(),
    };
    let left = g.left_count();
    let full: Vec<Vec<(u64, u64)>> = (0..left).map(|x| g.right_histogram(x)).collect();
    for kp in 1..=p.m {
        if kp > 24 {
            return Err(Error::AuditInfeasible(format!("prefix width {kp} is too wide to histogram")));
        }
        let shift = p.m - kp;
        let min_size = 1u64 << kp;
        let width = 1usize << kp;
        let mut level = LevelSummary {
            k_prime: kp,
            checked: 0,
            worst_error: int(0),
            witness_b: String::new(),
            witness_a: String::new(),
        };
        let mut visit = |set: &[u64], counts: &[u64], report: &mut VerificationReport| {
            let (err, a) = worst_error(counts, set.len() as u64, g.degree());
            level.checked += 1;
            if err > level.worst_error || level.witness_b.is_empty() {
                level.worst_error = err;
                level.witness_b = describe_set(set);
                level.witness_a = describe_set(&a);
            }
            if err > epsilon {
                report.record(FailureRecord {
                    b_descriptor: describe_set(set),
                    worst_error: Some(err.to_string()),
                    rich_fraction: None,
                    k_prime: Some(kp),
                    witness_a: Some(describe_set(&a)),
                });
            }
        };
        if *family == BFamily::Exhaustive {
            // Gray-code walk over all subsets; one histogram updated per step.
            let mut counts = vec![0u64; width];
            let mut set: Vec<u64> = Vec::new();
            for i in 1u64..(1u64 << left) {
                let x = i.trailing_zeros() as u64;
                let adding = (i ^ (i >> 1)) >> x & 1 == 1;
                for &(z, c) in &full[x as usize] {
                    let slot = &mut counts[(z >> shift) as usize];
                    if adding {
                        *slot += c;
                    } else {
                        *slot -= c;
                    }
                }
                if adding {
                    let pos = set.partition_point(|&v| v < x);
                    set.insert(pos, x);
                } else {
                    set.retain(|&v| v != x);
                }
                if set.len() as u64 >= min_size {
                    visit(&set, &counts, &mut report);
                }
            }
        } else {
            family.for_each(p.n, |set| {
                if (set.len() as u64) < min_size {
                    return true;
                }
                let mut counts = vec![0u64; width];
                for &x in set {
                    for &(z, c) in &full[x as usize] {
                        counts[(z >> shift) as usize] += c;
                    }
                }
                visit(set, &counts, &mut report);
                true
            })?;
        }
        report.checked += level.checked;
        if level.worst_error > report.worst {
            report.worst = level.worst_error;
        }
        report.levels.push(level);
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Small,
    Large,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwnerClassification {
    pub node: BitString,
    pub regime: Regime,
    pub rich: bool,
    #[serde(with = "as_string")]
    pub owned_fraction: Rational,
    pub threshold_used: u64,
}

/// Per-graph cache of left-node histograms used by ownership audits.
///
/// In the small regime a label of `x` is owned when no *other* member of `B`
/// reaches its right node; parallel edges of `x` itself do not spoil
/// ownership. In the large regime a label is well behaved when the `B`-degree
/// of its right node, counted with multiplicity, is at most the threshold.
pub struct OwnerAuditor<'g> {
    g: &'g LabeledBipartiteGraph,
    /// Graph whose right nodes carry the adjacency (the unsplit base for split graphs).
    base: &'g LabeledBipartiteGraph,
    ell: u64,
    primes: &'g [u64],
    k: u32,
    delta: Rational,
    hists: HashMap<u64, Vec<(u64, u64)>>,
}

impl<'g> OwnerAuditor<'g> {
    pub fn new(g: &'g LabeledBipartiteGraph, k: u32, delta: Rational) -> Result<Self> {
        if !crate::rational::in_unit_interval(&delta) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0,1], got {delta}")));
        }
        let (base, ell, primes) = match g.structure() {
            Structure::Split(s) => (&s.base, s.ell, &s.primes.as_slice()[..s.ell as usize]),
            Structure::Plain => (g, 1, &[][..]),
        };
        Ok(OwnerAuditor {
            g,
            base,
            ell,
            primes,
            k,
            delta,
            hists: HashMap::new(),
        })
    }

    fn hist(&mut self, x: u64) -> &[(u64, u64)] {
        let base = self.base;
        self.hists.entry(x).or_insert_with(|| base.right_histogram(x))
    }

    pub fn regime(&self, b_size: usize) -> Regime {
        if (b_size as u128) <= 1u128 << self.k {
            Regime::Small
        } else {
            Regime::Large
        }
    }

    /// `ceil((2 / delta^2) |B| D / 2^k)`.
    pub fn large_threshold(&self, b_size: usize) -> u64 {
        let scale = int(2) / (self.delta * self.delta);
        let load = Rational::new(b_size as i128 * self.g.degree() as i128, 1i128 << self.k);
        ceil_u64(&(scale * load))
    }

    /// Classifies `x` with respect to the sorted set `b`.
    pub fn classify(&mut self, b: &[u64], x: u64) -> Result<OwnerClassification> {
        let n = self.g.params().n;
        if b.binary_search(&x).is_err() {
            return Err(Error::Input(format!("node {x:x} is not a member of B")));
        }
        let mut adjacency: HashMap<u64, Vec<(u64, u64)>> = HashMap::new();
        for &member in b {
            if member == x {
                continue;
            }
            for &(z, c) in self.hist(member).to_vec().iter() {
                adjacency.entry(z).or_default().push((member, c));
            }
        }
        let owned = self.owned_labels(x, b.len(), &adjacency);
        let regime = self.regime(b.len());
        let owned_fraction = Rational::new(owned as i128, self.g.degree() as i128);
        Ok(OwnerClassification {
            node: BitString::new(n, x)?,
            regime,
            rich: owned_fraction >= int(1) - self.delta,
            owned_fraction,
            threshold_used: match regime {
                Regime::Small => 1,
                Regime::Large => self.large_threshold(b.len()),
            },
        })
    }

    /// Owned (or well-behaved) labels of `x` given the adjacency of the other members.
    fn owned_labels(&mut self, x: u64, b_size: usize, others: &HashMap<u64, Vec<(u64, u64)>>) -> u64 {
        let regime = self.regime(b_size);
        let threshold = self.large_threshold(b_size);
        let empty = Vec::new();
        let hist = self.hist(x).to_vec();
        let mut owned = 0u64;
        for (z, mult) in hist {
            let nbrs = others.get(&z).unwrap_or(&empty);
            if self.ell == 1 && self.primes.is_empty() {
                let good = match regime {
                    Regime::Small => nbrs.is_empty(),
                    Regime::Large => mult + nbrs.iter().map(|(_, c)| c).sum::<u64>() <= threshold,
                };
                if good {
                    owned += mult;
                }
                continue;
            }
            // Split graph: the right node for prime index i also carries x mod p_i,
            // so another member collides only on primes dividing the difference.
            let mut extra: HashMap<u64, u64> = HashMap::new();
            let top = *self.primes.last().expect("split graphs have primes");
            for &(other, c) in nbrs {
                for p in prime_factors(x.abs_diff(other)) {
                    if p <= top && self.primes.binary_search(&p).is_ok() {
                        *extra.entry(p).or_insert(0) += c;
                    }
                }
            }
            let bad = match regime {
                Regime::Small => extra.len() as u64,
                Regime::Large => {
                    if mult > threshold {
                        self.ell
                    } else {
                        extra.values().filter(|&&c| mult + c > threshold).count() as u64
                    }
                }
            };
            owned += mult * (self.ell - bad);
        }
        owned
    }

    /// Labels owned by `x` when `B` is the whole left side; by monotonicity of
    /// small-regime ownership this lower-bounds the owned count for every `B`.
    fn owned_against_everyone(&mut self, x: u64, everyone: &HashMap<u64, Vec<(u64, u64)>>) -> u64 {
        let mut others = HashMap::new();
        for (z, list) in everyone {
            let filtered: Vec<(u64, u64)> = list.iter().copied().filter(|&(o, _)| o != x).collect();
            if !filtered.is_empty() {
                others.insert(*z, filtered);
            }
        }
        // Force the small-regime rule regardless of the nominal set size.
        self.owned_labels(x, 1, &others)
    }

    /// Rich fraction of one set, with the per-member classification.
    pub fn rich_fraction(&mut self, b: &[u64]) -> Result<Rational> {
        let mut rich = 0i128;
        for &x in b {
            if self.classify(b, x)?.rich {
                rich += 1;
            }
        }
        Ok(Rational::new(rich, b.len() as i128))
    }
}

/// Audits that in every set of the family at least `(1 - delta)|B|` members are rich owners.
///
/// For an all-of-size family in the small regime the audit first tries a
/// certificate: if the members that are not rich against the entire left side
/// cannot reach `delta |B|` in any set, every set of that size passes and is
/// counted as checked without enumeration.
pub fn rich_owner_fraction(
    g: &LabeledBipartiteGraph,
    family: &BFamily,
    k: u32,
    delta: Rational,
) -> Result<VerificationReport> {
    let p = g.params();
    family.validate(p.n)?;
    let mut auditor = OwnerAuditor::new(g, k, delta)?;
    let required = int(1) - delta;
    let mut report = VerificationReport {
        graph_id: g.describe(),
        k,
        delta,
        epsilon: delta * delta / int(2),
        mode: family.describe(),
        checked: 0,
        failures: Vec::new(),
        failure_count: 0,
        passed: true,
        worst: int(1),
        levels: Vec::new(),
    };
    if let BFamily::AllOfSize { size } = family {
        if auditor.regime(*size) == Regime::Small {
            let left = g.left_count();
            let mut everyone: HashMap<u64, Vec<(u64, u64)>> = HashMap::new();
            for x in 0..left {
                for &(z, c) in auditor.hist(x).to_vec().iter() {
                    everyone.entry(z).or_default().push((x, c));
                }
            }
            let mut possibly_poor = 0u64;
            let mut min_owned = int(1);
            for x in 0..left {
                let owned = auditor.owned_against_everyone(x, &everyone);
                let frac = Rational::new(owned as i128, g.degree() as i128);
                min_owned = min_owned.min(frac);
                if frac < required {
                    possibly_poor += 1;
                }
            }
            let worst_poor = possibly_poor.min(*size as u64);
            if Rational::from_integer(worst_poor as i128) <= delta * int(*size as i128) {
                let total = binomial(left, *size as u64);
                report.checked = u64::try_from(total).unwrap_or(u64::MAX);
                report.mode = format!("{} (certified)", family.describe());
                report.worst = Rational::new((*size as u64 - worst_poor) as i128, *size as i128);
                return Ok(report);
            }
        }
    }
    let visited = family.for_each(p.n, |set| {
        match auditor.rich_fraction(set) {
            Ok(frac) => {
                if frac < report.worst {
                    report.worst = frac;
                }
                if frac < required {
                    report.record(FailureRecord {
                        b_descriptor: describe_set(set),
                        worst_error: None,
                        rich_fraction: Some(frac.to_string()),
                        k_prime: None,
                        witness_a: None,
                    });
                }
            }
            Err(_) => unreachable!("members of a family set are always in the set"),
        }
        true
    })?;
    report.checked = visited;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::graph::GraphParams;
    use crate::rational::rat;

    fn bs(width: u32, v: u64) -> BitString {
        BitString::new(width, v).unwrap()
    }

    #[test]
    fn family_descriptions_parse_back() {
        for f in [
            BFamily::Exhaustive,
            BFamily::AllOfSize { size: 8 },
            BFamily::Sampled { size: 16, count: 3, seed: 9 },
        ] {
            assert_eq!(BFamily::parse(&f.describe()).unwrap(), f);
        }
        assert!(BFamily::parse("sampled:4").is_err());
    }

    fn complete(n: u32, m: u32) -> LabeledBipartiteGraph {
        LabeledBipartiteGraph::from_fn(n, m, m, |_, y| y).unwrap()
    }

    fn hub(n: u32, m: u32, d: u32) -> LabeledBipartiteGraph {
        LabeledBipartiteGraph::from_fn(n, m, d, |_, _| 0).unwrap()
    }

    #[test]
    fn complete_graph_has_zero_error() {
        let g = complete(3, 2);
        let b = [bs(3, 1), bs(3, 4)];
        for mask in 0u64..16 {
            let a: Vec<BitString> = (0..4).filter(|z| mask >> z & 1 == 1).map(|z| bs(2, z)).collect();
            assert_eq!(extractor_error(&g, &b, &a).unwrap(), int(0));
        }
    }

    #[test]
    fn hub_error_is_one_minus_density() {
        let g = hub(3, 2, 1);
        let err = extractor_error(&g, &[bs(3, 0), bs(3, 7)], &[bs(2, 0)]).unwrap();
        assert_eq!(err, rat(3, 4));
        assert!(extractor_error(&g, &[], &[bs(2, 0)]).is_err());
    }

    #[test]
    fn complement_symmetry() {
        let g = LabeledBipartiteGraph::seeded(GraphParams::plain(4, 3, 3), 3).unwrap();
        let b = [bs(4, 2), bs(4, 9), bs(4, 11)];
        let a = [bs(3, 0), bs(3, 5)];
        let rest: Vec<BitString> = (0..8).filter(|z| *z != 0 && *z != 5).map(|z| bs(3, z)).collect();
        assert_eq!(
            extractor_error(&g, &b, &a).unwrap(),
            extractor_error(&g, &b, &rest).unwrap()
        );
    }

    #[test]
    fn worst_error_matches_brute_force_over_a() {
        let g = LabeledBipartiteGraph::seeded(GraphParams::plain(4, 3, 2), 8).unwrap();
        let b: Vec<BitString> = [1u64, 3, 6, 10, 12].iter().map(|&v| bs(4, v)).collect();
        let mut brute = int(0);
        for mask in 0u64..256 {
            let a: Vec<BitString> = (0..8).filter(|z| mask >> z & 1 == 1).map(|z| bs(3, z)).collect();
            brute = brute.max(extractor_error(&g, &b, &a).unwrap());
        }
        let mut counts = vec![0u64; 8];
        for x in &b {
            for z in g.neighbors_multiset(x).unwrap() {
                counts[z.value() as usize] += 1;
            }
        }
        assert_eq!(worst_error(&counts, 5, 4).0, brute);
    }

    #[test]
    fn prefix_check_on_complete_and_hub() {
        let ok = check_prefix_extractor(&complete(3, 2), rat(1, 100), &BFamily::AllOfSize { size: 4 }).unwrap();
        assert!(ok.passed);
        assert_eq!(ok.worst, int(0));
        assert_eq!(ok.levels.len(), 2);
        let bad = check_prefix_extractor(&hub(3, 2, 1), rat(1, 4), &BFamily::AllOfSize { size: 4 }).unwrap();
        assert!(!bad.passed);
        assert_eq!(bad.levels[0].worst_error, rat(1, 2));
        assert_eq!(bad.levels[1].worst_error, rat(3, 4));
    }

    #[test]
    fn gray_walk_agrees_with_direct_sets() {
        let g = LabeledBipartiteGraph::seeded(GraphParams::plain(3, 2, 2), 21).unwrap();
        let exhaustive = check_prefix_extractor(&g, int(1), &BFamily::Exhaustive).unwrap();
        for level in &exhaustive.levels {
            let mut worst = int(0);
            for size in (1usize << level.k_prime)..=8 {
                let r = check_prefix_extractor(&g, int(1), &BFamily::AllOfSize { size }).unwrap();
                worst = worst.max(r.levels[level.k_prime as usize - 1].worst_error);
            }
            assert_eq!(level.worst_error, worst);
        }
    }

    #[test]
    fn exhaustive_family_needs_small_n() {
        let g = complete(5, 1);
        assert!(matches!(
            check_prefix_extractor(&g, int(1), &BFamily::Exhaustive),
            Err(Error::AuditInfeasible(_))
        ));
    }

    #[test]
    fn injective_graph_owners_are_all_rich() {
        let g = LabeledBipartiteGraph::from_fn(3, 3, 0, |x, _| x).unwrap();
        let mut auditor = OwnerAuditor::new(&g, 3, rat(1, 2)).unwrap();
        let c = auditor.classify(&[0, 2, 5], 2).unwrap();
        assert_eq!(c.regime, Regime::Small);
        assert!(c.rich);
        assert_eq!(c.owned_fraction, int(1));
        assert_eq!(c.threshold_used, 1);
        let r = rich_owner_fraction(&g, &BFamily::AllOfSize { size: 3 }, 3, rat(1, 2)).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn hub_graph_owners_are_poor() {
        let g = hub(3, 2, 1);
        let mut auditor = OwnerAuditor::new(&g, 2, rat(1, 2)).unwrap();
        for x in [1, 6] {
            let c = auditor.classify(&[1, 6], x).unwrap();
            assert!(!c.rich);
            assert_eq!(c.owned_fraction, int(0));
        }
        assert!(auditor.classify(&[1, 6], 3).is_err());
        let r = rich_owner_fraction(&g, &BFamily::AllOfSize { size: 2 }, 2, rat(1, 2)).unwrap();
        assert!(!r.passed);
        assert_eq!(r.worst, int(0));
    }

    #[test]
    fn large_regime_threshold() {
        let g = hub(3, 1, 1);
        let mut auditor = OwnerAuditor::new(&g, 1, rat(1, 2)).unwrap();
        // ceil(8 * 4 * 2 / 2) = 32 >= 8 edges on the hub, so everyone is well behaved.
        let c = auditor.classify(&[0, 1, 2, 3], 0).unwrap();
        assert_eq!(c.regime, Regime::Large);
        assert_eq!(c.threshold_used, 32);
        assert!(c.rich);
    }

    #[test]
    fn combinations_are_complete() {
        let mut seen = 0;
        for_each_combination(6, 3, |s| {
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            seen += 1;
            true
        });
        assert_eq!(seen, 20);
        assert_eq!(binomial(64, 8), 4_426_165_368);
        let mut empty = 0;
        for_each_combination(3, 0, |_| {
            empty += 1;
            true
        });
        assert_eq!(empty, 1);
    }
}
