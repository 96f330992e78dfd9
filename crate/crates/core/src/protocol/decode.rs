//! Staged decoding with a fingerprint race between branches.
//!
//! Every branch runs three enumeration stages. A stage enumerates the oracle's
//! set of low-complexity candidates for its target and succeeds when exactly
//! one candidate is adjacent to the target's payload. Branches are scheduled
//! round-robin with a fixed step quantum; the first completed branch whose
//! triple matches all three fingerprints wins, ties going to the smaller
//! profile and then the smaller branch index. The schedule is evaluated in
//! closed form, so the result does not depend on how branches are executed.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::plan::{BranchKind, DecodingPlan, Given, StagePlan, BRANCH_COUNT};
use super::{Codeword, RateVector};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::graph::LabeledBipartiteGraph;
use crate::oracle::{ComplexityOracle, ComplexityProfile, Condition, Sender, Triple};
use crate::scenarios::region::validate_rate_region_with_margin;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeOptions {
    /// Enumeration steps granted to each branch per scheduling round.
    pub quantum: u64,
    /// Total enumeration steps across all branches before giving up.
    pub budget: u64,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        DecodeOptions {
            quantum: 64,
            budget: 1 << 40,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub triple: Option<Triple>,
    pub branch: Option<usize>,
    /// Profile the winning branch was planned for.
    pub profile: Option<ComplexityProfile>,
    pub steps: u64,
    /// Branch instances raced.
    pub instances: usize,
    pub failure: Option<String>,
}

impl DecodeOutcome {
    pub fn is_ok(&self) -> bool {
        self.triple.is_some()
    }

    pub fn to_result(&self) -> DecodeResult {
        DecodeResult {
            status: if self.is_ok() { "ok" } else { "fail" }.to_string(),
            triple_hex: self.triple.map(|t| t.map(|x| x.to_hex())),
            branch: self.branch,
            steps: self.steps,
            survivors: None,
            reason: self.failure.clone(),
        }
    }
}

/// JSON form of a decoding result.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub status: String,
    pub triple_hex: Option<[String; 3]>,
    pub branch: Option<usize>,
    pub steps: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survivors: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct StageKey {
    target: Sender,
    sources: Vec<(Sender, BitString)>,
    payloads: Vec<Sender>,
    bound: u32,
}

#[derive(Clone, Copy)]
struct StageRun {
    found: Option<BitString>,
    steps: u64,
}

struct Stager<'a> {
    oracle: &'a dyn ComplexityOracle,
    graphs: &'a [LabeledBipartiteGraph; 3],
    codewords: &'a [Codeword; 3],
    memo: HashMap<StageKey, StageRun>,
}

impl<'a> Stager<'a> {
    fn new(
        oracle: &'a dyn ComplexityOracle,
        graphs: &'a [LabeledBipartiteGraph; 3],
        codewords: &'a [Codeword; 3],
    ) -> Result<Self> {
        for s in Sender::ALL {
            let (c, g) = (&codewords[s.index()], &graphs[s.index()]);
            if c.sender != s {
                return Err(Error::Input(format!("codeword {} belongs to sender {}", s.index(), c.sender)));
            }
            c.payload.expect_width(g.params().m)?;
            if g.params().n != oracle.width() {
                return Err(Error::WidthMismatch {
                    expected: oracle.width(),
                    actual: g.params().n,
                });
            }
        }
        Ok(Stager {
            oracle,
            graphs,
            codewords,
            memo: HashMap::new(),
        })
    }

    fn stage(&mut self, plan: &StagePlan, known: &[Option<BitString>; 3]) -> Result<StageRun> {
        let mut sources = Vec::new();
        let mut payloads = Vec::new();
        for g in &plan.given {
            match *g {
                Given::Source(s) => sources.push((s, known[s.index()].expect("earlier stage recovered the source"))),
                Given::Payload(s) => payloads.push(s),
            }
        }
        let key = StageKey {
            target: plan.target,
            sources,
            payloads,
            bound: plan.bound,
        };
        if let Some(run) = self.memo.get(&key) {
            return Ok(*run);
        }
        let mut conditions: Vec<Condition> = key
            .sources
            .iter()
            .map(|&(sender, value)| Condition::Source { sender, value })
            .collect();
        conditions.extend(key.payloads.iter().map(|&s| Condition::Payload {
            sender: s,
            payload: self.codewords[s.index()].payload,
            graph: self.graphs[s.index()].clone(),
        }));
        let bset = self.oracle.enumerate_b_set(plan.target, &conditions, plan.bound)?;
        let cap = if plan.bound >= 63 { usize::MAX } else { 1usize << (plan.bound + 1) };
        let members = &bset.members[..bset.members.len().min(cap)];
        let graph = &self.graphs[plan.target.index()];
        let payload = self.codewords[plan.target.index()].payload.value();
        let mut adjacent = members.iter().filter(|x| graph.is_neighbor(x.value(), payload));
        let found = match (adjacent.next(), adjacent.next()) {
            (Some(x), None) => Some(*x),
            _ => None,
        };
        let run = StageRun {
            found,
            steps: members.len() as u64,
        };
        self.memo.insert(key, run);
        Ok(run)
    }

    /// Runs one branch; returns the recovered triple (if every stage succeeded) and its cost.
    fn branch(&mut self, stages: &[StagePlan; 3]) -> Result<(Option<Triple>, u64)> {
        let mut known: [Option<BitString>; 3] = [None; 3];
        let mut steps = 0;
        for st in stages {
            let run = self.stage(st, &known)?;
            steps += run.steps;
            match run.found {
                Some(x) => known[st.target.index()] = Some(x),
                None => return Ok((None, steps)),
            }
        }
        Ok((Some(known.map(|x| x.expect("all stages succeeded"))), steps))
    }

    /// Whether every fingerprint verifies; codewords without a tag impose no check.
    fn tags_match(&self, triple: &Triple) -> bool {
        self.codewords
            .iter()
            .zip(triple)
            .all(|(c, x)| c.tag.is_none_or(|t| t.verifies(x)))
    }
}

struct Contender {
    profile: ComplexityProfile,
    branch: usize,
    cost: u64,
    matched: Option<Triple>,
}

fn race(contenders: Vec<Contender>, opts: &DecodeOptions) -> DecodeOutcome {
    let quantum = opts.quantum.max(1);
    let rounds = |cost: u64| cost.div_ceil(quantum).max(1);
    let instances = contenders.len();
    let winner = contenders
        .iter()
        .filter(|c| c.matched.is_some())
        .min_by_key(|c| (rounds(c.cost), c.profile, c.branch));
    let steps: u64 = match winner {
        Some(w) => {
            let limit = rounds(w.cost).saturating_mul(quantum);
            contenders.iter().map(|c| c.cost.min(limit)).sum()
        }
        None => contenders.iter().map(|c| c.cost).sum(),
    };
    let failure = |reason: &str, steps| DecodeOutcome {
        triple: None,
        branch: None,
        profile: None,
        steps,
        instances,
        failure: Some(reason.to_string()),
    };
    if steps > opts.budget {
        return failure("step budget exhausted", opts.budget);
    }
    match winner {
        Some(w) => DecodeOutcome {
            triple: w.matched,
            branch: Some(w.branch),
            profile: Some(w.profile),
            steps,
            instances,
            failure: None,
        },
        None => failure("no branch produced a fingerprint-consistent triple", steps),
    }
}

/// Races the eighteen branches of a plan.
pub fn decode_known_profile(
    codewords: &[Codeword; 3],
    oracle: &dyn ComplexityOracle,
    graphs: &[LabeledBipartiteGraph; 3],
    plan: &DecodingPlan,
    opts: &DecodeOptions,
) -> Result<DecodeOutcome> {
    let mut stager = Stager::new(oracle, graphs, codewords)?;
    let mut contenders = Vec::with_capacity(plan.branches.len());
    for b in &plan.branches {
        let (triple, cost) = stager.branch(&b.stages)?;
        contenders.push(Contender {
            profile: plan.profile,
            branch: b.index,
            cost,
            matched: triple.filter(|t| stager.tags_match(t)),
        });
    }
    Ok(race(contenders, opts))
}

/// One branch planned for one candidate profile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub branch: usize,
    pub bounds: [u32; 3],
    /// Lexicographically smallest admissible profile yielding these bounds.
    pub profile: ComplexityProfile,
}

type SpaceKey = (RateVector, u32, u32);

/// Candidate profiles for the outer search, memoized per rates, slack and entry cap.
#[derive(Default)]
pub struct ProfileSpace {
    cache: Mutex<HashMap<SpaceKey, Arc<Vec<Instance>>>>,
}

impl ProfileSpace {
    pub fn new() -> Self {
        ProfileSpace::default()
    }

    /// Visits, in lexicographic order, every profile with entries in `0..=cap` that is
    /// monotone and subadditive within `slack` and meets every rate-region
    /// inequality within `slack`.
    pub fn for_each_admissible(rates: &RateVector, slack: u32, cap: u32, mut f: impl FnMut(ComplexityProfile)) {
        let s = slack as i64;
        let cap = cap as i64;
        let [na, nb, nc] = rates.as_array().map(i64::from);
        let pair_range = |x: i64, y: i64| (x.max(y) - s).max(0)..=(x + y + s).min(cap);
        for a in 0..=cap {
            for b in 0..=cap {
                for c in 0..=cap {
                    for ab in pair_range(a, b) {
                        for ac in pair_range(a, c) {
                            for bc in pair_range(b, c) {
                                let lo = [a, b, c, ab, ac, bc].into_iter().max().expect("nonempty") - s;
                                let hi = [
                                    cap,
                                    na + nb + nc + s,
                                    na + bc + s,
                                    nb + ac + s,
                                    nc + ab + s,
                                    na + nb + c + s,
                                    na + nc + b + s,
                                    nb + nc + a + s,
                                    ab + c + s,
                                    ac + b + s,
                                    bc + a + s,
                                    ab + ac + s,
                                    ab + bc + s,
                                    ac + bc + s,
                                ]
                                .into_iter()
                                .min()
                                .expect("nonempty");
                                for abc in lo.max(0)..=hi {
                                    f(ComplexityProfile::new(
                                        [a, b, c, ab, ac, bc, abc].map(|v| v as u32),
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Distinct branch instances over all admissible profiles, ordered by profile then branch.
    pub fn instances(&self, rates: &RateVector, slack: u32, cap: u32) -> Arc<Vec<Instance>> {
        let key = (*rates, slack, cap);
        if let Some(v) = self.cache.lock().expect("profile cache poisoned").get(&key) {
            return Arc::clone(v);
        }
        let kinds: Vec<BranchKind> = (0..BRANCH_COUNT)
            .map(|i| BranchKind::from_index(i).expect("index in range"))
            .collect();
        // Stage bounds never exceed `cap + slack`, so a dense table per branch suffices.
        let side = (cap + slack + 1) as usize;
        let mut seen: Vec<Vec<Option<ComplexityProfile>>> = vec![vec![None; side * side * side]; BRANCH_COUNT];
        Self::for_each_admissible(rates, slack, cap, |p| {
            for (i, kind) in kinds.iter().enumerate() {
                let [x, y, z] = kind.bounds(&p, rates, slack).map(|b| b as usize);
                seen[i][(x * side + y) * side + z].get_or_insert(p);
            }
        });
        let mut out: Vec<Instance> = Vec::new();
        for (branch, table) in seen.into_iter().enumerate() {
            for (idx, p) in table.into_iter().enumerate() {
                if let Some(profile) = p {
                    let bounds = [idx / (side * side), idx / side % side, idx % side].map(|b| b as u32);
                    out.push(Instance { branch, bounds, profile });
                }
            }
        }
        out.sort_by_key(|i| (i.profile, i.branch));
        let out = Arc::new(out);
        self.cache
            .lock()
            .expect("profile cache poisoned")
            .insert(key, Arc::clone(&out));
        out
    }
}

/// Races every branch under every admissible candidate profile.
pub fn decode_full(
    codewords: &[Codeword; 3],
    rates: &RateVector,
    oracle: &dyn ComplexityOracle,
    graphs: &[LabeledBipartiteGraph; 3],
    space: &ProfileSpace,
    opts: &DecodeOptions,
) -> Result<DecodeOutcome> {
    let slack = oracle.slack();
    let instances = space.instances(rates, slack, oracle.entry_cap());
    let mut stager = Stager::new(oracle, graphs, codewords)?;
    let mut contenders = Vec::with_capacity(instances.len());
    for inst in instances.iter() {
        debug_assert!(validate_rate_region_with_margin(rates, &inst.profile, -(slack as i64)).passed);
        let kind = BranchKind::from_index(inst.branch).expect("index in range");
        let (triple, cost) = stager.branch(&kind.stages(inst.bounds))?;
        contenders.push(Contender {
            profile: inst.profile,
            branch: inst.branch,
            cost,
            matched: triple.filter(|t| stager.tags_match(t)),
        });
    }
    Ok(race(contenders, opts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissible_enumeration_matches_filters() {
        let rates = RateVector::new(2, 1, 2);
        let (slack, cap) = (1, 4);
        let mut fast = Vec::new();
        ProfileSpace::for_each_admissible(&rates, slack, cap, |p| fast.push(p));
        let mut slow = Vec::new();
        let mut v = [0u32; 7];
        loop {
            let p = ComplexityProfile::new(v);
            if p.is_monotone(slack)
                && p.is_subadditive(slack)
                && validate_rate_region_with_margin(&rates, &p, -(slack as i64)).passed
            {
                slow.push(p);
            }
            let Some(i) = (0..7).rev().find(|&i| v[i] < cap) else { break };
            v[i] += 1;
            v[i + 1..].iter_mut().for_each(|x| *x = 0);
        }
        assert_eq!(fast, slow);
        assert!(!fast.is_empty());
    }

    fn contender(profile: u32, branch: usize, cost: u64, ok: bool) -> Contender {
        let x = BitString::new(1, 1).unwrap();
        Contender {
            profile: ComplexityProfile::new([profile; 7]),
            branch,
            cost,
            matched: ok.then_some([x; 3]),
        }
    }

    #[test]
    fn race_semantics() {
        let opts = DecodeOptions { quantum: 10, budget: 1000 };
        let out = race(
            vec![contender(0, 0, 35, false), contender(0, 1, 25, true), contender(0, 2, 21, true)],
            &opts,
        );
        // both matches finish in round 3; lower index wins; work is capped at 30 per branch
        assert_eq!(out.branch, Some(1));
        assert_eq!(out.steps, 30 + 25 + 21);
        let none = race(vec![contender(0, 0, 5, false)], &opts);
        assert!(!none.is_ok());
        assert_eq!(none.steps, 5);
        let tight = race(vec![contender(0, 0, 5000, true)], &opts);
        assert_eq!(tight.failure.as_deref(), Some("step budget exhausted"));
    }
}
