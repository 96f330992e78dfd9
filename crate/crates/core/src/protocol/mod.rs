//! Encoding and decoding for three senders.
//!
//! Each sender transmits a uniformly random neighbor of its string in its own
//! bipartite graph together with a CRT fingerprint. The decoder recovers the
//! strings stage by stage from enumerable low-complexity sets.

pub mod decode;
pub mod membership;
pub mod plan;
pub mod rates;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::construction::{build_random_graph, construct_rich_owner_graph, ConstructionConfig, ConstructionReport};
use crate::crt::{draw_hash_tag, HashScheme, HashTag};
use crate::error::{Error, Result};
use crate::graph::LabeledBipartiteGraph;
use crate::oracle::Sender;
use crate::rational::{derive_seed, int, Rational};

pub use decode::{decode_full, decode_known_profile, DecodeOptions, DecodeOutcome, DecodeResult, ProfileSpace};
pub use membership::{decode_membership, pigeonhole_collision, MembershipOutcome};
pub use plan::{derive_decoding_bounds, BranchKind, BranchPlan, DecodingPlan, Given, StagePlan};
pub use rates::{profile_rates, RateRule, RateVector};

/// One sender's message.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Codeword {
    pub sender: Sender,
    pub payload: BitString,
    pub tag: Option<HashTag>,
}

/// JSON form `{sender, payload_hex, payload_bits, tag: "p:r"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodewordWire {
    pub sender: String,
    pub payload_hex: String,
    pub payload_bits: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

impl Codeword {
    pub fn to_wire(&self) -> CodewordWire {
        CodewordWire {
            sender: self.sender.to_string(),
            payload_hex: self.payload.to_hex(),
            payload_bits: self.payload.width(),
            tag: self.tag.map(|t| t.wire()),
        }
    }

    /// `source_bits` is the width of the fingerprinted source string.
    pub fn from_wire(w: &CodewordWire, source_bits: u32) -> Result<Self> {
        Ok(Codeword {
            sender: Sender::parse(&w.sender)?,
            payload: BitString::from_hex(w.payload_bits, &w.payload_hex)?,
            tag: w
                .tag
                .as_deref()
                .map(|t| HashTag::parse_wire(t, source_bits))
                .transpose()?,
        })
    }

    /// Bits on the wire: payload plus fingerprint.
    pub fn length(&self, scheme: Option<&HashScheme>) -> u32 {
        self.payload.width() + scheme.map_or(0, HashScheme::tag_bits)
    }
}

/// Sends a uniformly random neighbor of `x` and, with a scheme, a fingerprint of `x`.
pub fn encode(
    sender: Sender,
    graph: &LabeledBipartiteGraph,
    x: &BitString,
    scheme: Option<&HashScheme>,
    seed: u64,
) -> Result<Codeword> {
    x.expect_width(graph.params().n)?;
    let label = ChaCha8Rng::seed_from_u64(seed).gen_range(0..graph.degree());
    let payload = BitString::new(graph.params().m, graph.neighbor_raw(x.value(), label))?;
    let tag = scheme.map(|s| draw_hash_tag(x, s, derive_seed(seed, 1))).transpose()?;
    Ok(Codeword { sender, payload, tag })
}

/// Which graphs the senders use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphMode {
    /// Verified extractor, edge-split into a rich-owner graph; built for `k = n_i + 1`.
    Pipeline,
    /// Plain random graph with `n_i` output bits.
    Extractor,
}

impl GraphMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "pipeline" => Ok(GraphMode::Pipeline),
            "extractor" => Ok(GraphMode::Extractor),
            other => Err(Error::Input(format!("unknown graph mode {other:?}"))),
        }
    }

    /// Output width `k` of the underlying extractor for a sender with rate `rate`.
    pub fn k_for_rate(self, n: u32, rate: u32) -> u32 {
        let k = match self {
            GraphMode::Pipeline => rate + 1,
            GraphMode::Extractor => rate,
        };
        k.clamp(1, n)
    }
}

impl std::fmt::Display for GraphMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GraphMode::Pipeline => "pipeline",
            GraphMode::Extractor => "extractor",
        })
    }
}

/// Builds sender graphs on demand, one per distinct extractor width.
pub struct GraphBank {
    n: u32,
    mode: GraphMode,
    delta: Rational,
    c: u32,
    seed: u64,
    built: HashMap<u32, (LabeledBipartiteGraph, Option<ConstructionReport>)>,
}

impl GraphBank {
    pub fn new(n: u32, mode: GraphMode, delta: Rational, c: u32, seed: u64) -> Self {
        GraphBank {
            n,
            mode,
            delta,
            c,
            seed,
            built: HashMap::new(),
        }
    }

    pub fn graph_for_k(&mut self, k: u32) -> Result<LabeledBipartiteGraph> {
        if let Some((g, _)) = self.built.get(&k) {
            return Ok(g.clone());
        }
        let seed = derive_seed(self.seed, k as u64);
        let entry = match self.mode {
            GraphMode::Pipeline => {
                let mut cfg = ConstructionConfig::new(self.n, k, self.delta, seed);
                cfg.c = self.c;
                let (g, report) = construct_rich_owner_graph(&cfg)?;
                (g, Some(report))
            }
            GraphMode::Extractor => {
                let epsilon = self.delta * self.delta / int(2);
                (build_random_graph(self.n, k, epsilon, self.c, seed)?, None)
            }
        };
        let g = entry.0.clone();
        self.built.insert(k, entry);
        Ok(g)
    }

    pub fn graphs_for(&mut self, rates: &RateVector) -> Result<[LabeledBipartiteGraph; 3]> {
        let [a, b, c] = rates.as_array().map(|r| self.mode.k_for_rate(self.n, r));
        Ok([self.graph_for_k(a)?, self.graph_for_k(b)?, self.graph_for_k(c)?])
    }

    /// Construction reports of every pipeline graph built so far, by `k`.
    pub fn reports(&self) -> Vec<ConstructionReport> {
        let mut out: Vec<ConstructionReport> = self.built.values().filter_map(|(_, r)| r.clone()).collect();
        out.sort_by_key(|r| r.k);
        out
    }
}

/// Encodes all three strings with per-sender seeds derived from `seed`.
pub fn encode_triple(
    graphs: &[LabeledBipartiteGraph; 3],
    triple: &[BitString; 3],
    scheme: Option<&HashScheme>,
    seed: u64,
) -> Result<[Codeword; 3]> {
    let mut out = Vec::with_capacity(3);
    for s in Sender::ALL {
        let i = s.index();
        out.push(encode(s, &graphs[i], &triple[i], scheme, derive_seed(seed, i as u64))?);
    }
    Ok(out.try_into().expect("three codewords"))
}
