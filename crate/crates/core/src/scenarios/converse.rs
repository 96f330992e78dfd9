//! Pigeonhole audit of explicit encoder and decoder tables.
//!
//! Strings are the integers `0..2^k`. The encoder may be randomized: row `x`
//! lists the codeword of `x` under each recorded coin sequence. For a fixed
//! coin sequence the decoder can only succeed on a set of strings the encoder
//! maps injectively, so short codewords bound the success rate.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderTable {
    /// `rows[x][r]` is the codeword of string `x` under coin sequence `r`.
    rows: Vec<Vec<BitString>>,
}

impl EncoderTable {
    pub fn new(rows: Vec<Vec<BitString>>) -> Result<Self> {
        let coins = rows.first().map_or(0, Vec::len);
        if coins == 0 {
            return Err(Error::MalformedTable("encoder needs at least one string and one coin sequence".into()));
        }
        if let Some(x) = rows.iter().position(|r| r.len() != coins) {
            return Err(Error::MalformedTable(format!(
                "string {x} has {} coin sequences, expected {coins}",
                rows[x].len()
            )));
        }
        Ok(EncoderTable { rows })
    }

    pub fn deterministic(codes: Vec<BitString>) -> Result<Self> {
        EncoderTable::new(codes.into_iter().map(|c| vec![c]).collect())
    }

    pub fn strings(&self) -> usize {
        self.rows.len()
    }

    pub fn coins(&self) -> usize {
        self.rows[0].len()
    }

    pub fn encode(&self, x: usize, coin: usize) -> BitString {
        self.rows[x][coin]
    }

    pub fn max_codeword_len(&self) -> u32 {
        self.rows.iter().flatten().map(BitString::width).max().unwrap_or(0)
    }
}

/// Deterministic decoder; codewords absent from the table decode to nothing.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DecoderTable {
    map: HashMap<BitString, u64>,
}

impl DecoderTable {
    pub fn new(entries: impl IntoIterator<Item = (BitString, u64)>) -> Result<Self> {
        let mut map = HashMap::new();
        for (c, x) in entries {
            if map.insert(c, x).is_some_and(|prev| prev != x) {
                return Err(Error::MalformedTable(format!("codeword {c} decodes two ways")));
            }
        }
        Ok(DecoderTable { map })
    }

    /// The best decoder for one coin sequence: each codeword goes to its smallest preimage.
    pub fn best_for(encoder: &EncoderTable, coin: usize) -> Self {
        let mut map = HashMap::new();
        for x in (0..encoder.strings()).rev() {
            map.insert(encoder.encode(x, coin), x as u64);
        }
        DecoderTable { map }
    }

    pub fn decode(&self, codeword: &BitString) -> Option<u64> {
        self.map.get(codeword).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ConverseVerdict {
    /// Some coin sequence decodes at least the required number of strings.
    Pass { coin: usize, successes: u64, required: u64 },
    /// Two strings share a codeword under the best coin sequence.
    Witness {
        coin: usize,
        first: u64,
        second: u64,
        codeword: BitString,
        successes: u64,
        required: u64,
    },
    /// The encoder is injective but the decoder still falls short.
    Shortfall { coin: usize, successes: u64, required: u64 },
}

impl ConverseVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, ConverseVerdict::Pass { .. })
    }
}

/// Audits a claimed success rate `1 - epsilon` on all `2^k` strings.
pub fn converse_bound_check(encoder: &EncoderTable, decoder: &DecoderTable, k: u32, epsilon: f64) -> Result<ConverseVerdict> {
    if k > 24 {
        return Err(Error::AuditInfeasible(format!("2^{k} strings")));
    }
    let m = 1usize << k;
    if encoder.strings() != m {
        return Err(Error::MalformedTable(format!(
            "encoder lists {} strings, expected 2^{k} = {m}",
            encoder.strings()
        )));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} outside [0, 1)")));
    }
    let required = ((1.0 - epsilon) * m as f64 - 1e-9).ceil().max(0.0) as u64;
    let (coin, successes) = (0..encoder.coins())
        .map(|r| {
            let ok = (0..m).filter(|&x| decoder.decode(&encoder.encode(x, r)) == Some(x as u64)).count();
            (r, ok as u64)
        })
        .max_by_key(|&(r, ok)| (ok, std::cmp::Reverse(r)))
        .expect("at least one coin sequence");
    if successes >= required {
        return Ok(ConverseVerdict::Pass { coin, successes, required });
    }
    let mut seen: HashMap<BitString, u64> = HashMap::new();
    for x in 0..m as u64 {
        let c = encoder.encode(x as usize, coin);
        if let Some(&first) = seen.get(&c) {
            return Ok(ConverseVerdict::Witness {
                coin,
                first,
                second: x,
                codeword: c,
                successes,
                required,
            });
        }
        seen.insert(c, x);
    }
    Ok(ConverseVerdict::Shortfall { coin, successes, required })
}
