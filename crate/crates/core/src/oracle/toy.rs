//! A tiny budgeted machine whose time-bounded complexity is computable by
//! enumerating every program up to a length limit.
//!
//! Programs are bit strings read from the most significant end. The machine
//! knows the width of the output it is asked for and starts with an optional
//! preloaded buffer (the conditioning strings); the output is whatever the
//! program appends after the preload.
//!
//! | opcode | fields        | effect                                              |
//! |--------|---------------|-----------------------------------------------------|
//! | `00`   | `len:4`, data | append `len` literal bits                           |
//! | `01`   |               | extend the buffer periodically to the full width    |
//! | `10`   | `i:2`         | append side input `i`                               |
//! | `11`   |               | halt                                                |
//!
//! Running off the end of the program also halts. A truncated field, a
//! repeat on an empty buffer, a missing side input, overshooting the width or
//! exceeding the step budget (one step per instruction and per appended bit)
//! yields no output.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::{joint_string, BSet, ComplexityOracle, ComplexityProfile, Condition, Sender, Subset, Triple};
use crate::bits::BitString;
use crate::error::{Error, Result};

/// Encoded length of a literal instruction minus its payload.
pub const HEADER_BITS: u32 = 6;
/// Longest program length the enumerator accepts.
pub const MAX_PROGRAM_BITS: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ToyMachineConfig {
    /// Longest program considered (`L`).
    pub max_len: u32,
    /// Step budget (`T`).
    pub step_budget: u64,
}

impl ToyMachineConfig {
    pub fn new(max_len: u32, step_budget: u64) -> Result<Self> {
        if max_len > MAX_PROGRAM_BITS {
            return Err(Error::InvalidParameter(format!(
                "program length limit {max_len} exceeds {MAX_PROGRAM_BITS}"
            )));
        }
        Ok(ToyMachineConfig { max_len, step_budget })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ToyComplexity {
    Exact(u32),
    /// No program within the length and step budgets prints the string.
    ExceedsL,
}

struct Reader {
    program: u64,
    width: u32,
    pos: u32,
}

impl Reader {
    fn read(&mut self, k: u32) -> Option<u64> {
        if self.pos + k > self.width {
            return None;
        }
        let shift = self.width - self.pos - k;
        self.pos += k;
        Some(if k == 0 { 0 } else { (self.program >> shift) & ((1u64 << k) - 1) })
    }
}

/// Runs `program`; returns the `target_width` bits appended after `preload`, if any.
pub fn run_program(
    program: &BitString,
    preload: &BitString,
    sides: &[BitString],
    target_width: u32,
    step_budget: u64,
) -> Option<BitString> {
    let full = preload.width() + target_width;
    if full > 128 {
        return None;
    }
    let mut buf: u128 = preload.value() as u128;
    let mut len = preload.width();
    let mut steps = 0u64;
    let mut r = Reader {
        program: program.value(),
        width: program.width(),
        pos: 0,
    };
    let append = |buf: &mut u128, len: &mut u32, bits: u64, k: u32| -> bool {
        if *len + k > full {
            return false;
        }
        *buf = if k == 0 { *buf } else { (*buf << k) | bits as u128 };
        *len += k;
        true
    };
    while r.pos < r.width {
        steps += 1;
        match r.read(2)? {
            0b00 => {
                let k = r.read(4)? as u32;
                let bits = r.read(k)?;
                if !append(&mut buf, &mut len, bits, k) {
                    return None;
                }
                steps += k as u64;
            }
            0b01 => {
                if len == 0 {
                    return None;
                }
                let period = len;
                while len < full {
                    let bit = (buf >> (period - 1)) & 1;
                    buf = (buf << 1) | bit;
                    len += 1;
                    steps += 1;
                }
            }
            0b10 => {
                let side = sides.get(r.read(2)? as usize)?;
                if !append(&mut buf, &mut len, side.value(), side.width()) {
                    return None;
                }
                steps += side.width() as u64;
            }
            _ => break,
        }
        if steps > step_budget {
            return None;
        }
    }
    if steps > step_budget || len != full {
        return None;
    }
    let out = if target_width == 0 { 0 } else { (buf & ((1u128 << target_width) - 1)) as u64 };
    Some(BitString::new(target_width, out).expect("masked output fits"))
}

/// Shortest program length for every producible output of one width.
fn output_table(cfg: &ToyMachineConfig, preload: &BitString, sides: &[BitString], width: u32) -> HashMap<u64, u32> {
    let mut best = HashMap::new();
    for plen in 0..=cfg.max_len {
        for value in 0..(1u64 << plen) {
            let program = BitString::new(plen, value).expect("program fits its width");
            if let Some(out) = run_program(&program, preload, sides, width, cfg.step_budget) {
                best.entry(out.value()).or_insert(plen);
            }
        }
    }
    best
}

/// Time-bounded complexity of `x`, optionally given one side input.
pub fn toy_complexity(x: &BitString, cfg: &ToyMachineConfig, side_input: Option<&BitString>) -> ToyComplexity {
    let sides: Vec<BitString> = side_input.into_iter().copied().collect();
    let table = output_table(cfg, &BitString::empty(), &sides, x.width());
    table.get(&x.value()).map_or(ToyComplexity::ExceedsL, |&l| ToyComplexity::Exact(l))
}

type TableKey = (BitString, Vec<BitString>, u32);

/// Toy-machine oracle over `n`-bit sources; output tables are memoized.
pub struct ToyOracle {
    cfg: ToyMachineConfig,
    n: u32,
    slack: u32,
    tables: Mutex<HashMap<TableKey, Arc<HashMap<u64, u32>>>>,
}

impl ToyOracle {
    pub fn new(cfg: ToyMachineConfig, n: u32, slack: u32) -> Result<Self> {
        if n == 0 || 3 * n > 64 {
            return Err(Error::InvalidParameter(format!("toy sources need 1 <= n <= 21, got {n}")));
        }
        Ok(ToyOracle {
            cfg,
            n,
            slack,
            tables: Mutex::new(HashMap::new()),
        })
    }

    pub fn config(&self) -> &ToyMachineConfig {
        &self.cfg
    }

    fn table(&self, preload: &BitString, sides: &[BitString], width: u32) -> Arc<HashMap<u64, u32>> {
        let key = (*preload, sides.to_vec(), width);
        if let Some(t) = self.tables.lock().expect("toy cache poisoned").get(&key) {
            return Arc::clone(t);
        }
        let table = Arc::new(output_table(&self.cfg, preload, sides, width));
        self.tables
            .lock()
            .expect("toy cache poisoned")
            .insert(key, Arc::clone(&table));
        table
    }

    /// `C(x | preload)`, with `L + 1` standing for "exceeds L".
    pub fn complexity_given(&self, x: &BitString, preload: &BitString) -> ToyComplexity {
        let table = self.table(preload, &[], x.width());
        table.get(&x.value()).map_or(ToyComplexity::ExceedsL, |&l| ToyComplexity::Exact(l))
    }

    fn value_of(&self, c: ToyComplexity) -> u32 {
        match c {
            ToyComplexity::Exact(v) => v,
            ToyComplexity::ExceedsL => self.cfg.max_len + 1,
        }
    }

    /// Every triple whose seven joint complexities are all within `L`, in increasing order.
    pub fn planted_triples(&self) -> Vec<Triple> {
        let table = self.table(&BitString::empty(), &[], 3 * self.n);
        let mut joint: Vec<u64> = table.keys().copied().collect();
        joint.sort_unstable();
        let low = (1u64 << self.n) - 1;
        joint
            .into_iter()
            .map(|v| {
                [2u32, 1, 0].map(|k| BitString::new(self.n, (v >> (k * self.n)) & low).expect("masked"))
            })
            .filter(|t| self.profile_of(t).is_ok_and(|p| !p.any_capped()))
            .collect()
    }
}

impl ComplexityOracle for ToyOracle {
    fn name(&self) -> String {
        format!("toy(L={},T={})", self.cfg.max_len, self.cfg.step_budget)
    }

    fn width(&self) -> u32 {
        self.n
    }

    fn slack(&self) -> u32 {
        self.slack
    }

    fn entry_cap(&self) -> u32 {
        self.cfg.max_len
    }

    fn profile_of(&self, triple: &Triple) -> Result<ComplexityProfile> {
        let mut values = [0u32; 7];
        let mut capped = 0u8;
        for (i, v) in Subset::ORDER.iter().enumerate() {
            for x in triple {
                x.expect_width(self.n)?;
            }
            let c = self.complexity_given(&joint_string(triple, *v)?, &BitString::empty());
            if c == ToyComplexity::ExceedsL {
                capped |= 1 << i;
            }
            values[i] = self.value_of(c);
        }
        Ok(ComplexityProfile::with_capped(values, capped))
    }

    fn conditional(&self, triple: &Triple, v: Subset, w: Option<Subset>) -> Result<i64> {
        let preload = match w {
            Some(w) if w.mask() & v.mask() != 0 => return Err(Error::Input(format!("{v} and {w} overlap"))),
            Some(w) => joint_string(triple, w)?,
            None => BitString::empty(),
        };
        let target = joint_string(triple, v)?;
        Ok(self.value_of(self.complexity_given(&target, &preload)) as i64)
    }

    fn enumerate_b_set(&self, target: Sender, conditions: &[Condition], bound: u32) -> Result<BSet> {
        let mut known: Vec<(Sender, BitString)> = Vec::new();
        let mut payloads: Vec<(Sender, BitString)> = Vec::new();
        for c in conditions {
            if c.sender() == target {
                return Err(Error::Input(format!("sender {target} cannot condition on itself")));
            }
            match c {
                Condition::Source { sender, value } => {
                    value.expect_width(self.n)?;
                    known.push((*sender, *value));
                }
                Condition::Payload { sender, payload, .. } => payloads.push((*sender, *payload)),
            }
        }
        known.sort_by_key(|(s, _)| *s);
        payloads.sort_by_key(|(s, _)| *s);
        let mut preload = BitString::empty();
        for (_, v) in &known {
            preload = preload.concat(v)?;
        }
        let sides: Vec<BitString> = payloads.into_iter().map(|(_, p)| p).collect();
        let table = self.table(&preload, &sides, self.n);
        let mut members: Vec<BitString> = table
            .iter()
            .filter(|(_, &len)| len <= bound)
            .map(|(&v, _)| BitString::new(self.n, v))
            .collect::<Result<_>>()?;
        members.sort_unstable();
        let complete = bound <= self.cfg.max_len;
        Ok(BSet {
            members,
            complete,
            note: (!complete).then(|| format!("programs longer than L={} were not enumerated", self.cfg.max_len)),
        })
    }
}
