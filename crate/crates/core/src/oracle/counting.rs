//! Counting oracle over an explicit correlation set `S`.
//!
//! The complexity of a projection is `ceil(log2)` of the number of distinct
//! values it takes on `S`; conditionals are defined by subtraction so the
//! chain rule holds exactly.

use std::collections::HashSet;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use rand::Rng;

use super::{joint_string, BSet, ComplexityOracle, ComplexityProfile, Condition, Sender, Subset, Triple};
use crate::bits::{ceil_log2, mask, BitString};
use crate::error::{Error, Result};
use crate::scenarios::collinear::{collinear_count, for_each_collinear, is_collinear_raw, sample_collinear_raw};
use crate::scenarios::gf::Field;

/// Explicit sets larger than this are refused.
const MAX_EXPLICIT: usize = 1 << 24;

#[derive(Clone, Debug)]
enum Kind {
    /// Sorted, deduplicated members.
    Explicit(Vec<[u64; 3]>),
    Cube,
    Diagonal,
    Collinear(Field),
}

/// A set of triples of `n`-bit strings with exact counting queries.
#[derive(Debug)]
pub struct CorrelationSet {
    n: u32,
    name: String,
    kind: Kind,
    counts: OnceLock<[u64; 8]>,
}

impl CorrelationSet {
    fn with_kind(n: u32, name: String, kind: Kind) -> Self {
        CorrelationSet {
            n,
            name,
            kind,
            counts: OnceLock::new(),
        }
    }

    pub fn explicit(n: u32, mut members: Vec<[u64; 3]>) -> Result<Self> {
        if n == 0 || n > 21 {
            return Err(Error::InvalidParameter(format!("explicit sets need 1 <= n <= 21, got {n}")));
        }
        if members.is_empty() {
            return Err(Error::InvalidParameter("correlation set is empty".into()));
        }
        if members.len() > MAX_EXPLICIT {
            return Err(Error::InvalidParameter(format!("{} members exceed the limit", members.len())));
        }
        if let Some(bad) = members.iter().flatten().find(|&&v| v & !mask(n) != 0) {
            return Err(Error::ValueOutOfRange { width: n, value: *bad });
        }
        members.sort_unstable();
        members.dedup();
        Ok(Self::with_kind(n, format!("explicit:{n}"), Kind::Explicit(members)))
    }

    /// All triples of `n`-bit strings.
    pub fn cube(n: u32) -> Result<Self> {
        if n == 0 || n > 21 {
            return Err(Error::InvalidParameter(format!("cube needs 1 <= n <= 21, got {n}")));
        }
        Ok(Self::with_kind(n, format!("cube:{n}"), Kind::Cube))
    }

    /// Triples `(x, x, x)`.
    pub fn diagonal(n: u32) -> Result<Self> {
        if n == 0 || n > 32 {
            return Err(Error::InvalidParameter(format!("diagonal needs 1 <= n <= 32, got {n}")));
        }
        Ok(Self::with_kind(n, format!("diagonal:{n}"), Kind::Diagonal))
    }

    /// Ordered pairwise-distinct collinear triples over GF(2^q); `n = 2q`.
    pub fn collinear(q: u32) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!("collinear sets need q >= 2, got {q}")));
        }
        let field = Field::new(q)?;
        Ok(Self::with_kind(2 * q, format!("collinear:{q}"), Kind::Collinear(field)))
    }

    /// `collinear:q`, `collinear:q=3`, `diagonal:n`, `cube:n`, or `file:<path>`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::Format(format!("set spec must look like kind:arg, got {spec:?}")))?;
        if kind == "file" {
            return Self::load(Path::new(arg));
        }
        let arg = arg.trim();
        let arg = arg.split_once('=').map_or(arg, |(_, v)| v);
        let v: u32 = arg
            .parse()
            .map_err(|_| Error::Format(format!("bad size in set spec {spec:?}")))?;
        match kind {
            "collinear" => Self::collinear(v),
            "diagonal" => Self::diagonal(v),
            "cube" => Self::cube(v),
            other => Err(Error::Format(format!("unknown correlation set kind {other:?}"))),
        }
    }

    /// One triple per line as three hex fields; an optional `n=<bits>` line fixes the width,
    /// otherwise it is four bits per digit of the longest field.
    pub fn from_hex_lines(text: &str) -> Result<Self> {
        let mut width: Option<u32> = None;
        let mut digits = 0usize;
        let mut members = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(w) = line.strip_prefix("n=") {
                width = Some(w.trim().parse().map_err(|_| Error::Format(format!("bad width line {line:?}")))?);
                continue;
            }
            let fields: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|f| !f.is_empty()).collect();
            if fields.len() != 3 {
                return Err(Error::Format(format!("line {}: expected 3 hex fields", lineno + 1)));
            }
            let mut triple = [0u64; 3];
            for (slot, f) in triple.iter_mut().zip(&fields) {
                let f = f.trim_start_matches("0x");
                digits = digits.max(f.len());
                *slot = u64::from_str_radix(f, 16)
                    .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
            }
            members.push(triple);
        }
        Self::explicit(width.unwrap_or(4 * digits as u32), members)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut set = Self::from_hex_lines(&text)?;
        set.name = format!("file:{}", path.display());
        Ok(set)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> u64 {
        match &self.kind {
            Kind::Explicit(m) => m.len() as u64,
            Kind::Cube => 1u64 << (3 * self.n),
            Kind::Diagonal => 1u64 << self.n,
            Kind::Collinear(f) => collinear_count(f.q()),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: &[u64; 3]) -> bool {
        if t.iter().any(|&v| v & !mask(self.n) != 0) {
            return false;
        }
        match &self.kind {
            Kind::Explicit(m) => m.binary_search(t).is_ok(),
            Kind::Cube => true,
            Kind::Diagonal => t[0] == t[1] && t[1] == t[2],
            Kind::Collinear(f) => {
                t[0] != t[1] && t[1] != t[2] && t[0] != t[2] && is_collinear_raw(f, t[0], t[1], t[2])
            }
        }
    }

    /// Visits every member (in a fixed order).
    pub fn for_each(&self, mut f: impl FnMut([u64; 3])) {
        match &self.kind {
            Kind::Explicit(m) => m.iter().for_each(|t| f(*t)),
            Kind::Cube => {
                let side = 1u64 << self.n;
                for a in 0..side {
                    for b in 0..side {
                        for c in 0..side {
                            f([a, b, c]);
                        }
                    }
                }
            }
            Kind::Diagonal => (0..1u64 << self.n).for_each(|x| f([x, x, x])),
            Kind::Collinear(field) => for_each_collinear(field, f),
        }
    }

    /// A uniformly random member.
    pub fn sample(&self, rng: &mut impl Rng) -> [u64; 3] {
        let side = 1u64 << self.n;
        match &self.kind {
            Kind::Explicit(m) => m[rng.gen_range(0..m.len())],
            Kind::Cube => [0; 3].map(|_| rng.gen_range(0..side)),
            Kind::Diagonal => {
                let x = rng.gen_range(0..side);
                [x, x, x]
            }
            Kind::Collinear(field) => sample_collinear_raw(field, rng),
        }
    }

    /// Distinct projections onto every subset mask (index 0 is the empty projection).
    pub fn projection_counts(&self) -> [u64; 8] {
        *self.counts.get_or_init(|| {
            let mut out = [1u64; 8];
            match &self.kind {
                Kind::Cube => {
                    for (m, slot) in out.iter_mut().enumerate() {
                        *slot = 1u64 << (self.n * (m as u32).count_ones());
                    }
                }
                Kind::Diagonal => {
                    for slot in out.iter_mut().skip(1) {
                        *slot = 1u64 << self.n;
                    }
                }
                _ => {
                    let mut seen: Vec<HashSet<u64>> = vec![HashSet::new(); 8];
                    let n = self.n;
                    self.for_each(|t| {
                        for (m, set) in seen.iter_mut().enumerate().skip(1) {
                            set.insert(pack_projection(&t, m as u8, n));
                        }
                    });
                    for (m, set) in seen.iter().enumerate().skip(1) {
                        out[m] = set.len() as u64;
                    }
                }
            }
            out
        })
    }

    pub fn profile(&self) -> ComplexityProfile {
        let counts = self.projection_counts();
        let mut values = [0u32; 7];
        for (i, v) in Subset::ORDER.iter().enumerate() {
            values[i] = ceil_log2(counts[v.mask() as usize]);
        }
        ComplexityProfile::new(values)
    }

    /// Sorted distinct values `x` of the target sender such that some member has
    /// `x` in that position and `allowed(sender, value)` for every position.
    pub fn fiber(&self, target: Sender, allowed: &dyn Fn(Sender, u64) -> bool) -> Vec<u64> {
        let side = 1u64 << self.n;
        match &self.kind {
            Kind::Cube => {
                let others_ok = Sender::ALL
                    .iter()
                    .filter(|&&s| s != target)
                    .all(|&s| (0..side).any(|v| allowed(s, v)));
                if !others_ok {
                    return Vec::new();
                }
                (0..side).filter(|&v| allowed(target, v)).collect()
            }
            Kind::Diagonal => (0..side)
                .filter(|&v| Sender::ALL.iter().all(|&s| allowed(s, v)))
                .collect(),
            _ => {
                let mut out = Vec::new();
                self.for_each(|t| {
                    if Sender::ALL.iter().all(|&s| allowed(s, t[s.index()])) {
                        out.push(t[target.index()]);
                    }
                });
                out.sort_unstable();
                out.dedup();
                out
            }
        }
    }
}

fn pack_projection(t: &[u64; 3], mask: u8, n: u32) -> u64 {
    let mut acc = 0u64;
    for s in Sender::ALL {
        if mask & s.bit() != 0 {
            acc = acc << n | t[s.index()];
        }
    }
    acc
}

/// `ceil(log2)` of the number of distinct `V`-projections among members agreeing with the
/// given `W` values.
pub fn counting_conditional(set: &CorrelationSet, v: Subset, known: &[(Sender, BitString)]) -> Result<u32> {
    for (s, value) in known {
        value.expect_width(set.n())?;
        if v.contains(*s) {
            return Err(Error::Input(format!("sender {s} is both target and condition")));
        }
    }
    let n = set.n();
    let mut seen = HashSet::new();
    set.for_each(|t| {
        if known.iter().all(|(s, value)| t[s.index()] == value.value()) {
            seen.insert(pack_projection(&t, v.mask(), n));
        }
    });
    if seen.is_empty() {
        return Err(Error::Input("conditioning values are inconsistent with the set".into()));
    }
    Ok(ceil_log2(seen.len() as u64))
}

/// Counting oracle with a declared slack budget.
#[derive(Clone, Debug)]
pub struct CountingOracle {
    set: Arc<CorrelationSet>,
    slack: u32,
}

impl CountingOracle {
    pub fn new(set: Arc<CorrelationSet>, slack: u32) -> Self {
        CountingOracle { set, slack }
    }

    pub fn set(&self) -> &Arc<CorrelationSet> {
        &self.set
    }

    fn check_member(&self, triple: &Triple) -> Result<()> {
        for x in triple {
            x.expect_width(self.set.n())?;
        }
        let raw = triple.map(|x| x.value());
        if !self.set.contains(&raw) {
            return Err(Error::Input(format!("triple is not a member of {}", self.set.name())));
        }
        Ok(())
    }
}

impl ComplexityOracle for CountingOracle {
    fn name(&self) -> String {
        format!("counting({})", self.set.name())
    }

    fn width(&self) -> u32 {
        self.set.n()
    }

    fn slack(&self) -> u32 {
        self.slack
    }

    fn entry_cap(&self) -> u32 {
        3 * self.set.n()
    }

    fn profile_of(&self, triple: &Triple) -> Result<ComplexityProfile> {
        self.check_member(triple)?;
        Ok(self.set.profile())
    }

    fn conditional(&self, triple: &Triple, v: Subset, w: Option<Subset>) -> Result<i64> {
        if w.is_some_and(|w| w.mask() & v.mask() != 0) {
            return Err(Error::Input(format!("{v} and {w:?} overlap")));
        }
        // Only the width of the joint string matters here; membership is checked by the profile.
        joint_string(triple, v)?;
        Ok(self.profile_of(triple)?.conditional(v, w))
    }

    fn enumerate_b_set(&self, target: Sender, conditions: &[Condition], bound: u32) -> Result<BSet> {
        let n = self.set.n();
        for c in conditions {
            if c.sender() == target {
                return Err(Error::Input(format!("sender {target} cannot condition on itself")));
            }
            if let Condition::Source { value, .. } = c {
                value.expect_width(n)?;
            }
            if let Condition::Payload { payload, graph, .. } = c {
                payload.expect_width(graph.params().m)?;
                if graph.params().n != n {
                    return Err(Error::WidthMismatch { expected: n, actual: graph.params().n });
                }
            }
        }
        let allowed = |s: Sender, v: u64| {
            conditions.iter().filter(|c| c.sender() == s).all(|c| match c {
                Condition::Source { value, .. } => value.value() == v,
                Condition::Payload { payload, graph, .. } => graph.is_neighbor(v, payload.value()),
            })
        };
        let fiber = self.set.fiber(target, &allowed);
        if fiber.is_empty() || ceil_log2(fiber.len() as u64) > bound {
            let note = if fiber.is_empty() {
                "no member is consistent with the conditions".to_string()
            } else {
                format!("fiber of {} strings exceeds the bound", fiber.len())
            };
            return Ok(BSet {
                members: Vec::new(),
                complete: true,
                note: Some(note),
            });
        }
        Ok(BSet {
            members: fiber.into_iter().map(|v| BitString::new(n, v)).collect::<Result<_>>()?,
            complete: true,
            note: None,
        })
    }
}
