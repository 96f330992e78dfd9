//! Left-regular bipartite graphs with labeled edges.
//!
//! Left nodes are `n`-bit strings, right nodes `m`-bit strings, and every left
//! node has the same number of outgoing edges, each identified by a label.
//! Parallel edges are simply distinct labels reaching the same right node.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::{Arc, OnceLock};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::{mask, BitString};
use crate::crt::PrimeList;
use crate::error::{Error, Result};
use crate::rational::{int, Rational};

/// Largest `n + d` for which a graph is kept as an explicit edge table.
pub const TABLE_LIMIT_BITS: u32 = 24;
/// Largest `n + m` for which an adjacency multiplicity index is built.
const INDEX_LIMIT_BITS: u32 = 22;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphParams {
    /// Left width.
    pub n: u32,
    /// Right width.
    pub m: u32,
    /// Label width; the left degree is `2^d` except for split graphs, whose
    /// degree `D * ell` is stored on the graph and `d = ceil(log2(D * ell))`.
    pub d: u32,
    /// Regime threshold exponent.
    pub k: u32,
    pub delta: Rational,
    pub epsilon: Rational,
    /// Degree constant of the random construction.
    pub c: u32,
    /// Right-width overhead `m - k`.
    pub gamma: u32,
}

impl GraphParams {
    /// Parameters for a graph that was not produced by the construction pipeline.
    pub fn plain(n: u32, m: u32, d: u32) -> Self {
        GraphParams {
            n,
            m,
            d,
            k: m,
            delta: int(1),
            epsilon: int(1),
            c: 1,
            gamma: 0,
        }
    }
}

#[derive(Clone)]
pub struct LabeledBipartiteGraph {
    inner: Arc<Inner>,
}

struct Inner {
    params: GraphParams,
    degree: u64,
    seed: u64,
    /// Built from a seed alone, so it serializes as a header-only `seeded` record.
    from_seed: bool,
    map: NeighborMap,
    index: OnceLock<Option<Vec<u32>>>,
}

#[derive(Clone)]
enum NeighborMap {
    /// Right node of `(x, y)` at `x * degree + y`.
    Table(Vec<u64>),
    /// Counter-based ChaCha stream: edge `(x, y)` is the `(x * D + y)`-th word pair.
    Seeded,
    /// Right nodes truncated to the leading `params.m` bits of the base graph's.
    Prefix(LabeledBipartiteGraph),
    Split(SplitMap),
}

#[derive(Clone)]
pub(crate) struct SplitMap {
    pub(crate) base: LabeledBipartiteGraph,
    pub(crate) ell: u64,
    pub(crate) primes: PrimeList,
    pub(crate) index_bits: u32,
    pub(crate) residue_bits: u32,
}

impl SplitMap {
    /// Splits a right node into `(prime index, residue, base right node)`.
    pub(crate) fn decode(&self, z: u64) -> (u64, u64, u64) {
        let bm = self.base.params().m;
        let zb = z & mask(bm);
        let r = (z >> bm) & mask(self.residue_bits);
        let i = if self.index_bits == 0 {
            0
        } else {
            (z >> (bm + self.residue_bits)) & mask(self.index_bits)
        };
        (i, r, zb)
    }

    pub(crate) fn encode(&self, i: u64, r: u64, zb: u64) -> u64 {
        let bm = self.base.params().m;
        (i << (bm + self.residue_bits)) | (r << bm) | zb
    }
}

/// Which right-node identity to count in ownership questions.
pub(crate) enum Structure<'a> {
    Plain,
    Split(&'a SplitMap),
}

impl LabeledBipartiteGraph {
    fn from_parts(params: GraphParams, degree: u64, seed: u64, map: NeighborMap) -> Self {
        LabeledBipartiteGraph {
            inner: Arc::new(Inner {
                params,
                degree,
                seed,
                from_seed: matches!(map, NeighborMap::Seeded),
                map,
                index: OnceLock::new(),
            }),
        }
    }

    fn check_shape(params: &GraphParams) -> Result<()> {
        if params.n == 0 || params.n > 63 || params.m == 0 || params.m > 64 || params.d > 62 {
            return Err(Error::InvalidParameter(format!(
                "unsupported graph shape n={} m={} d={}",
                params.n, params.m, params.d
            )));
        }
        Ok(())
    }

    /// Explicit edge table in left-major order (`table[x * 2^d + y]`).
    pub fn from_table(params: GraphParams, table: Vec<u64>, seed: u64) -> Result<Self> {
        Self::check_shape(&params)?;
        let degree = 1u64 << params.d;
        let expected = (1u64 << params.n) * degree;
        if table.len() as u64 != expected {
            return Err(Error::InvalidParameter(format!(
                "edge table has {} entries, expected {expected}",
                table.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&z| z & !mask(params.m) != 0) {
            return Err(Error::ValueOutOfRange { width: params.m, value: bad });
        }
        Ok(Self::from_parts(params, degree, seed, NeighborMap::Table(table)))
    }

    /// Materializes `f(x, y)` for every left node and label.
    pub fn from_fn(n: u32, m: u32, d: u32, f: impl Fn(u64, u64) -> u64) -> Result<Self> {
        let params = GraphParams::plain(n, m, d);
        Self::check_shape(&params)?;
        if n + d > TABLE_LIMIT_BITS {
            return Err(Error::InvalidParameter(format!("table for n={n}, d={d} is too large")));
        }
        let degree = 1u64 << d;
        let mut table = Vec::with_capacity(((1u64 << n) * degree) as usize);
        for x in 0..(1u64 << n) {
            for y in 0..degree {
                table.push(f(x, y));
            }
        }
        Self::from_table(params, table, 0)
    }

    /// Seeded random graph; tabulated when small enough, otherwise evaluated on demand.
    pub fn seeded(params: GraphParams, seed: u64) -> Result<Self> {
        Self::check_shape(&params)?;
        let degree = 1u64 << params.d;
        if params.n + params.d <= TABLE_LIMIT_BITS && params.n <= 16 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let total = (1u64 << params.n) * degree;
            let m = mask(params.m);
            let table = (0..total).map(|_| rng.next_u64() & m).collect();
            let mut g = Self::from_parts(params, degree, seed, NeighborMap::Table(table));
            Arc::get_mut(&mut g.inner).expect("fresh graph").from_seed = true;
            return Ok(g);
        }
        Ok(Self::from_parts(params, degree, seed, NeighborMap::Seeded))
    }

    /// Same edges under different bookkeeping parameters (widths must agree).
    pub(crate) fn with_params(&self, params: GraphParams) -> Self {
        debug_assert!(params.n == self.params().n && params.m == self.params().m && params.d == self.params().d);
        let mut g = Self::from_parts(params, self.inner.degree, self.inner.seed, self.inner.map.clone());
        Arc::get_mut(&mut g.inner).expect("fresh graph").from_seed = self.inner.from_seed;
        g
    }

    pub(crate) fn prefix_of(base: &LabeledBipartiteGraph, params: GraphParams) -> Self {
        let degree = base.degree();
        let seed = base.seed();
        Self::from_parts(params, degree, seed, NeighborMap::Prefix(base.clone()))
    }

    pub(crate) fn split_of(split: SplitMap, params: GraphParams) -> Self {
        let degree = split.base.degree() * split.ell;
        let seed = split.base.seed();
        Self::from_parts(params, degree, seed, NeighborMap::Split(split))
    }

    pub fn params(&self) -> &GraphParams {
        &self.inner.params
    }

    /// Left degree (number of labels per left node).
    pub fn degree(&self) -> u64 {
        self.inner.degree
    }

    pub fn seed(&self) -> u64 {
        self.inner.seed
    }

    pub fn left_count(&self) -> u64 {
        1u64 << self.inner.params.n
    }

    pub fn right_count(&self) -> u128 {
        1u128 << self.inner.params.m
    }

    pub(crate) fn structure(&self) -> Structure<'_> {
        match &self.inner.map {
            NeighborMap::Split(s) => Structure::Split(s),
            _ => Structure::Plain,
        }
    }

    /// For prefix graphs, the underlying full-width graph.
    pub(crate) fn prefix_base(&self) -> Option<&LabeledBipartiteGraph> {
        match &self.inner.map {
            NeighborMap::Prefix(b) => Some(b),
            _ => None,
        }
    }

    /// Short human-readable identity used in reports.
    pub fn describe(&self) -> String {
        let p = &self.inner.params;
        match &self.inner.map {
            NeighborMap::Table(_) | NeighborMap::Seeded => {
                format!("random(n={},m={},d={},seed={})", p.n, p.m, p.d, self.inner.seed)
            }
            NeighborMap::Prefix(b) => format!("prefix{}({})", p.m, b.describe()),
            NeighborMap::Split(s) => format!("split(ell={})({})", s.ell, s.base.describe()),
        }
    }

    /// Right node of label `y` at left node `x`, on raw integers.
    pub fn neighbor_raw(&self, x: u64, y: u64) -> u64 {
        debug_assert!(x < self.left_count() && y < self.degree());
        match &self.inner.map {
            NeighborMap::Table(t) => t[(x * self.inner.degree + y) as usize],
            NeighborMap::Seeded => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.inner.seed);
                rng.set_word_pos(2 * (x as u128 * self.inner.degree as u128 + y as u128));
                rng.next_u64() & mask(self.inner.params.m)
            }
            NeighborMap::Prefix(base) => base.neighbor_raw(x, y) >> (base.params().m - self.inner.params.m),
            NeighborMap::Split(s) => {
                let (yb, i) = (y / s.ell, y % s.ell);
                let zb = s.base.neighbor_raw(x, yb);
                let r = x % s.primes.as_slice()[i as usize];
                s.encode(i, r, zb)
            }
        }
    }

    pub fn neighbor(&self, x: &BitString, y: &BitString) -> Result<BitString> {
        let p = &self.inner.params;
        x.expect_width(p.n)?;
        y.expect_width(p.d)?;
        if y.value() >= self.degree() {
            return Err(Error::Input(format!(
                "label {} is outside the degree {}",
                y.value(),
                self.degree()
            )));
        }
        Ok(BitString::from_raw(p.m, self.neighbor_raw(x.value(), y.value())))
    }

    /// The `degree()` right nodes reached from `x`, in label order.
    pub fn neighbors_multiset(&self, x: &BitString) -> Result<Vec<BitString>> {
        x.expect_width(self.inner.params.n)?;
        let m = self.inner.params.m;
        Ok((0..self.degree())
            .map(|y| BitString::from_raw(m, self.neighbor_raw(x.value(), y)))
            .collect())
    }

    fn index(&self) -> Option<&Vec<u32>> {
        self.inner
            .index
            .get_or_init(|| {
                let p = &self.inner.params;
                if matches!(self.inner.map, NeighborMap::Split(_)) || p.n + p.m > INDEX_LIMIT_BITS {
                    return None;
                }
                let mut hist = vec![0u32; 1usize << (p.n + p.m)];
                for x in 0..self.left_count() {
                    for y in 0..self.degree() {
                        let z = self.neighbor_raw(x, y);
                        hist[((x << p.m) | z) as usize] += 1;
                    }
                }
                Some(hist)
            })
            .as_ref()
    }

    /// Number of labels of `x` that land on `z`.
    pub fn multiplicity(&self, x: u64, z: u64) -> u64 {
        let p = &self.inner.params;
        if z & !mask(p.m) != 0 {
            return 0;
        }
        if let NeighborMap::Split(s) = &self.inner.map {
            let (i, r, zb) = s.decode(z);
            if i >= s.ell {
                return 0;
            }
            let prime = s.primes.as_slice()[i as usize];
            return if x % prime == r { s.base.multiplicity(x, zb) } else { 0 };
        }
        if let Some(hist) = self.index() {
            return hist[((x << p.m) | z) as usize] as u64;
        }
        (0..self.degree()).filter(|&y| self.neighbor_raw(x, y) == z).count() as u64
    }

    /// Right nodes reached from `x` with their multiplicities, sorted by node.
    pub fn right_histogram(&self, x: u64) -> Vec<(u64, u64)> {
        let p = &self.inner.params;
        if let (Some(hist), false) = (self.index(), matches!(self.inner.map, NeighborMap::Split(_))) {
            let base = (x << p.m) as usize;
            return hist[base..base + (1usize << p.m)]
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(z, &c)| (z as u64, c as u64))
                .collect();
        }
        let mut zs: Vec<u64> = (0..self.degree()).map(|y| self.neighbor_raw(x, y)).collect();
        zs.sort_unstable();
        let mut out: Vec<(u64, u64)> = Vec::new();
        for z in zs {
            match out.last_mut() {
                Some((last, c)) if *last == z => *c += 1,
                _ => out.push((z, 1)),
            }
        }
        out
    }

    /// Number of edge endpoints from members of `b` landing on `z`, with multiplicity.
    pub fn b_degree(&self, z: &BitString, b: &[BitString]) -> Result<u64> {
        z.expect_width(self.inner.params.m)?;
        let mut total = 0;
        for x in b {
            x.expect_width(self.inner.params.n)?;
            total += self.multiplicity(x.value(), z.value());
        }
        Ok(total)
    }

    /// Whether `payload` is among the neighbors of `x`.
    pub fn is_neighbor(&self, x: u64, payload: u64) -> bool {
        self.multiplicity(x, payload) > 0
    }

    /// Edge table in left-major order, when the label count is a power of two
    /// and the table is small enough.
    pub fn to_table(&self) -> Result<Vec<u64>> {
        let p = &self.inner.params;
        if self.degree() != 1u64 << p.d || p.n + p.d > TABLE_LIMIT_BITS {
            return Err(Error::InvalidParameter(format!(
                "graph {} cannot be materialized as a table",
                self.describe()
            )));
        }
        if let NeighborMap::Table(t) = &self.inner.map {
            return Ok(t.clone());
        }
        let mut out = Vec::with_capacity((self.left_count() * self.degree()) as usize);
        for x in 0..self.left_count() {
            for y in 0..self.degree() {
                out.push(self.neighbor_raw(x, y));
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for LabeledBipartiteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LabeledBipartiteGraph({}, degree={})", self.describe(), self.degree())
    }
}

/// Bookkeeping fields that differ from [`GraphParams::plain`], as `key=value` tokens.
fn param_tokens(p: &GraphParams) -> String {
    let plain = GraphParams::plain(p.n, p.m, p.d);
    let mut out = String::new();
    if p.k != plain.k {
        out.push_str(&format!(" k={}", p.k));
    }
    if p.delta != plain.delta {
        out.push_str(&format!(" delta={}", p.delta));
    }
    if p.epsilon != plain.epsilon {
        out.push_str(&format!(" epsilon={}", p.epsilon));
    }
    if p.c != plain.c {
        out.push_str(&format!(" c={}", p.c));
    }
    if p.gamma != plain.gamma {
        out.push_str(&format!(" gamma={}", p.gamma));
    }
    out
}

/// Writes the graph as a header line `n m d kind seed [key=value...]`.
///
/// `table` records are followed by `2^(n+d)` little-endian right-node records in
/// label-major order, `seeded` records are header-only, and `prefix` and `split`
/// records are followed by the record of the graph they derive from.
pub fn write_graph<W: Write>(g: &LabeledBipartiteGraph, mut w: W) -> Result<()> {
    write_record(g, &mut w)
}

fn write_record(g: &LabeledBipartiteGraph, w: &mut dyn Write) -> Result<()> {
    let p = g.params();
    let io = |e: std::io::Error| Error::io("<graph stream>", e);
    let extra = param_tokens(p);
    match &g.inner.map {
        NeighborMap::Seeded | NeighborMap::Table(_) if g.inner.from_seed => {
            writeln!(w, "{} {} {} seeded {}{extra}", p.n, p.m, p.d, g.seed()).map_err(io)?;
        }
        NeighborMap::Prefix(base) => {
            writeln!(w, "{} {} {} prefix {}{extra}", p.n, p.m, p.d, g.seed()).map_err(io)?;
            write_record(base, w)?;
        }
        NeighborMap::Split(s) => {
            writeln!(w, "{} {} {} split {} ell={}{extra}", p.n, p.m, p.d, g.seed(), s.ell).map_err(io)?;
            write_record(&s.base, w)?;
        }
        _ => {
            let table = g.to_table()?;
            writeln!(w, "{} {} {} table {}{extra}", p.n, p.m, p.d, g.seed()).map_err(io)?;
            let bytes = p.m.div_ceil(8) as usize;
            let (left, degree) = (g.left_count(), g.degree());
            let mut buf = Vec::with_capacity(table.len() * bytes);
            for y in 0..degree {
                for x in 0..left {
                    let z = table[(x * degree + y) as usize];
                    buf.extend_from_slice(&z.to_le_bytes()[..bytes]);
                }
            }
            w.write_all(&buf).map_err(io)?;
        }
    }
    Ok(())
}

pub fn read_graph<R: BufRead>(mut r: R) -> Result<LabeledBipartiteGraph> {
    let g = read_record(&mut r)?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing).map_err(|e| Error::io("<graph stream>", e))? != 0 {
        return Err(Error::Format("trailing bytes after graph record".into()));
    }
    Ok(g)
}

fn read_record<R: BufRead>(r: &mut R) -> Result<LabeledBipartiteGraph> {
    let mut header = String::new();
    r.read_line(&mut header).map_err(|e| Error::io("<graph stream>", e))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5 {
        return Err(Error::Format(format!("graph header needs at least 5 fields, got {header:?}")));
    }
    let num = |s: &str| -> Result<u64> { s.parse().map_err(|_| Error::Format(format!("bad header field {s:?}"))) };
    let (n, m, d, seed) = (num(fields[0])? as u32, num(fields[1])? as u32, num(fields[2])? as u32, num(fields[4])?);
    let mut params = GraphParams::plain(n, m, d);
    let mut ell = None;
    for token in &fields[5..] {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header token {token:?}")))?;
        let ratio = |v: &str| crate::rational::parse_rational(v).map_err(|_| Error::Format(format!("bad {key} {v:?}")));
        match key {
            "k" => params.k = num(value)? as u32,
            "c" => params.c = num(value)? as u32,
            "gamma" => params.gamma = num(value)? as u32,
            "delta" => params.delta = ratio(value)?,
            "epsilon" => params.epsilon = ratio(value)?,
            "ell" => ell = Some(num(value)?),
            _ => return Err(Error::Format(format!("unknown header key {key:?}"))),
        }
    }
    let g = match fields[3] {
        "seeded" => LabeledBipartiteGraph::seeded(params.clone(), seed)?,
        "table" => {
            LabeledBipartiteGraph::check_shape(&params)?;
            if n + d > TABLE_LIMIT_BITS {
                return Err(Error::Format(format!("table graph n={n} d={d} exceeds the table limit")));
            }
            let bytes = m.div_ceil(8) as usize;
            let (left, degree) = (1u64 << n, 1u64 << d);
            let mut raw = vec![0u8; (left * degree) as usize * bytes];
            r.read_exact(&mut raw)
                .map_err(|e| Error::Format(format!("truncated edge table: {e}")))?;
            let mut table = vec![0u64; (left * degree) as usize];
            for (idx, rec) in raw.chunks_exact(bytes).enumerate() {
                let mut le = [0u8; 8];
                le[..bytes].copy_from_slice(rec);
                let (y, x) = (idx as u64 / left, idx as u64 % left);
                table[(x * degree + y) as usize] = u64::from_le_bytes(le);
            }
            LabeledBipartiteGraph::from_table(params.clone(), table, seed)?
        }
        "prefix" => crate::construction::prefix_merge(&read_record(r)?, m)?,
        "split" => {
            let ell = ell.ok_or_else(|| Error::Format("split record without ell".into()))?;
            crate::construction::split_with_ell(&read_record(r)?, ell)?
        }
        other => return Err(Error::Format(format!("unknown graph kind {other:?}"))),
    };
    let p = g.params();
    if (p.n, p.m, p.d) != (n, m, d) {
        return Err(Error::Format(format!(
            "header widths {n} {m} {d} disagree with the rebuilt graph {} {} {}",
            p.n, p.m, p.d
        )));
    }
    Ok(if *p == params { g } else { g.with_params(params) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(width: u32, v: u64) -> BitString {
        BitString::new(width, v).unwrap()
    }

    #[test]
    fn complete_graph_neighbor_is_label() {
        let g = LabeledBipartiteGraph::from_fn(2, 2, 2, |_, y| y).unwrap();
        assert_eq!(g.neighbor(&bs(2, 0b01), &bs(2, 0b10)).unwrap(), bs(2, 0b10));
    }

    #[test]
    fn explicit_table_lookup() {
        let g = LabeledBipartiteGraph::from_table(GraphParams::plain(1, 1, 1), vec![1, 1, 0, 0], 0).unwrap();
        assert_eq!(g.neighbor(&bs(1, 0), &bs(1, 1)).unwrap(), bs(1, 1));
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let g = LabeledBipartiteGraph::from_fn(2, 2, 2, |_, y| y).unwrap();
        assert!(matches!(
            g.neighbor(&bs(3, 0), &bs(2, 0)),
            Err(Error::WidthMismatch { expected: 2, actual: 3 })
        ));
        assert!(g.neighbors_multiset(&bs(1, 0)).is_err());
    }

    #[test]
    fn seeded_graph_matches_generator_replay() {
        let g = LabeledBipartiteGraph::seeded(GraphParams::plain(4, 3, 2), 42).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for x in 0..16u64 {
            for y in 0..4u64 {
                let expected = rng.next_u64() & 0b111;
                assert_eq!(g.neighbor_raw(x, y), expected);
            }
        }
    }

    #[test]
    fn on_demand_and_tabulated_generators_agree() {
        let params = GraphParams::plain(4, 5, 3);
        let table = LabeledBipartiteGraph::seeded(params.clone(), 9).unwrap();
        let lazy = LabeledBipartiteGraph::from_parts(params, 8, 9, NeighborMap::Seeded);
        assert!(lazy.inner.from_seed);
        for x in 0..16 {
            for y in 0..8 {
                assert_eq!(table.neighbor_raw(x, y), lazy.neighbor_raw(x, y));
            }
        }
    }

    #[test]
    fn multiset_sizes_and_all_to_one() {
        let one = LabeledBipartiteGraph::from_fn(3, 2, 0, |x, _| x & 3).unwrap();
        assert_eq!(one.neighbors_multiset(&bs(3, 5)).unwrap(), vec![bs(2, 1)]);
        let hub = LabeledBipartiteGraph::from_fn(3, 2, 2, |_, _| 0).unwrap();
        assert_eq!(hub.neighbors_multiset(&bs(3, 5)).unwrap(), vec![bs(2, 0); 4]);
        let random = LabeledBipartiteGraph::seeded(GraphParams::plain(5, 4, 3), 1).unwrap();
        for x in BitString::all(5) {
            assert_eq!(random.neighbors_multiset(&x).unwrap().len(), 8);
        }
    }

    #[test]
    fn b_degree_counts_multiplicity() {
        let hub = LabeledBipartiteGraph::from_fn(3, 2, 1, |_, _| 0).unwrap();
        let b = [bs(3, 1), bs(3, 2), bs(3, 6)];
        assert_eq!(hub.b_degree(&bs(2, 0), &b).unwrap(), 6);
        assert_eq!(hub.b_degree(&bs(2, 1), &b).unwrap(), 0);
        for z in BitString::all(2) {
            assert_eq!(hub.b_degree(&z, &[]).unwrap(), 0);
        }
    }

    #[test]
    fn handshake_identity_exhaustive() {
        let g = LabeledBipartiteGraph::seeded(GraphParams::plain(4, 3, 3), 17).unwrap();
        let b: Vec<BitString> = [0u64, 3, 7, 8, 15].iter().map(|&v| bs(4, v)).collect();
        let total: u64 = BitString::all(3).map(|z| g.b_degree(&z, &b).unwrap()).sum();
        assert_eq!(total, b.len() as u64 * g.degree());
    }

    #[test]
    fn table_serialization_round_trips_bit_exact() {
        let seeded = LabeledBipartiteGraph::seeded(GraphParams::plain(3, 10, 2), 5).unwrap();
        let g = LabeledBipartiteGraph::from_table(seeded.params().clone(), seeded.to_table().unwrap(), 5).unwrap();
        let mut bytes = Vec::new();
        write_graph(&g, &mut bytes).unwrap();
        let header_end = bytes.iter().position(|&b| b == b'\n').unwrap() + 1;
        assert_eq!(&bytes[..header_end], b"3 10 2 table 5\n");
        assert_eq!(bytes.len() - header_end, 8 * 4 * 2);
        // label-major: the second record is label 0 of left node 1
        let rec = u16::from_le_bytes([bytes[header_end + 2], bytes[header_end + 3]]) as u64;
        assert_eq!(rec, g.neighbor_raw(1, 0));
        let back = read_graph(&bytes[..]).unwrap();
        let mut again = Vec::new();
        write_graph(&back, &mut again).unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn seeded_serialization_is_header_only() {
        let g = LabeledBipartiteGraph::seeded(GraphParams::plain(20, 8, 4), 11).unwrap();
        let mut bytes = Vec::new();
        write_graph(&g, &mut bytes).unwrap();
        assert_eq!(bytes, b"20 8 4 seeded 11\n");
        let back = read_graph(&bytes[..]).unwrap();
        assert_eq!(back.neighbor_raw(12345, 7), g.neighbor_raw(12345, 7));
    }

    #[test]
    fn derived_graphs_round_trip_with_params() {
        use crate::construction::{build_random_graph, prefix_merge, split_with_ell};
        use crate::rational::rat;
        let base = build_random_graph(4, 3, rat(1, 8), 4, 9).unwrap();
        for g in [split_with_ell(&base, 5).unwrap(), prefix_merge(&base, 2).unwrap()] {
            let mut bytes = Vec::new();
            write_graph(&g, &mut bytes).unwrap();
            let back = read_graph(&bytes[..]).unwrap();
            assert_eq!(back.params(), g.params());
            assert_eq!(back.degree(), g.degree());
            assert_eq!(back.describe(), g.describe());
            for x in 0..16 {
                for y in 0..g.degree() {
                    assert_eq!(back.neighbor_raw(x, y), g.neighbor_raw(x, y));
                }
            }
        }
        let header = String::from_utf8(
            {
                let mut b = Vec::new();
                write_graph(&base, &mut b).unwrap();
                b
            }
            .split(|&c| c == b'\n')
            .next()
            .unwrap()
            .to_vec(),
        )
        .unwrap();
        assert_eq!(header, "4 3 10 seeded 9 epsilon=1/8 c=4");
    }

    #[test]
    fn truncated_table_is_a_format_error() {
        assert!(matches!(read_graph(&b"2 2 1 table 0\n\x01"[..]), Err(Error::Format(_))));
        assert!(matches!(read_graph(&b"2 2 1 bogus 0\n"[..]), Err(Error::Format(_))));
    }
}
