//! Seeded batch experiments and their reports.
//!
//! A configuration is a flat list of `key=value` lines. Trial `i` draws all of
//! its randomness from a seed derived from the master seed and `i`, so any
//! single trial can be replayed in isolation.

use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::construction::{ConstructionReport, DEFAULT_C};
use crate::crt::HashScheme;
use crate::error::{Error, Result};
use crate::oracle::{ComplexityOracle, CorrelationSet, CountingOracle, ToyMachineConfig, ToyOracle, Triple};
use crate::protocol::{
    decode_full, decode_known_profile, decode_membership, derive_decoding_bounds, encode_triple, DecodeOptions,
    GraphBank, GraphMode, ProfileSpace, RateRule, RateVector,
};
use crate::rational::{as_string, derive_seed, int, parse_rational, rat, Rational};
use crate::scenarios::dms::{sample_dms, SourceDistribution};
use crate::scenarios::region::validate_rate_region;

/// Environment variable that replaces the master seed when applied.
pub const SEED_ENV: &str = "RICHOWNER_SEED";

/// Offset separating the graph seed stream from trial seeds.
const GRAPH_STREAM: u64 = 1 << 48;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Membership,
    KnownProfile,
    Full,
}

impl DecoderKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "membership" => Ok(DecoderKind::Membership),
            "known-profile" => Ok(DecoderKind::KnownProfile),
            "full" => Ok(DecoderKind::Full),
            other => Err(Error::Usage(format!("unknown decoder {other:?}"))),
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Membership => "membership",
            DecoderKind::KnownProfile => "known-profile",
            DecoderKind::Full => "full",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleKind {
    Counting,
    Toy,
}

impl OracleKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "counting" => Ok(OracleKind::Counting),
            "toy" => Ok(OracleKind::Toy),
            other => Err(Error::Usage(format!("unknown oracle {other:?}"))),
        }
    }
}

impl fmt::Display for OracleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleKind::Counting => "counting",
            OracleKind::Toy => "toy",
        })
    }
}

mod rule_as_string {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::protocol::RateRule;

    pub fn serialize<S: Serializer>(r: &RateRule, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RateRule, D::Error> {
        let raw = String::deserialize(d)?;
        RateRule::parse(&raw).map_err(serde::de::Error::custom)
    }
}

mod opt_rational {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::rational::{parse_rational, Rational};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.collect_str(r),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|raw| parse_rational(&raw).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Every experiment knob.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// `collinear:q=<q>`, `diagonal:<n>`, `cube:<n>`, `file:<path>`, `dms:<probabilities>` or `planted`.
    pub scenario: String,
    pub oracle: OracleKind,
    pub decoder: DecoderKind,
    /// `a,b,c`, `profile+<s>` or `deficit:<d>`.
    #[serde(with = "rule_as_string")]
    pub rates: RateRule,
    pub graph: GraphMode,
    #[serde(with = "as_string")]
    pub delta: Rational,
    pub c: u32,
    pub trials: u64,
    pub seed: u64,
    /// Source width for scenarios that do not fix it (`dms`, `planted`).
    pub n: u32,
    pub toy_l: u32,
    pub toy_t: u64,
    pub hash_s: u64,
    /// Fingerprint error; `1/n^2` when unset.
    #[serde(with = "opt_rational")]
    pub hash_epsilon: Option<Rational>,
    pub slack: u32,
    pub quantum: u64,
    pub budget: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: "collinear:q=3".into(),
            oracle: OracleKind::Counting,
            decoder: DecoderKind::Membership,
            rates: RateRule::ProfilePlus { slack: 2 },
            graph: GraphMode::Pipeline,
            delta: rat(1, 2),
            c: DEFAULT_C,
            trials: 100,
            seed: 1,
            n: 8,
            toy_l: 12,
            toy_t: 200,
            hash_s: 3,
            hash_epsilon: None,
            slack: 4,
            quantum: DecodeOptions::default().quantum,
            budget: DecodeOptions::default().budget,
        }
    }
}

pub const CONFIG_KEYS: [&str; 17] = [
    "scenario",
    "oracle",
    "decoder",
    "rates",
    "graph",
    "delta",
    "c",
    "trials",
    "seed",
    "n",
    "toy_l",
    "toy_t",
    "hash_s",
    "hash_epsilon",
    "slack",
    "quantum",
    "budget",
];

impl ExperimentConfig {
    /// Parses `key=value` lines; blank lines and `#` comments are ignored.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if !line.is_empty() {
                cfg.apply_override(line)?;
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_kv(&text)
    }

    /// Applies one `key=value` assignment.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("expected key=value, got {assignment:?}")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |e: &dyn fmt::Display| Error::Usage(format!("invalid value for {key}: {e}"));
        let int = |v: &str| v.parse::<u64>().map_err(|e| bad(&e));
        let small = |v: &str| v.parse::<u32>().map_err(|e| bad(&e));
        match key {
            "scenario" => self.scenario = value.to_string(),
            "oracle" => self.oracle = OracleKind::parse(value)?,
            "decoder" => self.decoder = DecoderKind::parse(value)?,
            "rates" => self.rates = RateRule::parse(value).map_err(|e| bad(&e))?,
            "graph" => self.graph = GraphMode::parse(value).map_err(|e| bad(&e))?,
            "delta" => self.delta = parse_rational(value).map_err(|e| bad(&e))?,
            "c" => self.c = small(value)?,
            "trials" => self.trials = int(value)?,
            "seed" => self.seed = int(value)?,
            "n" => self.n = small(value)?,
            "toy_l" => self.toy_l = small(value)?,
            "toy_t" => self.toy_t = int(value)?,
            "hash_s" => self.hash_s = int(value)?,
            "hash_epsilon" => self.hash_epsilon = Some(parse_rational(value).map_err(|e| bad(&e))?),
            "slack" => self.slack = small(value)?,
            "quantum" => self.quantum = int(value)?,
            "budget" => self.budget = int(value)?,
            other => return Err(Error::Usage(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Replaces the master seed with the value of [`SEED_ENV`], if set.
    pub fn apply_env_seed(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|e| Error::Usage(format!("{SEED_ENV}={v:?}: {e}")))?;
        }
        Ok(())
    }

    /// The configuration as `key=value` lines, readable by [`ExperimentConfig::from_kv`].
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        line("scenario", self.scenario.clone());
        line("oracle", self.oracle.to_string());
        line("decoder", self.decoder.to_string());
        line("rates", self.rates.to_string());
        line("graph", self.graph.to_string());
        line("delta", self.delta.to_string());
        line("c", self.c.to_string());
        line("trials", self.trials.to_string());
        line("seed", self.seed.to_string());
        line("n", self.n.to_string());
        line("toy_l", self.toy_l.to_string());
        line("toy_t", self.toy_t.to_string());
        line("hash_s", self.hash_s.to_string());
        if let Some(e) = self.hash_epsilon {
            line("hash_epsilon", e.to_string());
        }
        line("slack", self.slack.to_string());
        line("quantum", self.quantum.to_string());
        line("budget", self.budget.to_string());
        out
    }
}

/// Where trial inputs come from.
enum Source {
    Set(Arc<CorrelationSet>),
    Dms(Box<SourceDistribution>, Arc<CorrelationSet>),
    Planted(Vec<Triple>),
}

impl Source {
    fn width(&self, cfg: &ExperimentConfig) -> u32 {
        match self {
            Source::Set(s) | Source::Dms(_, s) => s.n(),
            Source::Planted(_) => cfg.n,
        }
    }

    fn set(&self) -> Option<&Arc<CorrelationSet>> {
        match self {
            Source::Set(s) | Source::Dms(_, s) => Some(s),
            Source::Planted(_) => None,
        }
    }

    fn draw(&self, n: u32, seed: u64) -> Result<Triple> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            Source::Set(s) => {
                let raw = s.sample(&mut rng);
                Ok(raw.map(|v| BitString::new(n, v).expect("member fits the set width")))
            }
            Source::Dms(dist, _) => sample_dms(dist, n, seed),
            Source::Planted(corpus) => {
                use rand::Rng;
                Ok(corpus[rng.gen_range(0..corpus.len())])
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: u64,
    pub seed: u64,
    pub rates: RateVector,
    /// `ok`, `wrong` (a confident but incorrect triple) or `fail`.
    pub status: String,
    pub steps: u64,
    pub codeword_bits: u32,
    pub region_ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survivors: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: u64,
    pub successes: u64,
    pub wrong: u64,
    pub failures: u64,
    pub success_rate: f64,
    pub mean_steps: f64,
    pub mean_codeword_bits: f64,
    /// Trials whose rates satisfied every rate-region inequality.
    pub region_ok: u64,
}

impl Aggregates {
    fn from_trials(trials: &[TrialRecord]) -> Self {
        let count = trials.len() as u64;
        let successes = trials.iter().filter(|t| t.status == "ok").count() as u64;
        let wrong = trials.iter().filter(|t| t.status == "wrong").count() as u64;
        let mean = |f: &dyn Fn(&TrialRecord) -> f64| {
            if count == 0 {
                0.0
            } else {
                trials.iter().map(f).sum::<f64>() / count as f64
            }
        };
        Aggregates {
            trials: count,
            successes,
            wrong,
            failures: count - successes - wrong,
            success_rate: if count == 0 { 0.0 } else { successes as f64 / count as f64 },
            mean_steps: mean(&|t| t.steps as f64),
            mean_codeword_bits: mean(&|t| t.codeword_bits as f64),
            region_ok: trials.iter().filter(|t| t.region_ok).count() as u64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub tool_version: String,
    pub status: String,
    pub config: ExperimentConfig,
    pub oracle: String,
    pub aggregates: Aggregates,
    /// Audits of the rich-owner graphs that were built.
    pub graphs: Vec<ConstructionReport>,
    pub trials: Vec<TrialRecord>,
}

fn build_source(cfg: &ExperimentConfig) -> Result<Source> {
    let spec = cfg.scenario.trim();
    if spec == "planted" {
        return Ok(Source::Planted(Vec::new()));
    }
    if spec.starts_with("dms:") {
        let dist = SourceDistribution::parse(spec)?;
        let set = dist.support_set(cfg.n)?;
        return Ok(Source::Dms(Box::new(dist), Arc::new(set)));
    }
    Ok(Source::Set(Arc::new(CorrelationSet::parse(spec)?)))
}

fn build_oracle(cfg: &ExperimentConfig, source: &mut Source) -> Result<Box<dyn ComplexityOracle>> {
    let n = source.width(cfg);
    match cfg.oracle {
        OracleKind::Counting => {
            let set = source
                .set()
                .ok_or_else(|| Error::Usage("the counting oracle needs a correlation-set scenario".into()))?;
            Ok(Box::new(CountingOracle::new(Arc::clone(set), cfg.slack)))
        }
        OracleKind::Toy => {
            let toy = ToyOracle::new(ToyMachineConfig::new(cfg.toy_l, cfg.toy_t)?, n, cfg.slack)?;
            if let Source::Planted(corpus) = source {
                *corpus = toy.planted_triples();
                if corpus.is_empty() {
                    return Err(Error::Usage(format!(
                        "no planted triples exist for n={n}, L={}",
                        cfg.toy_l
                    )));
                }
            }
            Ok(Box::new(toy))
        }
    }
}

/// Runs every trial of `cfg`; the report is a pure function of the configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut source = build_source(cfg)?;
    if matches!(source, Source::Planted(_)) && cfg.oracle != OracleKind::Toy {
        return Err(Error::Usage("the planted scenario needs oracle=toy".into()));
    }
    if cfg.decoder == DecoderKind::Membership && source.set().is_none() {
        return Err(Error::Usage("the membership decoder needs a correlation-set scenario".into()));
    }
    let oracle = build_oracle(cfg, &mut source)?;
    let n = source.width(cfg);
    let epsilon = cfg.hash_epsilon.unwrap_or_else(|| int(1) / int((n as i128) * (n as i128)));
    let scheme = HashScheme::new(n, cfg.hash_s, epsilon)?;
    let mut bank = GraphBank::new(n, cfg.graph, cfg.delta, cfg.c, derive_seed(cfg.seed, GRAPH_STREAM));
    let space = ProfileSpace::new();
    let opts = DecodeOptions {
        quantum: cfg.quantum,
        budget: cfg.budget,
    };
    let mut trials = Vec::with_capacity(cfg.trials as usize);
    for index in 0..cfg.trials {
        let seed = derive_seed(cfg.seed, index);
        let triple = source.draw(n, derive_seed(seed, 0))?;
        let profile = oracle.profile_of(&triple)?;
        let rates = cfg.rates.resolve(&profile);
        let graphs = bank.graphs_for(&rates)?;
        let codewords = encode_triple(&graphs, &triple, Some(&scheme), derive_seed(seed, 1))?;
        let codeword_bits = codewords.iter().map(|c| c.length(Some(&scheme))).sum();
        let region_ok = validate_rate_region(&rates, &profile).passed;
        let mut record = TrialRecord {
            index,
            seed,
            rates,
            status: String::new(),
            steps: 0,
            codeword_bits,
            region_ok,
            survivors: None,
            branch: None,
            reason: None,
        };
        let decoded: Option<Triple> = match cfg.decoder {
            DecoderKind::Membership => {
                let set = source.set().expect("checked above");
                let out = decode_membership(&codewords, set, &graphs)?;
                record.steps = out.steps;
                record.survivors = Some(out.survivors);
                if !out.is_ok() {
                    record.reason = Some(format!("{} survivors", out.survivors));
                }
                out.triple.map(|t| t.map(|v| BitString::new(n, v).expect("member fits")))
            }
            DecoderKind::KnownProfile => match derive_decoding_bounds(&profile, &rates, cfg.slack) {
                Ok(plan) => {
                    let out = decode_known_profile(&codewords, oracle.as_ref(), &graphs, &plan, &opts)?;
                    record.steps = out.steps;
                    record.branch = out.branch;
                    record.reason = out.failure;
                    out.triple
                }
                Err(e) => {
                    record.reason = Some(e.to_string());
                    None
                }
            },
            DecoderKind::Full => {
                let out = decode_full(&codewords, &rates, oracle.as_ref(), &graphs, &space, &opts)?;
                record.steps = out.steps;
                record.branch = out.branch;
                record.reason = out.failure;
                out.triple
            }
        };
        record.status = match decoded {
            Some(t) if t == triple => "ok",
            Some(_) => "wrong",
            None => "fail",
        }
        .to_string();
        trials.push(record);
    }
    Ok(ExperimentReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        status: "ok".into(),
        config: cfg.clone(),
        oracle: oracle.name(),
        aggregates: Aggregates::from_trials(&trials),
        graphs: bank.reports(),
        trials,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Usage(format!("unknown report format {other:?}"))),
        }
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    index: u64,
    seed: u64,
    rates: String,
    status: &'a str,
    steps: u64,
    codeword_bits: u32,
    region_ok: bool,
    survivors: Option<u64>,
    branch: Option<usize>,
}

pub fn report_to_json(report: &ExperimentReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn report_from_json(text: &str) -> Result<ExperimentReport> {
    serde_json::from_str(text).map_err(|e| Error::Format(format!("report: {e}")))
}

/// One CSV row per trial.
pub fn report_to_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if report.trials.is_empty() {
        w.write_record([
            "index",
            "seed",
            "rates",
            "status",
            "steps",
            "codeword_bits",
            "region_ok",
            "survivors",
            "branch",
        ])
        .map_err(|e| Error::Format(e.to_string()))?;
    }
    for t in &report.trials {
        w.serialize(CsvRow {
            index: t.index,
            seed: t.seed,
            rates: t.rates.to_string(),
            status: &t.status,
            steps: t.steps,
            codeword_bits: t.codeword_bits,
            region_ok: t.region_ok,
            survivors: t.survivors,
            branch: t.branch,
        })
        .map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

pub fn emit_report(report: &ExperimentReport, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Json => report_to_json(report)?,
        ReportFormat::Csv => report_to_csv(report)?,
    };
    fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}
