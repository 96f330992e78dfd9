use std::fs::{self, File};
use std::fmt::Write as _;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use richowner::construction::{build_random_graph, construct_rich_owner_graph, ConstructionConfig, DEFAULT_C};
use richowner::crt::{isolation_probability, HashScheme};
use richowner::experiment::{
    emit_report, report_from_json, report_to_csv, run_experiment, ExperimentConfig, ReportFormat,
};
use richowner::graph::{read_graph, write_graph};
use richowner::oracle::{ComplexityOracle, CorrelationSet, CountingOracle, Sender, ToyMachineConfig, ToyOracle};
use richowner::protocol::{
    decode_full, decode_known_profile, decode_membership, derive_decoding_bounds, encode, Codeword, CodewordWire,
    DecodeOptions, ProfileSpace, RateVector,
};
use richowner::rational::{parse_rational, Rational};
use richowner::scenarios::collinear::collinear_profile;
use richowner::verification::{check_prefix_extractor, rich_owner_fraction, BFamily};
use richowner::{BitString, LabeledBipartiteGraph};

#[derive(Parser)]
#[command(name = "richowner", version, about = "Rich-owner graphs and three-sender distributed compression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph and write it to a file.
    BuildGraph {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        /// Rich-owner parameter; the extractor error is delta^2 / 2.
        #[arg(long, default_value = "1/2")]
        delta: String,
        #[arg(long, default_value_t = DEFAULT_C)]
        c: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Stop after the random extractor graph (no audit, no edge splitting).
        #[arg(long)]
        plain: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Audit a stored graph as a prefix extractor or as a rich-owner graph.
    VerifyGraph {
        #[arg(long)]
        graph: PathBuf,
        /// `exhaustive`, `all-of-size:N` or `sampled:SIZExCOUNT@SEED`.
        #[arg(long, default_value = "exhaustive")]
        family: String,
        /// Extractor error bound; defaults to the value stored with the graph.
        #[arg(long)]
        epsilon: Option<String>,
        /// Audit the rich-owner property at this k instead.
        #[arg(long)]
        rich_k: Option<u32>,
        #[arg(long)]
        delta: Option<String>,
    },
    /// Exact isolation probability of a CRT fingerprint.
    HashAudit {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 3)]
        s: u64,
        #[arg(long)]
        epsilon: String,
        /// Hex value to isolate.
        #[arg(long)]
        u: String,
        /// Comma-separated hex distractors.
        #[arg(long, value_delimiter = ',')]
        distractors: Vec<String>,
    },
    /// Complexity profile of a correlation set or, with the toy oracle, of one triple.
    Profile {
        #[arg(long, default_value = "collinear:q=3")]
        scenario: String,
        #[arg(long, default_value = "counting")]
        oracle: String,
        /// Comma-separated hex triple (toy oracle).
        #[arg(long, value_delimiter = ',')]
        triple: Vec<String>,
        #[arg(long, default_value_t = 8)]
        n: u32,
        #[arg(long, default_value_t = 12)]
        toy_l: u32,
        #[arg(long, default_value_t = 200)]
        toy_t: u64,
    },
    /// Encode one source string with a stored graph.
    Encode {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        sender: String,
        /// Hex source string.
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        hash_s: u64,
        /// Fingerprint error; `1/n^2` by default.
        #[arg(long)]
        hash_epsilon: Option<String>,
        /// Omit the fingerprint.
        #[arg(long)]
        no_tag: bool,
    },
    /// Decode three codewords.
    Decode {
        /// Graph files for senders A, B, C.
        #[arg(long, value_delimiter = ',', required = true)]
        graphs: Vec<PathBuf>,
        /// JSON array of three codewords.
        #[arg(long)]
        codewords: PathBuf,
        #[arg(long, default_value = "membership")]
        decoder: String,
        #[arg(long, default_value = "collinear:q=3")]
        scenario: String,
        #[arg(long, default_value = "counting")]
        oracle: String,
        /// Rates `a,b,c` (staged decoders).
        #[arg(long)]
        rates: Option<String>,
        /// Profile values `A,B,C,AB,AC,BC,ABC` (known-profile decoder with the toy oracle).
        #[arg(long, value_delimiter = ',')]
        profile: Vec<u32>,
        #[arg(long, default_value_t = 4)]
        slack: u32,
        #[arg(long, default_value_t = 12)]
        toy_l: u32,
        #[arg(long, default_value_t = 200)]
        toy_t: u64,
    },
    /// Run a batch experiment from a key=value config.
    Experiment {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Extra `key=value` assignments applied after the file.
        #[arg(long = "set")]
        overrides: Vec<String>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Summarize or convert a stored JSON report.
    Report {
        #[arg(long)]
        input: PathBuf,
        /// `summary`, `json` or `csv`.
        #[arg(long, default_value = "summary")]
        format: String,
    },
}

fn rational(s: &str) -> Result<Rational> {
    Ok(parse_rational(s)?)
}

fn load_graph(path: &Path) -> Result<LabeledBipartiteGraph> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_graph(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

fn print_json(out: &mut String, v: &impl serde::Serialize) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn parse_hex_triple(parts: &[String], n: u32) -> Result<[BitString; 3]> {
    let [a, b, c] = parts else {
        bail!("a triple needs exactly three hex values");
    };
    Ok([BitString::from_hex(n, a)?, BitString::from_hex(n, b)?, BitString::from_hex(n, c)?])
}

fn make_oracle(kind: &str, scenario: &str, slack: u32, n: u32, l: u32, t: u64) -> Result<Box<dyn ComplexityOracle>> {
    Ok(match kind {
        "counting" => Box::new(CountingOracle::new(Arc::new(CorrelationSet::parse(scenario)?), slack)),
        "toy" => Box::new(ToyOracle::new(ToyMachineConfig::new(l, t)?, n, slack)?),
        other => bail!("unknown oracle {other:?}"),
    })
}

/// Runs one command, writing its output to `out`; returns whether an audit passed.
fn run(cli: Cli, out: &mut String) -> Result<bool> {
    match cli.command {
        Command::BuildGraph {
            n,
            k,
            delta,
            c,
            seed,
            plain,
            out: path,
        } => {
            let delta = rational(&delta)?;
            let g = if plain {
                build_random_graph(n, k, delta * delta / Rational::from_integer(2), c, seed)?
            } else {
                let mut cfg = ConstructionConfig::new(n, k, delta, seed);
                cfg.c = c;
                let (g, report) = construct_rich_owner_graph(&cfg)?;
                write!(out, "{}", report.to_kv())?;
                g
            };
            let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(f);
            write_graph(&g, &mut w)?;
            w.flush()?;
            writeln!(out, "graph={}", g.describe())?;
        }
        Command::VerifyGraph {
            graph,
            family,
            epsilon,
            rich_k,
            delta,
        } => {
            let g = load_graph(&graph)?;
            let family = BFamily::parse(&family)?;
            let report = match rich_k {
                Some(k) => {
                    let delta = match delta {
                        Some(d) => rational(&d)?,
                        None => g.params().delta,
                    };
                    rich_owner_fraction(&g, &family, k, delta)?
                }
                None => {
                    let epsilon = match epsilon {
                        Some(e) => rational(&e)?,
                        None => g.params().epsilon,
                    };
                    check_prefix_extractor(&g, epsilon, &family)?
                }
            };
            print_json(out, &report)?;
            return Ok(report.passed);
        }
        Command::HashAudit {
            n,
            s,
            epsilon,
            u,
            distractors,
        } => {
            let scheme = HashScheme::new(n, s, rational(&epsilon)?)?;
            let u = BitString::from_hex(n, &u)?;
            let ds = distractors
                .iter()
                .map(|d| BitString::from_hex(n, d))
                .collect::<richowner::Result<Vec<_>>>()?;
            let p = isolation_probability(&u, &ds, &scheme)?;
            print_json(out, &serde_json::json!({
                "t": scheme.t(),
                "tag_bits": scheme.tag_bits(),
                "isolation_probability": p.to_string(),
                "required": (Rational::from_integer(1) - scheme.epsilon()).to_string(),
                "passed": p >= Rational::from_integer(1) - scheme.epsilon(),
            }))?;
        }
        Command::Profile {
            scenario,
            oracle,
            triple,
            n,
            toy_l,
            toy_t,
        } => match oracle.as_str() {
            "counting" => {
                if let Some(q) = scenario
                    .strip_prefix("collinear:")
                    .map(|a| a.trim_start_matches("q="))
                {
                    let summary = collinear_profile(q.parse().context("collinear size")?)?;
                    print_json(out, &serde_json::json!({
                        "scenario": scenario,
                        "members": summary.members,
                        "projections": summary.projections,
                        "profile": summary.profile.values(),
                    }))?;
                } else {
                    let set = CorrelationSet::parse(&scenario)?;
                    print_json(out, &serde_json::json!({
                        "scenario": scenario,
                        "members": set.len(),
                        "profile": set.profile().values(),
                    }))?;
                }
            }
            "toy" => {
                let toy = ToyOracle::new(ToyMachineConfig::new(toy_l, toy_t)?, n, 0)?;
                let t = parse_hex_triple(&triple, n)?;
                let p = toy.profile_of(&t)?;
                print_json(out, &serde_json::json!({
                    "oracle": toy.name(),
                    "profile": p.values(),
                    "display": p.to_string(),
                }))?;
            }
            other => bail!("unknown oracle {other:?}"),
        },
        Command::Encode {
            graph,
            sender,
            x,
            seed,
            hash_s,
            hash_epsilon,
            no_tag,
        } => {
            let g = load_graph(&graph)?;
            let n = g.params().n;
            let x = BitString::from_hex(n, &x)?;
            let epsilon = match hash_epsilon {
                Some(e) => rational(&e)?,
                None => Rational::new(1, (n as i128) * (n as i128)),
            };
            let scheme = HashScheme::new(n, hash_s, epsilon)?;
            let c = encode(Sender::parse(&sender)?, &g, &x, (!no_tag).then_some(&scheme), seed)?;
            print_json(out, &c.to_wire())?;
        }
        Command::Decode {
            graphs,
            codewords,
            decoder,
            scenario,
            oracle,
            rates,
            profile,
            slack,
            toy_l,
            toy_t,
        } => {
            let gs: Vec<LabeledBipartiteGraph> = graphs.iter().map(|p| load_graph(p)).collect::<Result<_>>()?;
            let gs: [LabeledBipartiteGraph; 3] = gs.try_into().map_err(|_| anyhow::anyhow!("need three graphs"))?;
            let n = gs[0].params().n;
            let text = fs::read_to_string(&codewords).with_context(|| format!("reading {}", codewords.display()))?;
            let wires: Vec<CodewordWire> = serde_json::from_str(&text)?;
            let cws: Vec<Codeword> = wires
                .iter()
                .map(|w| Codeword::from_wire(w, n))
                .collect::<richowner::Result<_>>()?;
            let mut cws: [Codeword; 3] = cws.try_into().map_err(|_| anyhow::anyhow!("need three codewords"))?;
            cws.sort_by_key(|c| c.sender);
            let result = match decoder.as_str() {
                "membership" => {
                    let set = CorrelationSet::parse(&scenario)?;
                    let out = decode_membership(&cws, &set, &gs)?;
                    serde_json::json!({
                        "status": if out.is_ok() { "ok" } else { "fail" },
                        "triple_hex": out.triple.map(|t| t.map(|v| BitString::new(n, v).map(|b| b.to_hex()).unwrap_or_default())),
                        "branch": null,
                        "steps": out.steps,
                        "survivors": out.survivors,
                    })
                }
                "known-profile" | "full" => {
                    let oracle = make_oracle(&oracle, &scenario, slack, n, toy_l, toy_t)?;
                    let rates: RateVector = rates.context("--rates is required for staged decoding")?.parse()?;
                    let opts = DecodeOptions::default();
                    let out = if decoder == "full" {
                        decode_full(&cws, &rates, oracle.as_ref(), &gs, &ProfileSpace::new(), &opts)?
                    } else {
                        let p = match profile.as_slice() {
                            [] => match CorrelationSet::parse(&scenario) {
                                Ok(set) => set.profile(),
                                Err(_) => bail!("--profile is required unless the scenario is a correlation set"),
                            },
                            values => richowner::oracle::ComplexityProfile::new(
                                values.try_into().context("--profile needs seven values")?,
                            ),
                        };
                        let plan = derive_decoding_bounds(&p, &rates, slack)?;
                        decode_known_profile(&cws, oracle.as_ref(), &gs, &plan, &opts)?
                    };
                    serde_json::to_value(out.to_result())?
                }
                other => bail!("unknown decoder {other:?}"),
            };
            print_json(out, &result)?;
        }
        Command::Experiment {
            config,
            overrides,
            json,
            csv,
        } => {
            let mut cfg = match config {
                Some(p) => ExperimentConfig::load(&p)?,
                None => ExperimentConfig::default(),
            };
            cfg.apply_env_seed()?;
            for o in &overrides {
                cfg.apply_override(o)?;
            }
            let report = run_experiment(&cfg)?;
            if let Some(p) = &json {
                emit_report(&report, ReportFormat::Json, p)?;
            }
            if let Some(p) = &csv {
                emit_report(&report, ReportFormat::Csv, p)?;
            }
            let a = &report.aggregates;
            writeln!(
                out,
                "trials={} successes={} wrong={} failures={} success_rate={:.4} mean_steps={:.1} mean_codeword_bits={:.1}",
                a.trials, a.successes, a.wrong, a.failures, a.success_rate, a.mean_steps, a.mean_codeword_bits
            )?;
        }
        Command::Report { input, format } => {
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let report = report_from_json(&text)?;
            match format.as_str() {
                "summary" => {
                    let a = &report.aggregates;
                    writeln!(out, "tool_version={}", report.tool_version)?;
                    writeln!(out, "oracle={}", report.oracle)?;
                    write!(out, "{}", report.config.to_kv())?;
                    writeln!(out, "trials={}", a.trials)?;
                    writeln!(out, "successes={}", a.successes)?;
                    writeln!(out, "wrong={}", a.wrong)?;
                    writeln!(out, "success_rate={:.4}", a.success_rate)?;
                    writeln!(out, "mean_steps={:.1}", a.mean_steps)?;
                    writeln!(out, "graphs={}", report.graphs.len())?;
                }
                "json" => write!(out, "{}", richowner::experiment::report_to_json(&report)?)?,
                "csv" => write!(out, "{}", report_to_csv(&report)?)?,
                other => bail!("unknown report format {other:?}"),
            }
        }
    }
    Ok(true)
}

fn main() {
    let mut out = String::new();
    let result = run(Cli::parse(), &mut out);
    // A closed pipe (for example `| head`) is not an error worth reporting.
    match std::io::stdout().lock().write_all(out.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
        Err(e) => {
            eprintln!("error: writing output: {e}");
            std::process::exit(2);
        }
        Ok(()) => {}
    }
    match result {
        Ok(true) => {}
        Ok(false) => std::process::exit(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
