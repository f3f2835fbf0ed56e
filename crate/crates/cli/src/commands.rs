//! The `prefcycles` subcommands. Every command returns the process exit
//! code: 0 for success/pass, 1 when a counterexample or instability was
//! found, 2 for usage and validation errors (via the error path).

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;

use prefcycles_core::boston::{
    boston_assign, check_sincere_invariance, truthful_submissions, SincerityPartition,
};
use prefcycles_core::cycles::{
    extract_cycle_many, extract_cycle_pair, extract_cycle_pareto, join, meet,
    partition_disagreement, ManyExtractOutcome, PreferenceCycle,
};
use prefcycles_core::da::{da_1to1, da_many, ProposalOutcome, ProposalTrace};
use prefcycles_core::oracle::{
    enumerate_matchings_1to1, enumerate_matchings_many, enumerate_stable_1to1,
    enumerate_stable_many, seeded_1to1, seeded_1to1_bounded, seeded_many, seeded_many_bounded,
    ManyToOneShape, OneToOneShape, OracleCaps,
};
use prefcycles_core::theorems::{
    check_conway, check_lemma1, check_lemma2, check_lemma3, check_lone_wolf, check_roth,
    check_rural_hospitals, TheoremReport,
};
use prefcycles_core::{
    AgentId, ManyToOneInstance, MarketInstance, MarketMatching, OneToOneMatching, Side,
};

use crate::formats::{
    doc_from_instance, doc_from_matching, instance_from_doc, lemma_counterexample_doc,
    matching_from_doc, report_doc, to_canonical_json, trace_events, trace_to_jsonl, CyclesDoc,
    DaReportDoc, EnumerationDoc, InstanceDoc, MatchingDoc, ParsedInstance, QuarantineDoc,
    SweepReportDoc, TheoremReportDoc,
};

/// Seed salt for drawing sincerity partitions, so the partition stream is
/// independent of the instance stream.
const SINCERE_SALT: u64 = 0x51ce_ce11;

#[derive(Parser)]
#[command(
    name = "prefcycles",
    about = "Two-sided matching toolkit: deferred acceptance, preference cycles, \
             the Boston mechanism, and an exhaustive verification oracle",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    #[value(name = "M", alias = "m")]
    M,
    #[value(name = "W", alias = "w")]
    W,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    #[value(name = "one-to-one")]
    OneToOne,
    #[value(name = "many-to-one")]
    ManyToOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CycleMode {
    Pair,
    Pareto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TheoremArg {
    #[value(name = "lone-wolf")]
    LoneWolf,
    #[value(name = "conway")]
    Conway,
    #[value(name = "roth")]
    Roth,
    #[value(name = "rural-hospitals")]
    RuralHospitals,
    #[value(name = "lemma-1")]
    Lemma1,
    #[value(name = "lemma-2")]
    Lemma2,
    #[value(name = "lemma-3")]
    Lemma3,
    #[value(name = "pathak-sonmez")]
    PathakSonmez,
}

impl TheoremArg {
    fn many_to_one(self) -> bool {
        matches!(
            self,
            TheoremArg::RuralHospitals | TheoremArg::Lemma3 | TheoremArg::PathakSonmez
        )
    }

    fn name(self) -> &'static str {
        match self {
            TheoremArg::LoneWolf => "lone-wolf",
            TheoremArg::Conway => "conway",
            TheoremArg::Roth => "roth",
            TheoremArg::RuralHospitals => "rural-hospitals",
            TheoremArg::Lemma1 => "lemma-1",
            TheoremArg::Lemma2 => "lemma-2",
            TheoremArg::Lemma3 => "lemma-3",
            TheoremArg::PathakSonmez => "pathak-sonmez",
        }
    }
}

#[derive(Subcommand)]
pub enum Command {
    /// Check an instance file and print a short summary
    Validate { instance: PathBuf },
    /// Run deferred acceptance and print the matching with its trace
    Da {
        instance: PathBuf,
        /// Proposing side; W applies to one-to-one instances only
        #[arg(long, value_enum, default_value = "M")]
        side: SideArg,
        #[arg(long)]
        json: bool,
        /// Also write the trace as JSON lines to this path
        #[arg(long, value_name = "PATH")]
        trace_jsonl: Option<PathBuf>,
    },
    /// Run the Boston (immediate-acceptance) mechanism
    Boston {
        instance: PathBuf,
        /// Submitted lists as a JSON map student -> [college, ...];
        /// truthful submissions when omitted
        #[arg(long, value_name = "PATH")]
        submissions: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Enumerate matchings, stable ones by default
    Enumerate {
        instance: PathBuf,
        /// Every matching, not only the stable ones
        #[arg(long)]
        all: bool,
        #[arg(long)]
        json: bool,
        /// Write each matching to DIR/matching-NNN.json
        #[arg(long, value_name = "DIR")]
        out_dir: Option<PathBuf>,
        /// Side cap for one-to-one enumeration
        #[arg(long, default_value_t = 8)]
        max_size: usize,
        /// Cap on raw assignments for many-to-one enumeration
        #[arg(long, default_value_t = 1_000_000)]
        max_assignments: u64,
    },
    /// Extract preference cycles between two matchings of one instance
    Cycles {
        instance: PathBuf,
        #[arg(long, value_name = "PATH")]
        matching_a: PathBuf,
        #[arg(long, value_name = "PATH")]
        matching_b: PathBuf,
        /// Start agent; without it, one-to-one instances get the full
        /// disagreement partition (required for many-to-one)
        #[arg(long, value_name = "AGENT")]
        start: Option<String>,
        /// Extraction contract: pair of stable matchings, or stable vs
        /// all-improving individually rational
        #[arg(long, value_enum, default_value = "pair")]
        mode: CycleMode,
        #[arg(long)]
        json: bool,
    },
    /// Join two stable matchings (or meet them with --meet)
    Join {
        instance: PathBuf,
        #[arg(long, value_name = "PATH")]
        matching_a: PathBuf,
        #[arg(long, value_name = "PATH")]
        matching_b: PathBuf,
        /// Proposer-pessimal meet instead of the join
        #[arg(long)]
        meet: bool,
        #[arg(long)]
        json: bool,
        #[arg(short, long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Sweep a theorem check over seeded random instances
    Check {
        #[arg(long, value_enum)]
        theorem: TheoremArg,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        /// Maximum sizes as AxB; defaults to 5x5 (one-to-one) or 6x3
        #[arg(long, value_name = "AxB")]
        sizes: Option<String>,
        #[arg(long, default_value_t = 0.3)]
        truncation: f64,
        #[arg(long, default_value_t = 0.0)]
        symmetry: f64,
        #[arg(long, default_value_t = 3)]
        max_quota: u32,
        /// Probability that a student is sincere (pathak-sonmez sweeps)
        #[arg(long, default_value_t = 0.5)]
        sincere_prob: f64,
        #[arg(long)]
        json: bool,
        /// Where lemma-3 counterexamples are persisted
        #[arg(long, value_name = "PATH", default_value = "lemma3-counterexamples.json")]
        quarantine: PathBuf,
        #[arg(long, default_value_t = 8)]
        max_size: usize,
        #[arg(long, default_value_t = 1_000_000)]
        max_assignments: u64,
    },
    /// Generate a seeded random instance as canonical JSON
    Gen {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        proposers: usize,
        #[arg(long, default_value_t = 4)]
        receivers: usize,
        /// Probability that a list entry is dropped
        #[arg(long, default_value_t = 0.3)]
        truncation: f64,
        /// Probability that acceptance is forced mutual per pair
        #[arg(long, default_value_t = 0.0)]
        symmetry: f64,
        #[arg(long, default_value_t = 3)]
        max_quota: u32,
        /// Probability that a student is marked sincere (many-to-one)
        #[arg(long, default_value_t = 0.0)]
        sincere_prob: f64,
        #[arg(short, long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Validate { instance } => cmd_validate(&instance),
        Command::Da {
            instance,
            side,
            json,
            trace_jsonl,
        } => cmd_da(&instance, side, json, trace_jsonl.as_deref()),
        Command::Boston {
            instance,
            submissions,
            json,
        } => cmd_boston(&instance, submissions.as_deref(), json),
        Command::Enumerate {
            instance,
            all,
            json,
            out_dir,
            max_size,
            max_assignments,
        } => cmd_enumerate(&instance, all, json, out_dir.as_deref(), max_size, max_assignments),
        Command::Cycles {
            instance,
            matching_a,
            matching_b,
            start,
            mode,
            json,
        } => cmd_cycles(&instance, &matching_a, &matching_b, start.as_deref(), mode, json),
        Command::Join {
            instance,
            matching_a,
            matching_b,
            meet,
            json,
            output,
        } => cmd_join(&instance, &matching_a, &matching_b, meet, json, output.as_deref()),
        Command::Check {
            theorem,
            seeds,
            sizes,
            truncation,
            symmetry,
            max_quota,
            sincere_prob,
            json,
            quarantine,
            max_size,
            max_assignments,
        } => cmd_check(CheckArgs {
            theorem,
            seeds,
            sizes,
            truncation,
            symmetry,
            max_quota,
            sincere_prob,
            json,
            quarantine,
            max_size,
            max_assignments,
        }),
        Command::Gen {
            kind,
            seed,
            proposers,
            receivers,
            truncation,
            symmetry,
            max_quota,
            sincere_prob,
            output,
        } => cmd_gen(
            kind,
            seed,
            proposers,
            receivers,
            truncation,
            symmetry,
            max_quota,
            sincere_prob,
            output.as_deref(),
        ),
    }
}

fn err<E: Display>(e: E) -> anyhow::Error {
    anyhow!("{}", e)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid JSON in {}", path.display()))
}

fn load_instance(path: &Path) -> Result<ParsedInstance> {
    let doc: InstanceDoc = read_json(path)?;
    instance_from_doc(&doc).map_err(|e| anyhow!("{}: {}", path.display(), e))
}

fn load_matching(path: &Path, market: &MarketInstance) -> Result<MarketMatching> {
    let doc: MatchingDoc = read_json(path)?;
    matching_from_doc(&doc, market).map_err(|e| anyhow!("{}: {}", path.display(), e))
}

fn emit(text: String, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{}", text),
    }
    Ok(())
}

fn render_matching(matching: &MarketMatching, market: &MarketInstance) -> String {
    let mut out = String::new();
    match (matching, market) {
        (MarketMatching::OneToOne(mu), MarketInstance::OneToOne(inst)) => {
            for m in inst.proposers() {
                match mu.partner(m) {
                    Some(w) => out.push_str(&format!("  {} -- {}\n", m, w)),
                    None => out.push_str(&format!("  {} -- (unmatched)\n", m)),
                }
            }
            let singles: Vec<&str> = inst
                .receivers()
                .iter()
                .filter(|w| mu.partner(w).is_none())
                .map(|w| w.name())
                .collect();
            if !singles.is_empty() {
                out.push_str(&format!("  unmatched receivers: {}\n", singles.join(" ")));
            }
        }
        (MarketMatching::ManyToOne(mu), MarketInstance::ManyToOne(inst)) => {
            for c in inst.colleges() {
                let roster = mu.roster(c);
                let names: Vec<&str> = roster.iter().map(|s| s.name()).collect();
                out.push_str(&format!(
                    "  {} [{}/{}]: {}\n",
                    c,
                    roster.len(),
                    inst.quota(c).expect("validated instance"),
                    names.join(" ")
                ));
            }
            let singles: Vec<&str> = inst
                .students()
                .iter()
                .filter(|s| mu.college(s).is_none())
                .map(|s| s.name())
                .collect();
            if !singles.is_empty() {
                out.push_str(&format!("  unmatched students: {}\n", singles.join(" ")));
            }
        }
        _ => unreachable!("matching kind is checked at load time"),
    }
    out
}

fn render_trace(trace: &ProposalTrace) -> String {
    let mut out = String::new();
    for e in trace.events() {
        let outcome = match &e.outcome {
            ProposalOutcome::Held => "held".to_string(),
            ProposalOutcome::Rejected => "rejected".to_string(),
            ProposalOutcome::Displaced(a) => format!("held, displacing {}", a),
        };
        out.push_str(&format!(
            "  round {}: {} -> {} ({})\n",
            e.round, e.proposer, e.target, outcome
        ));
    }
    out
}

fn cmd_validate(path: &Path) -> Result<i32> {
    let doc: InstanceDoc = read_json(path)?;
    match instance_from_doc(&doc) {
        Err(e) => {
            eprintln!("{}", e);
            Ok(2)
        }
        Ok(parsed) => {
            match &parsed.market {
                MarketInstance::OneToOne(inst) => println!(
                    "one-to-one instance: {} proposers, {} receivers",
                    inst.proposers().len(),
                    inst.receivers().len()
                ),
                MarketInstance::ManyToOne(inst) => {
                    let total: u32 = inst.quotas().values().sum();
                    println!(
                        "many-to-one instance: {} students, {} colleges, total quota {}",
                        inst.students().len(),
                        inst.colleges().len(),
                        total
                    );
                }
            }
            if let Some(sincere) = &parsed.sincere {
                println!("sincere students: {}", sincere.join(" "));
            }
            println!("digest: {:016x}", parsed.market.digest());
            Ok(0)
        }
    }
}

fn cmd_da(path: &Path, side: SideArg, json: bool, trace_jsonl: Option<&Path>) -> Result<i32> {
    let parsed = load_instance(path)?;
    let (matching, trace, side_label) = match &parsed.market {
        MarketInstance::OneToOne(inst) => {
            let proposing = match side {
                SideArg::M => Side::Proposer,
                SideArg::W => Side::Receiver,
            };
            let (mu, trace) = da_1to1(inst, proposing);
            let label = match side {
                SideArg::M => "M",
                SideArg::W => "W",
            };
            (MarketMatching::OneToOne(mu), trace, label)
        }
        MarketInstance::ManyToOne(inst) => {
            if side == SideArg::W {
                bail!("many-to-one deferred acceptance is student-proposing; --side W applies to one-to-one instances only");
            }
            let (mu, trace) = da_many(inst);
            (MarketMatching::ManyToOne(mu), trace, "S")
        }
    };
    if let Some(p) = trace_jsonl {
        fs::write(p, trace_to_jsonl(&trace))
            .with_context(|| format!("cannot write {}", p.display()))?;
    }
    if json {
        let matching_doc = doc_from_matching(&matching);
        let doc = DaReportDoc {
            assignment: matching_doc.assignment,
            kind: matching_doc.kind,
            schema: crate::formats::SCHEMA_VERSION,
            side: side_label.to_string(),
            trace: trace_events(&trace),
        };
        print!("{}", to_canonical_json(&doc));
    } else {
        println!("matching ({}-proposing, {} rounds):", side_label, trace.rounds());
        print!("{}", render_matching(&matching, &parsed.market));
        println!("trace:");
        print!("{}", render_trace(&trace));
    }
    Ok(0)
}

fn cmd_boston(path: &Path, submissions: Option<&Path>, json: bool) -> Result<i32> {
    let parsed = load_instance(path)?;
    let MarketInstance::ManyToOne(inst) = &parsed.market else {
        bail!("the boston mechanism runs on many-to-one instances");
    };
    let submitted: BTreeMap<AgentId, Vec<AgentId>> = match submissions {
        None => truthful_submissions(inst),
        Some(p) => {
            let raw: BTreeMap<String, Vec<String>> = read_json(p)?;
            let mut resolved = BTreeMap::new();
            for (student, list) in raw {
                let s = inst
                    .agent_by_name(&student)
                    .cloned()
                    .with_context(|| format!("unknown student {:?} in submissions", student))?;
                let mut colleges = Vec::with_capacity(list.len());
                for c in list {
                    colleges.push(
                        inst.agent_by_name(&c)
                            .cloned()
                            .with_context(|| format!("unknown college {:?} in submissions", c))?,
                    );
                }
                resolved.insert(s, colleges);
            }
            resolved
        }
    };
    let mu = boston_assign(inst, &submitted).map_err(err)?;
    let matching = MarketMatching::ManyToOne(mu);
    if json {
        print!("{}", to_canonical_json(&doc_from_matching(&matching)));
    } else {
        println!("boston assignment:");
        print!("{}", render_matching(&matching, &parsed.market));
    }
    Ok(0)
}

fn cmd_enumerate(
    path: &Path,
    all: bool,
    json: bool,
    out_dir: Option<&Path>,
    max_size: usize,
    max_assignments: u64,
) -> Result<i32> {
    let parsed = load_instance(path)?;
    let matchings: Vec<MarketMatching> = match &parsed.market {
        MarketInstance::OneToOne(inst) => {
            if all {
                enumerate_matchings_1to1(inst, max_size)
                    .map_err(err)?
                    .map(MarketMatching::OneToOne)
                    .collect()
            } else {
                enumerate_stable_1to1(inst, max_size)
                    .map_err(err)?
                    .into_iter()
                    .map(MarketMatching::OneToOne)
                    .collect()
            }
        }
        MarketInstance::ManyToOne(inst) => {
            if all {
                enumerate_matchings_many(inst, max_assignments)
                    .map_err(err)?
                    .map(MarketMatching::ManyToOne)
                    .collect()
            } else {
                enumerate_stable_many(inst, max_assignments)
                    .map_err(err)?
                    .into_iter()
                    .map(MarketMatching::ManyToOne)
                    .collect()
            }
        }
    };
    let docs: Vec<MatchingDoc> = matchings.iter().map(doc_from_matching).collect();
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for (i, doc) in docs.iter().enumerate() {
            let file = dir.join(format!("matching-{:03}.json", i));
            fs::write(&file, to_canonical_json(doc))
                .with_context(|| format!("cannot write {}", file.display()))?;
        }
    }
    if json {
        let doc = EnumerationDoc {
            count: docs.len() as u64,
            matchings: docs,
            schema: crate::formats::SCHEMA_VERSION,
            stable_only: !all,
        };
        print!("{}", to_canonical_json(&doc));
    } else {
        let label = if all { "matchings" } else { "stable matchings" };
        println!("{} {}", docs.len(), label);
        for (i, matching) in matchings.iter().enumerate() {
            println!("[{}]", i);
            print!("{}", render_matching(matching, &parsed.market));
        }
    }
    Ok(0)
}

fn render_cycles(cycles: &[PreferenceCycle]) -> String {
    let mut out = String::new();
    for cycle in cycles {
        let first = cycle.agents().first().map(|a| a.name()).unwrap_or("");
        out.push_str(&format!("  {} -> ({})\n", cycle, first));
    }
    out
}

fn cycles_doc(cycles: &[PreferenceCycle]) -> CyclesDoc {
    CyclesDoc {
        cycles: cycles
            .iter()
            .map(|c| c.agents().iter().map(|a| a.name().to_string()).collect())
            .collect(),
        schema: crate::formats::SCHEMA_VERSION,
    }
}

fn cmd_cycles(
    instance: &Path,
    matching_a: &Path,
    matching_b: &Path,
    start: Option<&str>,
    mode: CycleMode,
    json: bool,
) -> Result<i32> {
    let parsed = load_instance(instance)?;
    let a = load_matching(matching_a, &parsed.market)?;
    let b = load_matching(matching_b, &parsed.market)?;
    match &parsed.market {
        MarketInstance::OneToOne(inst) => {
            let (MarketMatching::OneToOne(a), MarketMatching::OneToOne(b)) = (&a, &b) else {
                unreachable!("kind checked at load time")
            };
            let cycles = match start {
                Some(name) => {
                    let agent = inst
                        .agent_by_name(name)
                        .with_context(|| format!("unknown start agent {:?}", name))?
                        .clone();
                    let cycle = match mode {
                        CycleMode::Pair => extract_cycle_pair(a, b, &agent, inst),
                        CycleMode::Pareto => extract_cycle_pareto(a, b, &agent, inst),
                    }
                    .map_err(err)?;
                    vec![cycle]
                }
                None => partition_disagreement(a, b, inst).map_err(err)?,
            };
            if json {
                print!("{}", to_canonical_json(&cycles_doc(&cycles)));
            } else {
                println!("{} cycle(s):", cycles.len());
                print!("{}", render_cycles(&cycles));
            }
            Ok(0)
        }
        MarketInstance::ManyToOne(inst) => {
            let (MarketMatching::ManyToOne(a), MarketMatching::ManyToOne(b)) = (&a, &b) else {
                unreachable!("kind checked at load time")
            };
            let Some(name) = start else {
                bail!("--start is required for many-to-one instances");
            };
            let agent = inst
                .agent_by_name(name)
                .with_context(|| format!("unknown start agent {:?}", name))?
                .clone();
            match extract_cycle_many(a, b, &agent, inst).map_err(err)? {
                ManyExtractOutcome::Cycle(cycle) => {
                    let cycles = vec![cycle];
                    if json {
                        print!("{}", to_canonical_json(&cycles_doc(&cycles)));
                    } else {
                        println!("1 cycle(s):");
                        print!("{}", render_cycles(&cycles));
                    }
                    Ok(0)
                }
                ManyExtractOutcome::Counterexample(cx) => {
                    eprintln!("no qualifying cycle exists; emitting counterexample report");
                    print!("{}", to_canonical_json(&lemma_counterexample_doc(&cx)));
                    Ok(1)
                }
            }
        }
    }
}

fn cmd_join(
    instance: &Path,
    matching_a: &Path,
    matching_b: &Path,
    take_meet: bool,
    json: bool,
    output: Option<&Path>,
) -> Result<i32> {
    let parsed = load_instance(instance)?;
    let MarketInstance::OneToOne(inst) = &parsed.market else {
        bail!("join and meet are defined for one-to-one instances");
    };
    let load = |p: &Path| -> Result<OneToOneMatching> {
        match load_matching(p, &parsed.market)? {
            MarketMatching::OneToOne(mu) => Ok(mu),
            MarketMatching::ManyToOne(_) => unreachable!("kind checked at load time"),
        }
    };
    let a = load(matching_a)?;
    let b = load(matching_b)?;
    let combined = if take_meet {
        meet(&a, &b, inst)
    } else {
        join(&a, &b, inst)
    }
    .map_err(err)?;
    let matching = MarketMatching::OneToOne(combined);
    let doc = doc_from_matching(&matching);
    if output.is_some() || json {
        emit(to_canonical_json(&doc), output)?;
        if output.is_some() && !json {
            println!("wrote {}", output.expect("checked").display());
        }
    } else {
        println!("{}:", if take_meet { "meet" } else { "join" });
        print!("{}", render_matching(&matching, &parsed.market));
    }
    Ok(0)
}

struct CheckArgs {
    theorem: TheoremArg,
    seeds: u64,
    sizes: Option<String>,
    truncation: f64,
    symmetry: f64,
    max_quota: u32,
    sincere_prob: f64,
    json: bool,
    quarantine: PathBuf,
    max_size: usize,
    max_assignments: u64,
}

fn parse_sizes(text: &str) -> Result<(usize, usize)> {
    let (a, b) = text
        .split_once(['x', 'X'])
        .with_context(|| format!("sizes must look like 5x5, got {:?}", text))?;
    Ok((
        a.trim().parse().with_context(|| format!("bad size {:?}", a))?,
        b.trim().parse().with_context(|| format!("bad size {:?}", b))?,
    ))
}

fn seeded_sincere(inst: &ManyToOneInstance, seed: u64, prob: f64) -> Result<SincerityPartition> {
    if !(0.0..=1.0).contains(&prob) {
        bail!("sincere probability must lie in [0, 1], got {}", prob);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SINCERE_SALT);
    let sincere: Vec<AgentId> = inst
        .students()
        .iter()
        .filter(|_| rng.gen_bool(prob))
        .cloned()
        .collect();
    SincerityPartition::new(inst, sincere).map_err(err)
}

fn cmd_check(args: CheckArgs) -> Result<i32> {
    let caps = OracleCaps {
        max_side_1to1: args.max_size,
        max_assignments_many: args.max_assignments,
    };
    let default_sizes = if args.theorem.many_to_one() { "6x3" } else { "5x5" };
    let sizes = args.sizes.clone().unwrap_or_else(|| default_sizes.to_string());
    let (max_a, max_b) = parse_sizes(&sizes)?;

    let mut failures: Vec<TheoremReportDoc> = Vec::new();
    for seed in 0..args.seeds {
        let reports: Vec<TheoremReport> = if args.theorem.many_to_one() {
            let inst =
                seeded_many_bounded(seed, max_a, max_b, args.max_quota, args.truncation, args.symmetry)
                    .map_err(err)?;
            match args.theorem {
                TheoremArg::RuralHospitals => {
                    check_rural_hospitals(&inst, &caps).map_err(err)?.into()
                }
                TheoremArg::Lemma3 => vec![check_lemma3(&inst, &caps).map_err(err)?],
                TheoremArg::PathakSonmez => {
                    let partition = seeded_sincere(&inst, seed, args.sincere_prob)?;
                    vec![check_sincere_invariance(&inst, &partition, &caps).map_err(err)?]
                }
                _ => unreachable!("many_to_one() matched"),
            }
        } else {
            let inst = seeded_1to1_bounded(seed, max_a, max_b, args.truncation, args.symmetry)
                .map_err(err)?;
            let report = match args.theorem {
                TheoremArg::LoneWolf => check_lone_wolf(&inst, &caps),
                TheoremArg::Conway => check_conway(&inst, &caps),
                TheoremArg::Roth => check_roth(&inst, &caps),
                TheoremArg::Lemma1 => check_lemma1(&inst, &caps),
                TheoremArg::Lemma2 => check_lemma2(&inst, &caps),
                _ => unreachable!("one-to-one branch"),
            }
            .map_err(err)?;
            vec![report]
        };
        failures.extend(
            reports
                .iter()
                .filter(|r| !r.passed())
                .map(report_doc),
        );
    }

    let passed = failures.is_empty();
    if args.theorem == TheoremArg::Lemma3 && !passed {
        let quarantine = QuarantineDoc {
            counterexamples: failures.clone(),
            schema: crate::formats::SCHEMA_VERSION,
        };
        fs::write(&args.quarantine, to_canonical_json(&quarantine))
            .with_context(|| format!("cannot write {}", args.quarantine.display()))?;
        eprintln!(
            "persisted {} counterexample(s) to {}",
            failures.len(),
            args.quarantine.display()
        );
    }
    let sweep = SweepReportDoc {
        failures,
        schema: crate::formats::SCHEMA_VERSION,
        seeds: args.seeds,
        sizes: sizes.clone(),
        theorem: args.theorem.name().to_string(),
        verdict: if passed { "pass" } else { "counterexample" }.to_string(),
    };
    if args.json {
        print!("{}", to_canonical_json(&sweep));
    } else {
        println!(
            "theorem {}: {} seeds, sizes <= {}, truncation {:.2}, symmetry {:.2}",
            sweep.theorem, sweep.seeds, sweep.sizes, args.truncation, args.symmetry
        );
        if passed {
            println!("result: PASS (0 counterexamples)");
        } else {
            println!("result: FAIL ({} counterexamples)", sweep.failures.len());
            for f in &sweep.failures {
                let detail = f
                    .counterexample
                    .as_ref()
                    .map(|c| c.detail.as_str())
                    .unwrap_or("");
                println!("  [{}] digest {}: {}", f.theorem, f.instance_digest, detail);
            }
        }
    }
    Ok(if passed { 0 } else { 1 })
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    kind: KindArg,
    seed: u64,
    proposers: usize,
    receivers: usize,
    truncation: f64,
    symmetry: f64,
    max_quota: u32,
    sincere_prob: f64,
    output: Option<&Path>,
) -> Result<i32> {
    let doc = match kind {
        KindArg::OneToOne => {
            let inst = seeded_1to1(
                seed,
                &OneToOneShape {
                    proposers,
                    receivers,
                    truncation,
                    symmetry,
                },
            )
            .map_err(err)?;
            doc_from_instance(&MarketInstance::OneToOne(inst), None)
        }
        KindArg::ManyToOne => {
            let inst = seeded_many(
                seed,
                &ManyToOneShape {
                    students: proposers,
                    colleges: receivers,
                    max_quota,
                    truncation,
                    symmetry,
                },
            )
            .map_err(err)?;
            let sincere: Option<Vec<String>> = if sincere_prob > 0.0 {
                let partition = seeded_sincere(&inst, seed, sincere_prob)?;
                Some(
                    partition
                        .sincere()
                        .iter()
                        .map(|s| s.name().to_string())
                        .collect(),
                )
            } else {
                None
            };
            doc_from_instance(&MarketInstance::ManyToOne(inst), sincere.as_deref())
        }
    };
    emit(to_canonical_json(&doc), output)?;
    if output.is_some() {
        println!("wrote {}", output.expect("checked").display());
    }
    Ok(0)
}
