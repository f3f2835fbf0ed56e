//! Versioned JSON schemas for instances, matchings, traces, and reports.
//!
//! Canonical form: struct fields are declared in lexicographic order, maps
//! are `BTreeMap`s, and `to_canonical_json` renders pretty-printed JSON with
//! a trailing newline, so serialize -> parse -> serialize is byte-identical.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use prefcycles_core::cycles::Lemma3Counterexample;
use prefcycles_core::da::{ProposalOutcome, ProposalTrace};
use prefcycles_core::theorems::{TheoremReport, Verdict};
use prefcycles_core::{
    ManyToOneInstance, ManyToOneMatching, MarketInstance, MarketMatching, MatchingError,
    OneToOneInstance, OneToOneMatching, Violation,
};

pub const SCHEMA_VERSION: u32 = 1;

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug)]
pub enum FormatError {
    UnsupportedSchema { found: u32 },
    UnknownKind { found: String },
    Violations(Vec<Violation>),
    QuotasOnOneToOne,
    SincereOnOneToOne,
    UnknownSincereStudent { name: String },
    KindMismatch { expected: String, found: String },
    UnknownAgent { name: String },
    Matching(MatchingError),
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatError::UnsupportedSchema { found } => {
                write!(f, "unsupported schema version {}", found)
            }
            FormatError::UnknownKind { found } => write!(f, "unknown instance kind {:?}", found),
            FormatError::Violations(violations) => {
                writeln!(f, "instance is invalid:")?;
                for v in violations {
                    writeln!(f, "  - {}", v)?;
                }
                Ok(())
            }
            FormatError::QuotasOnOneToOne => {
                write!(f, "one-to-one instances must not carry quotas")
            }
            FormatError::SincereOnOneToOne => {
                write!(f, "one-to-one instances must not carry a sincere set")
            }
            FormatError::UnknownSincereStudent { name } => {
                write!(f, "sincere entry {:?} is not a student of the instance", name)
            }
            FormatError::KindMismatch { expected, found } => {
                write!(f, "matching kind {:?} does not fit instance kind {:?}", found, expected)
            }
            FormatError::UnknownAgent { name } => {
                write!(f, "matching references unknown agent {:?}", name)
            }
            FormatError::Matching(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for FormatError {}

impl From<MatchingError> for FormatError {
    fn from(e: MatchingError) -> Self {
        FormatError::Matching(e)
    }
}

/// Pretty-printed JSON plus trailing newline; the canonical on-disk form.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("document types serialize");
    out.push('\n');
    out
}

/// Instance file. `quotas` and `sincere` appear only in many-to-one files.
#[derive(Clone, Debug, Deserialize, PartialEq, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub kind: String,
    #[serde(default)]
    pub preferences: BTreeMap<String, Vec<String>>,
    pub proposers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotas: Option<BTreeMap<String, u32>>,
    pub receivers: Vec<String>,
    #[serde(default = "default_schema")]
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sincere: Option<Vec<String>>,
}

/// A parsed instance plus the optional sincere-student names that rode along
/// in the file.
#[derive(Clone, Debug)]
pub struct ParsedInstance {
    pub market: MarketInstance,
    pub sincere: Option<Vec<String>>,
}

pub fn instance_from_doc(doc: &InstanceDoc) -> Result<ParsedInstance, FormatError> {
    if doc.schema != SCHEMA_VERSION {
        return Err(FormatError::UnsupportedSchema { found: doc.schema });
    }
    match doc.kind.as_str() {
        "one-to-one" => {
            if doc.quotas.is_some() {
                return Err(FormatError::QuotasOnOneToOne);
            }
            if doc.sincere.is_some() {
                return Err(FormatError::SincereOnOneToOne);
            }
            let inst = OneToOneInstance::new(
                doc.proposers.clone(),
                doc.receivers.clone(),
                doc.preferences.clone(),
            )
            .map_err(FormatError::Violations)?;
            Ok(ParsedInstance {
                market: MarketInstance::OneToOne(inst),
                sincere: None,
            })
        }
        "many-to-one" => {
            let inst = ManyToOneInstance::new(
                doc.proposers.clone(),
                doc.receivers.clone(),
                doc.preferences.clone(),
                doc.quotas.clone().unwrap_or_default(),
            )
            .map_err(FormatError::Violations)?;
            if let Some(sincere) = &doc.sincere {
                for name in sincere {
                    let known = inst
                        .agent_by_name(name)
                        .map(|a| inst.students().contains(a))
                        .unwrap_or(false);
                    if !known {
                        return Err(FormatError::UnknownSincereStudent { name: name.clone() });
                    }
                }
            }
            Ok(ParsedInstance {
                market: MarketInstance::ManyToOne(inst),
                sincere: doc.sincere.clone(),
            })
        }
        other => Err(FormatError::UnknownKind {
            found: other.to_string(),
        }),
    }
}

pub fn doc_from_instance(market: &MarketInstance, sincere: Option<&[String]>) -> InstanceDoc {
    let mut preferences = BTreeMap::new();
    let (proposers, receivers, quotas) = match market {
        MarketInstance::OneToOne(inst) => {
            for a in inst.agents() {
                preferences.insert(
                    a.name().to_string(),
                    inst.preference(a)
                        .expect("validated instance")
                        .ranked()
                        .iter()
                        .map(|b| b.name().to_string())
                        .collect(),
                );
            }
            (
                inst.proposers().iter().map(|a| a.name().to_string()).collect(),
                inst.receivers().iter().map(|a| a.name().to_string()).collect(),
                None,
            )
        }
        MarketInstance::ManyToOne(inst) => {
            for a in inst.agents() {
                preferences.insert(
                    a.name().to_string(),
                    inst.preference(a)
                        .expect("validated instance")
                        .ranked()
                        .iter()
                        .map(|b| b.name().to_string())
                        .collect(),
                );
            }
            (
                inst.students().iter().map(|a| a.name().to_string()).collect(),
                inst.colleges().iter().map(|a| a.name().to_string()).collect(),
                Some(
                    inst.quotas()
                        .iter()
                        .map(|(c, q)| (c.name().to_string(), *q))
                        .collect(),
                ),
            )
        }
    };
    let mut sincere: Option<Vec<String>> = sincere.map(|s| s.to_vec());
    if let Some(list) = &mut sincere {
        list.sort();
    }
    InstanceDoc {
        kind: market.kind().to_string(),
        preferences,
        proposers,
        quotas,
        receivers,
        schema: SCHEMA_VERSION,
        sincere,
    }
}

/// Matching file: the proposer-to-receiver assignment; unmatched agents are
/// simply absent.
#[derive(Clone, Debug, Deserialize, PartialEq, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MatchingDoc {
    #[serde(default)]
    pub assignment: BTreeMap<String, String>,
    pub kind: String,
    #[serde(default = "default_schema")]
    pub schema: u32,
}

pub fn doc_from_matching(matching: &MarketMatching) -> MatchingDoc {
    let (assignment, kind) = match matching {
        MarketMatching::OneToOne(mu) => (
            mu.pairs()
                .map(|(p, r)| (p.name().to_string(), r.name().to_string()))
                .collect(),
            "one-to-one",
        ),
        MarketMatching::ManyToOne(mu) => (
            mu.assignment()
                .iter()
                .map(|(s, c)| (s.name().to_string(), c.name().to_string()))
                .collect(),
            "many-to-one",
        ),
    };
    MatchingDoc {
        assignment,
        kind: kind.to_string(),
        schema: SCHEMA_VERSION,
    }
}

pub fn matching_from_doc(
    doc: &MatchingDoc,
    market: &MarketInstance,
) -> Result<MarketMatching, FormatError> {
    if doc.schema != SCHEMA_VERSION {
        return Err(FormatError::UnsupportedSchema { found: doc.schema });
    }
    if doc.kind != market.kind() {
        return Err(FormatError::KindMismatch {
            expected: market.kind().to_string(),
            found: doc.kind.clone(),
        });
    }
    match market {
        MarketInstance::OneToOne(inst) => {
            let mut pairs = Vec::new();
            for (p, r) in &doc.assignment {
                let p = inst
                    .agent_by_name(p)
                    .cloned()
                    .ok_or(FormatError::UnknownAgent { name: p.clone() })?;
                let r = inst
                    .agent_by_name(r)
                    .cloned()
                    .ok_or(FormatError::UnknownAgent { name: r.clone() })?;
                pairs.push((p, r));
            }
            Ok(MarketMatching::OneToOne(OneToOneMatching::from_pairs(
                pairs,
            )?))
        }
        MarketInstance::ManyToOne(inst) => {
            let mut pairs = Vec::new();
            for (s, c) in &doc.assignment {
                let s = inst
                    .agent_by_name(s)
                    .cloned()
                    .ok_or(FormatError::UnknownAgent { name: s.clone() })?;
                let c = inst
                    .agent_by_name(c)
                    .cloned()
                    .ok_or(FormatError::UnknownAgent { name: c.clone() })?;
                pairs.push((s, c));
            }
            Ok(MarketMatching::ManyToOne(
                ManyToOneMatching::from_assignment(pairs)?,
            ))
        }
    }
}

/// One proposal event, one JSON object per line in trace files.
#[derive(Clone, Debug, Deserialize, PartialEq, Serialize)]
pub struct TraceEventDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub displaced: Option<String>,
    pub outcome: String,
    pub proposer: String,
    pub round: u32,
    pub target: String,
}

pub fn trace_events(trace: &ProposalTrace) -> Vec<TraceEventDoc> {
    trace
        .events()
        .iter()
        .map(|e| {
            let (outcome, displaced) = match &e.outcome {
                ProposalOutcome::Held => ("held", None),
                ProposalOutcome::Rejected => ("rejected", None),
                ProposalOutcome::Displaced(a) => ("displaced", Some(a.name().to_string())),
            };
            TraceEventDoc {
                displaced,
                outcome: outcome.to_string(),
                proposer: e.proposer.name().to_string(),
                round: e.round,
                target: e.target.name().to_string(),
            }
        })
        .collect()
}

/// One compact JSON object per event per line.
pub fn trace_to_jsonl(trace: &ProposalTrace) -> String {
    let mut out = String::new();
    for event in trace_events(trace) {
        out.push_str(&serde_json::to_string(&event).expect("document types serialize"));
        out.push('\n');
    }
    out
}

/// `da --json` output: the final assignment plus the full proposal trace.
#[derive(Clone, Debug, Deserialize, PartialEq, Serialize)]
pub struct DaReportDoc {
    pub assignment: BTreeMap<String, String>,
    pub kind: String,
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub side: String,
    pub trace: Vec<TraceEventDoc>,
}

/// `enumerate --json` output.
#[derive(Clone, Debug, Deserialize, PartialEq, Serialize)]
pub struct EnumerationDoc {
    pub count: u64,
    pub matchings: Vec<MatchingDoc>,
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub stable_only: bool,
}

/// `cycles --json` output: one agent-name array per cycle.
#[derive(Clone, Debug, Deserialize, PartialEq, Serialize)]
pub struct CyclesDoc {
    pub cycles: Vec<Vec<String>>,
    #[serde(default = "default_schema")]
    pub schema: u32,
}

#[derive(Clone, Debug, Deserialize, PartialEq, Serialize)]
pub struct MatchingEntryDoc {
    pub assignment: BTreeMap<String, String>,
    pub kind: String,
    pub name: String,
}

#[derive(Clone, Debug, Deserialize, PartialEq, Serialize)]
pub struct CounterexampleDoc {
    pub agents: Vec<String>,
    pub detail: String,
    pub instance: InstanceDoc,
    pub matchings: Vec<MatchingEntryDoc>,
}

#[derive(Clone, Debug, Deserialize, PartialEq, Serialize)]
pub struct TheoremReportDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleDoc>,
    pub instance_digest: String,
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub theorem: String,
    pub verdict: String,
}

pub fn report_doc(report: &TheoremReport) -> TheoremReportDoc {
    let counterexample = match &report.verdict {
        Verdict::Pass => None,
        Verdict::Counterexample(cx) => Some(CounterexampleDoc {
            agents: cx.agents.iter().map(|a| a.name().to_string()).collect(),
            detail: cx.detail.clone(),
            instance: doc_from_instance(&cx.instance, None),
            matchings: cx
                .matchings
                .iter()
                .map(|(name, mu)| {
                    let doc = doc_from_matching(mu);
                    MatchingEntryDoc {
                        assignment: doc.assignment,
                        kind: doc.kind,
                        name: name.clone(),
                    }
                })
                .collect(),
        }),
    };
    TheoremReportDoc {
        counterexample,
        instance_digest: format!("{:016x}", report.instance_digest),
        schema: SCHEMA_VERSION,
        theorem: report.theorem.name().to_string(),
        verdict: if report.passed() {
            "pass".to_string()
        } else {
            "counterexample".to_string()
        },
    }
}

/// Sweep summary for the `check` subcommand.
#[derive(Clone, Debug, Deserialize, PartialEq, Serialize)]
pub struct SweepReportDoc {
    pub failures: Vec<TheoremReportDoc>,
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub seeds: u64,
    pub sizes: String,
    pub theorem: String,
    pub verdict: String,
}

/// Self-contained record of a failed many-to-one cycle search.
#[derive(Clone, Debug, Deserialize, PartialEq, Serialize)]
pub struct LemmaCounterexampleDoc {
    pub instance: InstanceDoc,
    pub matching_a: BTreeMap<String, String>,
    pub matching_b: BTreeMap<String, String>,
    pub start: String,
}

pub fn lemma_counterexample_doc(cx: &Lemma3Counterexample) -> LemmaCounterexampleDoc {
    let to_map = |mu: &ManyToOneMatching| {
        mu.assignment()
            .iter()
            .map(|(s, c)| (s.name().to_string(), c.name().to_string()))
            .collect()
    };
    LemmaCounterexampleDoc {
        instance: doc_from_instance(&MarketInstance::ManyToOne(cx.instance.clone()), None),
        matching_a: to_map(&cx.mu),
        matching_b: to_map(&cx.mu_prime),
        start: cx.start.name().to_string(),
    }
}

/// Quarantine file holding persisted extraction counterexamples.
#[derive(Clone, Debug, Deserialize, PartialEq, Serialize)]
pub struct QuarantineDoc {
    pub counterexamples: Vec<TheoremReportDoc>,
    #[serde(default = "default_schema")]
    pub schema: u32,
}
