//! Preference cycles: validation, dominance predicates, constructive
//! extraction from pairs of matchings, the disagreement partition, and the
//! join/meet lattice operations built on oriented cycles.
//!
//! A preference cycle is a closed alternating list of distinct agents in
//! which every agent strictly prefers its successor to its predecessor.
//! Extraction walks the two matchings: starting from an agent that improves
//! when moving from `mu` to `mu_prime`, follow `mu_prime` forward and `mu`
//! backward until the walk closes. For stable inputs the walk provably
//! closes at the start agent; contract-violating inputs surface as errors
//! rather than bad cycles.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::model::{
    AgentId, ManyToOneInstance, ManyToOneMatching, ModelError, OneToOneInstance,
    OneToOneMatching, Preferences, Side,
};
use crate::stability::{is_individually_rational_1to1, is_stable_1to1, is_stable_many};

/// Why a candidate list fails to be a preference cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CycleViolation {
    TooShort { len: usize },
    OddLength { len: usize },
    RepeatedAgent { name: String },
    NotAlternating { position: usize },
    UnknownAgent { name: String },
    PrefersPredecessor { name: String },
}

impl fmt::Display for CycleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CycleViolation::TooShort { len } => {
                write!(f, "cycle needs at least two agents, got {}", len)
            }
            CycleViolation::OddLength { len } => {
                write!(f, "cycle must alternate sides evenly, got length {}", len)
            }
            CycleViolation::RepeatedAgent { name } => write!(f, "agent {} repeats", name),
            CycleViolation::NotAlternating { position } => {
                write!(f, "adjacent agents at position {} share a side", position)
            }
            CycleViolation::UnknownAgent { name } => write!(f, "unknown agent: {}", name),
            CycleViolation::PrefersPredecessor { name } => {
                write!(f, "agent {} does not strictly prefer its successor", name)
            }
        }
    }
}

/// All the ways a candidate list breaks the cycle definition; empty means
/// the list is a preference cycle of the instance.
pub fn cycle_violations<P: Preferences>(agents: &[AgentId], prefs: &P) -> Vec<CycleViolation> {
    let mut out = Vec::new();
    let n = agents.len();
    if n < 2 {
        out.push(CycleViolation::TooShort { len: n });
        return out;
    }
    if !n.is_multiple_of(2) {
        out.push(CycleViolation::OddLength { len: n });
    }
    let mut seen = BTreeSet::new();
    for a in agents {
        if !seen.insert(a.clone()) {
            out.push(CycleViolation::RepeatedAgent {
                name: a.name().to_string(),
            });
        }
    }
    for (i, a) in agents.iter().enumerate() {
        if agents[(i + 1) % n].side() == a.side() {
            out.push(CycleViolation::NotAlternating { position: i });
        }
    }
    for a in agents {
        if prefs.preference_of(a).is_none() {
            out.push(CycleViolation::UnknownAgent {
                name: a.name().to_string(),
            });
        }
    }
    if !out.is_empty() {
        return out;
    }
    for (i, a) in agents.iter().enumerate() {
        let successor = &agents[(i + 1) % n];
        let predecessor = &agents[(i + n - 1) % n];
        let list = prefs.preference_of(a).expect("checked above");
        if !list.prefers(Some(successor), Some(predecessor)) {
            out.push(CycleViolation::PrefersPredecessor {
                name: a.name().to_string(),
            });
        }
    }
    out
}

/// True iff the candidate list satisfies every cycle invariant under the
/// instance's preferences. Malformed lists simply return false.
pub fn is_preference_cycle<P: Preferences>(agents: &[AgentId], prefs: &P) -> bool {
    cycle_violations(agents, prefs).is_empty()
}

/// A validated preference cycle. The agent order is the traversal order;
/// rotations of the same cycle compare equal only after `canonical()`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PreferenceCycle {
    agents: Vec<AgentId>,
}

impl PreferenceCycle {
    pub fn new<P: Preferences>(
        agents: Vec<AgentId>,
        prefs: &P,
    ) -> Result<Self, Vec<CycleViolation>> {
        let violations = cycle_violations(&agents, prefs);
        if violations.is_empty() {
            Ok(PreferenceCycle { agents })
        } else {
            Err(violations)
        }
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn contains(&self, a: &AgentId) -> bool {
        self.agents.contains(a)
    }

    pub fn successor(&self, a: &AgentId) -> Option<&AgentId> {
        let i = self.agents.iter().position(|x| x == a)?;
        Some(&self.agents[(i + 1) % self.agents.len()])
    }

    pub fn predecessor(&self, a: &AgentId) -> Option<&AgentId> {
        let i = self.agents.iter().position(|x| x == a)?;
        Some(&self.agents[(i + self.agents.len() - 1) % self.agents.len()])
    }

    /// Rotation starting at the lexicographically smallest proposer-side
    /// agent, for deterministic equality and golden tests.
    pub fn canonical(&self) -> PreferenceCycle {
        let start = self
            .agents
            .iter()
            .enumerate()
            .filter(|(_, a)| a.side() == Side::Proposer)
            .min_by(|(_, a), (_, b)| a.cmp(b))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let mut agents = Vec::with_capacity(self.agents.len());
        for k in 0..self.agents.len() {
            agents.push(self.agents[(start + k) % self.agents.len()].clone());
        }
        PreferenceCycle { agents }
    }
}

impl fmt::Display for PreferenceCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.agents.iter().enumerate() {
            if i > 0 {
                f.write_str(" -> ")?;
            }
            f.write_str(a.name())?;
        }
        Ok(())
    }
}

/// Whether a cycle's agents of one side sit exactly on their matches:
/// dominating means every such agent's successor is its match, dominated
/// means its predecessor is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DominanceReport {
    pub side: Side,
    pub dominating: bool,
    pub dominated: bool,
}

pub fn dominance_1to1(
    cycle: &PreferenceCycle,
    mu: &OneToOneMatching,
    side: Side,
) -> DominanceReport {
    let mut dominating = true;
    let mut dominated = true;
    let n = cycle.agents.len();
    for (i, a) in cycle.agents.iter().enumerate() {
        if a.side() != side {
            continue;
        }
        let successor = &cycle.agents[(i + 1) % n];
        let predecessor = &cycle.agents[(i + n - 1) % n];
        dominating &= mu.partner(a) == Some(successor);
        dominated &= mu.partner(a) == Some(predecessor);
    }
    DominanceReport {
        side,
        dominating,
        dominated,
    }
}

/// Many-to-one dominance: students must be matched exactly to their cycle
/// neighbour; colleges need the neighbour to belong to their roster.
pub fn dominance_many(
    cycle: &PreferenceCycle,
    mu: &ManyToOneMatching,
    side: Side,
) -> DominanceReport {
    let mut dominating = true;
    let mut dominated = true;
    let n = cycle.agents.len();
    for (i, a) in cycle.agents.iter().enumerate() {
        if a.side() != side {
            continue;
        }
        let successor = &cycle.agents[(i + 1) % n];
        let predecessor = &cycle.agents[(i + n - 1) % n];
        match a.side() {
            Side::Proposer => {
                dominating &= mu.college(a) == Some(successor);
                dominated &= mu.college(a) == Some(predecessor);
            }
            Side::Receiver => {
                dominating &= mu.college(successor) == Some(a);
                dominated &= mu.college(predecessor) == Some(a);
            }
        }
    }
    DominanceReport {
        side,
        dominating,
        dominated,
    }
}

/// Contract failures of the extraction operations. Each names the premise
/// that did not hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtractError {
    UnknownAgent { name: String },
    WrongSide { name: String },
    NotStable { which: &'static str },
    NotIndividuallyRational { which: &'static str },
    NoImprovement { agent: String },
    ImprovementNotUniversal { agent: String },
    ChainBroken { detail: String },
    StepBudgetExceeded,
    Postcondition { detail: String },
    Model(ModelError),
}

impl fmt::Display for ExtractError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtractError::UnknownAgent { name } => write!(f, "unknown agent: {}", name),
            ExtractError::WrongSide { name } => {
                write!(f, "agent {} is not on the proposing side", name)
            }
            ExtractError::NotStable { which } => write!(f, "matching {} is not stable", which),
            ExtractError::NotIndividuallyRational { which } => {
                write!(f, "matching {} is not individually rational", which)
            }
            ExtractError::NoImprovement { agent } => {
                write!(f, "no improving agent: {} does not prefer its new match", agent)
            }
            ExtractError::ImprovementNotUniversal { agent } => {
                write!(f, "agent {} does not improve, universal premise fails", agent)
            }
            ExtractError::ChainBroken { detail } => write!(f, "extraction chain broke: {}", detail),
            ExtractError::StepBudgetExceeded => write!(f, "step budget exceeded"),
            ExtractError::Postcondition { detail } => {
                write!(f, "extracted cycle failed validation: {}", detail)
            }
            ExtractError::Model(e) => write!(f, "{}", e),
        }
    }
}

impl From<ModelError> for ExtractError {
    fn from(e: ModelError) -> Self {
        ExtractError::Model(e)
    }
}

/// Follow the alternating walk: w_i = mu_prime(m_i), m_{i+1} = mu(w_i),
/// until it returns to the start. The step budget turns walks on
/// contract-violating inputs into clean errors.
fn walk_chain(
    mu: &OneToOneMatching,
    mu_prime: &OneToOneMatching,
    start: &AgentId,
    budget: usize,
) -> Result<Vec<AgentId>, ExtractError> {
    let mut agents = Vec::new();
    let mut seen: BTreeSet<AgentId> = BTreeSet::new();
    let mut current = start.clone();
    for _ in 0..budget {
        agents.push(current.clone());
        seen.insert(current.clone());
        let w = mu_prime
            .partner(&current)
            .ok_or_else(|| ExtractError::ChainBroken {
                detail: format!("{} is unmatched where an improvement was promised", current),
            })?
            .clone();
        if seen.contains(&w) {
            return Err(ExtractError::ChainBroken {
                detail: format!("walk revisits {} before closing", w),
            });
        }
        agents.push(w.clone());
        seen.insert(w.clone());
        let next = mu
            .partner(&w)
            .ok_or_else(|| ExtractError::ChainBroken {
                detail: format!("{} is unmatched where stability requires a partner", w),
            })?
            .clone();
        if next == *start {
            return Ok(agents);
        }
        if seen.contains(&next) {
            return Err(ExtractError::ChainBroken {
                detail: format!("walk revisits {} before closing", next),
            });
        }
        current = next;
    }
    Err(ExtractError::StepBudgetExceeded)
}

fn finish_cycle(
    agents: Vec<AgentId>,
    mu: &OneToOneMatching,
    mu_prime: &OneToOneMatching,
    inst: &OneToOneInstance,
) -> Result<PreferenceCycle, ExtractError> {
    let cycle = PreferenceCycle::new(agents, inst).map_err(|violations| {
        ExtractError::Postcondition {
            detail: violations
                .first()
                .map(|v| v.to_string())
                .unwrap_or_default(),
        }
    })?;
    let against_mu = dominance_1to1(&cycle, mu, Side::Proposer);
    let against_prime = dominance_1to1(&cycle, mu_prime, Side::Proposer);
    if !against_mu.dominated || !against_prime.dominating {
        return Err(ExtractError::Postcondition {
            detail: String::from("cycle is not dominated/dominating as advertised"),
        });
    }
    Ok(cycle)
}

fn ensure_proposer(inst: &OneToOneInstance, m: &AgentId) -> Result<(), ExtractError> {
    if m.side() != Side::Proposer {
        return Err(ExtractError::WrongSide {
            name: m.name().to_string(),
        });
    }
    if !inst.contains(m) {
        return Err(ExtractError::UnknownAgent {
            name: m.name().to_string(),
        });
    }
    Ok(())
}

/// Extract the preference cycle through `m` witnessing its improvement from
/// `mu` to `mu_prime`, both stable. The result contains `m`, is dominated by
/// `mu` and dominating for `mu_prime` on the proposer side.
pub fn extract_cycle_pair(
    mu: &OneToOneMatching,
    mu_prime: &OneToOneMatching,
    m: &AgentId,
    inst: &OneToOneInstance,
) -> Result<PreferenceCycle, ExtractError> {
    ensure_proposer(inst, m)?;
    if !is_stable_1to1(mu, inst)? {
        return Err(ExtractError::NotStable { which: "mu" });
    }
    if !is_stable_1to1(mu_prime, inst)? {
        return Err(ExtractError::NotStable { which: "mu_prime" });
    }
    if !inst.prefers(m, mu_prime.partner(m), mu.partner(m))? {
        return Err(ExtractError::NoImprovement {
            agent: m.name().to_string(),
        });
    }
    let agents = walk_chain(mu, mu_prime, m, 2 * inst.proposers().len() + 1)?;
    finish_cycle(agents, mu, mu_prime, inst)
}

/// Same walk under weaker premises: `mu` stable, `mu_prime` merely
/// individually rational, but every proposer strictly improves.
pub fn extract_cycle_pareto(
    mu: &OneToOneMatching,
    mu_prime: &OneToOneMatching,
    m: &AgentId,
    inst: &OneToOneInstance,
) -> Result<PreferenceCycle, ExtractError> {
    ensure_proposer(inst, m)?;
    if !is_stable_1to1(mu, inst)? {
        return Err(ExtractError::NotStable { which: "mu" });
    }
    if !is_individually_rational_1to1(mu_prime, inst)? {
        return Err(ExtractError::NotIndividuallyRational { which: "mu_prime" });
    }
    for other in inst.proposers() {
        if !inst.prefers(other, mu_prime.partner(other), mu.partner(other))? {
            return Err(ExtractError::ImprovementNotUniversal {
                agent: other.name().to_string(),
            });
        }
    }
    let agents = walk_chain(mu, mu_prime, m, 2 * inst.proposers().len() + 1)?;
    finish_cycle(agents, mu, mu_prime, inst)
}

/// Partition the agents on which two stable matchings disagree into disjoint
/// preference cycles, each oriented so that its proposers improve. Cycles
/// come out canonicalized and sorted.
pub fn partition_disagreement(
    mu: &OneToOneMatching,
    mu_prime: &OneToOneMatching,
    inst: &OneToOneInstance,
) -> Result<Vec<PreferenceCycle>, ExtractError> {
    if !is_stable_1to1(mu, inst)? {
        return Err(ExtractError::NotStable { which: "mu" });
    }
    if !is_stable_1to1(mu_prime, inst)? {
        return Err(ExtractError::NotStable { which: "mu_prime" });
    }
    let mut covered: BTreeSet<AgentId> = BTreeSet::new();
    let mut cycles = Vec::new();
    for m in inst.proposers() {
        if covered.contains(m) || mu.partner(m) == mu_prime.partner(m) {
            continue;
        }
        let improves = inst.prefers(m, mu_prime.partner(m), mu.partner(m))?;
        let agents = if improves {
            walk_chain(mu, mu_prime, m, 2 * inst.proposers().len() + 1)?
        } else {
            walk_chain(mu_prime, mu, m, 2 * inst.proposers().len() + 1)?
        };
        let cycle = if improves {
            finish_cycle(agents, mu, mu_prime, inst)?
        } else {
            finish_cycle(agents, mu_prime, mu, inst)?
        };
        for a in cycle.agents() {
            if !covered.insert(a.clone()) {
                return Err(ExtractError::Postcondition {
                    detail: format!("cycles overlap at {}", a),
                });
            }
        }
        cycles.push(cycle.canonical());
    }
    // the disagreement set must be covered exactly
    for a in inst.agents() {
        let disagrees = mu.partner(a) != mu_prime.partner(a);
        if disagrees != covered.contains(a) {
            return Err(ExtractError::Postcondition {
                detail: format!("agent {} is miscovered by the partition", a),
            });
        }
    }
    cycles.sort();
    Ok(cycles)
}

fn cycle_extreme(
    mu: &OneToOneMatching,
    mu_prime: &OneToOneMatching,
    inst: &OneToOneInstance,
    improve: bool,
) -> Result<OneToOneMatching, ExtractError> {
    let cycles = partition_disagreement(mu, mu_prime, inst)?;
    let mut pick: BTreeMap<&AgentId, &AgentId> = BTreeMap::new();
    for cycle in &cycles {
        let agents = cycle.agents();
        let n = agents.len();
        for (i, a) in agents.iter().enumerate() {
            if a.side() != Side::Proposer {
                continue;
            }
            // cycles are oriented so the successor is the better partner
            let partner = if improve {
                &agents[(i + 1) % n]
            } else {
                &agents[(i + n - 1) % n]
            };
            pick.insert(a, partner);
        }
    }
    let mut pairs = Vec::new();
    for m in inst.proposers() {
        match pick.get(m) {
            Some(w) => pairs.push((m.clone(), (*w).clone())),
            None => {
                if let Some(w) = mu.partner(m) {
                    pairs.push((m.clone(), w.clone()));
                }
            }
        }
    }
    OneToOneMatching::from_pairs(pairs).map_err(|e| ExtractError::Postcondition {
        detail: e.to_string(),
    })
}

/// The stable matching that gives every proposer the better of its two
/// partners: off-cycle agents keep their common match, on-cycle proposers
/// take their successor.
pub fn join(
    mu: &OneToOneMatching,
    mu_prime: &OneToOneMatching,
    inst: &OneToOneInstance,
) -> Result<OneToOneMatching, ExtractError> {
    cycle_extreme(mu, mu_prime, inst, true)
}

/// Dual of `join`: every proposer gets the worse of its two partners.
pub fn meet(
    mu: &OneToOneMatching,
    mu_prime: &OneToOneMatching,
    inst: &OneToOneInstance,
) -> Result<OneToOneMatching, ExtractError> {
    cycle_extreme(mu, mu_prime, inst, false)
}

/// A self-contained record of a failed many-to-one extraction: the paper
/// trail needed to replay the search elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lemma3Counterexample {
    pub instance: ManyToOneInstance,
    pub mu: ManyToOneMatching,
    pub mu_prime: ManyToOneMatching,
    pub start: AgentId,
}

/// Outcome of the many-to-one extraction: either a verified cycle or a
/// counterexample report. The report is a first-class result because no
/// deterministic successor rule is known for this construction; the search
/// is exhaustive, so an empty search genuinely means no cycle exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ManyExtractOutcome {
    Cycle(PreferenceCycle),
    Counterexample(Box<Lemma3Counterexample>),
}

struct ManySearch<'a> {
    inst: &'a ManyToOneInstance,
    mu: &'a ManyToOneMatching,
    mu_prime: &'a ManyToOneMatching,
    mu_rosters: BTreeMap<AgentId, BTreeSet<AgentId>>,
    prime_rosters: BTreeMap<AgentId, BTreeSet<AgentId>>,
    start: AgentId,
    closing_college: Option<AgentId>,
}

impl<'a> ManySearch<'a> {
    /// Depth-first search over candidate successors. `students`/`colleges`
    /// hold the partial path s_0 c_0 s_1 c_1 ...; candidates for the next
    /// student at college c are mu(c) \ mu_prime(c), tried in c's preference
    /// order.
    fn dfs(
        &self,
        students: &mut Vec<AgentId>,
        colleges: &mut Vec<AgentId>,
    ) -> Option<Vec<AgentId>> {
        let current = students.last().expect("path starts with the start student");
        let college = self.mu_prime.college(current)?.clone();
        if colleges.contains(&college) {
            return None;
        }
        colleges.push(college.clone());

        // closing is possible exactly when the start student sits in
        // mu's roster of this college
        if self.closing_college.as_ref() == Some(&college) {
            let mut agents = Vec::with_capacity(students.len() * 2);
            for (s, c) in students.iter().zip(colleges.iter()) {
                agents.push(s.clone());
                agents.push(c.clone());
            }
            if self.verify(&agents) {
                colleges.pop();
                return Some(agents);
            }
        }

        let empty = BTreeSet::new();
        let in_mu = self.mu_rosters.get(&college).unwrap_or(&empty);
        let in_prime = self.prime_rosters.get(&college).unwrap_or(&empty);
        let list = self.inst.preference(&college).expect("validated instance");
        let mut candidates: Vec<&AgentId> = in_mu.difference(in_prime).collect();
        candidates.sort_by_key(|s| list.rank_of(s).unwrap_or(usize::MAX));
        for next in candidates {
            if students.contains(next) {
                continue;
            }
            students.push(next.clone());
            if let Some(found) = self.dfs(students, colleges) {
                students.pop();
                colleges.pop();
                return Some(found);
            }
            students.pop();
        }
        colleges.pop();
        None
    }

    /// Full postcondition check on a closing candidate: valid cycle,
    /// dominance on the student side, and every on-cycle college filled to
    /// capacity under both matchings.
    fn verify(&self, agents: &[AgentId]) -> bool {
        let cycle = match PreferenceCycle::new(agents.to_vec(), self.inst) {
            Ok(c) => c,
            Err(_) => return false,
        };
        if !cycle.contains(&self.start) {
            return false;
        }
        if !dominance_many(&cycle, self.mu, Side::Proposer).dominated {
            return false;
        }
        if !dominance_many(&cycle, self.mu_prime, Side::Proposer).dominating {
            return false;
        }
        let empty = BTreeSet::new();
        for a in agents.iter().filter(|a| a.side() == Side::Receiver) {
            let quota = match self.inst.quota(a) {
                Some(q) => q as usize,
                None => return false,
            };
            let full_mu = self.mu_rosters.get(a).unwrap_or(&empty).len() == quota;
            let full_prime = self.prime_rosters.get(a).unwrap_or(&empty).len() == quota;
            if !full_mu || !full_prime {
                return false;
            }
        }
        true
    }
}

/// Extract a preference cycle through student `s` witnessing its improvement
/// from stable `mu` to stable `mu_prime`, with every on-cycle college full
/// under both matchings. Exhausting the search without a valid cycle returns
/// a counterexample report instead of an error.
pub fn extract_cycle_many(
    mu: &ManyToOneMatching,
    mu_prime: &ManyToOneMatching,
    s: &AgentId,
    inst: &ManyToOneInstance,
) -> Result<ManyExtractOutcome, ExtractError> {
    if s.side() != Side::Proposer {
        return Err(ExtractError::WrongSide {
            name: s.name().to_string(),
        });
    }
    if !inst.contains(s) {
        return Err(ExtractError::UnknownAgent {
            name: s.name().to_string(),
        });
    }
    if !is_stable_many(mu, inst)? {
        return Err(ExtractError::NotStable { which: "mu" });
    }
    if !is_stable_many(mu_prime, inst)? {
        return Err(ExtractError::NotStable { which: "mu_prime" });
    }
    if !inst.prefers(s, mu_prime.college(s), mu.college(s))? {
        return Err(ExtractError::NoImprovement {
            agent: s.name().to_string(),
        });
    }

    let search = ManySearch {
        inst,
        mu,
        mu_prime,
        mu_rosters: mu.rosters(),
        prime_rosters: mu_prime.rosters(),
        start: s.clone(),
        closing_college: mu.college(s).cloned(),
    };
    let mut students = Vec::with_capacity(inst.students().len());
    students.push(s.clone());
    let mut colleges = Vec::new();
    match search.dfs(&mut students, &mut colleges) {
        Some(agents) => Ok(ManyExtractOutcome::Cycle(
            PreferenceCycle::new(agents, inst).expect("verified during search"),
        )),
        None => Ok(ManyExtractOutcome::Counterexample(Box::new(
            Lemma3Counterexample {
                instance: inst.clone(),
                mu: mu.clone(),
                mu_prime: mu_prime.clone(),
                start: s.clone(),
            },
        ))),
    }
}
