//! Market data model: agents, strict preference lists, validated instances,
//! and matchings for the one-to-one and many-to-one forms.
//!
//! Unacceptability is encoded by omission: an agent's preference list holds
//! exactly the partners it likes, and the outside option sits implicitly
//! after the last entry. Responsive college preferences are represented by a
//! strict individual ranking plus a quota; set comparisons reduce to
//! individual ones.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// The two sides of a market. Proposers drive deferred acceptance
/// (men / students); receivers respond (women / colleges).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Proposer,
    Receiver,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Proposer => Side::Receiver,
            Side::Receiver => Side::Proposer,
        }
    }
}

/// An agent identifier: a non-empty name plus the side it lives on.
/// Ordering is by side, then name, which keeps reports deterministic.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId {
    side: Side,
    name: String,
}

impl AgentId {
    pub fn new(side: Side, name: impl Into<String>) -> Self {
        AgentId {
            side,
            name: name.into(),
        }
    }

    pub fn proposer(name: impl Into<String>) -> Self {
        AgentId::new(Side::Proposer, name)
    }

    pub fn receiver(name: impl Into<String>) -> Self {
        AgentId::new(Side::Receiver, name)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn side(&self) -> Side {
        self.side
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl fmt::Debug for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.side {
            Side::Proposer => "P",
            Side::Receiver => "R",
        };
        write!(f, "{}:{}", tag, self.name)
    }
}

/// A strict ranking of opposite-side agents. Everything listed is liked;
/// everything absent ranks below the outside option.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreferenceList {
    owner: AgentId,
    ranked: Vec<AgentId>,
    rank: BTreeMap<AgentId, usize>,
}

impl PreferenceList {
    fn build(owner: AgentId, ranked: Vec<AgentId>) -> Self {
        let rank = ranked
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        PreferenceList {
            owner,
            ranked,
            rank,
        }
    }

    pub fn owner(&self) -> &AgentId {
        &self.owner
    }

    pub fn ranked(&self) -> &[AgentId] {
        &self.ranked
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    /// Position of `b` in the list, 0 = most preferred.
    pub fn rank_of(&self, b: &AgentId) -> Option<usize> {
        self.rank.get(b).copied()
    }

    pub fn likes(&self, b: &AgentId) -> bool {
        self.rank.contains_key(b)
    }

    /// Effective position of an outcome in the strict order: listed agents
    /// come first, then the outside option, then (tied) everything unlisted.
    fn slot(&self, x: Option<&AgentId>) -> usize {
        match x {
            None => self.ranked.len(),
            Some(b) => self.rank_of(b).unwrap_or(self.ranked.len() + 1),
        }
    }

    /// Strict preference between two outcomes (`None` = outside option).
    pub fn prefers(&self, x: Option<&AgentId>, y: Option<&AgentId>) -> bool {
        self.slot(x) < self.slot(y)
    }
}

/// Shared lookup surface for everything that evaluates preferences
/// against either market form.
pub trait Preferences {
    fn preference_of(&self, a: &AgentId) -> Option<&PreferenceList>;

    fn has_agent(&self, a: &AgentId) -> bool {
        self.preference_of(a).is_some()
    }
}

/// A single rule breach found while validating raw instance data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyId,
    DuplicateId { id: String },
    UnknownPreferenceOwner { id: String },
    DuplicateEntry { owner: String, entry: String },
    CrossSide { owner: String, entry: String },
    DanglingReference { owner: String, entry: String },
    QuotaNotPositive { college: String, quota: u32 },
    MissingQuota { college: String },
    QuotaForUnknownCollege { id: String },
}

impl Violation {
    pub fn rule(&self) -> &'static str {
        match self {
            Violation::EmptyId => "id must be non-empty",
            Violation::DuplicateId { .. } => "ids must be unique",
            Violation::UnknownPreferenceOwner { .. } => "preference owner must be an agent",
            Violation::DuplicateEntry { .. } => "preference lists must not repeat entries",
            Violation::CrossSide { .. } => "cross-side violation",
            Violation::DanglingReference { .. } => "preference entries must name existing agents",
            Violation::QuotaNotPositive { .. } => "quota must be >= 1",
            Violation::MissingQuota { .. } => "every college needs a quota",
            Violation::QuotaForUnknownCollege { .. } => "quota keys must name colleges",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyId => write!(f, "{}", self.rule()),
            Violation::DuplicateId { id } | Violation::UnknownPreferenceOwner { id } => {
                write!(f, "{} ({})", self.rule(), id)
            }
            Violation::DuplicateEntry { owner, entry }
            | Violation::CrossSide { owner, entry }
            | Violation::DanglingReference { owner, entry } => {
                write!(f, "{} ({} lists {})", self.rule(), owner, entry)
            }
            Violation::QuotaNotPositive { college, quota } => {
                write!(f, "{} ({} has {})", self.rule(), college, quota)
            }
            Violation::MissingQuota { college } => write!(f, "{} ({})", self.rule(), college),
            Violation::QuotaForUnknownCollege { id } => write!(f, "{} ({})", self.rule(), id),
        }
    }
}

/// Errors raised by preference queries on a validated instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelError {
    UnknownAgent { name: String },
    SideMismatch { name: String },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::UnknownAgent { name } => write!(f, "unknown agent: {}", name),
            ModelError::SideMismatch { name } => {
                write!(f, "agent {} is on the wrong side for this comparison", name)
            }
        }
    }
}

/// Errors raised while assembling a matching.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchingError {
    SameSidePair { a: String, b: String },
    AgentMatchedTwice { name: String },
    UnknownAgent { name: String },
}

impl fmt::Display for MatchingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchingError::SameSidePair { a, b } => {
                write!(f, "pair ({}, {}) joins agents from the same side", a, b)
            }
            MatchingError::AgentMatchedTwice { name } => {
                write!(f, "agent {} is matched more than once", name)
            }
            MatchingError::UnknownAgent { name } => write!(f, "unknown agent: {}", name),
        }
    }
}

fn check_names(
    proposer_names: &[String],
    receiver_names: &[String],
    violations: &mut Vec<Violation>,
) {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for name in proposer_names.iter().chain(receiver_names.iter()) {
        if name.is_empty() {
            violations.push(Violation::EmptyId);
            continue;
        }
        if !seen.insert(name.as_str()) {
            violations.push(Violation::DuplicateId { id: name.clone() });
        }
    }
}

/// Resolve one raw preference list against the two side sets.
fn build_list(
    owner: &AgentId,
    raw: &[String],
    own_side: &BTreeSet<AgentId>,
    other_side: &BTreeSet<AgentId>,
    violations: &mut Vec<Violation>,
) -> PreferenceList {
    let mut ranked = Vec::with_capacity(raw.len());
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for entry in raw {
        if !seen.insert(entry.as_str()) {
            violations.push(Violation::DuplicateEntry {
                owner: owner.name().to_string(),
                entry: entry.clone(),
            });
            continue;
        }
        let target = AgentId::new(owner.side().opposite(), entry.clone());
        if other_side.contains(&target) {
            ranked.push(target);
        } else if own_side.contains(&AgentId::new(owner.side(), entry.clone())) {
            violations.push(Violation::CrossSide {
                owner: owner.name().to_string(),
                entry: entry.clone(),
            });
        } else {
            violations.push(Violation::DanglingReference {
                owner: owner.name().to_string(),
                entry: entry.clone(),
            });
        }
    }
    PreferenceList::build(owner.clone(), ranked)
}

fn build_prefs(
    proposers: &BTreeSet<AgentId>,
    receivers: &BTreeSet<AgentId>,
    preferences: &BTreeMap<String, Vec<String>>,
    violations: &mut Vec<Violation>,
) -> BTreeMap<AgentId, PreferenceList> {
    let mut prefs = BTreeMap::new();
    for key in preferences.keys() {
        let known = proposers.contains(&AgentId::proposer(key.clone()))
            || receivers.contains(&AgentId::receiver(key.clone()));
        if !known {
            violations.push(Violation::UnknownPreferenceOwner { id: key.clone() });
        }
    }
    static EMPTY: &[String] = &[];
    for agent in proposers.iter() {
        let raw = preferences
            .get(agent.name())
            .map(|v| v.as_slice())
            .unwrap_or(EMPTY);
        prefs.insert(
            agent.clone(),
            build_list(agent, raw, proposers, receivers, violations),
        );
    }
    for agent in receivers.iter() {
        let raw = preferences
            .get(agent.name())
            .map(|v| v.as_slice())
            .unwrap_or(EMPTY);
        prefs.insert(
            agent.clone(),
            build_list(agent, raw, receivers, proposers, violations),
        );
    }
    prefs
}

/// A validated one-to-one market: two disjoint agent sets plus one strict
/// preference list per agent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneToOneInstance {
    proposers: BTreeSet<AgentId>,
    receivers: BTreeSet<AgentId>,
    prefs: BTreeMap<AgentId, PreferenceList>,
}

impl OneToOneInstance {
    /// Validate raw data into an instance, or report every rule breach found.
    pub fn new(
        proposers: Vec<String>,
        receivers: Vec<String>,
        preferences: BTreeMap<String, Vec<String>>,
    ) -> Result<Self, Vec<Violation>> {
        let mut violations = Vec::new();
        check_names(&proposers, &receivers, &mut violations);
        let p_set: BTreeSet<AgentId> = proposers.into_iter().map(AgentId::proposer).collect();
        let r_set: BTreeSet<AgentId> = receivers.into_iter().map(AgentId::receiver).collect();
        let prefs = build_prefs(&p_set, &r_set, &preferences, &mut violations);
        if violations.is_empty() {
            Ok(OneToOneInstance {
                proposers: p_set,
                receivers: r_set,
                prefs,
            })
        } else {
            Err(violations)
        }
    }

    /// Convenience constructor from literals, mainly for tests and examples.
    pub fn from_lists(
        proposers: &[(&str, &[&str])],
        receivers: &[(&str, &[&str])],
    ) -> Result<Self, Vec<Violation>> {
        let mut preferences = BTreeMap::new();
        let mut p_names = Vec::new();
        let mut r_names = Vec::new();
        for (name, list) in proposers {
            p_names.push(name.to_string());
            preferences.insert(
                name.to_string(),
                list.iter().map(|s| s.to_string()).collect(),
            );
        }
        for (name, list) in receivers {
            r_names.push(name.to_string());
            preferences.insert(
                name.to_string(),
                list.iter().map(|s| s.to_string()).collect(),
            );
        }
        OneToOneInstance::new(p_names, r_names, preferences)
    }

    pub fn proposers(&self) -> &BTreeSet<AgentId> {
        &self.proposers
    }

    pub fn receivers(&self) -> &BTreeSet<AgentId> {
        &self.receivers
    }

    pub fn side_agents(&self, side: Side) -> &BTreeSet<AgentId> {
        match side {
            Side::Proposer => &self.proposers,
            Side::Receiver => &self.receivers,
        }
    }

    pub fn agents(&self) -> impl Iterator<Item = &AgentId> {
        self.proposers.iter().chain(self.receivers.iter())
    }

    pub fn contains(&self, a: &AgentId) -> bool {
        self.side_agents(a.side()).contains(a)
    }

    pub fn agent_by_name(&self, name: &str) -> Option<&AgentId> {
        self.proposers
            .get(&AgentId::proposer(name))
            .or_else(|| self.receivers.get(&AgentId::receiver(name)))
    }

    pub fn preference(&self, a: &AgentId) -> Option<&PreferenceList> {
        self.prefs.get(a)
    }

    fn checked_list(&self, a: &AgentId) -> Result<&PreferenceList, ModelError> {
        self.prefs.get(a).ok_or_else(|| ModelError::UnknownAgent {
            name: a.name().to_string(),
        })
    }

    fn check_target(&self, a: &AgentId, x: Option<&AgentId>) -> Result<(), ModelError> {
        if let Some(b) = x {
            if b.side() != a.side().opposite() {
                return Err(ModelError::SideMismatch {
                    name: b.name().to_string(),
                });
            }
            if !self.contains(b) {
                return Err(ModelError::UnknownAgent {
                    name: b.name().to_string(),
                });
            }
        }
        Ok(())
    }

    /// Strict preference of `a` between two outcomes (`None` = unmatched).
    pub fn prefers(
        &self,
        a: &AgentId,
        x: Option<&AgentId>,
        y: Option<&AgentId>,
    ) -> Result<bool, ModelError> {
        let list = self.checked_list(a)?;
        self.check_target(a, x)?;
        self.check_target(a, y)?;
        Ok(list.prefers(x, y))
    }

    /// True iff `b` appears on `a`'s list, i.e. `a` prefers `b` to staying
    /// unmatched.
    pub fn likes(&self, a: &AgentId, b: &AgentId) -> Result<bool, ModelError> {
        let list = self.checked_list(a)?;
        self.check_target(a, Some(b))?;
        Ok(list.likes(b))
    }

    /// Stable fingerprint of the instance for report payloads.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        h.update(b"one-to-one");
        digest_prefs(&mut h, &self.prefs);
        h.finish()
    }
}

impl Preferences for OneToOneInstance {
    fn preference_of(&self, a: &AgentId) -> Option<&PreferenceList> {
        self.preference(a)
    }
}

/// A validated many-to-one market: students, colleges with quotas, and one
/// strict individual preference list per agent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManyToOneInstance {
    students: BTreeSet<AgentId>,
    colleges: BTreeSet<AgentId>,
    prefs: BTreeMap<AgentId, PreferenceList>,
    quotas: BTreeMap<AgentId, u32>,
}

impl ManyToOneInstance {
    pub fn new(
        students: Vec<String>,
        colleges: Vec<String>,
        preferences: BTreeMap<String, Vec<String>>,
        quotas: BTreeMap<String, u32>,
    ) -> Result<Self, Vec<Violation>> {
        let mut violations = Vec::new();
        check_names(&students, &colleges, &mut violations);
        let s_set: BTreeSet<AgentId> = students.into_iter().map(AgentId::proposer).collect();
        let c_set: BTreeSet<AgentId> = colleges.into_iter().map(AgentId::receiver).collect();
        let prefs = build_prefs(&s_set, &c_set, &preferences, &mut violations);

        let mut quota_map = BTreeMap::new();
        for (name, q) in &quotas {
            let college = AgentId::receiver(name.clone());
            if !c_set.contains(&college) {
                violations.push(Violation::QuotaForUnknownCollege { id: name.clone() });
                continue;
            }
            if *q < 1 {
                violations.push(Violation::QuotaNotPositive {
                    college: name.clone(),
                    quota: *q,
                });
                continue;
            }
            quota_map.insert(college, *q);
        }
        for college in c_set.iter() {
            if !quotas.contains_key(college.name()) {
                violations.push(Violation::MissingQuota {
                    college: college.name().to_string(),
                });
            }
        }

        if violations.is_empty() {
            Ok(ManyToOneInstance {
                students: s_set,
                colleges: c_set,
                prefs,
                quotas: quota_map,
            })
        } else {
            Err(violations)
        }
    }

    /// Convenience constructor from literals: colleges carry `(name, quota, list)`.
    pub fn from_lists(
        students: &[(&str, &[&str])],
        colleges: &[(&str, u32, &[&str])],
    ) -> Result<Self, Vec<Violation>> {
        let mut preferences = BTreeMap::new();
        let mut s_names = Vec::new();
        let mut c_names = Vec::new();
        let mut quotas = BTreeMap::new();
        for (name, list) in students {
            s_names.push(name.to_string());
            preferences.insert(
                name.to_string(),
                list.iter().map(|s| s.to_string()).collect(),
            );
        }
        for (name, quota, list) in colleges {
            c_names.push(name.to_string());
            quotas.insert(name.to_string(), *quota);
            preferences.insert(
                name.to_string(),
                list.iter().map(|s| s.to_string()).collect(),
            );
        }
        ManyToOneInstance::new(s_names, c_names, preferences, quotas)
    }

    /// Embed a one-to-one market as a many-to-one market with unit quotas.
    pub fn from_one_to_one(inst: &OneToOneInstance) -> Self {
        ManyToOneInstance {
            students: inst.proposers.clone(),
            colleges: inst.receivers.clone(),
            prefs: inst.prefs.clone(),
            quotas: inst.receivers.iter().map(|c| (c.clone(), 1)).collect(),
        }
    }

    pub fn students(&self) -> &BTreeSet<AgentId> {
        &self.students
    }

    pub fn colleges(&self) -> &BTreeSet<AgentId> {
        &self.colleges
    }

    pub fn side_agents(&self, side: Side) -> &BTreeSet<AgentId> {
        match side {
            Side::Proposer => &self.students,
            Side::Receiver => &self.colleges,
        }
    }

    pub fn agents(&self) -> impl Iterator<Item = &AgentId> {
        self.students.iter().chain(self.colleges.iter())
    }

    pub fn contains(&self, a: &AgentId) -> bool {
        self.side_agents(a.side()).contains(a)
    }

    pub fn agent_by_name(&self, name: &str) -> Option<&AgentId> {
        self.students
            .get(&AgentId::proposer(name))
            .or_else(|| self.colleges.get(&AgentId::receiver(name)))
    }

    pub fn preference(&self, a: &AgentId) -> Option<&PreferenceList> {
        self.prefs.get(a)
    }

    pub fn quota(&self, c: &AgentId) -> Option<u32> {
        self.quotas.get(c).copied()
    }

    pub fn quotas(&self) -> &BTreeMap<AgentId, u32> {
        &self.quotas
    }

    fn checked_list(&self, a: &AgentId) -> Result<&PreferenceList, ModelError> {
        self.prefs.get(a).ok_or_else(|| ModelError::UnknownAgent {
            name: a.name().to_string(),
        })
    }

    fn check_target(&self, a: &AgentId, x: Option<&AgentId>) -> Result<(), ModelError> {
        if let Some(b) = x {
            if b.side() != a.side().opposite() {
                return Err(ModelError::SideMismatch {
                    name: b.name().to_string(),
                });
            }
            if !self.contains(b) {
                return Err(ModelError::UnknownAgent {
                    name: b.name().to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn prefers(
        &self,
        a: &AgentId,
        x: Option<&AgentId>,
        y: Option<&AgentId>,
    ) -> Result<bool, ModelError> {
        let list = self.checked_list(a)?;
        self.check_target(a, x)?;
        self.check_target(a, y)?;
        Ok(list.prefers(x, y))
    }

    pub fn likes(&self, a: &AgentId, b: &AgentId) -> Result<bool, ModelError> {
        let list = self.checked_list(a)?;
        self.check_target(a, Some(b))?;
        Ok(list.likes(b))
    }

    pub fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        h.update(b"many-to-one");
        digest_prefs(&mut h, &self.prefs);
        for (college, quota) in &self.quotas {
            h.update(college.name().as_bytes());
            h.update(&quota.to_le_bytes());
        }
        h.finish()
    }
}

impl Preferences for ManyToOneInstance {
    fn preference_of(&self, a: &AgentId) -> Option<&PreferenceList> {
        self.preference(a)
    }
}

/// Either market form, for payloads and CLI plumbing that handle both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MarketInstance {
    OneToOne(OneToOneInstance),
    ManyToOne(ManyToOneInstance),
}

impl MarketInstance {
    pub fn kind(&self) -> &'static str {
        match self {
            MarketInstance::OneToOne(_) => "one-to-one",
            MarketInstance::ManyToOne(_) => "many-to-one",
        }
    }

    pub fn digest(&self) -> u64 {
        match self {
            MarketInstance::OneToOne(i) => i.digest(),
            MarketInstance::ManyToOne(i) => i.digest(),
        }
    }
}

/// A one-to-one matching stored as a partial involution: a forward
/// proposer-to-receiver map plus its inverse.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct OneToOneMatching {
    forward: BTreeMap<AgentId, AgentId>,
    reverse: BTreeMap<AgentId, AgentId>,
}

impl OneToOneMatching {
    pub fn empty() -> Self {
        OneToOneMatching {
            forward: BTreeMap::new(),
            reverse: BTreeMap::new(),
        }
    }

    /// Build from pairs; each pair must join opposite sides and no agent may
    /// appear twice. The involution property holds by construction.
    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (AgentId, AgentId)>,
    ) -> Result<Self, MatchingError> {
        let mut m = OneToOneMatching::empty();
        for (a, b) in pairs {
            let (p, r) = match (a.side(), b.side()) {
                (Side::Proposer, Side::Receiver) => (a, b),
                (Side::Receiver, Side::Proposer) => (b, a),
                _ => {
                    return Err(MatchingError::SameSidePair {
                        a: a.name().to_string(),
                        b: b.name().to_string(),
                    })
                }
            };
            if m.forward.contains_key(&p) {
                return Err(MatchingError::AgentMatchedTwice {
                    name: p.name().to_string(),
                });
            }
            if m.reverse.contains_key(&r) {
                return Err(MatchingError::AgentMatchedTwice {
                    name: r.name().to_string(),
                });
            }
            m.forward.insert(p.clone(), r.clone());
            m.reverse.insert(r, p);
        }
        Ok(m)
    }

    /// Build from `(name, name)` pairs resolved against an instance.
    pub fn from_names(
        inst: &OneToOneInstance,
        pairs: &[(&str, &str)],
    ) -> Result<Self, MatchingError> {
        let resolve = |name: &str| {
            inst.agent_by_name(name)
                .cloned()
                .ok_or_else(|| MatchingError::UnknownAgent {
                    name: name.to_string(),
                })
        };
        let mut owned = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            owned.push((resolve(a)?, resolve(b)?));
        }
        OneToOneMatching::from_pairs(owned)
    }

    /// The partner of `a`, or `None` when unmatched.
    pub fn partner(&self, a: &AgentId) -> Option<&AgentId> {
        match a.side() {
            Side::Proposer => self.forward.get(a),
            Side::Receiver => self.reverse.get(a),
        }
    }

    /// Matched pairs in proposer order.
    pub fn pairs(&self) -> impl Iterator<Item = (&AgentId, &AgentId)> {
        self.forward.iter()
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }
}

/// A many-to-one matching stored as the student-to-college assignment;
/// college rosters are always derived from it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ManyToOneMatching {
    assignment: BTreeMap<AgentId, AgentId>,
}

impl ManyToOneMatching {
    pub fn empty() -> Self {
        ManyToOneMatching {
            assignment: BTreeMap::new(),
        }
    }

    pub fn from_assignment(
        assignment: impl IntoIterator<Item = (AgentId, AgentId)>,
    ) -> Result<Self, MatchingError> {
        let mut map = BTreeMap::new();
        for (s, c) in assignment {
            if s.side() != Side::Proposer || c.side() != Side::Receiver {
                return Err(MatchingError::SameSidePair {
                    a: s.name().to_string(),
                    b: c.name().to_string(),
                });
            }
            if map.insert(s.clone(), c).is_some() {
                return Err(MatchingError::AgentMatchedTwice {
                    name: s.name().to_string(),
                });
            }
        }
        Ok(ManyToOneMatching { assignment: map })
    }

    pub fn from_names(
        inst: &ManyToOneInstance,
        pairs: &[(&str, &str)],
    ) -> Result<Self, MatchingError> {
        let resolve = |name: &str| {
            inst.agent_by_name(name)
                .cloned()
                .ok_or_else(|| MatchingError::UnknownAgent {
                    name: name.to_string(),
                })
        };
        let mut owned = Vec::with_capacity(pairs.len());
        for (s, c) in pairs {
            owned.push((resolve(s)?, resolve(c)?));
        }
        ManyToOneMatching::from_assignment(owned)
    }

    /// Identity embedding of a one-to-one matching.
    pub fn from_one_to_one(one: &OneToOneMatching) -> Self {
        ManyToOneMatching {
            assignment: one
                .pairs()
                .map(|(p, r)| (p.clone(), r.clone()))
                .collect(),
        }
    }

    /// Restrict back to one-to-one form; fails if some college holds more
    /// than one student.
    pub fn to_one_to_one(&self) -> Result<OneToOneMatching, MatchingError> {
        OneToOneMatching::from_pairs(self.assignment.iter().map(|(s, c)| (s.clone(), c.clone())))
    }

    pub fn college(&self, s: &AgentId) -> Option<&AgentId> {
        self.assignment.get(s)
    }

    pub fn assignment(&self) -> &BTreeMap<AgentId, AgentId> {
        &self.assignment
    }

    /// Derived roster of a single college.
    pub fn roster(&self, c: &AgentId) -> BTreeSet<AgentId> {
        self.assignment
            .iter()
            .filter(|(_, v)| *v == c)
            .map(|(s, _)| s.clone())
            .collect()
    }

    /// Derived rosters of every college that holds at least one student.
    pub fn rosters(&self) -> BTreeMap<AgentId, BTreeSet<AgentId>> {
        let mut out: BTreeMap<AgentId, BTreeSet<AgentId>> = BTreeMap::new();
        for (s, c) in &self.assignment {
            out.entry(c.clone()).or_default().insert(s.clone());
        }
        out
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }
}

/// Either matching form, for report payloads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MarketMatching {
    OneToOne(OneToOneMatching),
    ManyToOne(ManyToOneMatching),
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x100_0000_01b3);
        }
        // separator so that adjacent fields cannot run together
        self.0 ^= 0x1f;
        self.0 = self.0.wrapping_mul(0x100_0000_01b3);
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

fn digest_prefs(h: &mut Fnv, prefs: &BTreeMap<AgentId, PreferenceList>) {
    for (agent, list) in prefs {
        h.update(agent.name().as_bytes());
        for entry in list.ranked() {
            h.update(entry.name().as_bytes());
        }
        h.update(b";");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_by_two_cyclic() -> OneToOneInstance {
        OneToOneInstance::from_lists(
            &[("m1", &["w1", "w2"]), ("m2", &["w2", "w1"])],
            &[("w1", &["m2", "m1"]), ("w2", &["m1", "m2"])],
        )
        .unwrap()
    }

    #[test]
    fn prefers_follows_list_order() {
        let inst = OneToOneInstance::from_lists(
            &[("a", &["w1", "w2"])],
            &[("w1", &[]), ("w2", &[]), ("w3", &[])],
        )
        .unwrap();
        let a = inst.agent_by_name("a").unwrap().clone();
        let w1 = inst.agent_by_name("w1").unwrap().clone();
        let w2 = inst.agent_by_name("w2").unwrap().clone();
        let w3 = inst.agent_by_name("w3").unwrap().clone();

        assert!(inst.prefers(&a, Some(&w1), Some(&w2)).unwrap());
        assert!(!inst.prefers(&a, Some(&w2), Some(&w1)).unwrap());
        // listed beats the outside option, outside option beats unlisted
        assert!(inst.prefers(&a, Some(&w1), None).unwrap());
        assert!(inst.prefers(&a, None, Some(&w3)).unwrap());
        // strictness
        assert!(!inst.prefers(&a, Some(&w1), Some(&w1)).unwrap());
        assert!(!inst.prefers(&a, None, None).unwrap());
    }

    #[test]
    fn likes_means_listed() {
        let inst = OneToOneInstance::from_lists(
            &[("a", &["w1", "w2"]), ("b", &[])],
            &[("w1", &[]), ("w2", &[])],
        )
        .unwrap();
        let a = inst.agent_by_name("a").unwrap().clone();
        let b = inst.agent_by_name("b").unwrap().clone();
        let w1 = inst.agent_by_name("w1").unwrap().clone();
        let w2 = inst.agent_by_name("w2").unwrap().clone();
        assert!(inst.likes(&a, &w2).unwrap());
        assert!(inst.likes(&a, &w1).unwrap());
        assert!(!inst.likes(&b, &w1).unwrap());
    }

    #[test]
    fn unknown_agents_are_rejected() {
        let inst = two_by_two_cyclic();
        let ghost = AgentId::proposer("m9");
        let w1 = inst.agent_by_name("w1").unwrap().clone();
        assert_eq!(
            inst.likes(&ghost, &w1),
            Err(ModelError::UnknownAgent {
                name: "m9".into()
            })
        );
        let m1 = inst.agent_by_name("m1").unwrap().clone();
        let ghost_w = AgentId::receiver("w9");
        assert_eq!(
            inst.prefers(&m1, Some(&ghost_w), None),
            Err(ModelError::UnknownAgent {
                name: "w9".into()
            })
        );
    }

    #[test]
    fn cross_side_entries_fail_validation() {
        let err = OneToOneInstance::from_lists(
            &[("m1", &["m2"]), ("m2", &[])],
            &[("w1", &[])],
        )
        .unwrap_err();
        assert!(matches!(&err[0], Violation::CrossSide { owner, entry }
            if owner == "m1" && entry == "m2"));
    }

    #[test]
    fn zero_quota_fails_validation() {
        let err = ManyToOneInstance::from_lists(&[("s1", &["c1"])], &[("c1", 0, &["s1"])])
            .unwrap_err();
        assert!(matches!(
            &err[0],
            Violation::QuotaNotPositive { college, quota: 0 } if college == "c1"
        ));
    }

    #[test]
    fn well_formed_two_by_two_is_accepted() {
        let inst = two_by_two_cyclic();
        assert_eq!(inst.proposers().len(), 2);
        assert_eq!(inst.receivers().len(), 2);
    }

    #[test]
    fn duplicate_and_dangling_violations_are_collected() {
        let err = OneToOneInstance::from_lists(
            &[("m1", &["w1", "w1", "ghost"])],
            &[("w1", &["m1"])],
        )
        .unwrap_err();
        assert_eq!(err.len(), 2);
        assert!(err
            .iter()
            .any(|v| matches!(v, Violation::DuplicateEntry { .. })));
        assert!(err
            .iter()
            .any(|v| matches!(v, Violation::DanglingReference { .. })));
    }

    #[test]
    fn duplicate_ids_across_sides_are_rejected() {
        let err = OneToOneInstance::from_lists(&[("x", &[])], &[("x", &[])]).unwrap_err();
        assert!(matches!(&err[0], Violation::DuplicateId { id } if id == "x"));
    }

    #[test]
    fn missing_quota_is_reported() {
        let err = ManyToOneInstance::new(
            vec!["s1".into()],
            vec!["c1".into()],
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .unwrap_err();
        assert!(matches!(&err[0], Violation::MissingQuota { college } if college == "c1"));
    }

    #[test]
    fn matching_enforces_involution_by_construction() {
        let inst = two_by_two_cyclic();
        let m1 = inst.agent_by_name("m1").unwrap().clone();
        let w1 = inst.agent_by_name("w1").unwrap().clone();
        let w2 = inst.agent_by_name("w2").unwrap().clone();

        let mu = OneToOneMatching::from_pairs(vec![(m1.clone(), w1.clone())]).unwrap();
        assert_eq!(mu.partner(&m1), Some(&w1));
        assert_eq!(mu.partner(&w1), Some(&m1));
        assert_eq!(mu.partner(&w2), None);

        let err = OneToOneMatching::from_pairs(vec![(m1.clone(), w1.clone()), (m1, w2)]);
        assert!(matches!(err, Err(MatchingError::AgentMatchedTwice { .. })));

        let a = AgentId::proposer("a");
        let b = AgentId::proposer("b");
        assert!(matches!(
            OneToOneMatching::from_pairs(vec![(a, b)]),
            Err(MatchingError::SameSidePair { .. })
        ));
    }

    #[test]
    fn rosters_are_derived_from_assignment() {
        let inst = ManyToOneInstance::from_lists(
            &[("s1", &["c1"]), ("s2", &["c1"]), ("s3", &["c1"])],
            &[("c1", 2, &["s1", "s2", "s3"])],
        )
        .unwrap();
        let mu = ManyToOneMatching::from_names(&inst, &[("s1", "c1"), ("s2", "c1")]).unwrap();
        let c1 = inst.agent_by_name("c1").unwrap();
        let roster = mu.roster(c1);
        assert_eq!(roster.len(), 2);
        assert!(roster.contains(&AgentId::proposer("s1")));
        assert!(roster.contains(&AgentId::proposer("s2")));
    }

    #[test]
    fn digest_is_stable_and_content_sensitive() {
        let a = two_by_two_cyclic();
        let b = two_by_two_cyclic();
        assert_eq!(a.digest(), b.digest());
        let c = OneToOneInstance::from_lists(
            &[("m1", &["w2", "w1"]), ("m2", &["w2", "w1"])],
            &[("w1", &["m2", "m1"]), ("w2", &["m1", "m2"])],
        )
        .unwrap();
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn embedding_keeps_agents_and_sets_unit_quotas() {
        let inst = two_by_two_cyclic();
        let many = ManyToOneInstance::from_one_to_one(&inst);
        assert_eq!(many.students().len(), 2);
        for c in many.colleges() {
            assert_eq!(many.quota(c), Some(1));
        }
        let m1 = inst.agent_by_name("m1").unwrap().clone();
        let w1 = inst.agent_by_name("w1").unwrap().clone();
        assert!(many.likes(&m1, &w1).unwrap());
    }

    // Exhaustive triple scan: prefers is a strict total order on
    // (listed agents ∪ {outside option}) for each agent.
    #[test]
    fn prefers_is_a_strict_total_order_on_listed_outcomes() {
        let inst = two_by_two_cyclic();
        for a in inst.agents() {
            let list = inst.preference(a).unwrap();
            let mut outcomes: Vec<Option<&AgentId>> =
                list.ranked().iter().map(Some).collect();
            outcomes.push(None);
            for x in &outcomes {
                assert!(!list.prefers(*x, *x));
                for y in &outcomes {
                    if x != y {
                        assert!(list.prefers(*x, *y) ^ list.prefers(*y, *x));
                    }
                    for z in &outcomes {
                        if list.prefers(*x, *y) && list.prefers(*y, *z) {
                            assert!(list.prefers(*x, *z));
                        }
                    }
                }
            }
        }
    }
}
