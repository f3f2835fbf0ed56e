//! Brute-force ground truth: enumerate every matching of a small instance,
//! filter the stable ones, and generate seeded random instances.
//!
//! Raw enumerations are streams, never materialized lists; only stable
//! filtrates are collected. The stable filter runs on an interned index of
//! the instance for speed and is differential-tested against the public
//! stability predicates.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    AgentId, ManyToOneInstance, ManyToOneMatching, MarketInstance, OneToOneInstance,
    OneToOneMatching,
};

pub const DEFAULT_SIDE_CAP: usize = 8;
pub const DEFAULT_ASSIGNMENT_CAP: u64 = 1_000_000;

/// Enumeration budgets shared by everything that calls into the oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCaps {
    /// Maximum size of each side for one-to-one enumeration.
    pub max_side_1to1: usize,
    /// Maximum number of raw student assignments, i.e. (|C|+1)^|S|.
    pub max_assignments_many: u64,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            max_side_1to1: DEFAULT_SIDE_CAP,
            max_assignments_many: DEFAULT_ASSIGNMENT_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    SideCapExceeded {
        proposers: usize,
        receivers: usize,
        cap: usize,
    },
    AssignmentCapExceeded {
        combinations: u128,
        cap: u64,
    },
    InvalidShape {
        detail: String,
    },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::SideCapExceeded {
                proposers,
                receivers,
                cap,
            } => write!(
                f,
                "instance too large to enumerate: {}x{} exceeds side cap {}",
                proposers, receivers, cap
            ),
            OracleError::AssignmentCapExceeded { combinations, cap } => write!(
                f,
                "instance too large to enumerate: {} assignments exceed cap {}",
                combinations, cap
            ),
            OracleError::InvalidShape { detail } => write!(f, "invalid shape: {}", detail),
        }
    }
}

/// Odometer over partial injective choices: `choice[i]` is 0 for unmatched
/// or `j + 1` for receiver `j`, advanced in lexicographic order while
/// skipping configurations that reuse a receiver.
struct InjectiveChoices {
    n: usize,
    r: usize,
    choice: Vec<usize>,
    used: Vec<bool>,
    started: bool,
    done: bool,
}

impl InjectiveChoices {
    fn new(n: usize, r: usize) -> Self {
        InjectiveChoices {
            n,
            r,
            choice: vec![0; n],
            used: vec![false; r],
            started: false,
            done: false,
        }
    }

    fn next_choice(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.choice);
        }
        if self.n == 0 {
            self.done = true;
            return None;
        }
        let mut pos = self.n - 1;
        loop {
            let current = self.choice[pos];
            if current > 0 {
                self.used[current - 1] = false;
            }
            let mut advanced = false;
            for v in current + 1..=self.r {
                if !self.used[v - 1] {
                    self.choice[pos] = v;
                    self.used[v - 1] = true;
                    advanced = true;
                    break;
                }
            }
            if advanced {
                for c in self.choice[pos + 1..].iter_mut() {
                    *c = 0;
                }
                return Some(&self.choice);
            }
            self.choice[pos] = 0;
            if pos == 0 {
                self.done = true;
                return None;
            }
            pos -= 1;
        }
    }
}

/// Interned view of a one-to-one instance: slot tables turn every preference
/// comparison into an array lookup. Slots order each agent's outcomes as
/// listed partners, then the outside option, then everything unlisted.
struct Index1to1<'a> {
    ps: Vec<&'a AgentId>,
    rs: Vec<&'a AgentId>,
    p_slot: Vec<Vec<usize>>,
    p_null: Vec<usize>,
    r_slot: Vec<Vec<usize>>,
    r_null: Vec<usize>,
}

impl<'a> Index1to1<'a> {
    fn new(inst: &'a OneToOneInstance) -> Self {
        let ps: Vec<&AgentId> = inst.proposers().iter().collect();
        let rs: Vec<&AgentId> = inst.receivers().iter().collect();
        let slot_table = |agents: &[&AgentId], others: &[&AgentId]| {
            let mut slots = Vec::with_capacity(agents.len());
            let mut nulls = Vec::with_capacity(agents.len());
            for a in agents {
                let list = inst.preference(a).expect("validated instance");
                nulls.push(list.len());
                slots.push(
                    others
                        .iter()
                        .map(|b| list.rank_of(b).unwrap_or(list.len() + 1))
                        .collect(),
                );
            }
            (slots, nulls)
        };
        let (p_slot, p_null) = slot_table(&ps, &rs);
        let (r_slot, r_null) = slot_table(&rs, &ps);
        Index1to1 {
            ps,
            rs,
            p_slot,
            p_null,
            r_slot,
            r_null,
        }
    }

    fn is_stable(&self, choice: &[usize]) -> bool {
        let n = self.ps.len();
        let r = self.rs.len();
        let mut cur_p = vec![0usize; n];
        let mut cur_r: Vec<usize> = self.r_null.clone();
        for (i, &ch) in choice.iter().enumerate() {
            if ch == 0 {
                cur_p[i] = self.p_null[i];
                continue;
            }
            let j = ch - 1;
            let ps = self.p_slot[i][j];
            let rs = self.r_slot[j][i];
            // individual rationality: both must like each other
            if ps > self.p_null[i] || rs > self.r_null[j] {
                return false;
            }
            cur_p[i] = ps;
            cur_r[j] = rs;
        }
        for (i, &cp) in cur_p.iter().enumerate() {
            for (j, &cr) in cur_r.iter().enumerate() {
                if self.p_slot[i][j] < cp && self.r_slot[j][i] < cr {
                    return false;
                }
            }
        }
        true
    }

    fn materialize(&self, choice: &[usize]) -> OneToOneMatching {
        OneToOneMatching::from_pairs(
            choice
                .iter()
                .enumerate()
                .filter(|&(_, &ch)| ch > 0)
                .map(|(i, &ch)| (self.ps[i].clone(), self.rs[ch - 1].clone())),
        )
        .expect("injective choices form a matching")
    }
}

/// Stream over every partial matching of a one-to-one instance, in a fixed
/// lexicographic order.
pub struct Matchings1to1<'a> {
    index: Index1to1<'a>,
    choices: InjectiveChoices,
}

impl<'a> Iterator for Matchings1to1<'a> {
    type Item = OneToOneMatching;

    fn next(&mut self) -> Option<Self::Item> {
        let index = &self.index;
        self.choices
            .next_choice()
            .map(|choice| index.materialize(choice))
    }
}

fn check_side_cap(inst: &OneToOneInstance, cap: usize) -> Result<(), OracleError> {
    let (p, r) = (inst.proposers().len(), inst.receivers().len());
    if p > cap || r > cap {
        return Err(OracleError::SideCapExceeded {
            proposers: p,
            receivers: r,
            cap,
        });
    }
    Ok(())
}

/// Every partial matching of the instance, exactly once.
pub fn enumerate_matchings_1to1(
    inst: &OneToOneInstance,
    cap: usize,
) -> Result<Matchings1to1<'_>, OracleError> {
    check_side_cap(inst, cap)?;
    Ok(Matchings1to1 {
        index: Index1to1::new(inst),
        choices: InjectiveChoices::new(inst.proposers().len(), inst.receivers().len()),
    })
}

/// All stable matchings of the instance, in enumeration order.
pub fn enumerate_stable_1to1(
    inst: &OneToOneInstance,
    cap: usize,
) -> Result<Vec<OneToOneMatching>, OracleError> {
    check_side_cap(inst, cap)?;
    let index = Index1to1::new(inst);
    let mut choices =
        InjectiveChoices::new(inst.proposers().len(), inst.receivers().len());
    let mut out = Vec::new();
    while let Some(choice) = choices.next_choice() {
        if index.is_stable(choice) {
            out.push(index.materialize(choice));
        }
    }
    Ok(out)
}

/// Plain odometer over `(r + 1)^n` assignment vectors.
struct AssignmentChoices {
    n: usize,
    r: usize,
    choice: Vec<usize>,
    started: bool,
    done: bool,
}

impl AssignmentChoices {
    fn new(n: usize, r: usize) -> Self {
        AssignmentChoices {
            n,
            r,
            choice: vec![0; n],
            started: false,
            done: false,
        }
    }

    fn next_choice(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.choice);
        }
        if self.n == 0 {
            self.done = true;
            return None;
        }
        let mut pos = self.n - 1;
        loop {
            if self.choice[pos] < self.r {
                self.choice[pos] += 1;
                return Some(&self.choice);
            }
            self.choice[pos] = 0;
            if pos == 0 {
                self.done = true;
                return None;
            }
            pos -= 1;
        }
    }
}

/// Interned view of a many-to-one instance for the stable filter.
struct IndexMany<'a> {
    ss: Vec<&'a AgentId>,
    cs: Vec<&'a AgentId>,
    s_slot: Vec<Vec<usize>>,
    s_null: Vec<usize>,
    c_slot: Vec<Vec<usize>>,
    c_null: Vec<usize>,
    quota: Vec<usize>,
}

impl<'a> IndexMany<'a> {
    fn new(inst: &'a ManyToOneInstance) -> Self {
        let ss: Vec<&AgentId> = inst.students().iter().collect();
        let cs: Vec<&AgentId> = inst.colleges().iter().collect();
        let mut s_slot = Vec::with_capacity(ss.len());
        let mut s_null = Vec::with_capacity(ss.len());
        for s in &ss {
            let list = inst.preference(s).expect("validated instance");
            s_null.push(list.len());
            s_slot.push(
                cs.iter()
                    .map(|c| list.rank_of(c).unwrap_or(list.len() + 1))
                    .collect(),
            );
        }
        let mut c_slot = Vec::with_capacity(cs.len());
        let mut c_null = Vec::with_capacity(cs.len());
        let mut quota = Vec::with_capacity(cs.len());
        for c in &cs {
            let list = inst.preference(c).expect("validated instance");
            c_null.push(list.len());
            quota.push(inst.quota(c).expect("validated instance") as usize);
            c_slot.push(
                ss.iter()
                    .map(|s| list.rank_of(s).unwrap_or(list.len() + 1))
                    .collect(),
            );
        }
        IndexMany {
            ss,
            cs,
            s_slot,
            s_null,
            c_slot,
            c_null,
            quota,
        }
    }

    fn is_stable(&self, choice: &[usize]) -> bool {
        let n = self.ss.len();
        let m = self.cs.len();
        let mut cur_s = vec![0usize; n];
        let mut count = vec![0usize; m];
        let mut worst = vec![0usize; m];
        for (i, &ch) in choice.iter().enumerate() {
            if ch == 0 {
                cur_s[i] = self.s_null[i];
                continue;
            }
            let j = ch - 1;
            let ss = self.s_slot[i][j];
            let cs = self.c_slot[j][i];
            if ss > self.s_null[i] || cs > self.c_null[j] {
                return false;
            }
            cur_s[i] = ss;
            count[j] += 1;
            if cs > worst[j] {
                worst[j] = cs;
            }
        }
        for j in 0..m {
            if count[j] > self.quota[j] {
                return false;
            }
        }
        for i in 0..n {
            for j in 0..m {
                if self.s_slot[i][j] >= cur_s[i] {
                    continue;
                }
                let slack = count[j] < self.quota[j] && self.c_slot[j][i] < self.c_null[j];
                let displaces = count[j] > 0 && self.c_slot[j][i] < worst[j];
                if slack || displaces {
                    return false;
                }
            }
        }
        true
    }

    fn materialize(&self, choice: &[usize]) -> ManyToOneMatching {
        ManyToOneMatching::from_assignment(choice.iter().enumerate().filter_map(|(i, &ch)| {
            (ch > 0).then(|| (self.ss[i].clone(), self.cs[ch - 1].clone()))
        }))
        .expect("assignment vectors form a matching")
    }
}

/// Number of raw assignment vectors of an instance: `(|C|+1)^|S|`.
pub fn assignment_combinations(inst: &ManyToOneInstance) -> u128 {
    let base = inst.colleges().len() as u128 + 1;
    let mut total: u128 = 1;
    for _ in 0..inst.students().len() {
        total = total.saturating_mul(base);
    }
    total
}

fn check_assignment_cap(inst: &ManyToOneInstance, cap: u64) -> Result<(), OracleError> {
    let combinations = assignment_combinations(inst);
    if combinations > cap as u128 {
        return Err(OracleError::AssignmentCapExceeded { combinations, cap });
    }
    Ok(())
}

/// Stream over every student-to-college-or-unmatched assignment.
pub struct MatchingsMany<'a> {
    index: IndexMany<'a>,
    choices: AssignmentChoices,
}

impl<'a> Iterator for MatchingsMany<'a> {
    type Item = ManyToOneMatching;

    fn next(&mut self) -> Option<Self::Item> {
        let index = &self.index;
        self.choices
            .next_choice()
            .map(|choice| index.materialize(choice))
    }
}

pub fn enumerate_matchings_many(
    inst: &ManyToOneInstance,
    cap: u64,
) -> Result<MatchingsMany<'_>, OracleError> {
    check_assignment_cap(inst, cap)?;
    Ok(MatchingsMany {
        index: IndexMany::new(inst),
        choices: AssignmentChoices::new(inst.students().len(), inst.colleges().len()),
    })
}

/// All stable matchings of a many-to-one instance, in enumeration order.
pub fn enumerate_stable_many(
    inst: &ManyToOneInstance,
    cap: u64,
) -> Result<Vec<ManyToOneMatching>, OracleError> {
    check_assignment_cap(inst, cap)?;
    let index = IndexMany::new(inst);
    let mut choices =
        AssignmentChoices::new(inst.students().len(), inst.colleges().len());
    let mut out = Vec::new();
    while let Some(choice) = choices.next_choice() {
        if index.is_stable(choice) {
            out.push(index.materialize(choice));
        }
    }
    Ok(out)
}

/// Closed-form number of partial injective maps from an `m`-set to a
/// `w`-set: sum over k of C(m,k) * C(w,k) * k!.
pub fn partial_injection_count(m: usize, w: usize) -> u128 {
    let binom = |n: usize, k: usize| -> u128 {
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc
    };
    let factorial = |k: usize| -> u128 { (1..=k as u128).product() };
    (0..=m.min(w))
        .map(|k| binom(m, k) * binom(w, k) * factorial(k))
        .sum()
}

/// Shape of a random one-to-one instance. `truncation` is the probability
/// that any given opposite-side agent is dropped from a list; `symmetry` is
/// the probability that a receiver's acceptance of a proposer is forced to
/// mirror the proposer's acceptance of it.
#[derive(Clone, Debug, PartialEq)]
pub struct OneToOneShape {
    pub proposers: usize,
    pub receivers: usize,
    pub truncation: f64,
    pub symmetry: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManyToOneShape {
    pub students: usize,
    pub colleges: usize,
    pub max_quota: u32,
    pub truncation: f64,
    pub symmetry: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceShape {
    OneToOne(OneToOneShape),
    ManyToOne(ManyToOneShape),
}

const MAX_GENERATED_SIDE: usize = 512;

fn check_probability(name: &str, p: f64) -> Result<(), OracleError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(OracleError::InvalidShape {
            detail: format!("{} must lie in [0, 1], got {}", name, p),
        });
    }
    Ok(())
}

fn check_size(name: &str, n: usize) -> Result<(), OracleError> {
    if n > MAX_GENERATED_SIDE {
        return Err(OracleError::InvalidShape {
            detail: format!("{} must be at most {}, got {}", name, MAX_GENERATED_SIDE, n),
        });
    }
    Ok(())
}

fn side_names(prefix: &str, n: usize) -> Vec<String> {
    let width = if n > 9 {
        let mut digits = 0;
        let mut v = n;
        while v > 0 {
            digits += 1;
            v /= 10;
        }
        digits
    } else {
        1
    };
    (1..=n)
        .map(|i| format!("{}{:0width$}", prefix, i, width = width))
        .collect()
}

/// Draw preference lists for both sides. Each list is a uniformly random
/// permutation thinned by independent keep-coins; a symmetry coin per pair
/// then copies the proposer-side verdict onto the receiver side. The RNG
/// stream layout is fixed (permutations, then acceptance coins, then
/// symmetry coins) so every parameter set consumes the same draws.
fn draw_prefs<R: Rng>(
    rng: &mut R,
    left: &[String],
    right: &[String],
    truncation: f64,
    symmetry: f64,
) -> alloc::collections::BTreeMap<String, Vec<String>> {
    use rand::seq::SliceRandom;

    let keep = 1.0 - truncation;
    let mut perms_left = Vec::with_capacity(left.len());
    for _ in left {
        let mut perm = right.to_vec();
        perm.shuffle(rng);
        perms_left.push(perm);
    }
    let mut perms_right = Vec::with_capacity(right.len());
    for _ in right {
        let mut perm = left.to_vec();
        perm.shuffle(rng);
        perms_right.push(perm);
    }
    let mut accept_left = vec![vec![false; right.len()]; left.len()];
    for row in accept_left.iter_mut() {
        for flag in row.iter_mut() {
            *flag = rng.gen_bool(keep);
        }
    }
    let mut accept_right = vec![vec![false; left.len()]; right.len()];
    for row in accept_right.iter_mut() {
        for flag in row.iter_mut() {
            *flag = rng.gen_bool(keep);
        }
    }
    for (i, _) in left.iter().enumerate() {
        for (j, _) in right.iter().enumerate() {
            if rng.gen_bool(symmetry) {
                accept_right[j][i] = accept_left[i][j];
            }
        }
    }

    let right_ix: alloc::collections::BTreeMap<&str, usize> = right
        .iter()
        .enumerate()
        .map(|(j, name)| (name.as_str(), j))
        .collect();
    let left_ix: alloc::collections::BTreeMap<&str, usize> = left
        .iter()
        .enumerate()
        .map(|(i, name)| (name.as_str(), i))
        .collect();

    let mut prefs = alloc::collections::BTreeMap::new();
    for (i, name) in left.iter().enumerate() {
        let list: Vec<String> = perms_left[i]
            .iter()
            .filter(|b| accept_left[i][right_ix[b.as_str()]])
            .cloned()
            .collect();
        prefs.insert(name.clone(), list);
    }
    for (j, name) in right.iter().enumerate() {
        let list: Vec<String> = perms_right[j]
            .iter()
            .filter(|b| accept_right[j][left_ix[b.as_str()]])
            .cloned()
            .collect();
        prefs.insert(name.clone(), list);
    }
    prefs
}

pub fn random_1to1<R: Rng>(
    rng: &mut R,
    shape: &OneToOneShape,
) -> Result<OneToOneInstance, OracleError> {
    check_probability("truncation", shape.truncation)?;
    check_probability("symmetry", shape.symmetry)?;
    check_size("proposers", shape.proposers)?;
    check_size("receivers", shape.receivers)?;
    let proposers = side_names("m", shape.proposers);
    let receivers = side_names("w", shape.receivers);
    let prefs = draw_prefs(rng, &proposers, &receivers, shape.truncation, shape.symmetry);
    Ok(OneToOneInstance::new(proposers, receivers, prefs)
        .expect("generated names are unique and entries resolve"))
}

pub fn random_many<R: Rng>(
    rng: &mut R,
    shape: &ManyToOneShape,
) -> Result<ManyToOneInstance, OracleError> {
    check_probability("truncation", shape.truncation)?;
    check_probability("symmetry", shape.symmetry)?;
    check_size("students", shape.students)?;
    check_size("colleges", shape.colleges)?;
    if shape.max_quota < 1 {
        return Err(OracleError::InvalidShape {
            detail: format!("max_quota must be at least 1, got {}", shape.max_quota),
        });
    }
    let students = side_names("s", shape.students);
    let colleges = side_names("c", shape.colleges);
    let mut quotas = alloc::collections::BTreeMap::new();
    for name in &colleges {
        quotas.insert(name.clone(), rng.gen_range(1..=shape.max_quota));
    }
    let prefs = draw_prefs(rng, &students, &colleges, shape.truncation, shape.symmetry);
    Ok(ManyToOneInstance::new(students, colleges, prefs, quotas)
        .expect("generated names are unique and entries resolve"))
}

pub fn seeded_1to1(seed: u64, shape: &OneToOneShape) -> Result<OneToOneInstance, OracleError> {
    random_1to1(&mut ChaCha8Rng::seed_from_u64(seed), shape)
}

pub fn seeded_many(seed: u64, shape: &ManyToOneShape) -> Result<ManyToOneInstance, OracleError> {
    random_many(&mut ChaCha8Rng::seed_from_u64(seed), shape)
}

/// Deterministic instance from a seed and shape parameters.
pub fn random_instance(seed: u64, shape: &InstanceShape) -> Result<MarketInstance, OracleError> {
    match shape {
        InstanceShape::OneToOne(s) => Ok(MarketInstance::OneToOne(seeded_1to1(seed, s)?)),
        InstanceShape::ManyToOne(s) => Ok(MarketInstance::ManyToOne(seeded_many(seed, s)?)),
    }
}

/// Sweep helper: sizes are drawn uniformly in `1..=max` from the same seeded
/// stream that then fills in the preferences.
pub fn seeded_1to1_bounded(
    seed: u64,
    max_proposers: usize,
    max_receivers: usize,
    truncation: f64,
    symmetry: f64,
) -> Result<OneToOneInstance, OracleError> {
    if max_proposers < 1 || max_receivers < 1 {
        return Err(OracleError::InvalidShape {
            detail: String::from("size bounds must be at least 1"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let proposers = rng.gen_range(1..=max_proposers);
    let receivers = rng.gen_range(1..=max_receivers);
    random_1to1(
        &mut rng,
        &OneToOneShape {
            proposers,
            receivers,
            truncation,
            symmetry,
        },
    )
}

pub fn seeded_many_bounded(
    seed: u64,
    max_students: usize,
    max_colleges: usize,
    max_quota: u32,
    truncation: f64,
    symmetry: f64,
) -> Result<ManyToOneInstance, OracleError> {
    if max_students < 1 || max_colleges < 1 {
        return Err(OracleError::InvalidShape {
            detail: String::from("size bounds must be at least 1"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let students = rng.gen_range(1..=max_students);
    let colleges = rng.gen_range(1..=max_colleges);
    random_many(
        &mut rng,
        &ManyToOneShape {
            students,
            colleges,
            max_quota,
            truncation,
            symmetry,
        },
    )
}

/// Agents of the instance left unmatched by `mu`, both sides.
pub fn unmatched_1to1(mu: &OneToOneMatching, inst: &OneToOneInstance) -> BTreeSet<AgentId> {
    inst.agents()
        .filter(|a| mu.partner(a).is_none())
        .cloned()
        .collect()
}

/// Students of the instance left unmatched by `mu`.
pub fn unmatched_many(mu: &ManyToOneMatching, inst: &ManyToOneInstance) -> BTreeSet<AgentId> {
    inst.students()
        .iter()
        .filter(|s| mu.college(s).is_none())
        .cloned()
        .collect()
}
