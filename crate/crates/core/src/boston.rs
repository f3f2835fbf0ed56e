//! The Boston (immediate-acceptance) mechanism, the tier-rebuilt economy
//! whose stable matchings mirror its equilibrium outcomes, and the
//! sincere-student invariance check.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::model::{
    AgentId, ManyToOneInstance, ManyToOneMatching, MarketInstance, MarketMatching, Side,
};
use crate::oracle::{enumerate_stable_many, OracleCaps};
use crate::theorems::{Counterexample, Theorem, TheoremError, TheoremReport, Verdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BostonError {
    UnknownStudent { name: String },
    UnknownCollege { name: String },
    UnknownSubmitter { name: String },
    DuplicateSubmissionEntry { student: String, college: String },
}

impl fmt::Display for BostonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BostonError::UnknownStudent { name } => write!(f, "unknown student: {}", name),
            BostonError::UnknownCollege { name } => write!(f, "unknown college: {}", name),
            BostonError::UnknownSubmitter { name } => {
                write!(f, "submission from unknown student: {}", name)
            }
            BostonError::DuplicateSubmissionEntry { student, college } => {
                write!(f, "student {} lists college {} twice", student, college)
            }
        }
    }
}

/// An exact split of the student set into sincere players (who always report
/// truthfully) and sophisticated ones (who may report anything).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SincerityPartition {
    sincere: BTreeSet<AgentId>,
    sophisticated: BTreeSet<AgentId>,
}

impl SincerityPartition {
    pub fn new(
        inst: &ManyToOneInstance,
        sincere: impl IntoIterator<Item = AgentId>,
    ) -> Result<Self, BostonError> {
        let sincere: BTreeSet<AgentId> = sincere.into_iter().collect();
        for s in &sincere {
            if s.side() != Side::Proposer || !inst.contains(s) {
                return Err(BostonError::UnknownStudent {
                    name: s.name().to_string(),
                });
            }
        }
        let sophisticated = inst.students().difference(&sincere).cloned().collect();
        Ok(SincerityPartition {
            sincere,
            sophisticated,
        })
    }

    pub fn from_names(inst: &ManyToOneInstance, names: &[&str]) -> Result<Self, BostonError> {
        let mut sincere = BTreeSet::new();
        for name in names {
            let agent = inst
                .agent_by_name(name)
                .cloned()
                .ok_or_else(|| BostonError::UnknownStudent {
                    name: name.to_string(),
                })?;
            sincere.insert(agent);
        }
        SincerityPartition::new(inst, sincere)
    }

    pub fn all_sophisticated(inst: &ManyToOneInstance) -> Self {
        SincerityPartition {
            sincere: BTreeSet::new(),
            sophisticated: inst.students().clone(),
        }
    }

    pub fn sincere(&self) -> &BTreeSet<AgentId> {
        &self.sincere
    }

    pub fn sophisticated(&self) -> &BTreeSet<AgentId> {
        &self.sophisticated
    }

    pub fn is_sincere(&self, a: &AgentId) -> bool {
        self.sincere.contains(a)
    }
}

/// Truthful submission profile: every student submits its real list.
pub fn truthful_submissions(inst: &ManyToOneInstance) -> BTreeMap<AgentId, Vec<AgentId>> {
    inst.students()
        .iter()
        .map(|s| {
            let list = inst.preference(s).expect("validated instance");
            (s.clone(), list.ranked().to_vec())
        })
        .collect()
}

/// Immediate acceptance: in round k every still-unassigned student applies
/// to the k-th entry of its submitted list (full colleges included; the
/// round is simply wasted), and each college with remaining capacity
/// permanently admits its best acceptable applicants of the round.
pub fn boston_assign(
    inst: &ManyToOneInstance,
    submitted: &BTreeMap<AgentId, Vec<AgentId>>,
) -> Result<ManyToOneMatching, BostonError> {
    for (student, list) in submitted {
        if student.side() != Side::Proposer || !inst.contains(student) {
            return Err(BostonError::UnknownSubmitter {
                name: student.name().to_string(),
            });
        }
        let mut seen = BTreeSet::new();
        for college in list {
            if college.side() != Side::Receiver || !inst.contains(college) {
                return Err(BostonError::UnknownCollege {
                    name: college.name().to_string(),
                });
            }
            if !seen.insert(college.clone()) {
                return Err(BostonError::DuplicateSubmissionEntry {
                    student: student.name().to_string(),
                    college: college.name().to_string(),
                });
            }
        }
    }

    let empty: Vec<AgentId> = Vec::new();
    let list_of = |s: &AgentId| submitted.get(s).unwrap_or(&empty);
    let max_rounds = inst
        .students()
        .iter()
        .map(|s| list_of(s).len())
        .max()
        .unwrap_or(0);

    let mut remaining: BTreeMap<&AgentId, usize> = inst
        .colleges()
        .iter()
        .map(|c| (c, inst.quota(c).expect("validated instance") as usize))
        .collect();
    let mut assigned: BTreeMap<AgentId, AgentId> = BTreeMap::new();

    for round in 0..max_rounds {
        let mut applications: BTreeMap<&AgentId, Vec<&AgentId>> = BTreeMap::new();
        for s in inst.students() {
            if assigned.contains_key(s) {
                continue;
            }
            if let Some(college) = list_of(s).get(round) {
                let college = inst
                    .colleges()
                    .get(college)
                    .expect("submissions were validated");
                applications.entry(college).or_default().push(s);
            }
        }
        for (college, mut applicants) in applications {
            let slots = remaining.get_mut(college).expect("all colleges tracked");
            if *slots == 0 {
                continue;
            }
            let list = inst.preference(college).expect("validated instance");
            applicants.retain(|s| list.likes(s));
            applicants.sort_by_key(|s| list.rank_of(s).expect("retained applicants are liked"));
            for s in applicants.into_iter().take(*slots) {
                assigned.insert(s.clone(), college.clone());
            }
            let taken = assigned.values().filter(|c| *c == college).count();
            *slots = (inst.quota(college).expect("validated instance") as usize) - taken;
        }
    }

    Ok(ManyToOneMatching::from_assignment(assigned).expect("each student assigned at most once"))
}

/// The many-to-one economy with college lists rebuilt from sincerity tiers,
/// plus the tier index of every (college, student) pair for audit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TierEconomy {
    economy: ManyToOneInstance,
    tiers: BTreeMap<(AgentId, AgentId), u32>,
}

impl TierEconomy {
    pub fn economy(&self) -> &ManyToOneInstance {
        &self.economy
    }

    /// Tier of `student` in `college`'s rebuilt list, 1 = best. `None` when
    /// the college finds the student unacceptable.
    pub fn tier(&self, college: &AgentId, student: &AgentId) -> Option<u32> {
        self.tiers.get(&(college.clone(), student.clone())).copied()
    }

    pub fn tiers(&self) -> &BTreeMap<(AgentId, AgentId), u32> {
        &self.tiers
    }
}

/// Rebuild college preferences by tier: sophisticated students and sincere
/// first-choosers share tier 1, a sincere student ranking the college k-th
/// lands in tier k, and sincere students who like the college but do not
/// rank it land after every real tier. Within a tier the college's original
/// order is kept; acceptability never changes, so the tiers only reorder
/// each college's existing list.
pub fn build_tier_economy(
    inst: &ManyToOneInstance,
    partition: &SincerityPartition,
) -> TierEconomy {
    let unranked_tier = inst.colleges().len() as u32 + 1;
    let mut tiers = BTreeMap::new();
    let mut preferences: BTreeMap<String, Vec<String>> = BTreeMap::new();

    for s in inst.students() {
        let list = inst.preference(s).expect("validated instance");
        preferences.insert(
            s.name().to_string(),
            list.ranked().iter().map(|c| c.name().to_string()).collect(),
        );
    }
    for c in inst.colleges() {
        let list = inst.preference(c).expect("validated instance");
        let mut entries: Vec<(u32, usize, &AgentId)> = Vec::with_capacity(list.len());
        for (position, s) in list.ranked().iter().enumerate() {
            let tier = if partition.sophisticated().contains(s) {
                1
            } else {
                match inst.preference(s).expect("validated instance").rank_of(c) {
                    Some(k) => k as u32 + 1,
                    None => unranked_tier,
                }
            };
            tiers.insert((c.clone(), s.clone()), tier);
            entries.push((tier, position, s));
        }
        entries.sort();
        preferences.insert(
            c.name().to_string(),
            entries.iter().map(|(_, _, s)| s.name().to_string()).collect(),
        );
    }

    let economy = ManyToOneInstance::new(
        inst.students().iter().map(|s| s.name().to_string()).collect(),
        inst.colleges().iter().map(|c| c.name().to_string()).collect(),
        preferences,
        inst.quotas()
            .iter()
            .map(|(c, q)| (c.name().to_string(), *q))
            .collect(),
    )
    .expect("rebuilt from a validated instance");
    TierEconomy { economy, tiers }
}

/// Every sincere student must receive the same college (or stay unmatched)
/// in every stable matching of the tier economy.
pub fn check_sincere_invariance(
    inst: &ManyToOneInstance,
    partition: &SincerityPartition,
    caps: &OracleCaps,
) -> Result<TheoremReport, TheoremError> {
    let theorem = Theorem::PathakSonmezInvariance;
    let tier = build_tier_economy(inst, partition);
    let digest = tier.economy().digest();
    let stable = enumerate_stable_many(tier.economy(), caps.max_assignments_many)?;

    let fail = |detail: String, matchings: Vec<(&str, &ManyToOneMatching)>| TheoremReport {
        theorem,
        instance_digest: digest,
        verdict: Verdict::Counterexample(alloc::boxed::Box::new(Counterexample {
            detail,
            instance: MarketInstance::ManyToOne(tier.economy().clone()),
            matchings: matchings
                .into_iter()
                .map(|(label, mu)| (String::from(label), MarketMatching::ManyToOne(mu.clone())))
                .collect(),
            agents: partition.sincere().iter().cloned().collect(),
        })),
    };

    let Some(first) = stable.first() else {
        return Ok(fail(
            String::from("no stable matching was enumerated for the tier economy"),
            Vec::new(),
        ));
    };
    for mu in &stable[1..] {
        for s in partition.sincere() {
            if mu.college(s) != first.college(s) {
                return Ok(fail(
                    format!(
                        "sincere student {} is assigned differently across stable matchings",
                        s
                    ),
                    alloc::vec![("mu", first), ("mu_prime", mu)],
                ));
            }
        }
    }
    Ok(TheoremReport {
        theorem,
        instance_digest: digest,
        verdict: Verdict::Pass,
    })
}
