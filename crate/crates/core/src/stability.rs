//! Individual rationality, blocking-pair detection, and stability predicates
//! for both market forms.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::model::{
    AgentId, ManyToOneInstance, ManyToOneMatching, ModelError, OneToOneInstance, OneToOneMatching,
};

/// Why a pair blocks. The first variant is the only one possible in the
/// one-to-one form; the others record which clause of the college-side
/// condition fired, so counterexample reports are self-explanatory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BlockReason {
    BothPreferEachOther,
    CollegePrefersOverWorst,
    CollegeHasSlackAndLikes,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BlockingPair {
    pub proposer: AgentId,
    pub receiver: AgentId,
    pub reason: BlockReason,
}

fn ensure_compat_1to1(mu: &OneToOneMatching, inst: &OneToOneInstance) -> Result<(), ModelError> {
    for (p, r) in mu.pairs() {
        for a in [p, r] {
            if !inst.contains(a) {
                return Err(ModelError::UnknownAgent {
                    name: a.name().to_string(),
                });
            }
        }
    }
    Ok(())
}

fn ensure_compat_many(mu: &ManyToOneMatching, inst: &ManyToOneInstance) -> Result<(), ModelError> {
    for (s, c) in mu.assignment() {
        for a in [s, c] {
            if !inst.contains(a) {
                return Err(ModelError::UnknownAgent {
                    name: a.name().to_string(),
                });
            }
        }
    }
    Ok(())
}

/// True iff every matched agent likes its partner.
pub fn is_individually_rational_1to1(
    mu: &OneToOneMatching,
    inst: &OneToOneInstance,
) -> Result<bool, ModelError> {
    ensure_compat_1to1(mu, inst)?;
    for (p, r) in mu.pairs() {
        if !inst.likes(p, r)? || !inst.likes(r, p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All pairs where both sides strictly prefer each other to their current
/// assignment, in lexicographic (proposer, receiver) order.
pub fn blocking_pairs_1to1(
    mu: &OneToOneMatching,
    inst: &OneToOneInstance,
) -> Result<Vec<BlockingPair>, ModelError> {
    ensure_compat_1to1(mu, inst)?;
    let mut out = Vec::new();
    for m in inst.proposers() {
        for w in inst.receivers() {
            if inst.prefers(m, Some(w), mu.partner(m))?
                && inst.prefers(w, Some(m), mu.partner(w))?
            {
                out.push(BlockingPair {
                    proposer: m.clone(),
                    receiver: w.clone(),
                    reason: BlockReason::BothPreferEachOther,
                });
            }
        }
    }
    Ok(out)
}

pub fn is_stable_1to1(mu: &OneToOneMatching, inst: &OneToOneInstance) -> Result<bool, ModelError> {
    Ok(is_individually_rational_1to1(mu, inst)? && blocking_pairs_1to1(mu, inst)?.is_empty())
}

/// True iff every matched student likes its college, every college likes all
/// of its assigned students, and no college exceeds its quota.
pub fn is_individually_rational_many(
    mu: &ManyToOneMatching,
    inst: &ManyToOneInstance,
) -> Result<bool, ModelError> {
    ensure_compat_many(mu, inst)?;
    for (s, c) in mu.assignment() {
        if !inst.likes(s, c)? || !inst.likes(c, s)? {
            return Ok(false);
        }
    }
    for (c, roster) in mu.rosters() {
        let quota = inst.quota(&c).ok_or_else(|| ModelError::UnknownAgent {
            name: c.name().to_string(),
        })?;
        if roster.len() > quota as usize {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Student–college pairs that block: the student strictly prefers the
/// college, and the college either prefers the student to someone it holds
/// or has slack and likes the student.
pub fn blocking_pairs_many(
    mu: &ManyToOneMatching,
    inst: &ManyToOneInstance,
) -> Result<Vec<BlockingPair>, ModelError> {
    ensure_compat_many(mu, inst)?;
    let rosters = mu.rosters();
    let empty = alloc::collections::BTreeSet::new();
    let mut out = Vec::new();
    for s in inst.students() {
        for c in inst.colleges() {
            if !inst.prefers(s, Some(c), mu.college(s))? {
                continue;
            }
            let roster = rosters.get(c).unwrap_or(&empty);
            let quota = inst.quota(c).ok_or_else(|| ModelError::UnknownAgent {
                name: c.name().to_string(),
            })?;
            let reason = if roster.len() < quota as usize && inst.likes(c, s)? {
                Some(BlockReason::CollegeHasSlackAndLikes)
            } else {
                let mut prefers_over_member = false;
                for member in roster {
                    if inst.prefers(c, Some(s), Some(member))? {
                        prefers_over_member = true;
                        break;
                    }
                }
                prefers_over_member.then_some(BlockReason::CollegePrefersOverWorst)
            };
            if let Some(reason) = reason {
                out.push(BlockingPair {
                    proposer: s.clone(),
                    receiver: c.clone(),
                    reason,
                });
            }
        }
    }
    Ok(out)
}

pub fn is_stable_many(
    mu: &ManyToOneMatching,
    inst: &ManyToOneInstance,
) -> Result<bool, ModelError> {
    Ok(is_individually_rational_many(mu, inst)? && blocking_pairs_many(mu, inst)?.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ManyToOneInstance, OneToOneInstance, OneToOneMatching};

    fn mutual_top_pair() -> OneToOneInstance {
        OneToOneInstance::from_lists(&[("m1", &["w1"])], &[("w1", &["m1"])]).unwrap()
    }

    fn two_by_two_cyclic() -> OneToOneInstance {
        OneToOneInstance::from_lists(
            &[("m1", &["w1", "w2"]), ("m2", &["w2", "w1"])],
            &[("w1", &["m2", "m1"]), ("w2", &["m1", "m2"])],
        )
        .unwrap()
    }

    fn three_students_one_college() -> ManyToOneInstance {
        ManyToOneInstance::from_lists(
            &[("s1", &["c1"]), ("s2", &["c1"]), ("s3", &["c1"])],
            &[("c1", 2, &["s1", "s2", "s3"])],
        )
        .unwrap()
    }

    #[test]
    fn empty_matching_is_individually_rational() {
        let inst = mutual_top_pair();
        assert!(is_individually_rational_1to1(&OneToOneMatching::empty(), &inst).unwrap());
    }

    #[test]
    fn one_sided_liking_is_not_individually_rational() {
        let inst = OneToOneInstance::from_lists(&[("m1", &["w1"])], &[("w1", &[])]).unwrap();
        let mu = OneToOneMatching::from_names(&inst, &[("m1", "w1")]).unwrap();
        assert!(!is_individually_rational_1to1(&mu, &inst).unwrap());
    }

    #[test]
    fn mutual_liking_is_individually_rational() {
        let inst = mutual_top_pair();
        let mu = OneToOneMatching::from_names(&inst, &[("m1", "w1")]).unwrap();
        assert!(is_individually_rational_1to1(&mu, &inst).unwrap());
    }

    #[test]
    fn unmatched_mutual_fans_block() {
        let inst = mutual_top_pair();
        let pairs = blocking_pairs_1to1(&OneToOneMatching::empty(), &inst).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].proposer.name(), "m1");
        assert_eq!(pairs[0].receiver.name(), "w1");
        assert_eq!(pairs[0].reason, BlockReason::BothPreferEachOther);
    }

    #[test]
    fn top_choices_do_not_block() {
        let inst = mutual_top_pair();
        let mu = OneToOneMatching::from_names(&inst, &[("m1", "w1")]).unwrap();
        assert!(blocking_pairs_1to1(&mu, &inst).unwrap().is_empty());
        assert!(is_stable_1to1(&mu, &inst).unwrap());
        assert!(!is_stable_1to1(&OneToOneMatching::empty(), &inst).unwrap());
    }

    #[test]
    fn proposer_optimal_matching_of_cyclic_market_has_no_blocks() {
        let inst = two_by_two_cyclic();
        let mu = OneToOneMatching::from_names(&inst, &[("m1", "w1"), ("m2", "w2")]).unwrap();
        assert!(blocking_pairs_1to1(&mu, &inst).unwrap().is_empty());
        // the receiver-optimal matching is the other stable one
        let nu = OneToOneMatching::from_names(&inst, &[("m1", "w2"), ("m2", "w1")]).unwrap();
        assert!(is_stable_1to1(&nu, &inst).unwrap());
    }

    #[test]
    fn blocking_output_is_sorted_and_duplicate_free() {
        let inst = two_by_two_cyclic();
        let pairs = blocking_pairs_1to1(&OneToOneMatching::empty(), &inst).unwrap();
        let mut sorted = pairs.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(pairs, sorted);
    }

    #[test]
    fn many_ir_examples() {
        let inst = three_students_one_college();
        assert!(is_individually_rational_many(&ManyToOneMatching::empty(), &inst).unwrap());

        // capacity breach
        let mu = ManyToOneMatching::from_names(
            &inst,
            &[("s1", "c1"), ("s2", "c1"), ("s3", "c1")],
        )
        .unwrap();
        assert!(!is_individually_rational_many(&mu, &inst).unwrap());

        // college does not like the student
        let inst2 =
            ManyToOneInstance::from_lists(&[("s1", &["c1"])], &[("c1", 1, &[])]).unwrap();
        let mu2 = ManyToOneMatching::from_names(&inst2, &[("s1", "c1")]).unwrap();
        assert!(!is_individually_rational_many(&mu2, &inst2).unwrap());
    }

    #[test]
    fn slack_and_liking_blocks() {
        let inst = ManyToOneInstance::from_lists(&[("s1", &["c1"])], &[("c1", 1, &["s1"])])
            .unwrap();
        let pairs = blocking_pairs_many(&ManyToOneMatching::empty(), &inst).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].reason, BlockReason::CollegeHasSlackAndLikes);
    }

    #[test]
    fn preferred_student_displacing_a_worse_one_blocks() {
        let inst = ManyToOneInstance::from_lists(
            &[("s1", &["c1"]), ("s2", &["c1"])],
            &[("c1", 1, &["s1", "s2"])],
        )
        .unwrap();
        let mu = ManyToOneMatching::from_names(&inst, &[("s2", "c1")]).unwrap();
        let pairs = blocking_pairs_many(&mu, &inst).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].proposer.name(), "s1");
        assert_eq!(pairs[0].reason, BlockReason::CollegePrefersOverWorst);
    }

    #[test]
    fn full_college_with_best_students_is_stable() {
        let inst = three_students_one_college();
        let mu = ManyToOneMatching::from_names(&inst, &[("s1", "c1"), ("s2", "c1")]).unwrap();
        assert!(blocking_pairs_many(&mu, &inst).unwrap().is_empty());
        assert!(is_stable_many(&mu, &inst).unwrap());

        let nu = ManyToOneMatching::from_names(&inst, &[("s1", "c1"), ("s3", "c1")]).unwrap();
        assert!(!is_stable_many(&nu, &inst).unwrap());
        let blocks = blocking_pairs_many(&nu, &inst).unwrap();
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].proposer.name(), "s2");
    }

    #[test]
    fn capacity_violation_is_never_stable() {
        let inst = three_students_one_college();
        let mu = ManyToOneMatching::from_names(
            &inst,
            &[("s1", "c1"), ("s2", "c1"), ("s3", "c1")],
        )
        .unwrap();
        assert!(!is_stable_many(&mu, &inst).unwrap());
    }

    #[test]
    fn foreign_matching_is_a_validation_error() {
        let inst = mutual_top_pair();
        let other = OneToOneInstance::from_lists(&[("x1", &["y1"])], &[("y1", &["x1"])]).unwrap();
        let mu = OneToOneMatching::from_names(&other, &[("x1", "y1")]).unwrap();
        assert!(is_stable_1to1(&mu, &inst).is_err());
    }
}
