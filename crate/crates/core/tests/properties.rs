//! Cross-module invariants checked on seeded random instances. The
//! enumeration oracle is the ground truth; everything else must agree
//! with it.

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prefcycles_core::boston::{
    boston_assign, build_tier_economy, truthful_submissions, SincerityPartition,
};
use prefcycles_core::cycles::{
    dominance_1to1, extract_cycle_pair, is_preference_cycle, join, meet, partition_disagreement,
};
use prefcycles_core::da::{da_1to1, da_many};
use prefcycles_core::oracle::{
    enumerate_matchings_1to1, enumerate_matchings_many, enumerate_stable_1to1,
    enumerate_stable_many, seeded_1to1_bounded, seeded_many_bounded,
};
use prefcycles_core::stability::{
    blocking_pairs_1to1, blocking_pairs_many, is_individually_rational_1to1, is_stable_1to1,
    is_stable_many,
};
use prefcycles_core::{
    AgentId, ManyToOneInstance, ManyToOneMatching, OneToOneInstance, OneToOneMatching, Side,
};

fn bounded_1to1(seed: u64) -> OneToOneInstance {
    seeded_1to1_bounded(seed, 7, 7, 0.3, 0.25).unwrap()
}

fn small_1to1(seed: u64) -> OneToOneInstance {
    seeded_1to1_bounded(seed, 4, 4, 0.3, 0.25).unwrap()
}

fn bounded_many(seed: u64) -> ManyToOneInstance {
    seeded_many_bounded(seed, 6, 3, 3, 0.3, 0.25).unwrap()
}

fn seeded_partition(inst: &ManyToOneInstance, seed: u64) -> SincerityPartition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51ce_ce11);
    let sincere: BTreeSet<AgentId> = inst
        .students()
        .iter()
        .filter(|_| rng.gen_bool(0.5))
        .cloned()
        .collect();
    SincerityPartition::new(inst, sincere).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn da_is_stable_and_its_trace_replays(seed in any::<u64>()) {
        let inst = bounded_1to1(seed);
        for side in [Side::Proposer, Side::Receiver] {
            let (mu, trace) = da_1to1(&inst, side);
            prop_assert!(is_stable_1to1(&mu, &inst).unwrap());
            prop_assert_eq!(trace.replay_1to1().unwrap(), mu);
        }

        let many = ManyToOneInstance::from_one_to_one(&inst);
        let (nu, trace) = da_many(&many);
        prop_assert!(is_stable_many(&nu, &many).unwrap());
        prop_assert_eq!(trace.replay_many().unwrap(), nu.clone());

        // unit-quota embedding agrees with the one-to-one algorithm
        let (mu, _) = da_1to1(&inst, Side::Proposer);
        prop_assert_eq!(ManyToOneMatching::from_one_to_one(&mu), nu);
    }

    #[test]
    fn da_is_proposer_optimal_and_receiver_pessimal(seed in any::<u64>()) {
        let inst = seeded_1to1_bounded(seed, 5, 5, 0.3, 0.25).unwrap();
        let stable = enumerate_stable_1to1(&inst, 8).unwrap();
        let (best, _) = da_1to1(&inst, Side::Proposer);
        prop_assert!(stable.contains(&best));
        for mu in &stable {
            for m in inst.proposers() {
                prop_assert!(!inst.prefers(m, mu.partner(m), best.partner(m)).unwrap());
            }
            for w in inst.receivers() {
                prop_assert!(!inst.prefers(w, best.partner(w), mu.partner(w)).unwrap());
            }
        }
    }

    #[test]
    fn stability_is_ir_plus_no_blocking(seed in any::<u64>()) {
        let inst = small_1to1(seed);
        for mu in enumerate_matchings_1to1(&inst, 8).unwrap() {
            let ir = is_individually_rational_1to1(&mu, &inst).unwrap();
            let blocks = blocking_pairs_1to1(&mu, &inst).unwrap();
            prop_assert_eq!(is_stable_1to1(&mu, &inst).unwrap(), ir && blocks.is_empty());
            let mut sorted = blocks.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(blocks, sorted);
        }
    }

    #[test]
    fn unit_quota_embedding_preserves_blocking(seed in any::<u64>()) {
        let inst = small_1to1(seed);
        let many = ManyToOneInstance::from_one_to_one(&inst);
        for mu in enumerate_matchings_1to1(&inst, 8).unwrap() {
            let as_many = ManyToOneMatching::from_one_to_one(&mu);
            prop_assert_eq!(
                is_stable_1to1(&mu, &inst).unwrap(),
                is_stable_many(&as_many, &many).unwrap()
            );
            let pairs_one: Vec<(AgentId, AgentId)> = blocking_pairs_1to1(&mu, &inst)
                .unwrap()
                .into_iter()
                .map(|bp| (bp.proposer, bp.receiver))
                .collect();
            let pairs_many: Vec<(AgentId, AgentId)> = blocking_pairs_many(&as_many, &many)
                .unwrap()
                .into_iter()
                .map(|bp| (bp.proposer, bp.receiver))
                .collect();
            prop_assert_eq!(pairs_one, pairs_many);
        }
    }

    #[test]
    fn oracle_fast_filter_agrees_with_public_predicates(seed in any::<u64>()) {
        let inst = small_1to1(seed);
        let fast = enumerate_stable_1to1(&inst, 8).unwrap();
        let slow: Vec<OneToOneMatching> = enumerate_matchings_1to1(&inst, 8)
            .unwrap()
            .filter(|mu| is_stable_1to1(mu, &inst).unwrap())
            .collect();
        prop_assert_eq!(fast, slow);

        let inst = seeded_many_bounded(seed, 4, 2, 2, 0.35, 0.25).unwrap();
        let fast = enumerate_stable_many(&inst, 1_000_000).unwrap();
        let slow: Vec<ManyToOneMatching> = enumerate_matchings_many(&inst, 1_000_000)
            .unwrap()
            .filter(|mu| is_stable_many(mu, &inst).unwrap())
            .collect();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn join_meet_equal_pointwise_extremes_and_stay_stable(seed in any::<u64>()) {
        let inst = small_1to1(seed);
        let stable = enumerate_stable_1to1(&inst, 8).unwrap();
        for a in &stable {
            for b in &stable {
                let joined = join(a, b, &inst).unwrap();
                let met = meet(a, b, &inst).unwrap();
                prop_assert!(stable.contains(&joined));
                prop_assert!(stable.contains(&met));

                let mut best_pairs = Vec::new();
                let mut worst_pairs = Vec::new();
                for m in inst.proposers() {
                    let x = a.partner(m);
                    let y = b.partner(m);
                    let (best, worst) = if inst.prefers(m, x, y).unwrap() {
                        (x, y)
                    } else {
                        (y, x)
                    };
                    if let Some(w) = best {
                        best_pairs.push((m.clone(), w.clone()));
                    }
                    if let Some(w) = worst {
                        worst_pairs.push((m.clone(), w.clone()));
                    }
                }
                prop_assert_eq!(&joined, &OneToOneMatching::from_pairs(best_pairs).unwrap());
                prop_assert_eq!(&met, &OneToOneMatching::from_pairs(worst_pairs).unwrap());
            }
        }
    }

    #[test]
    fn extracted_cycles_validate_dominate_and_dualize(seed in any::<u64>()) {
        let inst = small_1to1(seed);
        let stable = enumerate_stable_1to1(&inst, 8).unwrap();
        for mu in &stable {
            for nu in &stable {
                for m in inst.proposers() {
                    if !inst.prefers(m, nu.partner(m), mu.partner(m)).unwrap() {
                        continue;
                    }
                    let cycle = extract_cycle_pair(mu, nu, m, &inst).unwrap();
                    prop_assert!(is_preference_cycle(cycle.agents(), &inst));
                    prop_assert!(cycle.contains(m));
                    prop_assert!(dominance_1to1(&cycle, mu, Side::Proposer).dominated);
                    prop_assert!(dominance_1to1(&cycle, nu, Side::Proposer).dominating);
                    // proposer-side dominance is receiver-side dominance reversed
                    for matching in [mu, nu] {
                        let p = dominance_1to1(&cycle, matching, Side::Proposer);
                        let r = dominance_1to1(&cycle, matching, Side::Receiver);
                        prop_assert_eq!(p.dominating, r.dominated);
                        prop_assert_eq!(p.dominated, r.dominating);
                    }
                }
            }
        }
    }

    #[test]
    fn partition_is_a_true_partition_of_the_disagreement(seed in any::<u64>()) {
        let inst = small_1to1(seed);
        let stable = enumerate_stable_1to1(&inst, 8).unwrap();
        for mu in &stable {
            for nu in &stable {
                let cycles = partition_disagreement(mu, nu, &inst).unwrap();
                let covered: BTreeSet<AgentId> = cycles
                    .iter()
                    .flat_map(|c| c.agents().iter().cloned())
                    .collect();
                // disjointness: no agent counted twice
                prop_assert_eq!(
                    covered.len(),
                    cycles.iter().map(|c| c.len()).sum::<usize>()
                );
                let expected: BTreeSet<AgentId> = inst
                    .agents()
                    .filter(|a| mu.partner(a) != nu.partner(a))
                    .cloned()
                    .collect();
                prop_assert_eq!(covered, expected);
                for cycle in &cycles {
                    let forward = dominance_1to1(cycle, mu, Side::Proposer).dominated
                        && dominance_1to1(cycle, nu, Side::Proposer).dominating;
                    let reverse = dominance_1to1(cycle, nu, Side::Proposer).dominated
                        && dominance_1to1(cycle, mu, Side::Proposer).dominating;
                    prop_assert!(forward || reverse);
                }
            }
        }
    }

    #[test]
    fn many_da_lands_in_the_enumerated_stable_set(seed in any::<u64>()) {
        let inst = bounded_many(seed);
        let stable = enumerate_stable_many(&inst, 1_000_000).unwrap();
        let (mu, _) = da_many(&inst);
        prop_assert!(stable.contains(&mu));
    }

    #[test]
    fn boston_and_tier_invariants(seed in any::<u64>()) {
        let inst = bounded_many(seed);

        // truthful immediate acceptance never assigns off-list
        let mu = boston_assign(&inst, &truthful_submissions(&inst)).unwrap();
        for (s, c) in mu.assignment() {
            prop_assert!(inst.likes(s, c).unwrap());
        }

        let partition = seeded_partition(&inst, seed);
        let tier = build_tier_economy(&inst, &partition);

        // sophisticated students occupy tier 1 wherever they are acceptable
        for c in inst.colleges() {
            for s in partition.sophisticated() {
                if inst.likes(c, s).unwrap() {
                    prop_assert_eq!(tier.tier(c, s), Some(1));
                }
            }
            // acceptability is untouched by the rebuild
            for s in inst.students() {
                prop_assert_eq!(
                    inst.likes(c, s).unwrap(),
                    tier.economy().likes(c, s).unwrap()
                );
            }
        }

        // rebuilding the rebuilt economy changes nothing
        let partition_again =
            SincerityPartition::new(tier.economy(), partition.sincere().clone()).unwrap();
        let twice = build_tier_economy(tier.economy(), &partition_again);
        prop_assert_eq!(tier.economy(), twice.economy());
    }
}
