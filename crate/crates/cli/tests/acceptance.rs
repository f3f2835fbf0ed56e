//! Acceptance suite: ten structural criteria, each run at a pinned sweep
//! size, tolerance, and time budget, printing one pass/fail line apiece
//! (run with `--nocapture` to see them).

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prefcycles_cli::formats::{report_doc, to_canonical_json, QuarantineDoc};
use prefcycles_core::boston::{check_sincere_invariance, SincerityPartition};
use prefcycles_core::da::da_1to1;
use prefcycles_core::oracle::{
    enumerate_matchings_1to1, enumerate_stable_1to1, partial_injection_count, seeded_1to1_bounded,
    seeded_many_bounded, OracleCaps,
};
use prefcycles_core::stability::is_stable_1to1;
use prefcycles_core::theorems::{
    check_conway, check_lemma1, check_lemma3, check_lone_wolf, check_roth, check_rural_hospitals,
};
use prefcycles_core::{AgentId, OneToOneInstance, Side};

const TRUNCATION: f64 = 0.3;
const SYMMETRY: f64 = 0.0;

fn caps() -> OracleCaps {
    OracleCaps::default()
}

fn pass(criterion: u32, what: &str, started: Instant, budget: Option<Duration>) {
    let elapsed = started.elapsed();
    if let Some(budget) = budget {
        assert!(
            elapsed < budget,
            "acceptance {:02} ({}) exceeded its {:?} budget: took {:?}",
            criterion,
            what,
            budget,
            elapsed
        );
    }
    println!(
        "acceptance {:02} ({}): PASS in {:.2?}{}",
        criterion,
        what,
        elapsed,
        budget
            .map(|b| format!(" (budget {:?})", b))
            .unwrap_or_default()
    );
}

fn one_to_one_sweep(seeds: u64, max_side: usize) -> impl Iterator<Item = (u64, OneToOneInstance)> {
    (0..seeds).map(move |seed| {
        (
            seed,
            seeded_1to1_bounded(seed, max_side, max_side, TRUNCATION, SYMMETRY)
                .expect("valid sweep shape"),
        )
    })
}

#[test]
fn acceptance_01_deferred_acceptance_is_stable() {
    let started = Instant::now();
    for (seed, inst) in one_to_one_sweep(1000, 7) {
        let (mu, _) = da_1to1(&inst, Side::Proposer);
        assert!(
            is_stable_1to1(&mu, &inst).unwrap(),
            "unstable deferred-acceptance output on seed {}",
            seed
        );
    }
    pass(1, "deferred acceptance stable on 1000 seeds <=7x7", started, Some(Duration::from_secs(10)));
}

#[test]
fn acceptance_02_deferred_acceptance_is_proposer_optimal() {
    let started = Instant::now();
    for (seed, inst) in one_to_one_sweep(200, 5) {
        let (best, _) = da_1to1(&inst, Side::Proposer);
        let stable = enumerate_stable_1to1(&inst, caps().max_side_1to1).unwrap();
        for mu in &stable {
            for m in inst.proposers() {
                assert!(
                    !inst.prefers(m, mu.partner(m), best.partner(m)).unwrap(),
                    "seed {}: {} prefers a stable matching over deferred acceptance",
                    seed,
                    m
                );
            }
        }
    }
    pass(2, "proposer-optimality on 200 seeds <=5x5", started, Some(Duration::from_secs(30)));
}

#[test]
fn acceptance_03_pair_extraction_yields_dominating_cycles() {
    let started = Instant::now();
    for (seed, inst) in one_to_one_sweep(200, 5) {
        let report = check_lemma1(&inst, &caps()).unwrap();
        assert!(report.passed(), "seed {}: {:#?}", seed, report);
    }
    pass(3, "cycle extraction on all stable pairs, 200 seeds <=5x5", started, None);
}

#[test]
fn acceptance_04_unmatched_sets_are_invariant() {
    let started = Instant::now();
    for (seed, inst) in one_to_one_sweep(200, 5) {
        let report = check_lone_wolf(&inst, &caps()).unwrap();
        assert!(report.passed(), "seed {}: {:#?}", seed, report);
    }
    pass(4, "lone-wolf invariance on 200 seeds <=5x5", started, None);
}

#[test]
fn acceptance_05_join_meet_form_the_lattice() {
    let started = Instant::now();
    for (seed, inst) in one_to_one_sweep(200, 5) {
        let report = check_conway(&inst, &caps()).unwrap();
        assert!(report.passed(), "seed {}: {:#?}", seed, report);
    }
    pass(5, "join/meet lattice on 200 seeds <=5x5", started, None);
}

#[test]
fn acceptance_06_no_rational_matching_improves_every_proposer() {
    let started = Instant::now();
    for (seed, inst) in one_to_one_sweep(200, 4) {
        let report = check_roth(&inst, &caps()).unwrap();
        assert!(report.passed(), "seed {}: {:#?}", seed, report);
    }
    pass(6, "no IR improvement over DA on 200 seeds <=4x4", started, Some(Duration::from_secs(60)));
}

#[test]
fn acceptance_07_rural_hospitals_three_claims() {
    let started = Instant::now();
    for seed in 0..500u64 {
        let inst = seeded_many_bounded(seed, 6, 3, 3, TRUNCATION, SYMMETRY).unwrap();
        for report in check_rural_hospitals(&inst, &caps()).unwrap() {
            assert!(
                report.passed(),
                "seed {}: {} failed: {:#?}",
                seed,
                report.theorem.name(),
                report
            );
        }
    }
    pass(7, "rural hospitals (3 claims) on 500 seeds <=6x3 q<=3", started, Some(Duration::from_secs(60)));
}

#[test]
fn acceptance_08_many_to_one_extraction_never_fails() {
    let started = Instant::now();
    let quarantine: PathBuf =
        PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("lemma3-counterexamples.json");
    let mut failures = Vec::new();
    for seed in 0..500u64 {
        let inst = seeded_many_bounded(seed, 6, 3, 3, TRUNCATION, SYMMETRY).unwrap();
        let report = check_lemma3(&inst, &caps()).unwrap();
        if !report.passed() {
            failures.push((seed, report));
        }
    }
    if !failures.is_empty() {
        let doc = QuarantineDoc {
            counterexamples: failures.iter().map(|(_, r)| report_doc(r)).collect(),
            schema: 1,
        };
        std::fs::write(&quarantine, to_canonical_json(&doc)).unwrap();
        panic!(
            "{} extraction counterexamples persisted to {} (seeds: {:?})",
            failures.len(),
            quarantine.display(),
            failures.iter().map(|(s, _)| *s).collect::<Vec<_>>()
        );
    }
    pass(8, "full-capacity cycle extraction on 500 seeds <=6x3 q<=3", started, None);
}

#[test]
fn acceptance_09_sincere_students_have_invariant_assignments() {
    let started = Instant::now();
    for seed in 0..300u64 {
        let inst = seeded_many_bounded(seed, 6, 3, 3, TRUNCATION, SYMMETRY).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51ce_ce11);
        let sincere: BTreeSet<AgentId> = inst
            .students()
            .iter()
            .filter(|_| rng.gen_bool(0.5))
            .cloned()
            .collect();
        let partition = SincerityPartition::new(&inst, sincere).unwrap();
        let report = check_sincere_invariance(&inst, &partition, &caps()).unwrap();
        assert!(report.passed(), "seed {}: {:#?}", seed, report);
    }
    pass(9, "sincere-assignment invariance on 300 seeds <=6x3", started, Some(Duration::from_secs(60)));
}

#[test]
fn acceptance_10_enumeration_matches_the_closed_form() {
    let started = Instant::now();
    for m in 0..=4usize {
        for w in 0..=4usize {
            let proposers: Vec<String> = (1..=m).map(|i| format!("m{}", i)).collect();
            let receivers: Vec<String> = (1..=w).map(|i| format!("w{}", i)).collect();
            let mut prefs = std::collections::BTreeMap::new();
            for p in &proposers {
                prefs.insert(p.clone(), receivers.clone());
            }
            for r in &receivers {
                prefs.insert(r.clone(), proposers.clone());
            }
            let inst = OneToOneInstance::new(proposers, receivers, prefs).unwrap();
            let counted = enumerate_matchings_1to1(&inst, caps().max_side_1to1)
                .unwrap()
                .count() as u128;
            assert_eq!(
                counted,
                partial_injection_count(m, w),
                "enumeration count mismatch at {}x{}",
                m,
                w
            );
        }
    }
    pass(10, "enumeration counts equal the closed form to 4x4", started, None);
}
