//! Large sweep for the many-to-one cycle extraction. The construction has no
//! known deterministic successor rule, so the implementation falls back on an
//! exhaustive search; this sweep is the empirical evidence that the search
//! always closes on stable inputs.

use prefcycles_core::oracle::{seeded_many_bounded, OracleCaps};
use prefcycles_core::theorems::check_lemma3;

#[test]
fn many_to_one_extraction_succeeds_across_ten_thousand_seeds() {
    let caps = OracleCaps::default();
    for seed in 0..10_000u64 {
        let inst = seeded_many_bounded(seed, 6, 3, 3, 0.3, 0.25).unwrap();
        let report = check_lemma3(&inst, &caps).unwrap();
        assert!(
            report.passed(),
            "extraction counterexample on seed {}: {:#?}",
            seed,
            report
        );
    }
}
