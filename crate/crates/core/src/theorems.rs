//! Executable theorem checks. Each check runs on one instance, verifies a
//! classical structural claim against the enumeration oracle, and returns
//! either a pass or a self-contained counterexample payload that can be
//! replayed without the original run.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::cycles::{
    dominance_1to1, dominance_many, extract_cycle_many, extract_cycle_pair, extract_cycle_pareto,
    is_preference_cycle, join, meet, ManyExtractOutcome,
};
use crate::da::da_1to1;
use crate::model::{
    AgentId, ManyToOneInstance, MarketInstance, MarketMatching, ModelError, OneToOneInstance,
    OneToOneMatching, Side,
};
use crate::oracle::{
    enumerate_matchings_1to1, enumerate_stable_1to1, enumerate_stable_many, unmatched_1to1,
    OracleCaps, OracleError,
};
use crate::stability::{is_individually_rational_1to1, is_stable_1to1};

/// The claims this crate can verify on a single instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Theorem {
    LoneWolf,
    ConwayLattice,
    RothNoIRImprovement,
    RuralHospitals1,
    RuralHospitals2,
    RuralHospitals3,
    PathakSonmezInvariance,
    Lemma1,
    Lemma2,
    Lemma3,
}

impl Theorem {
    pub fn name(&self) -> &'static str {
        match self {
            Theorem::LoneWolf => "lone-wolf",
            Theorem::ConwayLattice => "conway",
            Theorem::RothNoIRImprovement => "roth",
            Theorem::RuralHospitals1 => "rural-hospitals-1",
            Theorem::RuralHospitals2 => "rural-hospitals-2",
            Theorem::RuralHospitals3 => "rural-hospitals-3",
            Theorem::PathakSonmezInvariance => "pathak-sonmez",
            Theorem::Lemma1 => "lemma-1",
            Theorem::Lemma2 => "lemma-2",
            Theorem::Lemma3 => "lemma-3",
        }
    }
}

/// Everything needed to replay a failure: the instance, the matchings that
/// witnessed it (labelled), and the agents involved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub detail: String,
    pub instance: MarketInstance,
    pub matchings: Vec<(String, MarketMatching)>,
    pub agents: Vec<AgentId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Counterexample(Box<Counterexample>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremReport {
    pub theorem: Theorem,
    pub instance_digest: u64,
    pub verdict: Verdict,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        matches!(self.verdict, Verdict::Pass)
    }

    fn pass(theorem: Theorem, digest: u64) -> Self {
        TheoremReport {
            theorem,
            instance_digest: digest,
            verdict: Verdict::Pass,
        }
    }

    fn fail(theorem: Theorem, digest: u64, cx: Counterexample) -> Self {
        TheoremReport {
            theorem,
            instance_digest: digest,
            verdict: Verdict::Counterexample(Box::new(cx)),
        }
    }
}

/// Infrastructure failures of a check; a counterexample is not an error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TheoremError {
    Oracle(OracleError),
    Model(ModelError),
}

impl fmt::Display for TheoremError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TheoremError::Oracle(e) => write!(f, "{}", e),
            TheoremError::Model(e) => write!(f, "{}", e),
        }
    }
}

impl From<OracleError> for TheoremError {
    fn from(e: OracleError) -> Self {
        TheoremError::Oracle(e)
    }
}

impl From<ModelError> for TheoremError {
    fn from(e: ModelError) -> Self {
        TheoremError::Model(e)
    }
}

fn one_to_one_payload(
    detail: String,
    inst: &OneToOneInstance,
    matchings: Vec<(&str, &OneToOneMatching)>,
    agents: Vec<AgentId>,
) -> Counterexample {
    Counterexample {
        detail,
        instance: MarketInstance::OneToOne(inst.clone()),
        matchings: matchings
            .into_iter()
            .map(|(label, mu)| (String::from(label), MarketMatching::OneToOne(mu.clone())))
            .collect(),
        agents,
    }
}

fn many_payload(
    detail: String,
    inst: &ManyToOneInstance,
    matchings: Vec<(&str, &crate::model::ManyToOneMatching)>,
    agents: Vec<AgentId>,
) -> Counterexample {
    Counterexample {
        detail,
        instance: MarketInstance::ManyToOne(inst.clone()),
        matchings: matchings
            .into_iter()
            .map(|(label, mu)| (String::from(label), MarketMatching::ManyToOne(mu.clone())))
            .collect(),
        agents,
    }
}

/// Identical unmatched sets across all stable matchings.
pub fn check_lone_wolf(
    inst: &OneToOneInstance,
    caps: &OracleCaps,
) -> Result<TheoremReport, TheoremError> {
    let theorem = Theorem::LoneWolf;
    let digest = inst.digest();
    let stable = enumerate_stable_1to1(inst, caps.max_side_1to1)?;
    let Some(first) = stable.first() else {
        return Ok(TheoremReport::fail(
            theorem,
            digest,
            one_to_one_payload(
                String::from("no stable matching was enumerated"),
                inst,
                Vec::new(),
                Vec::new(),
            ),
        ));
    };
    let base = unmatched_1to1(first, inst);
    for mu in &stable[1..] {
        let other = unmatched_1to1(mu, inst);
        if other != base {
            let agents: Vec<AgentId> = base.symmetric_difference(&other).cloned().collect();
            return Ok(TheoremReport::fail(
                theorem,
                digest,
                one_to_one_payload(
                    String::from("two stable matchings leave different agents unmatched"),
                    inst,
                    alloc::vec![("mu", first), ("mu_prime", mu)],
                    agents,
                ),
            ));
        }
    }
    Ok(TheoremReport::pass(theorem, digest))
}

/// For every ordered pair of stable matchings: join and meet are stable,
/// belong to the enumerated stable set, equal the pointwise preference
/// extremes, and shift welfare weakly towards/away from the proposers.
pub fn check_conway(
    inst: &OneToOneInstance,
    caps: &OracleCaps,
) -> Result<TheoremReport, TheoremError> {
    let theorem = Theorem::ConwayLattice;
    let digest = inst.digest();
    let stable = enumerate_stable_1to1(inst, caps.max_side_1to1)?;
    for a in &stable {
        for b in &stable {
            for improve in [true, false] {
                let op = if improve { "join" } else { "meet" };
                let result = if improve {
                    join(a, b, inst)
                } else {
                    meet(a, b, inst)
                };
                let combined = match result {
                    Ok(c) => c,
                    Err(e) => {
                        return Ok(TheoremReport::fail(
                            theorem,
                            digest,
                            one_to_one_payload(
                                format!("{} failed on a stable pair: {}", op, e),
                                inst,
                                alloc::vec![("mu", a), ("mu_prime", b)],
                                Vec::new(),
                            ),
                        ))
                    }
                };
                let mut failure: Option<String> = None;
                if !is_stable_1to1(&combined, inst)? {
                    failure = Some(format!("{} of a stable pair is unstable", op));
                } else if !stable.contains(&combined) {
                    failure = Some(format!("{} is missing from the enumerated stable set", op));
                }
                if failure.is_none() {
                    'agents: for m in inst.proposers() {
                        let x = a.partner(m);
                        let y = b.partner(m);
                        let pointwise = if inst.prefers(m, x, y)? == improve {
                            x
                        } else {
                            y
                        };
                        if combined.partner(m) != pointwise {
                            failure = Some(format!(
                                "{} differs from the pointwise extreme at {}",
                                op, m
                            ));
                            break 'agents;
                        }
                    }
                }
                if failure.is_none() {
                    for m in inst.proposers() {
                        let got = combined.partner(m);
                        let weakly_ok = if improve {
                            !inst.prefers(m, a.partner(m), got)?
                                && !inst.prefers(m, b.partner(m), got)?
                        } else {
                            !inst.prefers(m, got, a.partner(m))?
                                && !inst.prefers(m, got, b.partner(m))?
                        };
                        if !weakly_ok {
                            failure = Some(format!("{} is not weakly proposer-{}", op,
                                if improve { "better" } else { "worse" }));
                            break;
                        }
                    }
                }
                if failure.is_none() {
                    for w in inst.receivers() {
                        let got = combined.partner(w);
                        let weakly_ok = if improve {
                            !inst.prefers(w, got, a.partner(w))?
                                && !inst.prefers(w, got, b.partner(w))?
                        } else {
                            !inst.prefers(w, a.partner(w), got)?
                                && !inst.prefers(w, b.partner(w), got)?
                        };
                        if !weakly_ok {
                            failure = Some(format!("{} moves a receiver the wrong way", op));
                            break;
                        }
                    }
                }
                if let Some(detail) = failure {
                    return Ok(TheoremReport::fail(
                        theorem,
                        digest,
                        one_to_one_payload(
                            detail,
                            inst,
                            alloc::vec![("mu", a), ("mu_prime", b), (op, &combined)],
                            Vec::new(),
                        ),
                    ));
                }
            }
        }
    }
    Ok(TheoremReport::pass(theorem, digest))
}

/// No individually rational matching strictly improves every proposer over
/// proposer-proposing deferred acceptance.
pub fn check_roth(
    inst: &OneToOneInstance,
    caps: &OracleCaps,
) -> Result<TheoremReport, TheoremError> {
    let theorem = Theorem::RothNoIRImprovement;
    let digest = inst.digest();
    // improving "every proposer" needs at least one proposer to improve
    if inst.proposers().is_empty() {
        return Ok(TheoremReport::pass(theorem, digest));
    }
    let (mu_star, _) = da_1to1(inst, Side::Proposer);
    for mu in enumerate_matchings_1to1(inst, caps.max_side_1to1)? {
        if !is_individually_rational_1to1(&mu, inst)? {
            continue;
        }
        let mut improves_all = true;
        for m in inst.proposers() {
            if !inst.prefers(m, mu.partner(m), mu_star.partner(m))? {
                improves_all = false;
                break;
            }
        }
        if improves_all {
            return Ok(TheoremReport::fail(
                theorem,
                digest,
                one_to_one_payload(
                    String::from(
                        "an individually rational matching improves every proposer over deferred acceptance",
                    ),
                    inst,
                    alloc::vec![("da", &mu_star), ("improver", &mu)],
                    Vec::new(),
                ),
            ));
        }
    }
    Ok(TheoremReport::pass(theorem, digest))
}

/// The three rural-hospitals claims, each reported separately: identical
/// unmatched students, identical fill counts, and identical rosters for
/// under-subscribed colleges.
pub fn check_rural_hospitals(
    inst: &ManyToOneInstance,
    caps: &OracleCaps,
) -> Result<[TheoremReport; 3], TheoremError> {
    let digest = inst.digest();
    let stable = enumerate_stable_many(inst, caps.max_assignments_many)?;
    let theorems = [
        Theorem::RuralHospitals1,
        Theorem::RuralHospitals2,
        Theorem::RuralHospitals3,
    ];
    let Some(first) = stable.first() else {
        let fail = |theorem| {
            TheoremReport::fail(
                theorem,
                digest,
                many_payload(
                    String::from("no stable matching was enumerated"),
                    inst,
                    Vec::new(),
                    Vec::new(),
                ),
            )
        };
        return Ok([fail(theorems[0]), fail(theorems[1]), fail(theorems[2])]);
    };

    let mut reports: [TheoremReport; 3] = [
        TheoremReport::pass(theorems[0], digest),
        TheoremReport::pass(theorems[1], digest),
        TheoremReport::pass(theorems[2], digest),
    ];

    let base_unmatched = crate::oracle::unmatched_many(first, inst);
    let base_rosters = first.rosters();
    let empty = alloc::collections::BTreeSet::new();

    for mu in &stable[1..] {
        if reports[0].passed() {
            let other = crate::oracle::unmatched_many(mu, inst);
            if other != base_unmatched {
                let agents: Vec<AgentId> =
                    base_unmatched.symmetric_difference(&other).cloned().collect();
                reports[0] = TheoremReport::fail(
                    theorems[0],
                    digest,
                    many_payload(
                        String::from("two stable matchings leave different students unmatched"),
                        inst,
                        alloc::vec![("mu", first), ("mu_prime", mu)],
                        agents,
                    ),
                );
            }
        }
        if reports[1].passed() {
            let rosters = mu.rosters();
            for c in inst.colleges() {
                let n0 = base_rosters.get(c).unwrap_or(&empty).len();
                let n1 = rosters.get(c).unwrap_or(&empty).len();
                if n0 != n1 {
                    reports[1] = TheoremReport::fail(
                        theorems[1],
                        digest,
                        many_payload(
                            format!("college {} fills {} seats in one stable matching and {} in another", c, n0, n1),
                            inst,
                            alloc::vec![("mu", first), ("mu_prime", mu)],
                            alloc::vec![c.clone()],
                        ),
                    );
                    break;
                }
            }
        }
    }

    // claim 3: a college under capacity anywhere keeps one fixed roster
    if reports[2].passed() {
        'colleges: for c in inst.colleges() {
            let quota = inst.quota(c).expect("validated instance") as usize;
            let under_capacity = stable
                .iter()
                .any(|mu| mu.roster(c).len() < quota);
            if !under_capacity {
                continue;
            }
            let base = first.roster(c);
            for mu in &stable[1..] {
                let other = mu.roster(c);
                if other != base {
                    let agents: Vec<AgentId> =
                        base.symmetric_difference(&other).cloned().collect();
                    reports[2] = TheoremReport::fail(
                        theorems[2],
                        digest,
                        many_payload(
                            format!("under-subscribed college {} has different rosters", c),
                            inst,
                            alloc::vec![("mu", first), ("mu_prime", mu)],
                            agents,
                        ),
                    );
                    break 'colleges;
                }
            }
        }
    }

    Ok(reports)
}

/// Every improving proposer across every ordered stable pair yields a cycle
/// with the advertised dominance properties.
pub fn check_lemma1(
    inst: &OneToOneInstance,
    caps: &OracleCaps,
) -> Result<TheoremReport, TheoremError> {
    let theorem = Theorem::Lemma1;
    let digest = inst.digest();
    let stable = enumerate_stable_1to1(inst, caps.max_side_1to1)?;
    for mu in &stable {
        for mu_prime in &stable {
            for m in inst.proposers() {
                if !inst.prefers(m, mu_prime.partner(m), mu.partner(m))? {
                    continue;
                }
                let detail = match extract_cycle_pair(mu, mu_prime, m, inst) {
                    Err(e) => Some(format!("extraction failed for {}: {}", m, e)),
                    Ok(cycle) => verify_pair_cycle(&cycle, mu, mu_prime, m, inst),
                };
                if let Some(detail) = detail {
                    return Ok(TheoremReport::fail(
                        theorem,
                        digest,
                        one_to_one_payload(
                            detail,
                            inst,
                            alloc::vec![("mu", mu), ("mu_prime", mu_prime)],
                            alloc::vec![m.clone()],
                        ),
                    ));
                }
            }
        }
    }
    Ok(TheoremReport::pass(theorem, digest))
}

fn verify_pair_cycle(
    cycle: &crate::cycles::PreferenceCycle,
    mu: &OneToOneMatching,
    mu_prime: &OneToOneMatching,
    m: &AgentId,
    inst: &OneToOneInstance,
) -> Option<String> {
    if !is_preference_cycle(cycle.agents(), inst) {
        return Some(format!("extracted list through {} is not a preference cycle", m));
    }
    if !cycle.contains(m) {
        return Some(format!("cycle does not contain {}", m));
    }
    if !dominance_1to1(cycle, mu, Side::Proposer).dominated {
        return Some(String::from("cycle is not dominated w.r.t. mu"));
    }
    if !dominance_1to1(cycle, mu_prime, Side::Proposer).dominating {
        return Some(String::from("cycle is not dominating w.r.t. mu_prime"));
    }
    None
}

/// Whenever some individually rational matching strictly improves every
/// proposer over a stable one, every proposer lies on a suitable cycle.
pub fn check_lemma2(
    inst: &OneToOneInstance,
    caps: &OracleCaps,
) -> Result<TheoremReport, TheoremError> {
    let theorem = Theorem::Lemma2;
    let digest = inst.digest();
    if inst.proposers().is_empty() {
        return Ok(TheoremReport::pass(theorem, digest));
    }
    let stable = enumerate_stable_1to1(inst, caps.max_side_1to1)?;
    for mu in &stable {
        for nu in enumerate_matchings_1to1(inst, caps.max_side_1to1)? {
            if !is_individually_rational_1to1(&nu, inst)? {
                continue;
            }
            let mut improves_all = true;
            for m in inst.proposers() {
                if !inst.prefers(m, nu.partner(m), mu.partner(m))? {
                    improves_all = false;
                    break;
                }
            }
            if !improves_all {
                continue;
            }
            for m in inst.proposers() {
                let detail = match extract_cycle_pareto(mu, &nu, m, inst) {
                    Err(e) => Some(format!("extraction failed for {}: {}", m, e)),
                    Ok(cycle) => verify_pair_cycle(&cycle, mu, &nu, m, inst),
                };
                if let Some(detail) = detail {
                    return Ok(TheoremReport::fail(
                        theorem,
                        digest,
                        one_to_one_payload(
                            detail,
                            inst,
                            alloc::vec![("mu", mu), ("mu_prime", &nu)],
                            alloc::vec![m.clone()],
                        ),
                    ));
                }
            }
        }
    }
    Ok(TheoremReport::pass(theorem, digest))
}

/// Every improving student across every ordered stable pair yields a cycle
/// whose colleges are full under both matchings. A failed search is reported
/// as a counterexample, not an error.
pub fn check_lemma3(
    inst: &ManyToOneInstance,
    caps: &OracleCaps,
) -> Result<TheoremReport, TheoremError> {
    let theorem = Theorem::Lemma3;
    let digest = inst.digest();
    let stable = enumerate_stable_many(inst, caps.max_assignments_many)?;
    for mu in &stable {
        for mu_prime in &stable {
            for s in inst.students() {
                if !inst.prefers(s, mu_prime.college(s), mu.college(s))? {
                    continue;
                }
                let detail = match extract_cycle_many(mu, mu_prime, s, inst) {
                    Err(e) => Some(format!("extraction failed for {}: {}", s, e)),
                    Ok(ManyExtractOutcome::Counterexample(_)) => Some(format!(
                        "no qualifying cycle exists through improving student {}",
                        s
                    )),
                    Ok(ManyExtractOutcome::Cycle(cycle)) => {
                        verify_many_cycle(&cycle, mu, mu_prime, s, inst)
                    }
                };
                if let Some(detail) = detail {
                    return Ok(TheoremReport::fail(
                        theorem,
                        digest,
                        many_payload(
                            detail,
                            inst,
                            alloc::vec![("mu", mu), ("mu_prime", mu_prime)],
                            alloc::vec![s.clone()],
                        ),
                    ));
                }
            }
        }
    }
    Ok(TheoremReport::pass(theorem, digest))
}

fn verify_many_cycle(
    cycle: &crate::cycles::PreferenceCycle,
    mu: &crate::model::ManyToOneMatching,
    mu_prime: &crate::model::ManyToOneMatching,
    s: &AgentId,
    inst: &ManyToOneInstance,
) -> Option<String> {
    if !is_preference_cycle(cycle.agents(), inst) {
        return Some(format!("extracted list through {} is not a preference cycle", s));
    }
    if !cycle.contains(s) {
        return Some(format!("cycle does not contain {}", s));
    }
    if !dominance_many(cycle, mu, Side::Proposer).dominated {
        return Some(String::from("cycle is not dominated w.r.t. mu"));
    }
    if !dominance_many(cycle, mu_prime, Side::Proposer).dominating {
        return Some(String::from("cycle is not dominating w.r.t. mu_prime"));
    }
    for c in cycle.agents().iter().filter(|a| a.side() == Side::Receiver) {
        let quota = inst.quota(c).expect("validated instance") as usize;
        if mu.roster(c).len() != quota || mu_prime.roster(c).len() != quota {
            return Some(format!("on-cycle college {} is not full in both matchings", c));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ManyToOneInstance;

    fn caps() -> OracleCaps {
        OracleCaps::default()
    }

    fn two_by_two_cyclic() -> OneToOneInstance {
        OneToOneInstance::from_lists(
            &[("m1", &["w1", "w2"]), ("m2", &["w2", "w1"])],
            &[("w1", &["m2", "m1"]), ("w2", &["m1", "m2"])],
        )
        .unwrap()
    }

    #[test]
    fn lone_wolf_passes_on_the_cyclic_market() {
        let inst = two_by_two_cyclic();
        assert!(check_lone_wolf(&inst, &caps()).unwrap().passed());
    }

    #[test]
    fn lone_wolf_with_a_forced_single() {
        // three proposers, two receivers, complete lists: someone always sits out
        let inst = OneToOneInstance::from_lists(
            &[
                ("m1", &["w1", "w2"]),
                ("m2", &["w1", "w2"]),
                ("m3", &["w1", "w2"]),
            ],
            &[
                ("w1", &["m1", "m2", "m3"]),
                ("w2", &["m2", "m3", "m1"]),
            ],
        )
        .unwrap();
        let report = check_lone_wolf(&inst, &caps()).unwrap();
        assert!(report.passed());
        let stable = enumerate_stable_1to1(&inst, 8).unwrap();
        for mu in &stable {
            assert_eq!(unmatched_1to1(mu, &inst).len(), 1);
        }
    }

    #[test]
    fn lone_wolf_passes_vacuously_with_one_stable_matching() {
        let inst = OneToOneInstance::from_lists(&[("m1", &["w1"])], &[("w1", &["m1"])]).unwrap();
        assert!(check_lone_wolf(&inst, &caps()).unwrap().passed());
    }

    #[test]
    fn conway_passes_and_join_is_proposer_optimal() {
        let inst = two_by_two_cyclic();
        assert!(check_conway(&inst, &caps()).unwrap().passed());
        let stable = enumerate_stable_1to1(&inst, 8).unwrap();
        let best = join(&stable[0], &stable[1], &inst).unwrap();
        let (da_best, _) = da_1to1(&inst, Side::Proposer);
        assert_eq!(best, da_best);
    }

    #[test]
    fn roth_passes_on_small_markets() {
        assert!(check_roth(&two_by_two_cyclic(), &caps()).unwrap().passed());
        let mutual = OneToOneInstance::from_lists(&[("m1", &["w1"])], &[("w1", &["m1"])]).unwrap();
        assert!(check_roth(&mutual, &caps()).unwrap().passed());
    }

    #[test]
    fn rural_hospitals_passes_on_fixtures() {
        let crowded = ManyToOneInstance::from_lists(
            &[("s1", &["c1"]), ("s2", &["c1"]), ("s3", &["c1"])],
            &[("c1", 2, &["s1", "s2", "s3"])],
        )
        .unwrap();
        for report in check_rural_hospitals(&crowded, &caps()).unwrap() {
            assert!(report.passed(), "{:?}", report.theorem);
        }

        let crossed = ManyToOneInstance::from_lists(
            &[("s1", &["c1", "c2"]), ("s2", &["c2", "c1"])],
            &[("c1", 1, &["s2", "s1"]), ("c2", 1, &["s1", "s2"])],
        )
        .unwrap();
        for report in check_rural_hospitals(&crossed, &caps()).unwrap() {
            assert!(report.passed(), "{:?}", report.theorem);
        }
    }

    #[test]
    fn lemma_checks_pass_on_fixtures() {
        let inst = two_by_two_cyclic();
        assert!(check_lemma1(&inst, &caps()).unwrap().passed());
        assert!(check_lemma2(&inst, &caps()).unwrap().passed());

        let crossed = ManyToOneInstance::from_lists(
            &[("s1", &["c1", "c2"]), ("s2", &["c2", "c1"])],
            &[("c1", 1, &["s2", "s1"]), ("c2", 1, &["s1", "s2"])],
        )
        .unwrap();
        assert!(check_lemma3(&crossed, &caps()).unwrap().passed());
    }

    #[test]
    fn lemma_checks_pass_vacuously_without_improvements() {
        let mutual = OneToOneInstance::from_lists(&[("m1", &["w1"])], &[("w1", &["m1"])]).unwrap();
        assert!(check_lemma1(&mutual, &caps()).unwrap().passed());
        let single =
            ManyToOneInstance::from_lists(&[("s1", &["c1"])], &[("c1", 1, &["s1"])]).unwrap();
        assert!(check_lemma3(&single, &caps()).unwrap().passed());
    }

    #[test]
    fn reports_are_reproducible() {
        let inst = two_by_two_cyclic();
        let a = check_lone_wolf(&inst, &caps()).unwrap();
        let b = check_lone_wolf(&inst, &caps()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.instance_digest, inst.digest());
    }

    #[test]
    fn cap_refusal_propagates() {
        let inst = two_by_two_cyclic();
        let tight = OracleCaps {
            max_side_1to1: 1,
            max_assignments_many: 10,
        };
        assert!(matches!(
            check_lone_wolf(&inst, &tight),
            Err(TheoremError::Oracle(OracleError::SideCapExceeded { .. }))
        ));
    }
}
