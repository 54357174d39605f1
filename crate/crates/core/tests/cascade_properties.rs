mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::{naive_final, naive_trace, set, TABLE_ONE};
use iim::cascade::{final_dead, simulate, Network, Propagator};
use iim::eqparse::parse_text;
use iim::ingest::random_system;
use iim::model::{negate, CaseClass, DependencySystem};

fn case_strategy() -> impl Strategy<Value = CaseClass> {
    prop_oneof![
        Just(CaseClass::CaseI),
        Just(CaseClass::CaseII),
        Just(CaseClass::CaseIII),
        Just(CaseClass::CaseIV),
    ]
}

/// Random system with at most `max` entities.
fn system_strategy(max: usize) -> impl Strategy<Value = DependencySystem> {
    (any::<u64>(), 1..=max / 2, 2..=max / 2, case_strategy())
        .prop_map(|(seed, n, m, case)| random_system(seed, n, m, case, 3, 3).unwrap())
}

fn seeds_from_mask(system: &DependencySystem, mask: u32) -> BTreeSet<String> {
    system.names().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, n)| n.to_owned()).collect()
}

#[test]
fn table_two_trace() {
    let s = parse_text(TABLE_ONE).unwrap();
    let tr = simulate(&s, &set(&["a1"])).unwrap();
    let expected = [
        set(&["a1"]),
        set(&["a1", "b3"]),
        set(&["a1", "b3", "a3"]),
        set(&["a1", "b3", "a3", "b1", "b2"]),
        set(&["a1", "b3", "a3", "b1", "b2", "a2", "a4"]),
    ];
    assert_eq!(tr.steps, expected);
    assert_eq!(tr.fixed_point_step, 4);
}

#[test]
fn table_two_grid() {
    let s = parse_text(TABLE_ONE).unwrap();
    let csv = simulate(&s, &set(&["a1"])).unwrap().to_csv();
    let a2 = csv.lines().find(|l| l.starts_with("a2,")).unwrap();
    assert_eq!(a2, "a2,0,0,0,0,1,1,1");
    assert_eq!(csv.lines().count(), 8);
}

#[test]
fn empty_attack_kills_nothing() {
    let s = parse_text(TABLE_ONE).unwrap();
    assert!(final_dead(&s, &BTreeSet::new()).unwrap().is_empty());
}

#[test]
fn unknown_seed_is_an_error() {
    let s = parse_text(TABLE_ONE).unwrap();
    assert!(final_dead(&s, &set(&["zz"])).is_err());
}

#[test]
fn seed_monotonicity_exhaustive() {
    for seed in 0..30 {
        let s = random_system(seed, 4, 5, CaseClass::CaseIV, 2, 2).unwrap();
        let n = s.len() as u32;
        let finals: Vec<BTreeSet<String>> =
            (0u32..1 << n).map(|mask| naive_final(&s, &seeds_from_mask(&s, mask))).collect();
        for small in 0u32..1 << n {
            // every superset of `small`
            let free = !small & ((1 << n) - 1);
            let mut sub = free;
            loop {
                let big = small | sub;
                assert!(finals[small as usize].is_subset(&finals[big as usize]), "seed {seed}");
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & free;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn trace_is_monotone_and_bounded(s in system_strategy(16), mask in any::<u32>()) {
        let initial = seeds_from_mask(&s, mask);
        let tr = simulate(&s, &initial).unwrap();
        for w in tr.steps.windows(2) {
            prop_assert!(w[0].is_subset(&w[1]) && w[0] != w[1]);
        }
        prop_assert!(tr.fixed_point_step <= s.len());
        prop_assert_eq!(tr.steps.clone(), naive_trace(&s, &initial));
    }

    #[test]
    fn fixed_point_is_idempotent(s in system_strategy(16), mask in any::<u32>()) {
        let dead = final_dead(&s, &seeds_from_mask(&s, mask)).unwrap();
        prop_assert_eq!(final_dead(&s, &dead).unwrap(), dead.clone());
        prop_assert_eq!(iim::cascade::step(&s, &dead).unwrap(), dead);
    }

    #[test]
    fn propagator_matches_synchronous(s in system_strategy(16), masks in prop::collection::vec(any::<u32>(), 1..6)) {
        let net = Network::compile(&s).unwrap();
        let mut prop = Propagator::new(&net);
        for mask in masks {
            let names = seeds_from_mask(&s, mask);
            let bits = net.set_from_names(names.iter().map(String::as_str)).unwrap();
            let sync = net.simulate(&bits).pop().unwrap();
            prop_assert_eq!(prop.run(&net, &bits), sync.clone());
            prop_assert_eq!(net.names_of(&sync), naive_final(&s, &names));
        }
    }

    #[test]
    fn death_equations_agree_with_live(s in system_strategy(12), mask in any::<u32>()) {
        let dead = seeds_from_mask(&s, mask);
        let next = iim::cascade::step(&s, &dead).unwrap();
        for eq in s.equations() {
            let by_death = negate(eq).is_satisfied(|n| dead.contains(n));
            let by_live = !eq.is_satisfied(|n| !dead.contains(n));
            prop_assert_eq!(by_death, by_live);
            prop_assert_eq!(next.contains(&eq.target), dead.contains(&eq.target) || by_death);
        }
    }
}
