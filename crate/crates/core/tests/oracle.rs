mod common;

use common::{check_election, election_from_masks, literal_mes};
use delib_core::axioms::{is_t_cohesive, satisfies_ejr, satisfies_pjr};
use delib_core::rules::{mes_committee, Committee, MesCompletion};
use proptest::prelude::*;

fn election() -> impl Strategy<Value = common::Election> {
    (1usize..=6)
        .prop_flat_map(|m| (Just(m), 1..=m.min(3), prop::collection::vec(1u32..(1 << m), 1..=8), any::<u64>()))
        .prop_map(|(m, k, masks, seed)| election_from_masks(m, k, masks, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3000))]

    #[test]
    fn solvers_and_axiom_checks_match_brute_force(e in election()) {
        if let Err(msg) = check_election(&e) {
            prop_assert!(false, "{msg}\nballots {:?} k {} priority {:?}", e.ballots, e.k, e.priority);
        }
    }

    #[test]
    fn violation_witnesses_are_genuine(e in election(), pick in any::<prop::sample::Index>()) {
        let profile = e.profile();
        let all = common::subsets(e.m, e.k);
        let w = Committee::from(all[pick.index(all.len())].clone());
        for pjr in [false, true] {
            let verdict = if pjr { satisfies_pjr(&profile, &w, e.k) } else { satisfies_ejr(&profile, &w, e.k) }.unwrap();
            let Some(witness) = verdict.witness else {
                prop_assert!(verdict.satisfied);
                continue;
            };
            prop_assert!(!verdict.satisfied);
            let t = witness.t;
            prop_assert!(witness.voters.len() * e.k >= t * e.n());
            prop_assert!(is_t_cohesive(&profile, &witness.voters, t, e.k).unwrap());
            if pjr {
                let joint = w.iter().filter(|&c| witness.voters.iter().any(|&i| e.approves(i, c))).count();
                prop_assert!(joint < t);
            } else {
                for &i in &witness.voters {
                    prop_assert!(w.iter().filter(|&c| e.approves(i, c)).count() < t);
                }
            }
        }
    }

    #[test]
    fn mes_budgets_and_prices(e in election()) {
        let (_, prices) = literal_mes(&e, MesCompletion::Av);
        let out = mes_committee(&e.profile(), e.k, &e.tie(), MesCompletion::Av).unwrap();
        let delib_core::rules::Diagnostics::Mes { q, completion } = out.diagnostics else {
            panic!("MES diagnostics");
        };
        prop_assert_eq!(q.len() + completion, e.k);
        prop_assert_eq!(q.len(), prices.len());
        // each phase-one seat costs one unit out of a total budget of k
        prop_assert!(q.len() <= e.k);
        for pair in q.windows(2) {
            prop_assert!(pair[1] >= pair[0] - 1e-9);
        }
    }
}
