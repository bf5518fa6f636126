//! Property tests over seeded random structures and formulas.

use proptest::prelude::*;

use arboreal::games::{solve_bisim, solve_ef, TupleStructure};
use arboreal::logic::{
    at_least_runs, branching, classify, eval_formula, parse_formula, synth_characteristic, Cmp, Formula, Fragment,
    Model,
};
use arboreal::oracle::generate::{mode_for, random_pair, random_pointed, sample_rng, signature};
use arboreal::oracle::{find_isomorphism, find_morphism, MorphismKind};
use arboreal::structures::{Kripke, PointedStructure};
use arboreal::traces::{check_trace_relation, maximal_trace_counts, Bound, Relation};
use arboreal::unravel::{counit_check, ml_graft, ml_unravel, tree_unravel};

fn pair(seed: u64, size: usize) -> (PointedStructure, PointedStructure) {
    random_pair(seed, 0, size, mode_for(seed as usize))
}

fn holds(rel: Relation, a: &PointedStructure, b: &PointedStructure, bound: Bound) -> bool {
    check_trace_relation(rel, a, b, bound).unwrap().holds
}

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        Just(Formula::Deadlock),
        prop_oneof![Just("p"), Just("q")].prop_map(|p| Formula::Prop(p.into())),
        prop_oneof![Just("p"), Just("q")].prop_map(|p| Formula::NotProp(p.into())),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        let act = prop_oneof![Just("a"), Just("b")];
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::Or),
            (act.clone(), inner.clone()).prop_map(|(a, f)| Formula::Dia(a.into(), Box::new(f))),
            (act.clone(), inner.clone()).prop_map(|(a, f)| Formula::Box(a.into(), Box::new(f))),
            (act, any::<bool>(), 0..3usize, inner).prop_map(|(a, ge, n, f)| Formula::Graded {
                act: a.into(),
                cmp: if ge { Cmp::AtLeast } else { Cmp::AtMost },
                count: n,
                body: Box::new(f),
            }),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn formulas_round_trip(f in formula()) {
        let text = f.to_string();
        prop_assert_eq!(parse_formula(&text).unwrap(), f);
    }

    #[test]
    fn negation_flips_truth(f in formula(), seed in 0u64..1000) {
        let (a, _) = random_pair(seed, 0, 3, arboreal::oracle::generate::PairMode::Copy);
        let a = with_pq_ab(&a);
        let m = Model::new(&a).unwrap();
        let acts = m.kripke.acts.clone();
        for x in 0..m.kripke.len() {
            prop_assert_ne!(m.sat(&f, x), m.sat(&f.negate(&acts), x));
        }
    }

    #[test]
    fn tr_and_ltr_coincide_without_propositions(seed in 0u64..100_000, k in 0usize..4) {
        let sig = signature(0, 2);
        let mut rng = sample_rng(seed, 0);
        let (a, b) = (random_pointed(&mut rng, &sig, 4), random_pointed(&mut rng, &sig, 4));
        for bound in [Bound::Depth(k), Bound::Exact] {
            prop_assert_eq!(holds(Relation::Tr, &a, &b, bound), holds(Relation::Ltr, &a, &b, bound));
        }
    }

    #[test]
    fn relation_ladder(seed in 0u64..100_000, k in 0usize..4) {
        let (a, b) = pair(seed, 4);
        let d = Bound::Depth(k);
        let bisim = solve_bisim(&a, &b, k).unwrap().duplicator_wins();
        let gltr = holds(Relation::Gltr, &a, &b, d);
        let cltr = holds(Relation::Cltr, &a, &b, d);
        let ltr = holds(Relation::Ltr, &a, &b, d);
        let tr = holds(Relation::Tr, &a, &b, d);
        prop_assert!(!bisim || cltr);
        prop_assert!(!gltr || cltr);
        prop_assert!(!cltr || (ltr && holds(Relation::Ltr, &b, &a, d)));
        prop_assert!(!ltr || tr);
        prop_assert!(!holds(Relation::Rt, &a, &b, d) || cltr || k == 0);
    }

    #[test]
    fn bounded_relations_are_antitone_in_depth(seed in 0u64..100_000, k in 0usize..4) {
        let (a, b) = pair(seed, 4);
        for rel in [Relation::Tr, Relation::Ltr, Relation::Cltr] {
            if holds(rel, &a, &b, Bound::Depth(k + 1)) {
                prop_assert!(holds(rel, &a, &b, Bound::Depth(k)));
            }
            if holds(rel, &a, &b, Bound::Exact) {
                prop_assert!(holds(rel, &a, &b, Bound::Depth(k)));
            }
        }
    }

    #[test]
    fn unravelings_map_back(seed in 0u64..100_000, k in 0usize..4) {
        let (a, _) = pair(seed, 4);
        for x in [ml_unravel(&a, k).unwrap(), tree_unravel(&a, k).unwrap()] {
            prop_assert_eq!(counit_check(&x, &a.base, Some(a.point)), Ok(()));
            let id = find_morphism(&x, &x, MorphismKind::Isomorphism).unwrap();
            prop_assert!(id.is_some());
        }
    }

    #[test]
    fn characteristic_formulas_hold_at_home(seed in 0u64..100_000, k in 0usize..4) {
        let (a, b) = pair(seed, 4);
        for frag in [Fragment::DiamondPos, Fragment::Diamond, Fragment::DeadlockDiamond] {
            let chi = synth_characteristic(&a, k, frag).unwrap();
            prop_assert!(eval_formula(&chi, &a).unwrap());
            prop_assert!(classify(&chi).contains(frag));
            prop_assert!(classify(&chi).depth <= k + 1);
            let rel = frag.relation().unwrap();
            if holds(rel, &a, &b, Bound::Depth(k)) {
                prop_assert!(eval_formula(&chi, &b).unwrap());
            }
        }
    }

    #[test]
    fn counting_formulas_match_counts(seed in 0u64..100_000, k in 0usize..4) {
        let (a, b) = pair(seed, 4);
        let (ka, kb) = (Kripke::new(&a).unwrap(), Kripke::new(&b).unwrap());
        let branch = branching(&[&ka, &kb]);
        let (mb, counts_b) = (Model::new(&b).unwrap(), maximal_trace_counts(&kb, k));
        for (t, n) in maximal_trace_counts(&ka, k) {
            let have = counts_b.get(&t).copied().unwrap_or(0);
            for m in [n, n + 1] {
                let f = at_least_runs(&t, 0, m, k, branch, &ka.props, &ka.acts);
                prop_assert_eq!(mb.sat(&f, mb.kripke.point), have >= m, "{} at least {}", f, m);
            }
        }
    }

    #[test]
    fn graft_keeps_complete_traces_and_ball(seed in 0u64..100_000, k in 1usize..4) {
        let (a, _) = pair(seed, 3);
        let g = ml_graft(&a, k).unwrap();
        prop_assert!(holds(Relation::Cltr, &a, &g, Bound::Exact));
        let u = ml_unravel(&a, k).unwrap().as_pointed().unwrap();
        prop_assert!(find_isomorphism(&g.ball(k), &u).is_some());
    }

    #[test]
    fn ef_game_is_reflexive_and_symmetric(seed in 0u64..100_000, r in 0usize..3) {
        let (a, b) = pair(seed, 3);
        let (ta, tb) = (TupleStructure::from(&a), TupleStructure::from(&b));
        prop_assert!(solve_ef(&ta, &ta, r).unwrap().duplicator_wins());
        prop_assert_eq!(
            solve_ef(&ta, &tb, r).unwrap().winner,
            solve_ef(&tb, &ta, r).unwrap().winner
        );
    }

    #[test]
    fn structures_round_trip_through_json(seed in 0u64..100_000) {
        let (a, _) = pair(seed, 4);
        prop_assert_eq!(PointedStructure::from_json(&a.to_json()).unwrap(), a);
    }
}

/// Re-types a structure over propositions `p, q` and actions `a, b` so that
/// every generated formula is well-typed on it.
fn with_pq_ab(a: &PointedStructure) -> PointedStructure {
    let mut file = a.to_file();
    let mut value = serde_json::to_value(&file).unwrap();
    let sig = arboreal::oracle::generate::signature(2, 2);
    value["signature"] = serde_json::to_value(&sig).unwrap();
    for r in &sig.relations {
        if value["interp"].get(&r.name).is_none() {
            value["interp"][&r.name] = serde_json::json!([]);
        }
    }
    file = serde_json::from_value(value).unwrap();
    PointedStructure::from_file(&file).unwrap()
}
