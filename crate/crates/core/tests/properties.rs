//! Property tests for syntax, semantics and reductions.

use glpstar_core::formula::{
    adequate_closure, desugar, is_adequate, modal_levels, modified_negation, sort_of, subformulas, Formula, FormulaSet,
    RawFormula, Sort, Var,
};
use glpstar_core::kripke::{adjoin_root, check_jstar_frame, check_strong_persistence, valid_in_model, KripkeModel};
use glpstar_core::parser::{parse_formula, parse_model, render_formula, render_model, render_sugared};
use glpstar_core::reductions::{apply_reduction, h_formula, n_formula, n_plus, r_theta, r_theta_plus, NPlusVariant, ReductionKind};
use glpstar_core::testgen::{perturb, random_formula, random_formula_over, random_persistent_model, FormulaShape};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn vars() -> Vec<Var> {
    vec![
        Var::new("p", Sort::Finite(0)),
        Var::new("q", Sort::Finite(1)),
        Var::new("r", Sort::Finite(2)),
        Var::new("s", Sort::Omega),
    ]
}

fn formula(seed: u64) -> Formula {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_formula_over(&mut rng, &vars(), &[0, 1, 2, 3], 4)
}

fn model(seed: u64) -> KripkeModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_persistent_model(&mut rng, 5, &[0, 1, 2], &vars())
}

fn has_double_negation(f: &Formula) -> bool {
    matches!(f, Formula::Neg(a) if matches!(**a, Formula::Neg(_)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn render_parse_round_trip(seed in any::<u64>()) {
        let f = formula(seed);
        let text = render_formula(&f);
        prop_assert_eq!(parse_formula(&text).unwrap(), f, "{}", text);
    }

    #[test]
    fn sugared_round_trip(seed in any::<u64>()) {
        let f = formula(seed);
        let text = render_sugared(&f);
        prop_assert_eq!(parse_formula(&text).unwrap(), f, "{}", text);
    }

    #[test]
    fn model_round_trip(seed in any::<u64>()) {
        let mut m = model(seed);
        m.set_root(Some(0));
        let text = render_model(&m);
        prop_assert_eq!(parse_model(&text).unwrap(), m, "{}", text);
    }

    #[test]
    fn parse_errors_carry_spans(text in "[a-z<>()~&|:0-9\\[\\] -]{0,24}") {
        if let Err(e) = parse_formula(&text) {
            prop_assert!(e.span.start <= e.span.end && e.span.end <= text.len(), "{:?} in {:?}", e.span, text);
        }
    }

    #[test]
    fn desugar_is_idempotent(seed in any::<u64>()) {
        let f = formula(seed);
        prop_assert_eq!(desugar(&RawFormula::from(&f)), f);
    }

    #[test]
    fn diamond_sort_is_its_index(seed in any::<u64>(), n in 0u32..5) {
        prop_assert_eq!(sort_of(&Formula::dia(n, formula(seed))), Sort::Finite(n));
    }

    #[test]
    fn modified_negation_is_classical(fseed in any::<u64>(), mseed in any::<u64>()) {
        let f = formula(fseed);
        let m = model(mseed);
        let mut expected = m.truth_set(&f);
        expected = expected.complement(m.len());
        prop_assert_eq!(m.truth_set(&modified_negation(&f)), expected);
        if !has_double_negation(&f) {
            prop_assert_eq!(modified_negation(&modified_negation(&f)), f);
        }
    }

    #[test]
    fn closure_is_a_closure_operator(a in any::<u64>(), b in any::<u64>()) {
        let gamma: FormulaSet = [formula(a)].into_iter().collect();
        let delta = adequate_closure(&gamma);
        prop_assert!(delta.is_superset(&gamma));
        prop_assert!(is_adequate(&delta));
        prop_assert_eq!(adequate_closure(&delta), delta.clone());
        prop_assert_eq!(modal_levels(&delta), modal_levels(&adequate_closure(&subformulas(&formula(a)))));
        let mut bigger = gamma.clone();
        bigger.insert(formula(b));
        prop_assert!(adequate_closure(&bigger).is_superset(&delta));
    }

    #[test]
    fn adjoin_root_preserves_validity_and_truth(mseed in any::<u64>(), fseed in any::<u64>()) {
        let whole = model(mseed);
        let m = whole.generated_submodel(mseed as usize % whole.len());
        let out = adjoin_root(&m).unwrap();
        prop_assert!(check_jstar_frame(&out.frame).is_empty());
        prop_assert!(check_strong_persistence(&out).is_empty());
        let f = formula(fseed);
        let (before, after) = (m.truth_set(&f), out.truth_set(&f));
        for w in 0..m.len() {
            prop_assert_eq!(before.contains(w), after.contains(w + 1));
        }
    }

    #[test]
    fn sigma_scheme_valid_iff_persistent(mseed in any::<u64>(), flip in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(mseed);
        let base = model(mseed);
        let m = if flip { perturb(&mut rng, &base) } else { base };
        let mut formulas: Vec<Formula> = vars().into_iter().flat_map(|v| {
            let p = Formula::Var(v);
            [Formula::neg(p.clone()), p]
        }).collect();
        formulas.extend((0..20).map(|_| random_formula_over(&mut rng, &vars(), &[0, 1, 2], 3)));
        let scheme_valid = formulas.iter().all(|phi| {
            (0..3).filter(|&n| sort_of(phi).at_most(n)).all(|n| {
                valid_in_model(&m, &Formula::implies(Formula::dia(n, phi.clone()), phi.clone()))
            })
        });
        prop_assert_eq!(scheme_valid, check_strong_persistence(&m).is_empty());
    }

    #[test]
    fn reductions_are_deterministic(seed in any::<u64>()) {
        let f = formula(seed);
        for kind in [
            ReductionKind::M,
            ReductionKind::MPlus,
            ReductionKind::N(NPlusVariant::Default),
            ReductionKind::NPlus(NPlusVariant::Default),
            ReductionKind::NPlus(NPlusVariant::Literal),
            ReductionKind::H,
            ReductionKind::RTheta,
            ReductionKind::RThetaPlus,
        ] {
            let a = render_formula(&apply_reduction(kind, &f, None));
            let b = render_formula(&apply_reduction(kind, &f.clone(), None));
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn reductions_stay_in_the_language(seed in any::<u64>(), theta in proptest::collection::btree_set(0u32..4, 0..4)) {
        let f = formula(seed);
        let mods = f.modalities();
        for g in [n_formula(&f), n_plus(&f, NPlusVariant::Default), n_plus(&f, NPlusVariant::Literal), h_formula(&f)] {
            prop_assert!(g.modalities().is_subset(&mods));
        }
        prop_assert!(r_theta(&f, &theta).modalities().is_subset(&theta));
        prop_assert!(r_theta_plus(&f, &theta).modalities().is_subset(&theta));
    }
}

#[test]
fn random_shape_formulas_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let shape = FormulaShape::default();
    for _ in 0..500 {
        let f = random_formula(&mut rng, &shape);
        assert_eq!(parse_formula(&render_formula(&f)).unwrap(), f);
    }
}
