//! Cross-checks of the decision procedures against each other, the
//! reductions and the proof corpus.

use std::path::PathBuf;

use glpstar_core::decide::{decide_with, DecideOptions, Engine, Via};
use glpstar_core::formula::{Formula, Sort, Var};
use glpstar_core::kripke::{validate_model, RootMode};
use glpstar_core::proofs::{check_proof, parse_proof};
use glpstar_core::reductions::{m_plus, n_plus, r_theta_plus, NPlusVariant};
use glpstar_core::testgen::{random_formula, random_formula_over, FormulaShape};
use glpstar_core::{decide, find_roots, SystemId, Verdict};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn theorem(system: SystemId, phi: &Formula) -> bool {
    decide(system, phi).unwrap().is_theorem()
}

fn iff(a: Formula, b: Formula) -> Formula {
    Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
}

#[test]
fn lazy_and_full_engines_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let shape = FormulaShape { max_depth: 3, ..Default::default() };
    let full = DecideOptions { engine: Engine::Full, ..Default::default() };
    let lazy = DecideOptions::default();
    for _ in 0..150 {
        let phi = random_formula(&mut rng, &shape);
        let a = decide_with(SystemId::Jstar, &phi, &lazy).unwrap();
        let b = decide_with(SystemId::Jstar, &phi, &full).unwrap();
        assert_eq!(a.verdict.is_theorem(), b.verdict.is_theorem(), "{phi}");
    }
}

#[test]
fn countermodels_are_rooted_valid_and_falsifying() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let shape = FormulaShape::default();
    for i in 0..200 {
        let phi = random_formula(&mut rng, &shape);
        let system = SystemId::ALL[i % 4];
        if let Verdict::NonTheorem { countermodel, falsified } = decide(system, &phi).unwrap() {
            assert!(validate_model(&countermodel).is_empty());
            let root = countermodel.root().unwrap();
            assert!(find_roots(&countermodel, RootMode::OneStep).contains(&root));
            assert!(!countermodel.truth_set(&falsified).contains(root), "{system} {phi}");
        }
    }
}

#[test]
fn via_n_plus_agrees_with_via_m_plus() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let shape = FormulaShape::default();
    let n = DecideOptions { via: Via::NPlus(NPlusVariant::Default), ..Default::default() };
    for _ in 0..150 {
        let phi = random_formula(&mut rng, &shape);
        let a = theorem(SystemId::GLPstar, &phi);
        let b = decide_with(SystemId::GLPstar, &phi, &n).unwrap().verdict.is_theorem();
        assert_eq!(a, b, "{phi}");
    }
}

#[test]
fn glp_star_theorems_are_glps_star_theorems() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let shape = FormulaShape::default();
    let mut seen = 0;
    for _ in 0..300 {
        let phi = random_formula(&mut rng, &shape);
        if theorem(SystemId::GLPstar, &phi) {
            seen += 1;
            assert!(theorem(SystemId::GLPSstar, &phi), "{phi}");
        }
    }
    assert!(seen > 10);
}

#[test]
fn reduction_premises_are_glp_star_theorems() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let shape = FormulaShape::default();
    for _ in 0..100 {
        let phi = random_formula(&mut rng, &shape);
        assert!(theorem(SystemId::GLPstar, &m_plus(&phi)), "M+ of {phi}");
        assert!(theorem(SystemId::GLPstar, &n_plus(&phi, NPlusVariant::Default)), "N+ of {phi}");
        assert!(theorem(SystemId::GLPstar, &r_theta_plus(&phi, &phi.modalities())), "R+ of {phi}");
    }
}

#[test]
fn r_theta_plus_splits_over_implication() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let vars = [Var::new("p", Sort::Finite(0)), Var::new("q", Sort::Finite(1)), Var::new("r", Sort::Finite(2))];
    for _ in 0..60 {
        let a = random_formula_over(&mut rng, &vars, &[0, 1, 2], 2);
        let b = random_formula_over(&mut rng, &vars, &[0, 1, 2], 2);
        let theta = [0, 1, 2].into_iter().collect();
        let whole = r_theta_plus(&Formula::implies(a.clone(), b.clone()), &theta);
        let split = Formula::and(r_theta_plus(&a, &theta), r_theta_plus(&b, &theta));
        assert!(theorem(SystemId::GLP, &iff(whole, split)), "{a} / {b}");
    }
}

#[test]
fn corpus_theorems_stay_theorems_under_boxes() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut checked = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        let proof = parse_proof(&text).unwrap();
        check_proof(&proof).unwrap();
        assert!(theorem(proof.system, &proof.goal));
        if proof.system == SystemId::GLPstar {
            for n in 0..3 {
                assert!(theorem(SystemId::GLPstar, &Formula::boxed(n, proof.goal.clone())), "[{n}]{}", proof.goal);
            }
            checked += 1;
        }
    }
    assert!(checked >= 3);
}
