//! Decision procedures for J*, GLP*, GLP and GLPS*.
//!
//! J* is decided through the canonical model over an adequate set whose
//! worlds are Hintikka sets (locally coherent maximal subsets) that survive
//! witness elimination. The other systems reduce to J*.
//!
//! Two engines compute the same survivors. [`Engine::Full`] enumerates every
//! candidate and eliminates in synchronous rounds; [`Engine::Lazy`] (the
//! default) explores only the worlds needed to witness the goal.

mod closure;
mod lazy;
pub mod sat;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::bitset::WorldSet;
use crate::formula::{adequate_closure, modified_negation, subformulas, to_omega_sorted, Formula, FormulaSet, Sort};
use crate::kripke::{
    find_roots, validate_model, KripkeFrame, KripkeModel, RootMode,
};
use crate::reductions::{h_formula, m_plus, n_plus, NPlusVariant};

use closure::Closure;
use lazy::LazySearch;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SystemId {
    Jstar,
    GLPstar,
    GLP,
    GLPSstar,
}

impl SystemId {
    pub const ALL: [SystemId; 4] = [SystemId::Jstar, SystemId::GLPstar, SystemId::GLP, SystemId::GLPSstar];

    pub fn name(self) -> &'static str {
        match self {
            SystemId::Jstar => "jstar",
            SystemId::GLPstar => "glpstar",
            SystemId::GLP => "glp",
            SystemId::GLPSstar => "glpsstar",
        }
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown system `{0}` (expected jstar, glpstar, glp or glpsstar)")]
pub struct UnknownSystem(pub String);

impl FromStr for SystemId {
    type Err = UnknownSystem;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jstar" | "j*" => Ok(SystemId::Jstar),
            "glpstar" | "glp*" => Ok(SystemId::GLPstar),
            "glp" => Ok(SystemId::GLP),
            "glpsstar" | "glps*" => Ok(SystemId::GLPSstar),
            _ => Err(UnknownSystem(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Theorem,
    NonTheorem {
        /// Rooted, validated model whose root falsifies `falsified`.
        countermodel: KripkeModel,
        /// The J*-level formula that was refuted.
        falsified: Formula,
    },
}

impl Verdict {
    pub fn is_theorem(&self) -> bool {
        matches!(self, Verdict::Theorem)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("resource limit exceeded: more than {limit} {what}")]
    ResourceLimit { what: &'static str, limit: usize },
    #[error("variable `{name}` occurs with sorts {first} and {second}")]
    IllSorted { name: String, first: Sort, second: Sort },
}

/// Which premise reduces GLP* to J*.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Via {
    #[default]
    MPlus,
    NPlus(NPlusVariant),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Engine {
    #[default]
    Lazy,
    Full,
}

#[derive(Clone, Debug)]
pub struct DecideOptions {
    pub via: Via,
    pub engine: Engine,
    /// Cap on enumerated Hintikka candidates (full engine).
    pub max_candidates: usize,
    /// Cap on SAT queries (lazy engine).
    pub max_sat_calls: usize,
    pub minimize: bool,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            via: Via::MPlus,
            engine: Engine::Lazy,
            max_candidates: 1 << 20,
            max_sat_calls: 1 << 20,
            minimize: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RoundStats {
    pub candidates: usize,
    pub survivors: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LazyStats {
    pub sat_calls: usize,
    pub witness_queries: usize,
    pub memo_hits: usize,
    pub blocking_clauses: usize,
    pub conflicts: u64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DecideStats {
    pub closure_size: usize,
    pub levels: Vec<u32>,
    /// Full engine: one entry per elimination round.
    pub rounds: Vec<RoundStats>,
    /// Lazy engine counters.
    pub lazy: Option<LazyStats>,
    pub countermodel_worlds_before_minimization: Option<usize>,
    pub countermodel_worlds: Option<usize>,
    #[serde(serialize_with = "as_millis")]
    pub elapsed: Duration,
}

fn as_millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1000.0)
}

#[derive(Clone, Debug)]
pub struct Decision {
    pub verdict: Verdict,
    /// The J*-level formula that was decided.
    pub target: Formula,
    pub stats: DecideStats,
}

/// A Hintikka set over an adequate set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HintikkaWorld {
    members: FormulaSet,
}

impl HintikkaWorld {
    pub fn new(members: FormulaSet) -> Self {
        HintikkaWorld { members }
    }

    pub fn members(&self) -> &FormulaSet {
        &self.members
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.members.contains(f)
    }
}

/// The canonical model built from an adequate set.
#[derive(Clone, Debug)]
pub struct CanonicalModel {
    pub model: KripkeModel,
    /// Surviving worlds, index-aligned with the model's worlds.
    pub worlds: Vec<HintikkaWorld>,
    pub candidates: usize,
    pub rounds: Vec<RoundStats>,
}

/// All Hintikka sets over `delta` (which must be adequate).
pub fn hintikka_candidates(delta: &FormulaSet) -> Vec<HintikkaWorld> {
    let cl = Closure::new(delta);
    cl.candidates(usize::MAX)
        .expect("uncapped")
        .iter()
        .map(|x| HintikkaWorld::new(cl.members(x)))
        .collect()
}

/// Canonical accessibility `x R_n y` over `delta`; always false when `n` is
/// not the level of a diamond in `delta`.
pub fn canonical_relation(delta: &FormulaSet, x: &HintikkaWorld, y: &HintikkaWorld, n: u32) -> bool {
    let cl = Closure::new(delta);
    cl.related(&cl.to_bits(&x.members), &cl.to_bits(&y.members), n)
}

pub fn build_canonical(delta: &FormulaSet) -> CanonicalModel {
    try_build_canonical(delta, usize::MAX).expect("uncapped")
}

pub fn try_build_canonical(delta: &FormulaSet, max_candidates: usize) -> Result<CanonicalModel, DecideError> {
    let cl = Closure::new(delta);
    build_from_closure(&cl, max_candidates)
}

fn build_from_closure(cl: &Closure, max_candidates: usize) -> Result<CanonicalModel, DecideError> {
    let candidates = cl
        .candidates(max_candidates)
        .map_err(|limit| DecideError::ResourceLimit { what: "Hintikka candidates", limit })?;
    let total = candidates.len();
    let mut alive = vec![true; total];
    let mut rounds = Vec::new();
    loop {
        let before = alive.iter().filter(|&&a| a).count();
        // round-synchronous: decisions read the survivor set fixed at round start
        let doomed: Vec<usize> = (0..total)
            .filter(|&i| alive[i])
            .filter(|&i| {
                let x = &candidates[i];
                cl.diamonds_at(x).any(|d| {
                    let n = cl.dia_level[d].expect("diamond");
                    let body = cl.dia_body[d].expect("diamond");
                    !(0..total).any(|j| alive[j] && candidates[j].contains(body) && cl.related(x, &candidates[j], n))
                })
            })
            .collect();
        for &i in &doomed {
            alive[i] = false;
        }
        rounds.push(RoundStats { candidates: before, survivors: before - doomed.len() });
        if doomed.is_empty() {
            break;
        }
    }
    let survivors: Vec<WorldSet> = (0..total).filter(|&i| alive[i]).map(|i| candidates[i].clone()).collect();
    let model = assemble(cl, &survivors, "x");
    if cfg!(debug_assertions) {
        if let Err((w, f)) = truth_lemma_failure(cl, &model, &survivors) {
            panic!("truth lemma fails at world {w} for {f}");
        }
    }
    let worlds = survivors.iter().map(|x| HintikkaWorld::new(cl.members(x))).collect();
    Ok(CanonicalModel { model, worlds, candidates: total, rounds })
}

/// Model on the given worlds with canonical relations and membership valuation.
fn assemble(cl: &Closure, worlds: &[WorldSet], prefix: &str) -> KripkeModel {
    let n = worlds.len();
    let names: Vec<String> = (0..n).map(|i| format!("{prefix}{i}")).collect();
    let mut model = match KripkeFrame::new(names) {
        Ok(mut frame) => {
            for &k in &cl.levels {
                for (i, x) in worlds.iter().enumerate() {
                    for (j, y) in worlds.iter().enumerate() {
                        if i != j && cl.related(x, y, k) {
                            frame.add_edge(k, i, j);
                        }
                    }
                }
            }
            KripkeModel::new(frame)
        }
        Err(_) => return empty_model(),
    };
    for (idx, f) in cl.formulas.iter().enumerate() {
        if let Formula::Var(v) = f {
            let truth = WorldSet::from_indices(n, (0..n).filter(|&i| worlds[i].contains(idx)));
            model.set_truth_set(v, truth).expect("closure variables are well sorted");
        }
    }
    model
}

/// Stand-in for a canonical model without worlds (frames need one world).
fn empty_model() -> KripkeModel {
    KripkeModel::new(KripkeFrame::with_size(1)).restrict(&WorldSet::empty(1))
}

fn truth_lemma_failure(cl: &Closure, model: &KripkeModel, worlds: &[WorldSet]) -> Result<(), (String, Formula)> {
    if worlds.is_empty() {
        return Ok(());
    }
    for (idx, f) in cl.formulas.iter().enumerate() {
        let truth = model.truth_set(f);
        for (w, x) in worlds.iter().enumerate() {
            if truth.contains(w) != x.contains(idx) {
                return Err((model.frame.world_name(w).to_string(), f.clone()));
            }
        }
    }
    Ok(())
}

/// Checks membership ⟺ satisfaction for every formula of the adequate set at
/// every world of `canonical`.
pub fn check_truth_lemma(canonical: &CanonicalModel) -> Result<(), (String, Formula)> {
    for (w, x) in canonical.worlds.iter().enumerate() {
        for f in x.members() {
            if !canonical.model.truth_set(f).contains(w) {
                return Err((canonical.model.frame.world_name(w).to_string(), f.clone()));
            }
            let neg = modified_negation(f);
            if canonical.model.truth_set(&neg).contains(w) {
                return Err((canonical.model.frame.world_name(w).to_string(), neg));
            }
        }
    }
    Ok(())
}

/// The formula decided at the J* level for `system`.
pub fn reduction_target(system: SystemId, phi: &Formula, via: Via) -> Formula {
    match system {
        SystemId::Jstar => phi.clone(),
        SystemId::GLPstar => {
            let premise = match via {
                Via::MPlus => m_plus(phi),
                Via::NPlus(variant) => n_plus(phi, variant),
            };
            Formula::implies(premise, phi.clone())
        }
        SystemId::GLP => reduction_target(SystemId::GLPstar, &to_omega_sorted(phi), via),
        SystemId::GLPSstar => {
            let lifted = Formula::implies(h_formula(phi), phi.clone());
            reduction_target(SystemId::GLPstar, &lifted, via)
        }
    }
}

fn check_sorts(phi: &Formula) -> Result<(), DecideError> {
    let mut seen: BTreeMap<String, Sort> = BTreeMap::new();
    for v in phi.variables() {
        match seen.get(&v.name) {
            Some(&first) if first != v.sort => {
                return Err(DecideError::IllSorted { name: v.name, first, second: v.sort })
            }
            _ => {
                seen.insert(v.name, v.sort);
            }
        }
    }
    Ok(())
}

pub fn decide(system: SystemId, phi: &Formula) -> Result<Verdict, DecideError> {
    decide_with(system, phi, &DecideOptions::default()).map(|d| d.verdict)
}

pub fn decide_with(system: SystemId, phi: &Formula, opts: &DecideOptions) -> Result<Decision, DecideError> {
    let start = Instant::now();
    check_sorts(phi)?;
    let target = reduction_target(system, phi, opts.via);
    let goal = modified_negation(&target);
    let mut gamma: FormulaSet = subformulas(&target);
    gamma.insert(goal.clone());
    let delta = adequate_closure(&gamma);
    let cl = Closure::new(&delta);
    let goal_idx = cl.index_of(&goal).expect("goal is in its closure");
    let mut stats = DecideStats { closure_size: cl.len(), levels: cl.levels.clone(), ..Default::default() };

    let witness_worlds: Option<Vec<WorldSet>> = match opts.engine {
        Engine::Lazy => {
            let mut search = LazySearch::new(&cl, opts.max_sat_calls);
            let root = search.find_root(goal_idx);
            stats.lazy = Some(search.stats.clone());
            root?.map(|r| search.collect(r))
        }
        Engine::Full => {
            let canonical = build_from_closure(&cl, opts.max_candidates)?;
            stats.rounds = canonical.rounds.clone();
            let survivors: Vec<WorldSet> = canonical.worlds.iter().map(|w| cl.to_bits(w.members())).collect();
            survivors.iter().position(|x| x.contains(goal_idx)).map(|r| {
                let reach = canonical.model.reachable_from(r);
                let mut worlds = vec![survivors[r].clone()];
                worlds.extend(reach.iter().filter(|&w| w != r).map(|w| survivors[w].clone()));
                worlds
            })
        }
    };

    let verdict = match witness_worlds {
        None => Verdict::Theorem,
        Some(worlds) => {
            let mut model = assemble(&cl, &worlds, "w");
            model.set_root(Some(0));
            if !find_roots(&model, RootMode::OneStep).contains(&0) {
                model = crate::kripke::adjoin_root(&model).expect("root is set");
            }
            stats.countermodel_worlds_before_minimization = Some(model.len());
            if opts.minimize {
                model = minimize_countermodel(&model, &target);
            }
            let model = rename_worlds(&model);
            stats.countermodel_worlds = Some(model.len());
            assert_countermodel(&model, &target);
            Verdict::NonTheorem { countermodel: model, falsified: target.clone() }
        }
    };
    stats.elapsed = start.elapsed();
    Ok(Decision { verdict, target, stats })
}

fn assert_countermodel(model: &KripkeModel, target: &Formula) {
    let report = validate_model(model);
    assert!(report.is_empty(), "countermodel violates the frame conditions: {report}");
    let root = model.root().expect("countermodel has a root");
    assert!(!model.truth_set(target).contains(root), "countermodel root satisfies the target");
}

/// Greedily deletes non-root worlds while the root still falsifies `target`
/// and both validators pass; repeats until no single deletion works.
pub fn minimize_countermodel(model: &KripkeModel, target: &Formula) -> KripkeModel {
    let mut current = model.clone();
    let Some(_) = current.root() else {
        return current;
    };
    loop {
        let root = current.root().expect("kept");
        let mut shrunk = None;
        for w in (0..current.len()).rev().filter(|&w| w != root) {
            let mut keep = WorldSet::full(current.len());
            keep.remove(w);
            let candidate = current.restrict(&keep);
            let r = candidate.root().expect("root kept");
            if !candidate.truth_set(target).contains(r)
                && validate_model(&candidate).is_empty()
                && find_roots(&candidate, RootMode::OneStep).contains(&r)
            {
                shrunk = Some(candidate);
                break;
            }
        }
        match shrunk {
            Some(m) => current = m,
            None => return current,
        }
    }
}

/// Renames worlds to `w0, w1, …` in their current order.
fn rename_worlds(model: &KripkeModel) -> KripkeModel {
    let mut frame = KripkeFrame::with_size(model.len());
    for (k, x, y) in model.frame.all_edges() {
        frame.add_edge(k, x, y);
    }
    let mut out = KripkeModel::new(frame);
    for (name, v) in model.valuation() {
        out.set_truth_set(&crate::formula::Var::new(name.clone(), v.sort), v.worlds.clone())
            .expect("copied valuation is well sorted");
    }
    out.set_root(model.root());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Var;
    use crate::kripke::model_check;
    use crate::parser::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn closure_of(s: &str) -> FormulaSet {
        adequate_closure(&[f(s)].into_iter().collect())
    }

    fn world(items: &[&str]) -> HintikkaWorld {
        HintikkaWorld::new(items.iter().map(|s| f(s)).collect())
    }

    #[test]
    fn candidates_of_single_diamond() {
        let delta = closure_of("<1>p:0");
        let cands = hintikka_candidates(&delta);
        assert_eq!(cands.len(), 4);
        let expected = [
            world(&["T", "p:0", "<1>p:0", "~<1>~p:0"]),
            world(&["T", "p:0", "~<1>p:0", "~<1>~p:0"]),
            world(&["T", "~p:0", "~<1>p:0", "<1>~p:0"]),
            world(&["T", "~p:0", "~<1>p:0", "~<1>~p:0"]),
        ];
        for e in &expected {
            assert!(cands.contains(e), "missing {e:?}");
        }
    }

    #[test]
    fn trivial_candidates() {
        let top: FormulaSet = [Formula::Top, Formula::neg(Formula::Top)].into_iter().collect();
        assert_eq!(hintikka_candidates(&top), vec![world(&["T"])]);
        let mut with_p = top.clone();
        with_p.insert(f("p:0"));
        with_p.insert(f("~p:0"));
        assert_eq!(hintikka_candidates(&with_p).len(), 2);
    }

    #[test]
    fn relation_examples() {
        let delta = closure_of("<1>p:0");
        let x = world(&["T", "p:0", "<1>p:0", "~<1>~p:0"]);
        let y = world(&["T", "p:0", "~<1>p:0", "~<1>~p:0"]);
        assert!(canonical_relation(&delta, &x, &y, 1));
        assert!(!canonical_relation(&delta, &x, &x, 1));
        assert!(!canonical_relation(&delta, &x, &y, 0));
    }

    #[test]
    fn canonical_examples() {
        let c = build_canonical(&closure_of("<1>p:0"));
        assert_eq!(c.worlds.len(), 4);
        assert_eq!(c.rounds.len(), 1);
        assert!(validate_model(&c.model).is_empty());
        check_truth_lemma(&c).unwrap();

        let top: FormulaSet = [Formula::Top, Formula::neg(Formula::Top)].into_iter().collect();
        let c = build_canonical(&top);
        assert_eq!(c.worlds.len(), 1);
        assert!(c.model.frame.all_edges().is_empty());

        let c = build_canonical(&closure_of("<0>F"));
        assert!(c.worlds.iter().all(|w| !w.contains(&f("<0>F"))));
    }

    #[test]
    fn decide_examples() {
        assert_eq!(decide(SystemId::GLPstar, &f("<1>p:1 -> p:1")), Ok(Verdict::Theorem));
        assert_eq!(decide(SystemId::GLPstar, &f("<1>p -> <0>p")), Ok(Verdict::Theorem));
        assert_eq!(decide(SystemId::GLPstar, &f("<0><1>p -> <0>p")), Ok(Verdict::Theorem));
        assert_eq!(decide(SystemId::GLPSstar, &f("<0>T")), Ok(Verdict::Theorem));
        assert!(!decide(SystemId::GLPstar, &f("<0>T")).unwrap().is_theorem());
        assert!(!decide(SystemId::GLPstar, &f("<0>p:2 -> p:2")).unwrap().is_theorem());
    }

    #[test]
    fn monotonicity_fails_in_jstar() {
        let Verdict::NonTheorem { countermodel, falsified } = decide(SystemId::Jstar, &f("<1>p -> <0>p")).unwrap() else {
            panic!("expected a countermodel");
        };
        assert_eq!(countermodel.len(), 2);
        assert_eq!(countermodel.frame.all_edges(), vec![(1, 0, 1)]);
        let p = Var::new("p", Sort::Omega);
        assert_eq!(countermodel.var_truth(&p).iter().collect::<Vec<_>>(), vec![1]);
        assert!(!model_check(&countermodel, "w0", &falsified).unwrap());
    }

    #[test]
    fn engines_agree() {
        for s in ["<1>p -> <0>p", "<0><1>p -> <0>p", "<0>p:0 -> p:0", "[0]([0]p -> p) -> [0]p", "<1>~<0>q:0 -> ~<0>q:0"] {
            let phi = f(s);
            let lazy = decide_with(SystemId::Jstar, &phi, &DecideOptions::default()).unwrap();
            let full = decide_with(SystemId::Jstar, &phi, &DecideOptions { engine: Engine::Full, ..Default::default() })
                .unwrap();
            assert_eq!(lazy.verdict.is_theorem(), full.verdict.is_theorem(), "{s}");
        }
    }

    #[test]
    fn ill_sorted_input_is_rejected() {
        let phi = Formula::and(Formula::var("p", Sort::Finite(0)), Formula::var("p", Sort::Finite(1)));
        assert!(matches!(decide(SystemId::Jstar, &phi), Err(DecideError::IllSorted { .. })));
    }

    #[test]
    fn candidate_cap_is_an_error() {
        let delta = closure_of("p & q & r");
        assert!(matches!(try_build_canonical(&delta, 3), Err(DecideError::ResourceLimit { .. })));
    }
}
