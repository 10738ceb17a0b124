//! Finite Kripke frames and models for many-sorted polymodal logic.
//!
//! Worlds are stored by index with opaque string names. Each modality has a
//! successor set per world; modalities with no edges are not stored, so two
//! models with the same edges compare equal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::bitset::WorldSet;
use crate::formula::{Formula, Sort, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KripkeError {
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("duplicate world `{0}`")]
    DuplicateWorld(String),
    #[error("a frame needs at least one world")]
    NoWorlds,
    #[error("model has no designated root")]
    MissingRoot,
    #[error("variable `{name}` declared with sorts {first} and {second}")]
    SortConflict { name: String, first: Sort, second: Sort },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeFrame {
    worlds: Vec<String>,
    relations: BTreeMap<u32, Vec<WorldSet>>,
}

impl KripkeFrame {
    pub fn new<S: Into<String>>(worlds: impl IntoIterator<Item = S>) -> Result<Self, KripkeError> {
        let worlds: Vec<String> = worlds.into_iter().map(Into::into).collect();
        if worlds.is_empty() {
            return Err(KripkeError::NoWorlds);
        }
        let mut seen = BTreeSet::new();
        for w in &worlds {
            if !seen.insert(w.as_str()) {
                return Err(KripkeError::DuplicateWorld(w.clone()));
            }
        }
        Ok(KripkeFrame { worlds, relations: BTreeMap::new() })
    }

    /// Frame with worlds named `w0, w1, ...`.
    pub fn with_size(n: usize) -> Self {
        Self::new((0..n).map(|i| format!("w{i}"))).expect("distinct generated names")
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn world_name(&self, i: usize) -> &str {
        &self.worlds[i]
    }

    pub fn world_index(&self, name: &str) -> Result<usize, KripkeError> {
        self.worlds
            .iter()
            .position(|w| w == name)
            .ok_or_else(|| KripkeError::UnknownWorld(name.to_string()))
    }

    pub fn add_edge(&mut self, modality: u32, x: usize, y: usize) {
        let n = self.worlds.len();
        let rel = self
            .relations
            .entry(modality)
            .or_insert_with(|| vec![WorldSet::empty(n); n]);
        rel[x].insert(y);
    }

    pub fn has_edge(&self, modality: u32, x: usize, y: usize) -> bool {
        self.relations.get(&modality).is_some_and(|r| r[x].contains(y))
    }

    /// Successors of `x` along `R_modality`, if that relation is nonempty.
    pub fn successors(&self, modality: u32, x: usize) -> Option<&WorldSet> {
        self.relations.get(&modality).map(|r| &r[x])
    }

    /// Modalities with at least one edge, ascending.
    pub fn modalities(&self) -> impl Iterator<Item = u32> + '_ {
        self.relations.keys().copied()
    }

    pub fn edges(&self, modality: u32) -> Vec<(usize, usize)> {
        match self.relations.get(&modality) {
            None => Vec::new(),
            Some(rel) => rel
                .iter()
                .enumerate()
                .flat_map(|(x, succ)| succ.iter().map(move |y| (x, y)))
                .collect(),
        }
    }

    pub fn all_edges(&self) -> Vec<(u32, usize, usize)> {
        self.modalities()
            .flat_map(|n| self.edges(n).into_iter().map(move |(x, y)| (n, x, y)))
            .collect()
    }

    /// Keeps the worlds in `keep` (in their current order) and the edges among them.
    /// Returns the new frame and the old-index → new-index map.
    pub fn restrict(&self, keep: &WorldSet) -> (KripkeFrame, Vec<Option<usize>>) {
        let mut map = vec![None; self.worlds.len()];
        let mut names = Vec::new();
        for i in keep.iter().filter(|&i| i < self.worlds.len()) {
            map[i] = Some(names.len());
            names.push(self.worlds[i].clone());
        }
        let mut frame = KripkeFrame { worlds: names, relations: BTreeMap::new() };
        for (n, x, y) in self.all_edges() {
            if let (Some(a), Some(b)) = (map[x], map[y]) {
                frame.add_edge(n, a, b);
            }
        }
        (frame, map)
    }
}

/// Truth set of one variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarValuation {
    pub sort: Sort,
    pub worlds: WorldSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    pub frame: KripkeFrame,
    valuation: BTreeMap<String, VarValuation>,
    root: Option<usize>,
}

/// How [`find_roots`] reads "r reaches x".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RootMode {
    /// `r R_k x` for some `k`, or `r = x`.
    #[default]
    OneStep,
    /// `x` is reachable from `r` along any path of edges.
    Reachable,
}

impl KripkeModel {
    pub fn new(frame: KripkeFrame) -> Self {
        KripkeModel { frame, valuation: BTreeMap::new(), root: None }
    }

    pub fn len(&self) -> usize {
        self.frame.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame.is_empty()
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn set_root(&mut self, root: Option<usize>) {
        self.root = root;
    }

    pub fn root_name(&self) -> Option<&str> {
        self.root.map(|r| self.frame.world_name(r))
    }

    pub fn valuation(&self) -> &BTreeMap<String, VarValuation> {
        &self.valuation
    }

    /// Declares a variable (with an empty truth set if new).
    pub fn declare(&mut self, var: &Var) -> Result<(), KripkeError> {
        let n = self.len();
        match self.valuation.get(&var.name) {
            Some(v) if v.sort != var.sort => Err(KripkeError::SortConflict {
                name: var.name.clone(),
                first: v.sort,
                second: var.sort,
            }),
            Some(_) => Ok(()),
            None => {
                self.valuation.insert(
                    var.name.clone(),
                    VarValuation { sort: var.sort, worlds: WorldSet::empty(n) },
                );
                Ok(())
            }
        }
    }

    pub fn set_true(&mut self, var: &Var, world: usize) -> Result<(), KripkeError> {
        self.declare(var)?;
        self.valuation.get_mut(&var.name).expect("declared").worlds.insert(world);
        Ok(())
    }

    pub fn set_truth_set(&mut self, var: &Var, worlds: WorldSet) -> Result<(), KripkeError> {
        self.declare(var)?;
        self.valuation.get_mut(&var.name).expect("declared").worlds = worlds;
        Ok(())
    }

    /// Worlds where `var` holds; absent or differently sorted variables hold nowhere.
    pub fn var_truth(&self, var: &Var) -> WorldSet {
        match self.valuation.get(&var.name) {
            Some(v) if v.sort == var.sort => v.worlds.clone(),
            _ => WorldSet::empty(self.len()),
        }
    }

    pub fn holds_var(&self, var: &Var, world: usize) -> bool {
        matches!(self.valuation.get(&var.name), Some(v) if v.sort == var.sort && v.worlds.contains(world))
    }

    /// Variables of `f` the valuation does not define (they are read as false).
    pub fn absent_variables(&self, f: &Formula) -> Vec<Var> {
        f.variables()
            .into_iter()
            .filter(|v| !matches!(self.valuation.get(&v.name), Some(val) if val.sort == v.sort))
            .collect()
    }

    /// The set of worlds satisfying `f`.
    pub fn truth_set(&self, f: &Formula) -> WorldSet {
        let n = self.len();
        match f {
            Formula::Top => WorldSet::full(n),
            Formula::Bot => WorldSet::empty(n),
            Formula::Var(v) => self.var_truth(v),
            Formula::Neg(a) => self.truth_set(a).complement(n),
            Formula::And(a, b) => {
                let mut s = self.truth_set(a);
                s.intersect_with(&self.truth_set(b));
                s
            }
            Formula::Or(a, b) => {
                let mut s = self.truth_set(a);
                s.union_with(&self.truth_set(b));
                s
            }
            Formula::Dia(k, a) => {
                let body = self.truth_set(a);
                let mut s = WorldSet::empty(n);
                for x in 0..n {
                    if self.frame.successors(*k, x).is_some_and(|succ| succ.intersects(&body)) {
                        s.insert(x);
                    }
                }
                s
            }
        }
    }

    /// Keeps only the worlds in `keep`; the root is dropped if it is removed.
    pub fn restrict(&self, keep: &WorldSet) -> KripkeModel {
        let (frame, map) = self.frame.restrict(keep);
        let n = frame.len();
        let valuation = self
            .valuation
            .iter()
            .map(|(name, v)| {
                let worlds = WorldSet::from_indices(n, v.worlds.iter().filter_map(|w| map[w]));
                (name.clone(), VarValuation { sort: v.sort, worlds })
            })
            .collect();
        KripkeModel { frame, valuation, root: self.root.and_then(|r| map[r]) }
    }

    /// Worlds reachable from `start` (including `start`).
    pub fn reachable_from(&self, start: usize) -> WorldSet {
        let mut seen = WorldSet::from_indices(self.len(), [start]);
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for n in self.frame.modalities() {
                for y in self.frame.successors(n, x).into_iter().flat_map(WorldSet::iter) {
                    if seen.insert(y) {
                        stack.push(y);
                    }
                }
            }
        }
        seen
    }

    /// The submodel generated by `start`, with `start` as its root.
    pub fn generated_submodel(&self, start: usize) -> KripkeModel {
        let keep = self.reachable_from(start);
        let mut sub = self.restrict(&keep);
        let new_root = keep.iter().position(|w| w == start);
        sub.root = new_root;
        sub
    }
}

/// One failed frame or persistence condition, with its witnesses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "kebab-case")]
pub enum Violation {
    Irreflexivity { modality: u32, world: String },
    Transitivity { modality: u32, x: String, y: String, z: String },
    /// `x R_upper y` but `z` is an `R_lower`-successor of exactly one of them.
    ConditionIi { lower: u32, upper: u32, x: String, y: String, z: String },
    /// `x R_lower y` and `y R_upper z` but not `x R_lower z`.
    ConditionIii { lower: u32, upper: u32, x: String, y: String, z: String },
    PersistenceI { variable: String, modality: u32, x: String, y: String },
    PersistenceIi { variable: String, modality: u32, x: String, y: String },
}

impl Violation {
    pub fn condition(&self) -> &'static str {
        match self {
            Violation::Irreflexivity { .. } => "irreflexivity",
            Violation::Transitivity { .. } => "transitivity",
            Violation::ConditionIi { .. } => "condition-ii",
            Violation::ConditionIii { .. } => "condition-iii",
            Violation::PersistenceI { .. } => "persistence-i",
            Violation::PersistenceIi { .. } => "persistence-ii",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Irreflexivity { modality, world } => {
                write!(f, "irreflexivity: {world} R{modality} {world}")
            }
            Violation::Transitivity { modality, x, y, z } => write!(
                f,
                "transitivity: {x} R{modality} {y} R{modality} {z} but not {x} R{modality} {z}"
            ),
            Violation::ConditionIi { lower, upper, x, y, z } => write!(
                f,
                "condition-ii: {x} R{upper} {y} but {z} is an R{lower}-successor of only one of them"
            ),
            Violation::ConditionIii { lower, upper, x, y, z } => write!(
                f,
                "condition-iii: {x} R{lower} {y} R{upper} {z} but not {x} R{lower} {z}"
            ),
            Violation::PersistenceI { variable, modality, x, y } => write!(
                f,
                "persistence-i: {x} R{modality} {y}, {y} forces {variable} but {x} does not"
            ),
            Violation::PersistenceIi { variable, modality, x, y } => write!(
                f,
                "persistence-ii: {x} R{modality} {y}, {x} forces {variable} but {y} does not"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Reports every violation of the frame conditions: irreflexive transitive
/// relations, `x R_n y ⇒ R_m(x) = R_m(y)` and `R_m ∘ R_n ⊆ R_m` for `m < n`.
pub fn check_jstar_frame(frame: &KripkeFrame) -> ViolationReport {
    let name = |i: usize| frame.world_name(i).to_string();
    let n = frame.len();
    let mods: Vec<u32> = frame.modalities().collect();
    let empty = WorldSet::empty(n);
    let succ = |k: u32, x: usize| frame.successors(k, x).unwrap_or(&empty);
    let mut out = Vec::new();

    for &k in &mods {
        for x in 0..n {
            if succ(k, x).contains(x) {
                out.push(Violation::Irreflexivity { modality: k, world: name(x) });
            }
        }
        for (x, y) in frame.edges(k) {
            for z in succ(k, y).iter() {
                if !succ(k, x).contains(z) {
                    out.push(Violation::Transitivity { modality: k, x: name(x), y: name(y), z: name(z) });
                }
            }
        }
    }
    for &upper in &mods {
        for &lower in mods.iter().filter(|&&m| m < upper) {
            for (x, y) in frame.edges(upper) {
                let (sx, sy) = (succ(lower, x), succ(lower, y));
                for z in 0..n {
                    if sx.contains(z) != sy.contains(z) {
                        out.push(Violation::ConditionIi {
                            lower,
                            upper,
                            x: name(x),
                            y: name(y),
                            z: name(z),
                        });
                    }
                }
            }
            for (x, y) in frame.edges(lower) {
                for z in succ(upper, y).iter() {
                    if !succ(lower, x).contains(z) {
                        out.push(Violation::ConditionIii {
                            lower,
                            upper,
                            x: name(x),
                            y: name(y),
                            z: name(z),
                        });
                    }
                }
            }
        }
    }
    ViolationReport { violations: out }
}

/// Reports each `(variable, edge)` pair violating strong persistence:
/// (i) `sort ≤ n`, `x R_n y`, `y ⊩ p` ⇒ `x ⊩ p`;
/// (ii) `sort < n`, `x R_n y`, `y ⊮ p` ⇒ `x ⊮ p`.
pub fn check_strong_persistence(model: &KripkeModel) -> ViolationReport {
    let frame = &model.frame;
    let mut out = Vec::new();
    for (name, val) in model.valuation() {
        for k in frame.modalities() {
            for (x, y) in frame.edges(k) {
                let (px, py) = (val.worlds.contains(x), val.worlds.contains(y));
                let var = format!("{name}:{}", val.sort);
                if val.sort.at_most(k) && py && !px {
                    out.push(Violation::PersistenceI {
                        variable: var.clone(),
                        modality: k,
                        x: frame.world_name(x).to_string(),
                        y: frame.world_name(y).to_string(),
                    });
                }
                if val.sort.below(k) && !py && px {
                    out.push(Violation::PersistenceIi {
                        variable: var,
                        modality: k,
                        x: frame.world_name(x).to_string(),
                        y: frame.world_name(y).to_string(),
                    });
                }
            }
        }
    }
    ViolationReport { violations: out }
}

/// Both validators together: frame conditions, then persistence.
pub fn validate_model(model: &KripkeModel) -> ViolationReport {
    let mut report = check_jstar_frame(&model.frame);
    report.violations.extend(check_strong_persistence(model).violations);
    report
}

pub fn model_check(model: &KripkeModel, world: &str, f: &Formula) -> Result<bool, KripkeError> {
    let x = model.frame.world_index(world)?;
    Ok(model.truth_set(f).contains(x))
}

pub fn valid_in_model(model: &KripkeModel, f: &Formula) -> bool {
    model.truth_set(f).len() == model.len()
}

pub fn find_roots(model: &KripkeModel, mode: RootMode) -> BTreeSet<usize> {
    let n = model.len();
    (0..n)
        .filter(|&r| {
            let reach = match mode {
                RootMode::OneStep => {
                    let mut s = WorldSet::from_indices(n, [r]);
                    for k in model.frame.modalities() {
                        if let Some(succ) = model.frame.successors(k, r) {
                            s.union_with(succ);
                        }
                    }
                    s
                }
                RootMode::Reachable => model.reachable_from(r),
            };
            reach.len() == n
        })
        .collect()
}

/// Adds a fresh world below the designated root: it sees every old world
/// along `R_0`, copies the root's valuation and becomes the new root.
/// Persistence carries over when every world is reachable from the root.
pub fn adjoin_root(model: &KripkeModel) -> Result<KripkeModel, KripkeError> {
    let root = model.root.ok_or(KripkeError::MissingRoot)?;
    let old = model.frame.worlds();
    let mut fresh = String::from("0");
    while old.contains(&fresh) {
        fresh.push('\'');
    }
    let mut names = vec![fresh];
    names.extend(old.iter().cloned());
    let mut frame = KripkeFrame::new(names)?;
    for (k, x, y) in model.frame.all_edges() {
        frame.add_edge(k, x + 1, y + 1);
    }
    for x in 0..old.len() {
        frame.add_edge(0, 0, x + 1);
    }
    let n = frame.len();
    let mut out = KripkeModel::new(frame);
    for (name, val) in &model.valuation {
        let mut worlds = WorldSet::from_indices(n, val.worlds.iter().map(|w| w + 1));
        if val.worlds.contains(root) {
            worlds.insert(0);
        }
        out.valuation.insert(name.clone(), VarValuation { sort: val.sort, worlds });
    }
    out.root = Some(0);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(sort: Sort) -> Var {
        Var::new("p", sort)
    }

    fn two_world(k: u32, sort: Sort, true_at: &[usize]) -> KripkeModel {
        let mut f = KripkeFrame::new(["a", "b"]).unwrap();
        f.add_edge(k, 0, 1);
        let mut m = KripkeModel::new(f);
        m.declare(&pv(sort)).unwrap();
        for &w in true_at {
            m.set_true(&pv(sort), w).unwrap();
        }
        m
    }

    #[test]
    fn reflexive_point_is_reported() {
        let mut f = KripkeFrame::new(["a"]).unwrap();
        f.add_edge(0, 0, 0);
        let r = check_jstar_frame(&f);
        assert_eq!(r.violations, vec![Violation::Irreflexivity { modality: 0, world: "a".into() }]);
    }

    #[test]
    fn condition_ii_violation() {
        let mut f = KripkeFrame::new(["a", "b", "c"]).unwrap();
        f.add_edge(1, 0, 1);
        f.add_edge(0, 0, 2);
        let r = check_jstar_frame(&f);
        assert!(r.violations.iter().any(|v| matches!(v, Violation::ConditionIi { z, .. } if z == "c")));
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn empty_relations_are_fine() {
        let f = KripkeFrame::new(["a", "b"]).unwrap();
        assert!(check_jstar_frame(&f).is_empty());
    }

    #[test]
    fn persistence_clauses() {
        let m = two_world(1, Sort::Finite(1), &[1]);
        let r = check_strong_persistence(&m);
        assert_eq!(r.len(), 1);
        assert_eq!(r.violations[0].condition(), "persistence-i");

        let m = two_world(1, Sort::Finite(0), &[0]);
        let r = check_strong_persistence(&m);
        assert_eq!(r.len(), 1);
        assert_eq!(r.violations[0].condition(), "persistence-ii");

        assert!(check_strong_persistence(&two_world(1, Sort::Omega, &[1])).is_empty());
        assert!(check_strong_persistence(&two_world(1, Sort::Omega, &[0])).is_empty());
    }

    #[test]
    fn model_checking() {
        let m = two_world(1, Sort::Omega, &[1]);
        let p = Formula::Var(pv(Sort::Omega));
        assert!(model_check(&m, "a", &Formula::dia(1, p.clone())).unwrap());
        assert!(!model_check(&m, "b", &Formula::dia(1, p.clone())).unwrap());
        assert!(model_check(&m, "a", &Formula::boxed(1, p.clone())).unwrap());
        assert!(model_check(&m, "c", &p).is_err());
        assert!(valid_in_model(&m, &Formula::Top));
        let m2 = two_world(1, Sort::Omega, &[0]);
        assert!(!valid_in_model(&m2, &p));
        // a differently sorted occurrence is absent
        let p0 = Formula::var("p", Sort::Finite(0));
        assert_eq!(m.absent_variables(&p0), vec![Var::new("p", Sort::Finite(0))]);
        assert!(!model_check(&m, "b", &p0).unwrap());
    }

    #[test]
    fn sigma_scheme_in_persistent_model() {
        // <1>p -> p with p of sort 1 on a persistent model
        let m = two_world(1, Sort::Finite(1), &[0, 1]);
        assert!(check_strong_persistence(&m).is_empty());
        let p = Formula::var("p", Sort::Finite(1));
        assert!(valid_in_model(&m, &Formula::implies(Formula::dia(1, p.clone()), p)));
    }

    #[test]
    fn roots() {
        let single = KripkeModel::new(KripkeFrame::new(["a"]).unwrap());
        assert_eq!(find_roots(&single, RootMode::OneStep), [0].into_iter().collect());
        let m = two_world(0, Sort::Omega, &[]);
        assert_eq!(find_roots(&m, RootMode::OneStep), [0].into_iter().collect());
        let none = KripkeModel::new(KripkeFrame::new(["a", "b"]).unwrap());
        assert!(find_roots(&none, RootMode::OneStep).is_empty());

        // chain a R0 b R1 c: a reaches c only through a path
        let mut f = KripkeFrame::new(["a", "b", "c"]).unwrap();
        f.add_edge(0, 0, 1);
        f.add_edge(1, 1, 2);
        let chain = KripkeModel::new(f);
        assert!(find_roots(&chain, RootMode::OneStep).is_empty());
        assert_eq!(find_roots(&chain, RootMode::Reachable), [0].into_iter().collect());
    }

    #[test]
    fn adjoin_single_world() {
        let mut m = KripkeModel::new(KripkeFrame::new(["1"]).unwrap());
        m.set_true(&pv(Sort::Omega), 0).unwrap();
        m.set_root(Some(0));
        let a = adjoin_root(&m).unwrap();
        assert_eq!(a.frame.worlds(), &["0".to_string(), "1".to_string()]);
        assert_eq!(a.frame.edges(0), vec![(0, 1)]);
        assert_eq!(a.var_truth(&pv(Sort::Omega)).iter().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(a.root(), Some(0));
    }

    #[test]
    fn adjoin_two_worlds_and_truth_preservation() {
        let mut m = two_world(1, Sort::Finite(1), &[0, 1]);
        m.set_root(Some(0));
        let a = adjoin_root(&m).unwrap();
        assert_eq!(a.frame.edges(0), vec![(0, 1), (0, 2)]);
        assert_eq!(a.frame.edges(1), vec![(1, 2)]);
        assert!(validate_model(&a).is_empty());
        let p = Formula::var("p", Sort::Finite(1));
        for f in [Formula::dia(1, p.clone()), Formula::boxed(1, Formula::neg(p.clone())), p] {
            let before = m.truth_set(&f);
            let after = a.truth_set(&f);
            for w in 0..2 {
                assert_eq!(before.contains(w), after.contains(w + 1));
            }
        }
        assert_eq!(adjoin_root(&KripkeModel::new(KripkeFrame::with_size(1))), Err(KripkeError::MissingRoot));
    }
}
