//! Sorted polymodal formulas.
//!
//! A [`Formula`] only contains the core connectives: `T`, `F`, sorted
//! variables, negation, conjunction, disjunction and the diamonds `<n>`.
//! Implication and boxes exist only in [`RawFormula`] and disappear through
//! [`desugar`].

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Sort of a variable or formula: a natural number or `ω`.
///
/// The derived order puts every finite sort below `Omega`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sort {
    Finite(u32),
    Omega,
}

impl Sort {
    /// Successor, saturating at `ω`.
    pub fn succ(self) -> Sort {
        match self {
            Sort::Finite(n) => Sort::Finite(n + 1),
            Sort::Omega => Sort::Omega,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Sort::Finite(_))
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Sort::Finite(n) => Some(n),
            Sort::Omega => None,
        }
    }

    /// `self ≤ n` for a modality index `n`; never true for `ω`.
    pub fn at_most(self, n: u32) -> bool {
        matches!(self, Sort::Finite(k) if k <= n)
    }

    /// `self < n` for a modality index `n`; never true for `ω`.
    pub fn below(self, n: u32) -> bool {
        matches!(self, Sort::Finite(k) if k < n)
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Finite(n) => write!(f, "{n}"),
            Sort::Omega => f.write_str("w"),
        }
    }
}

/// A propositional variable together with its sort.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var {
    pub name: String,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: Sort) -> Self {
        Var { name: name.into(), sort }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.sort)
    }
}

/// Core formula syntax. Structural equality is formula identity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Top,
    Bot,
    Var(Var),
    Neg(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Dia(u32, Box<Formula>),
}

/// A finite set of formulas ordered structurally.
pub type FormulaSet = BTreeSet<Formula>;

impl Formula {
    pub fn var(name: impl Into<String>, sort: Sort) -> Formula {
        Formula::Var(Var::new(name, sort))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(f: Formula) -> Formula {
        Formula::Neg(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn dia(n: u32, f: Formula) -> Formula {
        Formula::Dia(n, Box::new(f))
    }

    /// `a -> b`, encoded as `~a | b`.
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::neg(a), b)
    }

    /// `[n]f`, encoded as `~<n>~f`.
    pub fn boxed(n: u32, f: Formula) -> Formula {
        Formula::neg(Formula::dia(n, Formula::neg(f)))
    }

    /// Left-nested conjunction; the empty conjunction is `T`.
    pub fn conj<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        let mut iter = items.into_iter();
        match iter.next() {
            None => Formula::Top,
            Some(first) => iter.fold(first, Formula::and),
        }
    }

    /// Recognizes `~a | b` as an implication.
    pub fn as_implication(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::Or(l, r) => match l.as_ref() {
                Formula::Neg(a) => Some((a, r)),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn is_boolean(&self) -> bool {
        matches!(
            self,
            Formula::Top | Formula::Bot | Formula::Neg(_) | Formula::And(..) | Formula::Or(..)
        )
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Top | Formula::Bot | Formula::Var(_) => 1,
            Formula::Neg(a) | Formula::Dia(_, a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Top | Formula::Bot | Formula::Var(_) => 0,
            Formula::Neg(a) | Formula::Dia(_, a) => 1 + a.depth(),
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Preorder traversal, left child first.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Top | Formula::Bot | Formula::Var(_) => {}
            Formula::Neg(a) | Formula::Dia(_, a) => a.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Distinct variables in order of first occurrence.
    pub fn variables(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        self.visit(&mut |g| {
            if let Formula::Var(v) = g {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        });
        out
    }

    /// Modality indices occurring anywhere in the formula.
    pub fn modalities(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.visit(&mut |g| {
            if let Formula::Dia(n, _) = g {
                out.insert(*n);
            }
        });
        out
    }

    /// Returns the same formula with every variable's sort replaced.
    pub fn map_vars(&self, f: &impl Fn(&Var) -> Var) -> Formula {
        match self {
            Formula::Top => Formula::Top,
            Formula::Bot => Formula::Bot,
            Formula::Var(v) => Formula::Var(f(v)),
            Formula::Neg(a) => Formula::neg(a.map_vars(f)),
            Formula::And(a, b) => Formula::and(a.map_vars(f), b.map_vars(f)),
            Formula::Or(a, b) => Formula::or(a.map_vars(f), b.map_vars(f)),
            Formula::Dia(n, a) => Formula::dia(*n, a.map_vars(f)),
        }
    }
}

/// Surface-level formula that may still contain `->` and `[n]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawFormula {
    Top,
    Bot,
    Var(Var),
    Neg(Box<RawFormula>),
    And(Box<RawFormula>, Box<RawFormula>),
    Or(Box<RawFormula>, Box<RawFormula>),
    Imp(Box<RawFormula>, Box<RawFormula>),
    Dia(u32, Box<RawFormula>),
    Box(u32, Box<RawFormula>),
}

impl From<&Formula> for RawFormula {
    fn from(f: &Formula) -> Self {
        match f {
            Formula::Top => RawFormula::Top,
            Formula::Bot => RawFormula::Bot,
            Formula::Var(v) => RawFormula::Var(v.clone()),
            Formula::Neg(a) => RawFormula::Neg(Box::new(a.as_ref().into())),
            Formula::And(a, b) => {
                RawFormula::And(Box::new(a.as_ref().into()), Box::new(b.as_ref().into()))
            }
            Formula::Or(a, b) => {
                RawFormula::Or(Box::new(a.as_ref().into()), Box::new(b.as_ref().into()))
            }
            Formula::Dia(n, a) => RawFormula::Dia(*n, Box::new(a.as_ref().into())),
        }
    }
}

/// Eliminates `->` and `[n]`: `a -> b` becomes `~a | b`, `[n]a` becomes `~<n>~a`.
pub fn desugar(raw: &RawFormula) -> Formula {
    match raw {
        RawFormula::Top => Formula::Top,
        RawFormula::Bot => Formula::Bot,
        RawFormula::Var(v) => Formula::Var(v.clone()),
        RawFormula::Neg(a) => Formula::neg(desugar(a)),
        RawFormula::And(a, b) => Formula::and(desugar(a), desugar(b)),
        RawFormula::Or(a, b) => Formula::or(desugar(a), desugar(b)),
        RawFormula::Imp(a, b) => Formula::implies(desugar(a), desugar(b)),
        RawFormula::Dia(n, a) => Formula::dia(*n, desugar(a)),
        RawFormula::Box(n, a) => Formula::boxed(*n, desugar(a)),
    }
}

/// Sort of a formula: constants have sort 0, binary connectives take the
/// maximum, negation the (saturating) successor and `<n>` has sort `n`.
pub fn sort_of(f: &Formula) -> Sort {
    match f {
        Formula::Top | Formula::Bot => Sort::Finite(0),
        Formula::Var(v) => v.sort,
        Formula::Neg(a) => sort_of(a).succ(),
        Formula::And(a, b) | Formula::Or(a, b) => sort_of(a).max(sort_of(b)),
        Formula::Dia(n, _) => Sort::Finite(*n),
    }
}

/// Strips one outer negation if present, otherwise adds one.
pub fn modified_negation(f: &Formula) -> Formula {
    match f {
        Formula::Neg(a) => a.as_ref().clone(),
        other => Formula::neg(other.clone()),
    }
}

pub fn subformulas(f: &Formula) -> FormulaSet {
    let mut out = FormulaSet::new();
    f.visit(&mut |g| {
        out.insert(g.clone());
    });
    out
}

/// Distinct subformulas `<k>ψ` as `(k, ψ)` in leftmost-outermost order.
pub fn diamond_subformulas(f: &Formula) -> Vec<(u32, Formula)> {
    let mut seen: BTreeSet<&Formula> = BTreeSet::new();
    let mut out = Vec::new();
    f.visit(&mut |g| {
        if let Formula::Dia(k, body) = g {
            if seen.insert(g) {
                out.push((*k, body.as_ref().clone()));
            }
        }
    });
    out
}

/// [`diamond_subformulas`] stably sorted by modality index.
pub fn diamond_subformulas_by_level(f: &Formula) -> Vec<(u32, Formula)> {
    let mut list = diamond_subformulas(f);
    list.sort_by_key(|(k, _)| *k);
    list
}

/// Indices `n` such that some member of the set is itself of the form `<n>φ`.
pub fn modal_levels<'a, I>(set: I) -> BTreeSet<u32>
where
    I: IntoIterator<Item = &'a Formula>,
{
    set.into_iter()
        .filter_map(|f| match f {
            Formula::Dia(n, _) => Some(*n),
            _ => None,
        })
        .collect()
}

/// Least adequate superset of `gamma`.
///
/// Adds `T`, then closes under subformulas, modified negation, and the three
/// level rules: every diamond body appears under every level present, and
/// finitely sorted variables (and their negations) are lifted to the levels
/// at or above their sort.
pub fn adequate_closure(gamma: &FormulaSet) -> FormulaSet {
    let mut delta: FormulaSet = gamma.clone();
    delta.insert(Formula::Top);
    loop {
        let mut next = FormulaSet::new();
        for f in &delta {
            f.visit(&mut |g| {
                next.insert(g.clone());
            });
        }
        let snapshot: Vec<Formula> = next.iter().cloned().collect();
        for f in &snapshot {
            next.insert(modified_negation(f));
        }
        let levels = modal_levels(&next);
        let bodies: Vec<Formula> = next
            .iter()
            .filter_map(|f| match f {
                Formula::Dia(_, b) => Some(b.as_ref().clone()),
                _ => None,
            })
            .collect();
        for body in &bodies {
            for &m in &levels {
                next.insert(Formula::dia(m, body.clone()));
            }
        }
        let snapshot: Vec<Formula> = next.iter().cloned().collect();
        for f in &snapshot {
            match f {
                Formula::Var(v) => {
                    if let Some(m) = v.sort.finite() {
                        for &n in levels.iter().filter(|&&n| n >= m) {
                            next.insert(Formula::dia(n, f.clone()));
                        }
                    }
                }
                Formula::Neg(inner) => {
                    if let Formula::Var(v) = inner.as_ref() {
                        if let Some(m) = v.sort.finite() {
                            for &n in levels.iter().filter(|&&n| n > m) {
                                next.insert(Formula::dia(n, f.clone()));
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        if next == delta {
            return delta;
        }
        delta = next;
    }
}

/// Checks each adequacy rule on `delta`; used by tests and debug assertions.
pub fn is_adequate(delta: &FormulaSet) -> bool {
    if !delta.contains(&Formula::Top) {
        return false;
    }
    let levels = modal_levels(delta);
    for f in delta {
        let mut closed = true;
        f.visit(&mut |g| closed &= delta.contains(g));
        if !closed || !delta.contains(&modified_negation(f)) {
            return false;
        }
        match f {
            Formula::Dia(_, body) => {
                if levels.iter().any(|&m| !delta.contains(&Formula::dia(m, body.as_ref().clone()))) {
                    return false;
                }
            }
            Formula::Var(v) => {
                if let Some(m) = v.sort.finite() {
                    if levels
                        .iter()
                        .any(|&n| n >= m && !delta.contains(&Formula::dia(n, f.clone())))
                    {
                        return false;
                    }
                }
            }
            Formula::Neg(inner) => {
                if let Formula::Var(v) = inner.as_ref() {
                    if let Some(m) = v.sort.finite() {
                        if levels
                            .iter()
                            .any(|&n| n > m && !delta.contains(&Formula::dia(n, f.clone())))
                        {
                            return false;
                        }
                    }
                }
            }
            _ => {}
        }
    }
    true
}

/// Assigns sort `ω` to every variable.
pub fn to_omega_sorted(f: &Formula) -> Formula {
    f.map_vars(&|v| Var::new(v.name.clone(), Sort::Omega))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: u32) -> Formula {
        Formula::var("p", Sort::Finite(s))
    }

    fn q(s: u32) -> Formula {
        Formula::var("q", Sort::Finite(s))
    }

    #[test]
    fn desugar_box_and_implication() {
        let boxed = RawFormula::Box(0, Box::new(RawFormula::Var(Var::new("p", Sort::Finite(0)))));
        assert_eq!(desugar(&boxed), Formula::neg(Formula::dia(0, Formula::neg(p(0)))));
        let imp = RawFormula::Imp(
            Box::new(RawFormula::Var(Var::new("p", Sort::Finite(0)))),
            Box::new(RawFormula::Var(Var::new("q", Sort::Finite(1)))),
        );
        assert_eq!(desugar(&imp), Formula::or(Formula::neg(p(0)), q(1)));
        assert_eq!(desugar(&RawFormula::from(&p(0))), p(0));
    }

    #[test]
    fn sorts() {
        assert_eq!(sort_of(&Formula::dia(3, p(5))), Sort::Finite(3));
        assert_eq!(sort_of(&Formula::neg(p(2))), Sort::Finite(3));
        let pw = Formula::var("p", Sort::Omega);
        assert_eq!(sort_of(&Formula::and(pw.clone(), q(1))), Sort::Omega);
        assert_eq!(sort_of(&Formula::neg(pw)), Sort::Omega);
        assert_eq!(sort_of(&Formula::Top), Sort::Finite(0));
        assert!(Sort::Finite(1_000_000) < Sort::Omega);
    }

    #[test]
    fn modified_negation_cases() {
        assert_eq!(modified_negation(&Formula::neg(p(0))), p(0));
        assert_eq!(modified_negation(&p(0)), Formula::neg(p(0)));
        let d = Formula::dia(1, p(0));
        assert_eq!(modified_negation(&d), Formula::neg(d.clone()));
    }

    #[test]
    fn subformula_sets() {
        let d = Formula::dia(1, p(0));
        assert_eq!(subformulas(&d), [d.clone(), p(0)].into_iter().collect());
        let c = Formula::and(p(0), Formula::neg(p(0)));
        assert_eq!(subformulas(&c).len(), 3);
        assert_eq!(subformulas(&Formula::Top), [Formula::Top].into_iter().collect());
    }

    #[test]
    fn diamond_enumerations() {
        let f = Formula::and(Formula::dia(2, p(0)), Formula::dia(0, q(0)));
        assert_eq!(diamond_subformulas(&f), vec![(2, p(0)), (0, q(0))]);
        assert_eq!(diamond_subformulas_by_level(&f), vec![(0, q(0)), (2, p(0))]);
        assert!(diamond_subformulas(&p(0)).is_empty());
        let nested = Formula::dia(1, Formula::dia(0, p(0)));
        assert_eq!(
            diamond_subformulas(&nested),
            vec![(1, Formula::dia(0, p(0))), (0, p(0))]
        );
        // repeated subformulas are listed once
        let twice = Formula::and(Formula::dia(0, p(0)), Formula::dia(0, p(0)));
        assert_eq!(diamond_subformulas(&twice).len(), 1);
    }

    #[test]
    fn levels_are_top_level_only() {
        let set: FormulaSet = [Formula::dia(0, p(0)), Formula::dia(2, q(0)), Formula::var("r", Sort::Omega)]
            .into_iter()
            .collect();
        assert_eq!(modal_levels(&set), [0, 2].into_iter().collect());
        assert!(modal_levels(&FormulaSet::new()).is_empty());
        let negated: FormulaSet = [Formula::neg(Formula::dia(1, p(0)))].into_iter().collect();
        assert!(modal_levels(&negated).is_empty());
    }

    #[test]
    fn closure_of_single_diamond() {
        let gamma: FormulaSet = [Formula::dia(1, p(0))].into_iter().collect();
        let delta = adequate_closure(&gamma);
        let expected: FormulaSet = [
            Formula::Top,
            Formula::neg(Formula::Top),
            p(0),
            Formula::neg(p(0)),
            Formula::dia(1, p(0)),
            Formula::neg(Formula::dia(1, p(0))),
            Formula::dia(1, Formula::neg(p(0))),
            Formula::neg(Formula::dia(1, Formula::neg(p(0)))),
        ]
        .into_iter()
        .collect();
        assert_eq!(delta, expected);
        assert!(is_adequate(&delta));
    }

    #[test]
    fn closure_without_levels() {
        let delta = adequate_closure(&[p(0)].into_iter().collect());
        let expected: FormulaSet = [Formula::Top, Formula::neg(Formula::Top), p(0), Formula::neg(p(0))]
            .into_iter()
            .collect();
        assert_eq!(delta, expected);
        let top = adequate_closure(&[Formula::Top].into_iter().collect());
        assert_eq!(top.len(), 2);
    }

    #[test]
    fn omega_embedding() {
        let f = Formula::dia(0, p(2));
        assert_eq!(to_omega_sorted(&f), Formula::dia(0, Formula::var("p", Sort::Omega)));
        assert_eq!(to_omega_sorted(&Formula::Top), Formula::Top);
    }

    #[test]
    fn conj_shapes() {
        assert_eq!(Formula::conj(Vec::new()), Formula::Top);
        assert_eq!(Formula::conj(vec![p(0)]), p(0));
        assert_eq!(
            Formula::conj(vec![p(0), q(0), p(1)]),
            Formula::and(Formula::and(p(0), q(0)), p(1))
        );
    }
}
