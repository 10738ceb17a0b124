//! Indexed view of an adequate set: one SAT variable per member, the
//! Hintikka constraints as CNF, and the canonical accessibility test on
//! membership bitsets.

use std::collections::{BTreeMap, HashMap};

use crate::bitset::WorldSet;
use crate::formula::{modal_levels, sort_of, Formula, FormulaSet};

use super::sat::{Lit, Solver};

pub(crate) struct Closure {
    pub formulas: Vec<Formula>,
    index: HashMap<Formula, usize>,
    pub levels: Vec<u32>,
    /// Diamond members by ascending level, then variables.
    pub atoms: Vec<usize>,
    /// Level of each diamond member (`None` for other members).
    pub dia_level: Vec<Option<u32>>,
    /// Body index of each diamond member.
    pub dia_body: Vec<Option<usize>>,
    pub dia_mask: BTreeMap<u32, WorldSet>,
    /// Diamonds at levels `≤ n`.
    pub prefix_mask: BTreeMap<u32, WorldSet>,
    /// For `x R_n y`: pairs `(<n>b, <k>b)` with `k > n`, both in the set.
    pub lifted: BTreeMap<u32, Vec<(usize, usize)>>,
    pub clauses: Vec<Vec<Lit>>,
}

impl Closure {
    pub fn new(delta: &FormulaSet) -> Closure {
        let formulas: Vec<Formula> = delta.iter().cloned().collect();
        let index: HashMap<Formula, usize> =
            formulas.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
        let n = formulas.len();
        let levels: Vec<u32> = modal_levels(delta).into_iter().collect();
        let idx = |f: &Formula| index.get(f).copied();

        let mut dia_level = vec![None; n];
        let mut dia_body = vec![None; n];
        let mut dia_mask: BTreeMap<u32, WorldSet> =
            levels.iter().map(|&k| (k, WorldSet::empty(n))).collect();
        for (i, f) in formulas.iter().enumerate() {
            if let Formula::Dia(k, body) = f {
                dia_level[i] = Some(*k);
                dia_body[i] = Some(idx(body).expect("adequate set is closed under subformulas"));
                dia_mask.get_mut(k).expect("level present").insert(i);
            }
        }
        let mut prefix_mask = BTreeMap::new();
        let mut acc = WorldSet::empty(n);
        for &k in &levels {
            acc.union_with(&dia_mask[&k]);
            prefix_mask.insert(k, acc.clone());
        }

        let mut atoms: Vec<usize> = (0..n).filter(|&i| dia_level[i].is_some()).collect();
        atoms.sort_by_key(|&i| (dia_level[i], i));
        atoms.extend((0..n).filter(|&i| matches!(formulas[i], Formula::Var(_))));

        let mut lifted: BTreeMap<u32, Vec<(usize, usize)>> = BTreeMap::new();
        for (i, f) in formulas.iter().enumerate() {
            if let Formula::Dia(k, body) = f {
                for &lower in levels.iter().filter(|&&m| m < *k) {
                    if let Some(j) = idx(&Formula::dia(lower, body.as_ref().clone())) {
                        lifted.entry(lower).or_default().push((j, i));
                    }
                }
            }
        }

        let mut clauses = Vec::new();
        for (i, f) in formulas.iter().enumerate() {
            let child = |g: &Formula| idx(g).expect("adequate set is closed under subformulas");
            match f {
                Formula::Top => clauses.push(vec![Lit::pos(i)]),
                Formula::Bot => clauses.push(vec![Lit::neg(i)]),
                Formula::Var(_) => {}
                Formula::Neg(a) => {
                    let a = child(a);
                    clauses.push(vec![Lit::pos(i), Lit::pos(a)]);
                    clauses.push(vec![Lit::neg(i), Lit::neg(a)]);
                }
                Formula::And(a, b) => {
                    let (a, b) = (child(a), child(b));
                    clauses.push(vec![Lit::neg(i), Lit::pos(a)]);
                    clauses.push(vec![Lit::neg(i), Lit::pos(b)]);
                    clauses.push(vec![Lit::pos(i), Lit::neg(a), Lit::neg(b)]);
                }
                Formula::Or(a, b) => {
                    let (a, b) = (child(a), child(b));
                    clauses.push(vec![Lit::pos(i), Lit::neg(a)]);
                    clauses.push(vec![Lit::pos(i), Lit::neg(b)]);
                    clauses.push(vec![Lit::neg(i), Lit::pos(a), Lit::pos(b)]);
                }
                Formula::Dia(k, body) => {
                    let b = child(body);
                    if sort_of(body).at_most(*k) {
                        clauses.push(vec![Lit::neg(i), Lit::pos(b)]);
                    }
                    if let Formula::Dia(inner, psi) = body.as_ref() {
                        if k < inner {
                            if let Some(j) = idx(&Formula::dia(*k, psi.as_ref().clone())) {
                                clauses.push(vec![Lit::neg(i), Lit::pos(j)]);
                            }
                        }
                    }
                }
            }
        }

        Closure {
            formulas,
            index,
            levels,
            atoms,
            dia_level,
            dia_body,
            dia_mask,
            prefix_mask,
            lifted,
            clauses,
        }
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn index_of(&self, f: &Formula) -> Option<usize> {
        self.index.get(f).copied()
    }

    pub fn solver(&self) -> Solver {
        let mut s = Solver::new(self.len(), &self.atoms);
        for c in &self.clauses {
            s.add_clause(c);
        }
        s
    }

    /// Members made true by the solver's current model.
    pub fn read_model(&self, s: &Solver) -> WorldSet {
        WorldSet::from_indices(self.len(), (0..self.len()).filter(|&i| s.value(i) == Some(true)))
    }

    /// Every assignment satisfying the Hintikka constraints, in decision order.
    pub fn candidates(&self, cap: usize) -> Result<Vec<WorldSet>, usize> {
        let mut s = self.solver();
        let mut out = Vec::new();
        let complete = s.enumerate(&mut |s| {
            out.push(self.read_model(s));
            out.len() <= cap
        });
        if complete {
            Ok(out)
        } else {
            Err(cap)
        }
    }

    pub fn diamonds_at<'a>(&'a self, set: &'a WorldSet) -> impl Iterator<Item = usize> + 'a {
        self.atoms
            .iter()
            .copied()
            .take_while(|&i| self.dia_level[i].is_some())
            .filter(|&i| set.contains(i))
    }

    /// The diamond members of `x` with level `≤ n`.
    pub fn prefix(&self, x: &WorldSet, n: u32) -> WorldSet {
        let mut p = x.clone();
        p.intersect_with(&self.prefix_mask[&n]);
        p
    }

    /// `x R_n y` in the canonical frame. Conditions (1)–(4) are the classical
    /// ones; (5) says a `<k>`-formula (`k > n`) true at `y` must show up as the
    /// matching `<n>`-formula at `x`, which is what makes `R_m ∘ R_n ⊆ R_m` hold.
    pub fn related(&self, x: &WorldSet, y: &WorldSet, n: u32) -> bool {
        let Some(level_n) = self.dia_mask.get(&n) else {
            return false;
        };
        // (4)
        let mut gained = x.clone();
        gained.intersect_with(level_n);
        let mut y_n = y.clone();
        y_n.intersect_with(level_n);
        // (2)
        if !y_n.is_subset(&gained) {
            return false;
        }
        gained.difference_with(y);
        if gained.is_empty() {
            return false;
        }
        // (3)
        for (_, mask) in self.dia_mask.range(..n) {
            let (mut a, mut b) = (x.clone(), y.clone());
            a.intersect_with(mask);
            b.intersect_with(mask);
            if a != b {
                return false;
            }
        }
        // (1)
        for d in level_n.iter() {
            let body = self.dia_body[d].expect("diamond");
            if y.contains(body) && !x.contains(d) {
                return false;
            }
        }
        // (5)
        self.lifted
            .get(&n)
            .into_iter()
            .flatten()
            .all(|&(lower, upper)| !y.contains(upper) || x.contains(lower))
    }

    pub fn members(&self, x: &WorldSet) -> FormulaSet {
        x.iter().map(|i| self.formulas[i].clone()).collect()
    }

    pub fn to_bits(&self, set: &FormulaSet) -> WorldSet {
        WorldSet::from_indices(self.len(), set.iter().filter_map(|f| self.index_of(f)))
    }
}
