//! A small CDCL solver: two watched literals, first-UIP learning,
//! non-chronological backjumping and a fixed decision order (negative phase
//! first). Sized for the Tseitin encodings of closure sets, which have at
//! most a few thousand variables.

use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: usize, value: bool) -> Lit {
        Lit(((var as u32) << 1) | (!value) as u32)
    }

    pub fn pos(var: usize) -> Lit {
        Lit::new(var, true)
    }

    pub fn neg(var: usize) -> Lit {
        Lit::new(var, false)
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    /// The truth value this literal asserts for its variable.
    pub fn sign(self) -> bool {
        self.0 & 1 == 0
    }

    fn code(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.sign() { "" } else { "-" }, self.var())
    }
}

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

pub struct Solver {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    order: Vec<usize>,
    seen: Vec<bool>,
    ok: bool,
    pub conflicts: u64,
    pub decisions: u64,
}

impl Solver {
    /// `order` lists the variables in the order they are branched on;
    /// variables missing from it are appended in index order.
    pub fn new(num_vars: usize, order: &[usize]) -> Solver {
        let mut in_order = vec![false; num_vars];
        let mut full = Vec::with_capacity(num_vars);
        for &v in order {
            if !in_order[v] {
                in_order[v] = true;
                full.push(v);
            }
        }
        full.extend((0..num_vars).filter(|&v| !in_order[v]));
        Solver {
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * num_vars],
            assigns: vec![UNDEF; num_vars],
            level: vec![0; num_vars],
            reason: vec![None; num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            order: full,
            seen: vec![false; num_vars],
            ok: true,
            conflicts: 0,
            decisions: 0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    fn lit_value(&self, l: Lit) -> i8 {
        let v = self.assigns[l.var()];
        if l.sign() {
            v
        } else {
            -v
        }
    }

    /// Value of `var` in the last model (or at level 0).
    pub fn value(&self, var: usize) -> Option<bool> {
        match self.assigns[var] {
            TRUE => Some(true),
            FALSE => Some(false),
            _ => None,
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<usize>) {
        let v = l.var();
        debug_assert_eq!(self.assigns[v], UNDEF);
        self.assigns[v] = if l.sign() { TRUE } else { FALSE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn new_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let keep = self.trail_lim[lvl as usize];
        for l in self.trail.drain(keep..) {
            self.assigns[l.var()] = UNDEF;
            self.reason[l.var()] = None;
        }
        self.trail_lim.truncate(lvl as usize);
        self.qhead = self.qhead.min(keep);
    }

    /// Adds a clause permanently. Resets the search to level 0.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        self.cancel_until(0);
        if !self.ok {
            return;
        }
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return;
        }
        if c.iter().any(|&l| self.lit_value(l) == TRUE) {
            return;
        }
        c.retain(|&l| self.lit_value(l) != FALSE);
        match c.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(c);
            }
        }
    }

    fn attach(&mut self, c: Vec<Lit>) -> usize {
        let idx = self.clauses.len();
        self.watches[c[0].code()].push(idx);
        self.watches[c[1].code()].push(idx);
        self.clauses.push(c);
        idx
    }

    /// Returns a conflicting clause, if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut kept = Vec::with_capacity(ws.len());
            let mut conflict = None;
            let mut i = 0;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let clause = &mut self.clauses[ci];
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                let first_val = {
                    let v = self.assigns[first.var()];
                    if first.sign() { v } else { -v }
                };
                if first_val == TRUE {
                    kept.push(ci);
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    let l = clause[k];
                    let v = self.assigns[l.var()];
                    let val = if l.sign() { v } else { -v };
                    if val != FALSE {
                        clause.swap(1, k);
                        self.watches[clause[1].code()].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                kept.push(ci);
                if first_val == FALSE {
                    conflict = Some(ci);
                    kept.extend_from_slice(&ws[i..]);
                    break;
                }
                self.enqueue(first, Some(ci));
            }
            // watches added for false_lit during the loop cannot exist: a clause
            // only moves its watch to a non-false literal
            self.watches[false_lit.code()] = kept;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn analyze(&mut self, mut confl: usize) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit(0)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();
        loop {
            let start = usize::from(p.is_some());
            for j in start..self.clauses[confl].len() {
                let q = self.clauses[confl][j];
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var()] {
                    break;
                }
            }
            let lit = self.trail[idx];
            self.seen[lit.var()] = false;
            path -= 1;
            p = Some(lit);
            if path == 0 {
                break;
            }
            confl = self.reason[lit.var()].expect("implied literal has a reason");
        }
        learnt[0] = !p.expect("conflict involves the current level");
        for l in &learnt[1..] {
            self.seen[l.var()] = false;
        }
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var()] > self.level[learnt[max_i].var()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[learnt[1].var()];
        }
        (learnt, bt)
    }

    /// Searches for a model extending `assumptions`. On success the model
    /// stays readable through [`Solver::value`] until the next mutation.
    pub fn solve(&mut self, assumptions: &[Lit]) -> bool {
        self.cancel_until(0);
        if !self.ok {
            return false;
        }
        if self.propagate().is_some() {
            self.ok = false;
            return false;
        }
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return false;
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(first, Some(ci));
                }
                continue;
            }
            let dl = self.decision_level() as usize;
            if dl < assumptions.len() {
                let a = assumptions[dl];
                match self.lit_value(a) {
                    TRUE => self.new_level(),
                    FALSE => {
                        self.cancel_until(0);
                        return false;
                    }
                    _ => {
                        self.new_level();
                        self.enqueue(a, None);
                    }
                }
                continue;
            }
            match self.order.iter().copied().find(|&v| self.assigns[v] == UNDEF) {
                None => return true,
                Some(v) => {
                    self.decisions += 1;
                    self.new_level();
                    self.enqueue(Lit::neg(v), None);
                }
            }
        }
    }

    /// Calls `f` on every total model, branching in decision order with the
    /// negative phase first; stops early when `f` returns `false`.
    /// Returns `false` if stopped early.
    pub fn enumerate(&mut self, f: &mut dyn FnMut(&Solver) -> bool) -> bool {
        self.cancel_until(0);
        if !self.ok || self.propagate().is_some() {
            self.ok = false;
            return true;
        }
        let order = self.order.clone();
        let done = self.enumerate_from(&order, 0, f);
        self.cancel_until(0);
        done
    }

    fn enumerate_from(&mut self, order: &[usize], start: usize, f: &mut dyn FnMut(&Solver) -> bool) -> bool {
        let Some(pos) = (start..order.len()).find(|&i| self.assigns[order[i]] == UNDEF) else {
            return f(self);
        };
        let v = order[pos];
        for value in [false, true] {
            let lvl = self.decision_level();
            self.new_level();
            self.enqueue(Lit::new(v, value), None);
            let keep_going = self.propagate().is_some() || self.enumerate_from(order, pos + 1, f);
            self.cancel_until(lvl);
            if !keep_going {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(n: usize, clauses: &[Vec<Lit>], assumptions: &[Lit]) -> usize {
        (0..1u32 << n)
            .filter(|m| {
                let val = |l: Lit| ((m >> l.var()) & 1 == 1) == l.sign();
                assumptions.iter().all(|&l| val(l)) && clauses.iter().all(|c| c.iter().any(|&l| val(l)))
            })
            .count()
    }

    fn lit_strategy(n: usize) -> impl Strategy<Value = Lit> {
        (0..n, any::<bool>()).prop_map(|(v, s)| Lit::new(v, s))
    }

    proptest! {
        #[test]
        fn agrees_with_truth_tables(
            clauses in prop::collection::vec(prop::collection::vec(lit_strategy(6), 1..4), 0..30),
            assumptions in prop::collection::vec(lit_strategy(6), 0..3),
        ) {
            let mut s = Solver::new(6, &[]);
            for c in &clauses {
                s.add_clause(c);
            }
            let expected = brute_force(6, &clauses, &assumptions);
            let sat = s.solve(&assumptions);
            prop_assert_eq!(sat, expected > 0);
            if sat {
                let val = |l: Lit| s.value(l.var()) == Some(l.sign());
                prop_assert!(clauses.iter().all(|c| c.iter().any(|&l| val(l))));
                prop_assert!(assumptions.iter().all(|&l| val(l)));
            }
            let mut count = 0;
            let mut fresh = Solver::new(6, &[]);
            for c in &clauses {
                fresh.add_clause(c);
            }
            for &a in &assumptions {
                fresh.add_clause(&[a]);
            }
            fresh.enumerate(&mut |_| { count += 1; true });
            prop_assert_eq!(count, expected);
        }
    }

    #[test]
    fn incremental_blocking() {
        let mut s = Solver::new(3, &[]);
        s.add_clause(&[Lit::pos(0), Lit::pos(1), Lit::pos(2)]);
        let mut found = 0;
        while s.solve(&[]) {
            found += 1;
            let block: Vec<Lit> = (0..3).map(|v| Lit::new(v, !s.value(v).unwrap())).collect();
            s.add_clause(&block);
        }
        assert_eq!(found, 7);
    }

    #[test]
    fn pigeonhole_is_unsat() {
        // 4 pigeons, 3 holes
        let var = |p: usize, h: usize| p * 3 + h;
        let mut s = Solver::new(12, &[]);
        for p in 0..4 {
            s.add_clause(&(0..3).map(|h| Lit::pos(var(p, h))).collect::<Vec<_>>());
        }
        for h in 0..3 {
            for a in 0..4 {
                for b in a + 1..4 {
                    s.add_clause(&[Lit::neg(var(a, h)), Lit::neg(var(b, h))]);
                }
            }
        }
        assert!(!s.solve(&[]));
    }
}
