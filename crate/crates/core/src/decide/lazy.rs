//! Goal-directed search for a surviving Hintikka world.
//!
//! Instead of enumerating every candidate and eliminating, worlds are found
//! on demand by SAT queries. A witness query `(n, body, P)` asks for a world
//! `y` with `body ∈ y` that is an `R_n`-successor of any world whose diamonds
//! at levels `≤ n` are exactly `P`; the answer only depends on that prefix, so
//! results are memoized on it. A candidate whose own obligations cannot be
//! met is excluded with a blocking clause that also rules out every world
//! with the same lower-level diamonds and fewer level-`j` diamonds, since
//! such worlds have strictly fewer possible successors.
//!
//! The witness relation strictly decreases the vector of diamond counts per
//! level (lexicographically), so the recursion is well founded and the
//! greatest and least fixpoints of elimination coincide.

use std::collections::HashMap;

use crate::bitset::WorldSet;

use super::closure::Closure;
use super::sat::{Lit, Solver};
use super::{DecideError, LazyStats};

#[derive(Clone, Debug)]
enum Entry {
    Pending,
    Found(usize),
    Dead,
}

type Key = (u32, usize, WorldSet);

pub(crate) struct LazySearch<'a> {
    cl: &'a Closure,
    memo: HashMap<Key, Entry>,
    types: Vec<WorldSet>,
    type_ids: HashMap<WorldSet, usize>,
    dead: Vec<Vec<Lit>>,
    max_queries: usize,
    pub stats: LazyStats,
}

impl<'a> LazySearch<'a> {
    pub fn new(cl: &'a Closure, max_queries: usize) -> Self {
        LazySearch {
            cl,
            memo: HashMap::new(),
            types: Vec::new(),
            type_ids: HashMap::new(),
            dead: Vec::new(),
            max_queries,
            stats: LazyStats::default(),
        }
    }

    fn fresh_solver(&self) -> Solver {
        let mut s = self.cl.solver();
        for c in &self.dead {
            s.add_clause(c);
        }
        s
    }

    fn register(&mut self, y: WorldSet) -> usize {
        if let Some(&id) = self.type_ids.get(&y) {
            return id;
        }
        let id = self.types.len();
        self.types.push(y.clone());
        self.type_ids.insert(y, id);
        id
    }

    /// Clause excluding every world that agrees with `y` below level `j`,
    /// has at most `y`'s level-`j` diamonds and contains `dia`.
    fn blocking_clause(&self, y: &WorldSet, j: u32, dia: usize) -> Vec<Lit> {
        let cl = self.cl;
        let mut clause = vec![Lit::neg(dia)];
        for i in cl.dia_mask[&j].iter() {
            if !y.contains(i) {
                clause.push(Lit::pos(i));
            }
        }
        for (_, mask) in cl.dia_mask.range(..j) {
            for i in mask.iter() {
                clause.push(Lit::new(i, !y.contains(i)));
            }
        }
        clause
    }

    /// Checks every diamond obligation of `y` by ascending level. Returns the
    /// first unmet one as `(level, diamond index)`.
    fn first_failure(&mut self, y: &WorldSet) -> Result<Option<(u32, usize)>, DecideError> {
        let cl = self.cl;
        let diamonds: Vec<usize> = cl.diamonds_at(y).collect();
        for d in diamonds {
            let level = cl.dia_level[d].expect("diamond");
            let body = cl.dia_body[d].expect("diamond");
            if self.witness(level, body, cl.prefix(y, level))?.is_none() {
                return Ok(Some((level, d)));
            }
        }
        Ok(None)
    }

    /// Finds a good world satisfying the solver's constraints and
    /// `assumptions`, adding blocking clauses for bad candidates.
    fn search(&mut self, solver: &mut Solver, assumptions: &[Lit]) -> Result<Option<usize>, DecideError> {
        loop {
            self.stats.sat_calls += 1;
            if self.stats.sat_calls > self.max_queries {
                return Err(DecideError::ResourceLimit {
                    what: "SAT queries",
                    limit: self.max_queries,
                });
            }
            if !solver.solve(assumptions) {
                return Ok(None);
            }
            let y = self.cl.read_model(solver);
            match self.first_failure(&y)? {
                None => return Ok(Some(self.register(y))),
                Some((j, d)) => {
                    let clause = self.blocking_clause(&y, j, d);
                    solver.add_clause(&clause);
                    self.dead.push(clause);
                    self.stats.blocking_clauses += 1;
                }
            }
        }
    }

    /// A good world `y` with `body ∈ y` that is an `R_n`-successor of every
    /// world whose diamonds at levels `≤ n` are `prefix`.
    fn witness(&mut self, n: u32, body: usize, prefix: WorldSet) -> Result<Option<usize>, DecideError> {
        let key = (n, body, prefix);
        match self.memo.get(&key) {
            Some(Entry::Found(id)) => {
                self.stats.memo_hits += 1;
                return Ok(Some(*id));
            }
            Some(Entry::Dead) => {
                self.stats.memo_hits += 1;
                return Ok(None);
            }
            Some(Entry::Pending) => unreachable!("witness queries never recurse on themselves"),
            None => {}
        }
        self.memo.insert(key.clone(), Entry::Pending);
        self.stats.witness_queries += 1;

        let cl = self.cl;
        let prefix = &key.2;
        let mut assumptions = vec![Lit::pos(body)];
        let mut at_n = Vec::new();
        for (&m, mask) in cl.dia_mask.range(..=n) {
            for i in mask.iter() {
                let in_x = prefix.contains(i);
                if m < n {
                    // (3)
                    assumptions.push(Lit::new(i, in_x));
                } else if in_x {
                    at_n.push(i);
                } else {
                    // (2), (1)
                    assumptions.push(Lit::neg(i));
                    assumptions.push(Lit::neg(cl.dia_body[i].expect("diamond")));
                }
            }
        }
        // (5)
        for &(lower, upper) in cl.lifted.get(&n).into_iter().flatten() {
            if !prefix.contains(lower) {
                assumptions.push(Lit::neg(upper));
            }
        }
        let mut solver = self.fresh_solver();
        // (4)
        solver.add_clause(&at_n.iter().map(|&i| Lit::neg(i)).collect::<Vec<_>>());
        let found = self.search(&mut solver, &assumptions);
        self.stats.conflicts += solver.conflicts;
        let found = found?;
        self.memo.insert(key, found.map_or(Entry::Dead, Entry::Found));
        Ok(found)
    }

    /// A good world containing `goal`, if any.
    pub fn find_root(&mut self, goal: usize) -> Result<Option<usize>, DecideError> {
        let mut solver = self.fresh_solver();
        let found = self.search(&mut solver, &[Lit::pos(goal)]);
        self.stats.conflicts += solver.conflicts;
        found
    }

    /// The worlds reachable from `root` through memoized witnesses, root first.
    pub fn collect(&self, root: usize) -> Vec<WorldSet> {
        let cl = self.cl;
        let mut order = vec![root];
        let mut seen = vec![false; self.types.len()];
        seen[root] = true;
        let mut i = 0;
        while i < order.len() {
            let y = &self.types[order[i]];
            for d in cl.diamonds_at(y) {
                let level = cl.dia_level[d].expect("diamond");
                let key = (level, cl.dia_body[d].expect("diamond"), cl.prefix(y, level));
                match self.memo.get(&key) {
                    Some(Entry::Found(id)) => {
                        if !seen[*id] {
                            seen[*id] = true;
                            order.push(*id);
                        }
                    }
                    other => unreachable!("obligation of a good world resolved as {other:?}"),
                }
            }
            i += 1;
        }
        order.into_iter().map(|id| self.types[id].clone()).collect()
    }
}
