//! Exhaustive search over small strongly persistent J*-models.
//!
//! Models are enumerated by world count, then by the tuple of relation
//! bitmaps (lowest modality first), then by valuation bitmaps. Worlds are
//! named `a, b, c, …`. Valuations are generated already persistent: each
//! variable ranges over the sets closed under the implications the two
//! persistence clauses induce on the frame.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::decide::{decide_with, reduction_target, DecideError, DecideOptions, SystemId, Verdict};
use crate::formula::{Formula, Sort, Var};
use crate::kripke::{validate_model, KripkeFrame, KripkeModel};
use crate::reductions::ModalitySet;

/// Largest frame the bitmap representation supports.
pub const MAX_ORACLE_WORLDS: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_worlds: usize,
    /// `None` means: the modalities occurring in the searched formula.
    pub modalities: Option<ModalitySet>,
    pub max_models: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_worlds: 4, modalities: None, max_models: 10_000_000 }
    }
}

impl SearchBudget {
    pub fn for_formula(phi: &Formula) -> Self {
        SearchBudget { modalities: Some(phi.modalities()), ..Default::default() }
    }

    fn modalities_for(&self, phi: &Formula) -> Vec<u32> {
        match &self.modalities {
            Some(m) => m.iter().copied().collect(),
            None => phi.modalities().into_iter().collect(),
        }
    }
}

pub fn world_label(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("w{i}")
    }
}

/// Irreflexive transitive relations on `n` points as bitmaps (bit `x*n + y`
/// encodes `x R y`), ascending.
pub fn strict_orders(n: usize) -> Vec<u64> {
    assert!(n <= MAX_ORACLE_WORLDS, "at most {MAX_ORACLE_WORLDS} worlds");
    // built point by point; relations on the first k points use bit x*k + y
    let mut rels: Vec<Vec<(u64, u64)>> = vec![vec![]]; // per relation: (pred, succ) masks per point
    for k in 0..n {
        let mut next = Vec::new();
        for rel in &rels {
            for pred in 0u64..(1 << k) {
                for succ in 0u64..(1 << k) {
                    if pred & succ != 0 {
                        continue;
                    }
                    // pred down-closed, succ up-closed, pred × succ ⊆ R
                    let ok = (0..k).all(|y| {
                        let (py, sy) = rel[y];
                        (pred >> y & 1 == 0 || py & !pred == 0)
                            && (succ >> y & 1 == 0 || sy & !succ == 0)
                            && (pred >> y & 1 == 0 || succ & !sy == 0)
                    });
                    if !ok {
                        continue;
                    }
                    let mut extended: Vec<(u64, u64)> = rel.clone();
                    for (y, (py, sy)) in extended.iter_mut().enumerate() {
                        if succ >> y & 1 == 1 {
                            *py |= 1 << k;
                        }
                        if pred >> y & 1 == 1 {
                            *sy |= 1 << k;
                        }
                    }
                    extended.push((pred, succ));
                    next.push(extended);
                }
            }
        }
        rels = next;
    }
    let mut out: Vec<u64> = rels
        .into_iter()
        .map(|rel| {
            let mut mask = 0u64;
            for (x, (_, succ)) in rel.iter().enumerate() {
                mask |= succ << (x * n);
            }
            mask
        })
        .collect();
    out.sort_unstable();
    out
}

/// A frame as per-modality successor masks.
#[derive(Clone, Debug)]
struct SmallFrame {
    n: usize,
    /// `(modality, successor mask of each world)`, ascending modality.
    succ: Vec<(u32, Vec<u64>)>,
}

fn successors(rel: u64, n: usize) -> Vec<u64> {
    let row = (1u64 << n) - 1;
    (0..n).map(|x| (rel >> (x * n)) & row).collect()
}

/// `R_upper` may be added above `R_lower` without breaking the two
/// inter-level frame conditions.
fn compatible(lower: &[u64], upper: &[u64]) -> bool {
    let n = lower.len();
    for x in 0..n {
        for y in 0..n {
            if upper[x] >> y & 1 == 1 && lower[x] != lower[y] {
                return false;
            }
        }
        for (y, up) in upper.iter().enumerate().take(n) {
            if lower[x] >> y & 1 == 1 && up & !lower[x] != 0 {
                return false;
            }
        }
    }
    true
}

fn frames(n: usize, modalities: &[u32]) -> Vec<SmallFrame> {
    let orders: Vec<Vec<u64>> = strict_orders(n).into_iter().map(|r| successors(r, n)).collect();
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    fn go(
        n: usize,
        modalities: &[u32],
        orders: &[Vec<u64>],
        chosen: &mut Vec<usize>,
        out: &mut Vec<SmallFrame>,
    ) {
        if chosen.len() == modalities.len() {
            let succ = modalities.iter().zip(chosen.iter()).map(|(&m, &i)| (m, orders[i].clone())).collect();
            out.push(SmallFrame { n, succ });
            return;
        }
        for (i, rel) in orders.iter().enumerate() {
            if chosen.iter().all(|&j| compatible(&orders[j], rel)) {
                chosen.push(i);
                go(n, modalities, orders, chosen, out);
                chosen.pop();
            }
        }
    }
    go(n, modalities, &orders, &mut chosen, &mut out);
    out
}

/// All truth sets of a variable of sort `sort` that satisfy both persistence
/// clauses on `frame`, ascending.
fn persistent_sets(frame: &SmallFrame, sort: Sort) -> Vec<u64> {
    let n = frame.n;
    // forced[w]: worlds that must be true whenever w is true
    let mut forced: Vec<u64> = (0..n).map(|w| 1 << w).collect();
    for (k, succ) in &frame.succ {
        for x in 0..n {
            for y in 0..n {
                if succ[x] >> y & 1 == 1 {
                    if sort.at_most(*k) {
                        forced[y] |= 1 << x;
                    }
                    if sort.below(*k) {
                        forced[x] |= 1 << y;
                    }
                }
            }
        }
    }
    loop {
        let mut changed = false;
        for w in 0..n {
            let mut acc = forced[w];
            for v in 0..n {
                if forced[w] >> v & 1 == 1 {
                    acc |= forced[v];
                }
            }
            if acc != forced[w] {
                forced[w] = acc;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // blocked[w]: worlds that must be false whenever w is false
    let blocked: Vec<u64> = (0..n)
        .map(|w| (0..n).filter(|&v| forced[v] >> w & 1 == 1).fold(0, |m, v| m | 1 << v))
        .collect();
    let mut out = Vec::new();
    // highest world first, false before true: yields ascending masks
    fn go(w: usize, t: u64, f: u64, forced: &[u64], blocked: &[u64], out: &mut Vec<u64>) {
        if w == 0 {
            out.push(t);
            return;
        }
        let w = w - 1;
        let bit = 1u64 << w;
        if t & bit != 0 || f & bit != 0 {
            go(w, t, f, forced, blocked, out);
            return;
        }
        go(w, t, f | blocked[w], forced, blocked, out);
        go(w, t | forced[w], f, forced, blocked, out);
    }
    go(n, 0, 0, &forced, &blocked, &mut out);
    out
}

/// Formula compiled to bottom-up operations on world masks.
struct Compiled {
    ops: Vec<Op>,
}

enum Op {
    Top,
    Bot,
    Var(usize),
    Neg(usize),
    And(usize, usize),
    Or(usize, usize),
    Dia(u32, usize),
}

impl Compiled {
    fn new(phi: &Formula, vars: &[Var]) -> Compiled {
        fn go(f: &Formula, vars: &[Var], ops: &mut Vec<Op>) -> usize {
            let op = match f {
                Formula::Top => Op::Top,
                Formula::Bot => Op::Bot,
                Formula::Var(v) => Op::Var(vars.iter().position(|w| w == v).expect("variable listed")),
                Formula::Neg(a) => Op::Neg(go(a, vars, ops)),
                Formula::And(a, b) => {
                    let (a, b) = (go(a, vars, ops), go(b, vars, ops));
                    Op::And(a, b)
                }
                Formula::Or(a, b) => {
                    let (a, b) = (go(a, vars, ops), go(b, vars, ops));
                    Op::Or(a, b)
                }
                Formula::Dia(k, a) => Op::Dia(*k, go(a, vars, ops)),
            };
            ops.push(op);
            ops.len() - 1
        }
        let mut ops = Vec::new();
        go(phi, vars, &mut ops);
        Compiled { ops }
    }

    fn eval(&self, frame: &SmallFrame, val: &[u64], buf: &mut Vec<u64>) -> u64 {
        let all = (1u64 << frame.n) - 1;
        buf.clear();
        for op in &self.ops {
            let m = match *op {
                Op::Top => all,
                Op::Bot => 0,
                Op::Var(i) => val[i],
                Op::Neg(a) => !buf[a] & all,
                Op::And(a, b) => buf[a] & buf[b],
                Op::Or(a, b) => buf[a] | buf[b],
                Op::Dia(k, a) => match frame.succ.iter().find(|(m, _)| *m == k) {
                    None => 0,
                    Some((_, succ)) => {
                        let body = buf[a];
                        (0..frame.n).filter(|&x| succ[x] & body != 0).fold(0, |acc, x| acc | 1 << x)
                    }
                },
            };
            buf.push(m);
        }
        *buf.last().expect("nonempty formula")
    }
}

fn to_model(frame: &SmallFrame, vars: &[Var], val: &[u64]) -> KripkeModel {
    let n = frame.n;
    let mut kf = KripkeFrame::new((0..n).map(world_label)).expect("distinct labels");
    for (k, succ) in &frame.succ {
        for (x, &s) in succ.iter().enumerate() {
            for y in 0..n {
                if s >> y & 1 == 1 {
                    kf.add_edge(*k, x, y);
                }
            }
        }
    }
    let mut model = KripkeModel::new(kf);
    for (v, &mask) in vars.iter().zip(val) {
        let set = crate::bitset::WorldSet::from_indices(n, (0..n).filter(|&w| mask >> w & 1 == 1));
        model.set_truth_set(v, set).expect("distinct variables");
    }
    model
}

/// Lazily enumerated models; check [`ModelStream::truncated`] after the end.
pub struct ModelStream {
    vars: Vec<Var>,
    modalities: Vec<u32>,
    budget: SearchBudget,
    n: usize,
    frames: Vec<SmallFrame>,
    frame_idx: usize,
    sets: Vec<Vec<u64>>,
    odometer: Vec<usize>,
    emitted: u64,
    truncated: bool,
    done: bool,
}

impl ModelStream {
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn models_examined(&self) -> u64 {
        self.emitted
    }

    /// Moves to the next frame with at least one valuation.
    fn load_frame(&mut self) -> bool {
        loop {
            if self.frame_idx < self.frames.len() {
                let frame = &self.frames[self.frame_idx];
                self.sets = self.vars.iter().map(|v| persistent_sets(frame, v.sort)).collect();
                self.odometer = vec![0; self.vars.len()];
                return true;
            }
            self.n += 1;
            if self.n > self.budget.max_worlds.min(MAX_ORACLE_WORLDS) {
                return false;
            }
            self.frames = frames(self.n, &self.modalities);
            self.frame_idx = 0;
        }
    }
}

impl Iterator for ModelStream {
    type Item = KripkeModel;

    fn next(&mut self) -> Option<KripkeModel> {
        if self.done {
            return None;
        }
        if self.emitted >= self.budget.max_models {
            self.truncated = true;
            self.done = true;
            return None;
        }
        let frame = &self.frames[self.frame_idx];
        let val: Vec<u64> = self.odometer.iter().zip(&self.sets).map(|(&i, s)| s[i]).collect();
        let model = to_model(frame, &self.vars, &val);
        self.emitted += 1;
        // advance: last variable fastest
        let mut i = self.vars.len();
        loop {
            if i == 0 {
                self.frame_idx += 1;
                if !self.load_frame() {
                    self.done = true;
                }
                break;
            }
            i -= 1;
            self.odometer[i] += 1;
            if self.odometer[i] < self.sets[i].len() {
                break;
            }
            self.odometer[i] = 0;
        }
        Some(model)
    }
}

/// Every strongly persistent J*-model with at most `budget.max_worlds`
/// worlds over the given variables and modalities.
pub fn enumerate_models(vars: &[Var], modalities: &ModalitySet, budget: &SearchBudget) -> ModelStream {
    let mut stream = ModelStream {
        vars: vars.to_vec(),
        modalities: modalities.iter().copied().collect(),
        budget: budget.clone(),
        n: 0,
        frames: Vec::new(),
        frame_idx: 0,
        sets: Vec::new(),
        odometer: Vec::new(),
        emitted: 0,
        truncated: false,
        done: false,
    };
    stream.done = !stream.load_frame();
    stream
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    /// The first model and world falsifying the formula; the world is also
    /// the model's root.
    pub found: Option<(KripkeModel, String)>,
    pub models_examined: u64,
    pub truncated: bool,
}

pub fn brute_force_countermodel(phi: &Formula, budget: &SearchBudget) -> OracleResult {
    let vars = phi.variables();
    let modalities = budget.modalities_for(phi);
    let compiled = Compiled::new(phi, &vars);
    let mut examined = 0u64;
    let mut buf = Vec::new();
    for n in 1..=budget.max_worlds.min(MAX_ORACLE_WORLDS) {
        for frame in frames(n, &modalities) {
            let sets: Vec<Vec<u64>> = vars.iter().map(|v| persistent_sets(&frame, v.sort)).collect();
            let mut odometer = vec![0usize; vars.len()];
            let mut val: Vec<u64> = sets.iter().map(|s| s[0]).collect();
            loop {
                if examined >= budget.max_models {
                    return OracleResult { found: None, models_examined: examined, truncated: true };
                }
                examined += 1;
                let truth = compiled.eval(&frame, &val, &mut buf);
                let all = (1u64 << n) - 1;
                if truth != all {
                    let w = (!truth & all).trailing_zeros() as usize;
                    let mut model = to_model(&frame, &vars, &val);
                    model.set_root(Some(w));
                    assert!(validate_model(&model).is_empty(), "oracle produced an invalid model");
                    assert!(!model.truth_set(phi).contains(w), "oracle countermodel does not falsify");
                    return OracleResult {
                        found: Some((model, world_label(w))),
                        models_examined: examined,
                        truncated: false,
                    };
                }
                let mut i = vars.len();
                let advanced = loop {
                    if i == 0 {
                        break false;
                    }
                    i -= 1;
                    odometer[i] += 1;
                    if odometer[i] < sets[i].len() {
                        val[i] = sets[i][odometer[i]];
                        break true;
                    }
                    odometer[i] = 0;
                    val[i] = sets[i][0];
                };
                if !advanced {
                    break;
                }
            }
        }
    }
    OracleResult { found: None, models_examined: examined, truncated: false }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Agreement,
    Disagreement,
    Inconclusive,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Agreement => "agreement",
            Outcome::Disagreement => "disagreement",
            Outcome::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CrossReport {
    pub system: SystemId,
    pub target: Formula,
    pub verdict: Result<Verdict, DecideError>,
    pub oracle: OracleResult,
    pub outcome: Outcome,
    pub reason: String,
}

/// Runs `decide` and the oracle on the J*-level target of `phi`.
pub fn cross_validate(phi: &Formula, system: SystemId, budget: &SearchBudget) -> CrossReport {
    let opts = DecideOptions::default();
    let target = reduction_target(system, phi, opts.via);
    let verdict = decide_with(system, phi, &opts).map(|d| d.verdict);
    let oracle = brute_force_countermodel(&target, budget);
    let budget_mods: BTreeSet<u32> = budget.modalities_for(&target).into_iter().collect();
    let (outcome, reason) = match (&verdict, &oracle.found) {
        (Err(e), _) => (Outcome::Inconclusive, format!("decide failed: {e}")),
        (Ok(Verdict::Theorem), Some(_)) => {
            (Outcome::Disagreement, "decide says theorem but the oracle found a countermodel".into())
        }
        (Ok(Verdict::Theorem), None) if oracle.truncated => {
            (Outcome::Inconclusive, "oracle search truncated".into())
        }
        (Ok(Verdict::Theorem), None) => (Outcome::Agreement, "theorem; no countermodel within budget".into()),
        (Ok(Verdict::NonTheorem { .. }), Some(_)) => (Outcome::Agreement, "non-theorem both ways".into()),
        (Ok(Verdict::NonTheorem { countermodel, .. }), None) => {
            let fits = countermodel.len() <= budget.max_worlds.min(MAX_ORACLE_WORLDS)
                && countermodel.frame.modalities().all(|k| budget_mods.contains(&k));
            if fits && !oracle.truncated {
                (
                    Outcome::Disagreement,
                    format!("decide's {}-world countermodel was missed by the oracle", countermodel.len()),
                )
            } else {
                (Outcome::Inconclusive, "countermodel lies beyond the oracle budget".into())
            }
        }
    };
    CrossReport { system, target, verdict, oracle, outcome, reason }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn budget(max_worlds: usize) -> SearchBudget {
        SearchBudget { max_worlds, ..Default::default() }
    }

    fn is_strict_order(rel: u64, n: usize) -> bool {
        let e = |x: usize, y: usize| rel >> (x * n + y) & 1 == 1;
        (0..n).all(|x| !e(x, x))
            && (0..n).all(|x| (0..n).all(|y| (0..n).all(|z| !(e(x, y) && e(y, z)) || e(x, z))))
    }

    #[test]
    fn strict_order_counts() {
        // labeled strict partial orders: 1, 1, 3, 19, 219, 4231
        let counts: Vec<usize> = (0..=5).map(|n| strict_orders(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 3, 19, 219, 4231]);
        for n in 0..=4 {
            let brute: Vec<u64> = (0..1u64 << (n * n)).filter(|&r| is_strict_order(r, n)).collect();
            assert_eq!(strict_orders(n), brute);
        }
    }

    #[test]
    fn enumeration_examples() {
        let p = Var::new("p", Sort::Omega);
        let one: ModalitySet = [0].into_iter().collect();
        let models: Vec<_> = enumerate_models(&[p], &one, &budget(1)).collect();
        assert_eq!(models.len(), 2);
        assert_eq!(enumerate_models(&[], &one, &budget(1)).count(), 1);
        let two_worlds: Vec<_> = enumerate_models(&[], &one, &budget(2)).filter(|m| m.len() == 2).collect();
        assert_eq!(two_worlds.len(), 3);
    }

    #[test]
    fn enumerated_models_are_valid() {
        let vars = [Var::new("p", Sort::Finite(0)), Var::new("q", Sort::Finite(1))];
        let mods: ModalitySet = [0, 1].into_iter().collect();
        let mut stream = enumerate_models(&vars, &mods, &budget(3));
        let mut count = 0;
        for m in stream.by_ref() {
            assert!(validate_model(&m).is_empty());
            count += 1;
        }
        assert!(!stream.truncated());
        assert_eq!(count as u64, stream.models_examined());
    }

    #[test]
    fn persistent_sets_match_filtering() {
        let vars = [Var::new("p", Sort::Finite(1))];
        let mods: ModalitySet = [0, 1, 2].into_iter().collect();
        for n in 1..=3 {
            for frame in frames(n, &[0, 1, 2]) {
                let gen = persistent_sets(&frame, Sort::Finite(1));
                let filtered: Vec<u64> = (0..1u64 << n)
                    .filter(|&s| validate_model(&to_model(&frame, &vars, &[s])).is_empty())
                    .collect();
                assert_eq!(gen, filtered);
            }
        }
        assert!(enumerate_models(&vars, &mods, &budget(2)).all(|m| validate_model(&m).is_empty()));
    }

    #[test]
    fn countermodel_examples() {
        let r = brute_force_countermodel(&f("<0>T"), &SearchBudget { modalities: Some([0].into()), ..budget(2) });
        let (m, w) = r.found.unwrap();
        assert_eq!((m.len(), w.as_str()), (1, "a"));
        assert!(m.frame.all_edges().is_empty());

        assert!(brute_force_countermodel(&f("T"), &budget(3)).found.is_none());

        let (m, w) = brute_force_countermodel(&f("<1>p -> <0>p"), &budget(3)).found.unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(w, "a");
        assert_eq!(m.frame.all_edges(), vec![(1, 0, 1)]);
        assert_eq!(m.var_truth(&Var::new("p", Sort::Omega)).iter().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn truncation_is_reported() {
        let r = brute_force_countermodel(&f("T"), &SearchBudget { max_models: 2, ..budget(3) });
        assert!(r.truncated && r.found.is_none());
        // exactly exhausting the budget is not a truncation
        let r = brute_force_countermodel(&f("T"), &SearchBudget { max_models: 3, ..budget(3) });
        assert!(!r.truncated && r.models_examined == 3);
        let mut s = enumerate_models(&[], &[0].into(), &SearchBudget { max_models: 2, ..budget(3) });
        assert_eq!(s.by_ref().count(), 2);
        assert!(s.truncated());
    }

    #[test]
    fn cross_validation_examples() {
        let r = cross_validate(&f("<1>p:1 -> p:1"), SystemId::GLPstar, &budget(3));
        assert_eq!(r.outcome, Outcome::Agreement);
        assert!(r.verdict.unwrap().is_theorem());
        let r = cross_validate(&f("<1>p -> <0>p"), SystemId::Jstar, &budget(3));
        assert_eq!(r.outcome, Outcome::Agreement);
        assert!(r.oracle.found.is_some());
        let r = cross_validate(&f("F"), SystemId::GLPstar, &budget(3));
        assert_eq!(r.outcome, Outcome::Agreement);
        assert!(r.oracle.found.is_some());
    }
}
