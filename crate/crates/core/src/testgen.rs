//! Random formulas, J*-frames and strongly persistent models for property
//! tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bitset::WorldSet;
use crate::formula::{desugar, Formula, RawFormula, Sort, Var};
use crate::kripke::{check_jstar_frame, KripkeFrame, KripkeModel};

#[derive(Clone, Debug)]
pub struct FormulaShape {
    /// Variable names to draw from; each gets one random sort per formula.
    pub names: Vec<String>,
    pub sorts: Vec<Sort>,
    pub modalities: Vec<u32>,
    /// Maximal nesting of connectives, counting `->` and `[n]` as one level.
    pub max_depth: usize,
}

impl Default for FormulaShape {
    fn default() -> Self {
        FormulaShape {
            names: vec!["p".into(), "q".into()],
            sorts: vec![Sort::Finite(0), Sort::Finite(1), Sort::Finite(2), Sort::Omega],
            modalities: vec![0, 1, 2],
            max_depth: 3,
        }
    }
}

/// A formula over fixed variables, e.g. `p:0, q:1, r:2, s:w`.
pub fn random_formula_over<R: Rng + ?Sized>(rng: &mut R, vars: &[Var], modalities: &[u32], max_depth: usize) -> Formula {
    desugar(&raw(rng, vars, modalities, max_depth))
}

pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, shape: &FormulaShape) -> Formula {
    let vars: Vec<Var> = shape
        .names
        .iter()
        .map(|n| Var::new(n.clone(), *shape.sorts.choose(rng).expect("nonempty sorts")))
        .collect();
    random_formula_over(rng, &vars, &shape.modalities, shape.max_depth)
}

fn raw<R: Rng + ?Sized>(rng: &mut R, vars: &[Var], modalities: &[u32], depth: usize) -> RawFormula {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    if leaf {
        return match rng.gen_range(0..10) {
            0 => RawFormula::Top,
            1 => RawFormula::Bot,
            _ => RawFormula::Var(vars.choose(rng).expect("nonempty vars").clone()),
        };
    }
    let sub = |rng: &mut R| Box::new(raw(rng, vars, modalities, depth - 1));
    let modality = |rng: &mut R| *modalities.choose(rng).expect("nonempty modalities");
    match rng.gen_range(0..12) {
        0 | 1 => RawFormula::Neg(sub(rng)),
        2 | 3 => RawFormula::And(sub(rng), sub(rng)),
        4 => RawFormula::Or(sub(rng), sub(rng)),
        5 | 6 => RawFormula::Imp(sub(rng), sub(rng)),
        7..=9 => {
            let k = modality(rng);
            RawFormula::Dia(k, sub(rng))
        }
        _ => {
            let k = modality(rng);
            RawFormula::Box(k, sub(rng))
        }
    }
}

/// Transitive closure and the `R_m ∘ R_n ⊆ R_m` closure; `(x R_n y ⇒ R_m(x) = R_m(y))`
/// violations are repaired by dropping the `R_n` edge.
fn repair(frame: &mut KripkeFrame, modalities: &[u32]) -> bool {
    let n = frame.len();
    for _ in 0..4 * n * n + 8 {
        let mut changed = false;
        for &k in modalities {
            for (x, y) in frame.edges(k) {
                for z in 0..n {
                    if frame.has_edge(k, y, z) && !frame.has_edge(k, x, z) {
                        frame.add_edge(k, x, z);
                        changed = true;
                    }
                }
            }
        }
        for &lower in modalities {
            for &upper in modalities.iter().filter(|&&u| u > lower) {
                for (x, y) in frame.edges(lower) {
                    for z in 0..n {
                        if frame.has_edge(upper, y, z) && !frame.has_edge(lower, x, z) {
                            frame.add_edge(lower, x, z);
                            changed = true;
                        }
                    }
                }
            }
        }
        if changed {
            continue;
        }
        let mut drop = None;
        'search: for &upper in modalities {
            for &lower in modalities.iter().filter(|&&l| l < upper) {
                for (x, y) in frame.edges(upper) {
                    if (0..n).any(|z| frame.has_edge(lower, x, z) != frame.has_edge(lower, y, z)) {
                        drop = Some((upper, x, y));
                        break 'search;
                    }
                }
            }
        }
        match drop {
            None => return true,
            Some((k, x, y)) => remove_edge(frame, k, x, y),
        }
    }
    false
}

fn remove_edge(frame: &mut KripkeFrame, k: u32, x: usize, y: usize) {
    let edges: Vec<(u32, usize, usize)> = frame.all_edges().into_iter().filter(|&e| e != (k, x, y)).collect();
    let mut fresh = KripkeFrame::new(frame.worlds().to_vec()).expect("same worlds");
    for (m, a, b) in edges {
        fresh.add_edge(m, a, b);
    }
    *frame = fresh;
}

/// A random J*-frame on `worlds` points over (a subset of) `modalities`.
/// Edges only go from lower to higher world index, which keeps every
/// relation irreflexive and conversely well founded.
pub fn random_jstar_frame<R: Rng + ?Sized>(rng: &mut R, worlds: usize, modalities: &[u32]) -> KripkeFrame {
    let density = rng.gen_range(0.15..0.6);
    for _ in 0..64 {
        let mut frame = KripkeFrame::with_size(worlds);
        for &k in modalities {
            for x in 0..worlds {
                for y in x + 1..worlds {
                    if rng.gen_bool(density) {
                        frame.add_edge(k, x, y);
                    }
                }
            }
        }
        if repair(&mut frame, modalities) && check_jstar_frame(&frame).is_empty() {
            return frame;
        }
    }
    KripkeFrame::with_size(worlds)
}

/// For each world, the worlds that must share a `true` value with it under
/// the persistence clauses for a variable of the given sort.
fn forced_sets(frame: &KripkeFrame, sort: Sort) -> Vec<WorldSet> {
    let n = frame.len();
    let mut forced: Vec<WorldSet> = (0..n).map(|w| WorldSet::from_indices(n, [w])).collect();
    for (k, x, y) in frame.all_edges() {
        if sort.at_most(k) {
            forced[y].insert(x);
        }
        if sort.below(k) {
            forced[x].insert(y);
        }
    }
    loop {
        let mut changed = false;
        for w in 0..n {
            let mut acc = forced[w].clone();
            for v in forced[w].iter() {
                acc.union_with(&forced[v]);
            }
            if acc != forced[w] {
                forced[w] = acc;
                changed = true;
            }
        }
        if !changed {
            return forced;
        }
    }
}

/// A random truth set satisfying both persistence clauses for `sort`.
pub fn random_persistent_set<R: Rng + ?Sized>(rng: &mut R, frame: &KripkeFrame, sort: Sort) -> WorldSet {
    let n = frame.len();
    let forced = forced_sets(frame, sort);
    let p = rng.gen_range(0.1..0.6);
    let seeds: Vec<usize> = (0..n).filter(|_| rng.gen_bool(p)).collect();
    if rng.gen_bool(0.5) {
        let mut set = WorldSet::empty(n);
        for w in seeds {
            set.union_with(&forced[w]);
        }
        set
    } else {
        // complement of a set closed under the converse implications
        let mut off = WorldSet::empty(n);
        for w in seeds {
            for (v, set) in forced.iter().enumerate() {
                if set.contains(w) {
                    off.insert(v);
                }
            }
        }
        off.complement(n)
    }
}

pub fn random_persistent_model<R: Rng + ?Sized>(
    rng: &mut R,
    max_worlds: usize,
    modality_pool: &[u32],
    vars: &[Var],
) -> KripkeModel {
    let worlds = rng.gen_range(1..=max_worlds);
    let count = rng.gen_range(1..=modality_pool.len());
    let mut modalities: Vec<u32> = modality_pool.choose_multiple(rng, count).copied().collect();
    modalities.sort_unstable();
    let frame = random_jstar_frame(rng, worlds, &modalities);
    let mut model = KripkeModel::new(frame);
    for v in vars {
        let set = random_persistent_set(rng, &model.frame, v.sort);
        model.set_truth_set(v, set).expect("distinct variables");
    }
    model
}

/// Flips the truth value of one random variable at one random world.
pub fn perturb<R: Rng + ?Sized>(rng: &mut R, model: &KripkeModel) -> KripkeModel {
    let mut out = model.clone();
    let vars: Vec<Var> = model.valuation().iter().map(|(n, v)| Var::new(n.clone(), v.sort)).collect();
    let Some(v) = vars.choose(rng) else {
        return out;
    };
    let w = rng.gen_range(0..model.len());
    let mut set = model.var_truth(v);
    set.set(w, !set.contains(w));
    out.set_truth_set(v, set).expect("same sort");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::validate_model;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_models_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let vars = [
            Var::new("p", Sort::Finite(0)),
            Var::new("q", Sort::Finite(1)),
            Var::new("r", Sort::Finite(2)),
            Var::new("s", Sort::Omega),
        ];
        let mut with_edges = 0;
        for _ in 0..300 {
            let m = random_persistent_model(&mut rng, 5, &[0, 1, 2], &vars);
            assert!(validate_model(&m).is_empty());
            with_edges += usize::from(!m.frame.all_edges().is_empty());
        }
        assert!(with_edges > 150);
    }

    #[test]
    fn formulas_respect_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let shape = FormulaShape::default();
        for _ in 0..200 {
            let f = random_formula(&mut rng, &shape);
            assert!(f.variables().len() <= 2);
            assert!(f.modalities().iter().all(|k| *k <= 2));
        }
    }
}
