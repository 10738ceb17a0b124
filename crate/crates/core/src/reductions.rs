//! Syntactic reduction premises between the systems.
//!
//! All outputs are built literally (left-nested conjunctions, no
//! simplification), so `T` conjuncts stay visible.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::formula::{diamond_subformulas, diamond_subformulas_by_level, Formula, Sort};

/// A finite set of modality indices.
pub type ModalitySet = BTreeSet<u32>;

/// Which reading of N and N⁺ to build.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum NPlusVariant {
    /// `N(φ) ∧ ⋀ [m] N(φ)` with the body-preserving `N`
    #[default]
    Default,
    /// `N'(φ) ∧ ⋀ [m] φ`, where `N'` chains different diamonds
    Literal,
}

impl FromStr for NPlusVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" => Ok(NPlusVariant::Default),
            "literal" => Ok(NPlusVariant::Literal),
            _ => Err(format!("unknown N+ variant `{s}` (expected default or literal)")),
        }
    }
}

/// `⋀ (<j>φᵢ -> <mᵢ>φᵢ)` over the diamond subformulas `<mᵢ>φᵢ` and
/// `mᵢ < j ≤ n`, where `n` is the largest `mᵢ`.
pub fn m_formula(phi: &Formula) -> Formula {
    let diamonds = diamond_subformulas(phi);
    let Some(top) = diamonds.iter().map(|(m, _)| *m).max() else {
        return Formula::Top;
    };
    Formula::conj(diamonds.iter().flat_map(|(m, body)| {
        (m + 1..=top).map(move |j| Formula::implies(Formula::dia(j, body.clone()), Formula::dia(*m, body.clone())))
    }))
}

/// `M(φ) ∧ [0]M(φ) ∧ … ∧ [n]M(φ)`; `T` when `φ` has no diamonds.
pub fn m_plus(phi: &Formula) -> Formula {
    let Some(top) = diamond_subformulas(phi).iter().map(|(m, _)| *m).max() else {
        return Formula::Top;
    };
    let m = m_formula(phi);
    Formula::conj(std::iter::once(m.clone()).chain((0..=top).map(|i| Formula::boxed(i, m.clone()))))
}

/// `⋀ (<l>φᵢ -> <mᵢ>φᵢ)` over the level-sorted diamonds `<mᵢ>φᵢ` and the
/// diamond levels `l > mᵢ` occurring in `φ`. This is M restricted to the
/// levels of `φ`, which is what makes `N⁺(φ)` a GLP* theorem.
pub fn n_formula(phi: &Formula) -> Formula {
    let list = diamond_subformulas_by_level(phi);
    let levels: BTreeSet<u32> = list.iter().map(|(m, _)| *m).collect();
    Formula::conj(list.iter().flat_map(|(m, body)| {
        levels
            .range(m + 1..)
            .map(move |&l| Formula::implies(Formula::dia(l, body.clone()), Formula::dia(*m, body.clone())))
    }))
}

/// `⋀ (<mⱼ>φⱼ -> <mᵢ>φᵢ)` over `i < j` in the level-sorted enumeration.
/// Not sound for GLP*: `<2>~q -> <1><2>~q` is an instance.
pub fn n_formula_chained(phi: &Formula) -> Formula {
    let list = diamond_subformulas_by_level(phi);
    let mut parts = Vec::new();
    for (i, (mi, fi)) in list.iter().enumerate() {
        for (mj, fj) in &list[i + 1..] {
            parts.push(Formula::implies(Formula::dia(*mj, fj.clone()), Formula::dia(*mi, fi.clone())));
        }
    }
    Formula::conj(parts)
}

pub fn n_variant(phi: &Formula, variant: NPlusVariant) -> Formula {
    match variant {
        NPlusVariant::Default => n_formula(phi),
        NPlusVariant::Literal => n_formula_chained(phi),
    }
}

/// `N(φ)` followed by one boxed conjunct per distinct diamond level.
pub fn n_plus(phi: &Formula, variant: NPlusVariant) -> Formula {
    let levels: BTreeSet<u32> = diamond_subformulas(phi).iter().map(|(m, _)| *m).collect();
    if levels.is_empty() {
        return Formula::Top;
    }
    let n = n_variant(phi, variant);
    let boxed_body = match variant {
        NPlusVariant::Default => n.clone(),
        NPlusVariant::Literal => phi.clone(),
    };
    Formula::conj(std::iter::once(n).chain(levels.into_iter().map(|m| Formula::boxed(m, boxed_body.clone()))))
}

/// `⋀ (φᵢ -> <nᵢ>φᵢ)` over the diamond subformulas.
pub fn h_formula(phi: &Formula) -> Formula {
    Formula::conj(
        diamond_subformulas(phi)
            .into_iter()
            .map(|(n, body)| Formula::implies(body.clone(), Formula::dia(n, body))),
    )
}

/// Persistence premises for each variable `p` of sort `α`:
/// `<j>p -> p` for `j ∈ Θ, j ≥ α` and `<j>~p -> ~p` for `j ∈ Θ, j > α`.
pub fn r_theta(phi: &Formula, theta: &ModalitySet) -> Formula {
    let mut parts = Vec::new();
    for v in phi.variables() {
        let Sort::Finite(alpha) = v.sort else {
            continue;
        };
        let p = Formula::Var(v);
        for &j in theta.iter().filter(|&&j| j >= alpha) {
            parts.push(Formula::implies(Formula::dia(j, p.clone()), p.clone()));
        }
        let not_p = Formula::neg(p);
        for &j in theta.iter().filter(|&&j| j > alpha) {
            parts.push(Formula::implies(Formula::dia(j, not_p.clone()), not_p.clone()));
        }
    }
    Formula::conj(parts)
}

/// `R_Θ(φ) ∧ ⋀_{j ∈ Θ} [j] R_Θ(φ)`.
pub fn r_theta_plus(phi: &Formula, theta: &ModalitySet) -> Formula {
    let r = r_theta(phi, theta);
    Formula::conj(std::iter::once(r.clone()).chain(theta.iter().map(|&j| Formula::boxed(j, r.clone()))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionKind {
    M,
    MPlus,
    N(NPlusVariant),
    NPlus(NPlusVariant),
    H,
    RTheta,
    RThetaPlus,
}

impl fmt::Display for ReductionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReductionKind::M => "m",
            ReductionKind::MPlus => "mplus",
            ReductionKind::N(_) => "n",
            ReductionKind::NPlus(_) => "nplus",
            ReductionKind::H => "h",
            ReductionKind::RTheta => "rtheta",
            ReductionKind::RThetaPlus => "rthetaplus",
        })
    }
}

/// Applies a reduction; `theta` defaults to the modalities of `phi`.
pub fn apply_reduction(kind: ReductionKind, phi: &Formula, theta: Option<&ModalitySet>) -> Formula {
    let default_theta;
    let theta = match theta {
        Some(t) => t,
        None => {
            default_theta = phi.modalities();
            &default_theta
        }
    };
    match kind {
        ReductionKind::M => m_formula(phi),
        ReductionKind::MPlus => m_plus(phi),
        ReductionKind::N(v) => n_variant(phi, v),
        ReductionKind::NPlus(v) => n_plus(phi, v),
        ReductionKind::H => h_formula(phi),
        ReductionKind::RTheta => r_theta(phi, theta),
        ReductionKind::RThetaPlus => r_theta_plus(phi, theta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn theta(items: &[u32]) -> ModalitySet {
        items.iter().copied().collect()
    }

    #[test]
    fn m_examples() {
        assert_eq!(m_formula(&f("<2>p & <0>q")), f("(<1>q -> <0>q) & (<2>q -> <0>q)"));
        assert_eq!(m_formula(&f("p:0")), Formula::Top);
        assert_eq!(m_formula(&f("<0>p")), Formula::Top);
    }

    #[test]
    fn m_plus_examples() {
        let phi = f("<2>p & <0>q");
        let m = m_formula(&phi);
        let expected = Formula::conj([
            m.clone(),
            Formula::boxed(0, m.clone()),
            Formula::boxed(1, m.clone()),
            Formula::boxed(2, m),
        ]);
        assert_eq!(m_plus(&phi), expected);
        assert_eq!(m_plus(&f("p:0")), Formula::Top);
        assert_eq!(m_plus(&f("<0>p")), f("T & [0]T"));
    }

    #[test]
    fn n_examples() {
        assert_eq!(n_formula(&f("<2>p & <0>q")), f("<2>q -> <0>q"));
        assert_eq!(n_formula(&f("<0>p")), Formula::Top);
        assert_eq!(n_formula(&f("<0>p & <0>q")), Formula::Top);
        assert_eq!(n_formula(&f("<1>p | <2><0>q")), f("(<1>q -> <0>q) & (<2>q -> <0>q) & (<2>p -> <1>p)"));
        assert_eq!(n_formula_chained(&f("<2>p & <0>q")), f("<2>p -> <0>q"));
        assert_eq!(n_formula_chained(&f("<0>p & <0>q")), f("<0>q -> <0>p"));
    }

    #[test]
    fn n_plus_examples() {
        let phi = f("<2>p & <0>q");
        let n = n_formula(&phi);
        assert_eq!(
            n_plus(&phi, NPlusVariant::Default),
            Formula::conj([n.clone(), Formula::boxed(0, n.clone()), Formula::boxed(2, n.clone())])
        );
        assert_eq!(
            n_plus(&phi, NPlusVariant::Literal),
            Formula::conj([n_formula_chained(&phi), Formula::boxed(0, phi.clone()), Formula::boxed(2, phi.clone())])
        );
        assert_eq!(n_plus(&f("p:0"), NPlusVariant::Default), Formula::Top);
        assert_eq!(n_plus(&f("p:0"), NPlusVariant::Literal), Formula::Top);
    }

    #[test]
    fn h_examples() {
        assert_eq!(h_formula(&f("<0>p")), f("p -> <0>p"));
        assert_eq!(h_formula(&f("p:0")), Formula::Top);
        assert_eq!(h_formula(&f("<1><0>p")), f("(<0>p -> <1><0>p) & (p -> <0>p)"));
    }

    #[test]
    fn r_examples() {
        assert_eq!(r_theta(&f("p:1"), &theta(&[0, 2])), f("(<2>p:1 -> p:1) & (<2>~p:1 -> ~p:1)"));
        assert_eq!(r_theta(&f("<1>p"), &theta(&[0, 1, 2])), Formula::Top);
        assert_eq!(r_theta(&f("p:0"), &theta(&[0])), f("<0>p:0 -> p:0"));
        let r = r_theta(&f("p:1"), &theta(&[0, 2]));
        assert_eq!(
            r_theta_plus(&f("p:1"), &theta(&[0, 2])),
            Formula::conj([r.clone(), Formula::boxed(0, r.clone()), Formula::boxed(2, r)])
        );
        assert_eq!(r_theta_plus(&f("p:1"), &theta(&[])), Formula::Top);
        assert_eq!(
            apply_reduction(ReductionKind::RThetaPlus, &f("<0>p:0"), None),
            f("(<0>p:0 -> p:0) & [0](<0>p:0 -> p:0)")
        );
    }
}
