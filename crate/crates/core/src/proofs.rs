//! Hilbert-style proofs and their checker.
//!
//! Proof files are line oriented:
//!
//! ```text
//! system glpstar
//! goal <0>p -> [1]<0>p
//! 1. <1>~<0>p -> ~<0>p ; ax sigma
//! 2. (<1>~<0>p -> ~<0>p) -> <0>p -> [1]<0>p ; ax taut
//! 3. <0>p -> [1]<0>p ; mp 1 2
//! ```
//!
//! `mp i j` needs line `j` to be `line_i -> this`; `mono i n` turns a line
//! `a -> b` into `<n>a -> <n>b`; `nec i n` boxes line `i`. Formulas are
//! compared after desugaring, so `->` and `[n]` may be written either way.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::decide::SystemId;
use crate::formula::{sort_of, Formula};
use crate::parser::{parse_formula, render_sugared};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeId {
    Taut,
    Distribution,
    BoxTop,
    Loeb,
    /// `<m>a -> [n]<m>a` for `m < n`
    Persist,
    /// `<n>a -> <m>a` for `m < n`
    Mono,
    /// `<n>a -> a` for `sort(a) ≤ n`
    SigmaComplete,
    /// `<m><n>a -> <m>a` for `m < n`
    Transit,
    /// `a -> <n>a`
    Reflexive,
}

impl SchemeId {
    pub const ALL: [SchemeId; 9] = [
        SchemeId::Taut,
        SchemeId::Distribution,
        SchemeId::BoxTop,
        SchemeId::Loeb,
        SchemeId::Persist,
        SchemeId::Mono,
        SchemeId::SigmaComplete,
        SchemeId::Transit,
        SchemeId::Reflexive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Taut => "taut",
            SchemeId::Distribution => "dist",
            SchemeId::BoxTop => "boxtop",
            SchemeId::Loeb => "loeb",
            SchemeId::Persist => "persist",
            SchemeId::Mono => "mono",
            SchemeId::SigmaComplete => "sigma",
            SchemeId::Transit => "transit",
            SchemeId::Reflexive => "reflexive",
        }
    }

    /// Human-readable shape, used in rejection messages.
    pub fn shape(self, loeb_literal: bool) -> &'static str {
        match self {
            SchemeId::Taut => "a propositional tautology",
            SchemeId::Distribution => "<n>(a | b) -> <n>a | <n>b",
            SchemeId::BoxTop => "[n]T",
            SchemeId::Loeb if loeb_literal => "<n>a -> <n>(a & <n>~a)",
            SchemeId::Loeb => "<n>a -> <n>(a & ~<n>a)",
            SchemeId::Persist => "<m>a -> [n]<m>a with m < n",
            SchemeId::Mono => "<n>a -> <m>a with m < n",
            SchemeId::SigmaComplete => "<n>a -> a with sort(a) <= n",
            SchemeId::Transit => "<m><n>a -> <m>a with m < n",
            SchemeId::Reflexive => "a -> <n>a",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| format!("unknown axiom scheme `{s}`"))
    }
}

/// Axiom schemes of each system.
pub fn available_schemes(system: SystemId) -> &'static [SchemeId] {
    use SchemeId::*;
    match system {
        SystemId::GLP => &[Taut, Distribution, BoxTop, Loeb, Persist, Mono],
        SystemId::GLPstar => &[Taut, Distribution, BoxTop, Loeb, Mono, SigmaComplete],
        SystemId::Jstar => &[Taut, Distribution, BoxTop, Loeb, SigmaComplete, Transit],
        SystemId::GLPSstar => &[Taut, Distribution, BoxTop, Loeb, Mono, SigmaComplete, Reflexive],
    }
}

/// Only modus ponens is a rule of GLPS*.
pub fn allows_modal_rules(system: SystemId) -> bool {
    system != SystemId::GLPSstar
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Match Löb as `<n>a -> <n>(a & <n>~a)` instead of `<n>a -> <n>(a & ~<n>a)`.
    pub loeb_literal: bool,
}

pub const MAX_TAUT_ATOMS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("scheme `{scheme}` is not an axiom scheme of {system}")]
    SchemeUnavailable { scheme: SchemeId, system: SystemId },
    #[error("line {line}: {reason}")]
    Rejected { line: usize, reason: String },
    #[error("proof file line {line}: {message}")]
    Syntax { line: usize, message: String },
}

fn neg(f: &Formula) -> Option<&Formula> {
    match f {
        Formula::Neg(a) => Some(a),
        _ => None,
    }
}

fn dia(f: &Formula) -> Option<(u32, &Formula)> {
    match f {
        Formula::Dia(n, a) => Some((*n, a)),
        _ => None,
    }
}

/// Maximal subformulas that are not boolean combinations.
fn boolean_atoms<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::Top | Formula::Bot => {}
        Formula::Var(_) | Formula::Dia(..) => {
            if !out.contains(&f) {
                out.push(f);
            }
        }
        Formula::Neg(a) => boolean_atoms(a, out),
        Formula::And(a, b) | Formula::Or(a, b) => {
            boolean_atoms(a, out);
            boolean_atoms(b, out);
        }
    }
}

fn eval_skeleton(f: &Formula, atoms: &[&Formula], row: u32) -> bool {
    match f {
        Formula::Top => true,
        Formula::Bot => false,
        Formula::Neg(a) => !eval_skeleton(a, atoms, row),
        Formula::And(a, b) => eval_skeleton(a, atoms, row) && eval_skeleton(b, atoms, row),
        Formula::Or(a, b) => eval_skeleton(a, atoms, row) || eval_skeleton(b, atoms, row),
        atom => {
            let i = atoms.iter().position(|a| *a == atom).expect("collected atom");
            row >> i & 1 == 1
        }
    }
}

/// Truth-table check over the boolean skeleton.
pub fn is_tautology(f: &Formula) -> Result<bool, String> {
    let mut atoms = Vec::new();
    boolean_atoms(f, &mut atoms);
    if atoms.len() > MAX_TAUT_ATOMS {
        return Err(format!("{} propositional atoms exceed the limit of {MAX_TAUT_ATOMS}", atoms.len()));
    }
    Ok((0..1u32 << atoms.len()).all(|row| eval_skeleton(f, &atoms, row)))
}

/// Structural match against one scheme, ignoring availability.
fn matches_scheme(psi: &Formula, scheme: SchemeId, opts: CheckOptions) -> Result<bool, String> {
    if scheme == SchemeId::Taut {
        return is_tautology(psi);
    }
    if scheme == SchemeId::BoxTop {
        let ok = neg(psi)
            .and_then(dia)
            .and_then(|(_, body)| neg(body))
            .is_some_and(|inner| *inner == Formula::Top);
        return Ok(ok);
    }
    let Some((lhs, rhs)) = psi.as_implication() else {
        return Ok(false);
    };
    let ok = match scheme {
        SchemeId::Distribution => (|| {
            let (n, body) = dia(lhs)?;
            let Formula::Or(a, b) = body else { return None };
            let Formula::Or(da, db) = rhs else { return None };
            Some(**da == Formula::dia(n, (**a).clone()) && **db == Formula::dia(n, (**b).clone()))
        })()
        .unwrap_or(false),
        SchemeId::Loeb => (|| {
            let (n, a) = dia(lhs)?;
            let expected_tail = if opts.loeb_literal {
                Formula::dia(n, Formula::neg(a.clone()))
            } else {
                Formula::neg(Formula::dia(n, a.clone()))
            };
            Some(*rhs == Formula::dia(n, Formula::and(a.clone(), expected_tail)))
        })()
        .unwrap_or(false),
        SchemeId::Persist => (|| {
            let (m, _) = dia(lhs)?;
            let (n, inner) = dia(neg(rhs)?)?;
            Some(m < n && neg(inner)? == lhs)
        })()
        .unwrap_or(false),
        SchemeId::Mono => (|| {
            let (n, a) = dia(lhs)?;
            let (m, b) = dia(rhs)?;
            Some(m < n && a == b)
        })()
        .unwrap_or(false),
        SchemeId::SigmaComplete => (|| {
            let (n, a) = dia(lhs)?;
            Some(a == rhs && sort_of(a).at_most(n))
        })()
        .unwrap_or(false),
        SchemeId::Transit => (|| {
            let (m, inner) = dia(lhs)?;
            let (n, a) = dia(inner)?;
            let (m2, b) = dia(rhs)?;
            Some(m < n && m == m2 && a == b)
        })()
        .unwrap_or(false),
        SchemeId::Reflexive => dia(rhs).is_some_and(|(_, a)| a == lhs),
        SchemeId::Taut | SchemeId::BoxTop => unreachable!("handled above"),
    };
    Ok(ok)
}

pub fn match_axiom(psi: &Formula, scheme: SchemeId, system: SystemId) -> Result<bool, ProofError> {
    match_axiom_with(psi, scheme, system, CheckOptions::default())
}

pub fn match_axiom_with(
    psi: &Formula,
    scheme: SchemeId,
    system: SystemId,
    opts: CheckOptions,
) -> Result<bool, ProofError> {
    if !available_schemes(system).contains(&scheme) {
        return Err(ProofError::SchemeUnavailable { scheme, system });
    }
    Ok(matches_scheme(psi, scheme, opts).unwrap_or(false))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Justification {
    Axiom(SchemeId),
    ModusPonens(usize, usize),
    DiaMono(usize, u32),
    Necessitation(usize, u32),
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Axiom(s) => write!(f, "ax {s}"),
            Justification::ModusPonens(i, j) => write!(f, "mp {i} {j}"),
            Justification::DiaMono(i, n) => write!(f, "mono {i} {n}"),
            Justification::Necessitation(i, n) => write!(f, "nec {i} {n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofLine {
    pub index: usize,
    pub formula: Formula,
    pub justification: Justification,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofObject {
    pub system: SystemId,
    pub lines: Vec<ProofLine>,
    pub goal: Formula,
}

impl ProofObject {
    pub fn render(&self) -> String {
        let mut out = format!("system {}\ngoal {}\n", self.system, render_sugared(&self.goal));
        for l in &self.lines {
            out.push_str(&format!("{}. {} ; {}\n", l.index, render_sugared(&l.formula), l.justification));
        }
        out
    }
}

fn syntax(line: usize, message: impl Into<String>) -> ProofError {
    ProofError::Syntax { line, message: message.into() }
}

fn parse_justification(text: &str, line: usize) -> Result<Justification, ProofError> {
    let words: Vec<&str> = text.split_whitespace().collect();
    let num = |w: &str| w.parse::<usize>().map_err(|_| syntax(line, format!("expected a number, found `{w}`")));
    match words.as_slice() {
        ["ax", scheme] => Ok(Justification::Axiom(scheme.parse().map_err(|e: String| syntax(line, e))?)),
        ["mp", i, j] => Ok(Justification::ModusPonens(num(i)?, num(j)?)),
        ["mono", i, n] => Ok(Justification::DiaMono(num(i)?, num(n)? as u32)),
        ["nec", i, n] => Ok(Justification::Necessitation(num(i)?, num(n)? as u32)),
        _ => Err(syntax(
            line,
            format!("bad justification `{text}` (expected `ax <scheme>`, `mp i j`, `mono i n` or `nec i n`)"),
        )),
    }
}

pub fn parse_proof(text: &str) -> Result<ProofObject, ProofError> {
    let mut system = None;
    let mut goal = None;
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix("system ") {
            system = Some(rest.trim().parse::<SystemId>().map_err(|e| syntax(lineno, e.to_string()))?);
        } else if let Some(rest) = body.strip_prefix("goal ") {
            goal = Some(parse_formula(rest).map_err(|e| syntax(lineno, e.to_string()))?);
        } else {
            let (head, just) = body
                .rsplit_once(';')
                .ok_or_else(|| syntax(lineno, "expected `<index>. <formula> ; <justification>`"))?;
            let (idx, formula) = head
                .split_once('.')
                .ok_or_else(|| syntax(lineno, "expected `<index>.` before the formula"))?;
            let index = idx
                .trim()
                .parse::<usize>()
                .map_err(|_| syntax(lineno, format!("bad line index `{}`", idx.trim())))?;
            let formula = parse_formula(formula).map_err(|e| syntax(lineno, e.to_string()))?;
            lines.push(ProofLine { index, formula, justification: parse_justification(just, lineno)? });
        }
    }
    Ok(ProofObject {
        system: system.ok_or_else(|| syntax(0, "missing `system` header"))?,
        goal: goal.ok_or_else(|| syntax(0, "missing `goal` header"))?,
        lines,
    })
}

pub fn check_proof(proof: &ProofObject) -> Result<(), ProofError> {
    check_proof_with(proof, CheckOptions::default())
}

/// Validates every line in order and returns the first failure.
pub fn check_proof_with(proof: &ProofObject, opts: CheckOptions) -> Result<(), ProofError> {
    let system = proof.system;
    let mut proved: BTreeMap<usize, &Formula> = BTreeMap::new();
    let reject = |line: usize, reason: String| Err(ProofError::Rejected { line, reason });
    let Some(last) = proof.lines.last() else {
        return reject(0, "empty proof".into());
    };
    for line in &proof.lines {
        let this = &line.formula;
        let k = line.index;
        if proved.range(k..).next().is_some() {
            return reject(k, "line indices must increase".into());
        }
        let cited = |i: usize| -> Result<&Formula, ProofError> {
            if i >= k {
                return Err(ProofError::Rejected { line: k, reason: format!("cites line {i}, which is not earlier") });
            }
            proved
                .get(&i)
                .copied()
                .ok_or_else(|| ProofError::Rejected { line: k, reason: format!("cites missing line {i}") })
        };
        match line.justification {
            Justification::Axiom(scheme) => {
                if !available_schemes(system).contains(&scheme) {
                    return reject(k, format!("scheme `{scheme}` is not an axiom scheme of {system}"));
                }
                match matches_scheme(this, scheme, opts) {
                    Ok(true) => {}
                    Ok(false) => {
                        return reject(
                            k,
                            format!("`{}` is not an instance of `{scheme}`; expected {}", render_sugared(this), scheme.shape(opts.loeb_literal)),
                        )
                    }
                    Err(reason) => return reject(k, reason),
                }
            }
            Justification::ModusPonens(i, j) => {
                let (a, imp) = (cited(i)?, cited(j)?);
                let expected = Formula::implies(a.clone(), this.clone());
                if *imp != expected {
                    return reject(k, format!("modus ponens needs line {j} to be `{}`", render_sugared(&expected)));
                }
            }
            Justification::DiaMono(i, n) => {
                if !allows_modal_rules(system) {
                    return reject(k, format!("{system} has modus ponens as its only rule"));
                }
                let premise = cited(i)?;
                let Some((a, b)) = premise.as_implication() else {
                    return reject(k, format!("line {i} is not an implication"));
                };
                let expected = Formula::implies(Formula::dia(n, a.clone()), Formula::dia(n, b.clone()));
                if *this != expected {
                    return reject(k, format!("expected `{}`", render_sugared(&expected)));
                }
            }
            Justification::Necessitation(i, n) => {
                if !allows_modal_rules(system) {
                    return reject(k, format!("{system} has modus ponens as its only rule"));
                }
                let expected = Formula::boxed(n, cited(i)?.clone());
                if *this != expected {
                    return reject(k, format!("expected `{}`", render_sugared(&expected)));
                }
            }
        }
        proved.insert(k, this);
    }
    if last.formula != proof.goal {
        return reject(last.index, format!("last line proves `{}`, not the goal `{}`", render_sugared(&last.formula), render_sugared(&proof.goal)));
    }
    Ok(())
}
