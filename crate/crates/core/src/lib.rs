//! Many-sorted polymodal provability logics: formulas, Kripke semantics,
//! decision procedures, syntactic reductions, a brute-force model oracle and
//! a Hilbert-style proof checker.

pub mod bitset;
pub mod decide;
pub mod formula;
pub mod kripke;
pub mod oracle;
pub mod parser;
pub mod proofs;
pub mod reductions;
pub mod testgen;

pub use bitset::WorldSet;
pub use decide::{
    build_canonical, canonical_relation, decide, decide_with, hintikka_candidates, CanonicalModel, DecideError,
    DecideOptions, Decision, Engine, HintikkaWorld, SystemId, Verdict, Via,
};
pub use formula::{adequate_closure, modified_negation, sort_of, subformulas, Formula, FormulaSet, RawFormula, Sort, Var};
pub use kripke::{
    adjoin_root, check_jstar_frame, check_strong_persistence, find_roots, model_check, validate_model, KripkeError,
    KripkeFrame, KripkeModel, RootMode, Violation, ViolationReport,
};
pub use parser::{export_dot, parse_formula, parse_model, render_formula, render_model, render_sugared, ParseError, SourceSpan};
pub use proofs::{check_proof, match_axiom, parse_proof, Justification, ProofError, ProofLine, ProofObject, SchemeId};
pub use reductions::{ModalitySet, NPlusVariant, ReductionKind};
