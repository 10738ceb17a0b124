//! Benchmark inputs shared by the criterion harnesses.

use glpstar_core::{parse_formula, Formula, SystemId};

/// Formulas exercised by the `decide` benchmark, with the system to decide them in.
pub const DECIDE_CORPUS: &[(&str, SystemId)] = &[
    ("<1>p:1 -> p:1", SystemId::GLPstar),
    ("<1>p -> <0>p", SystemId::Jstar),
    ("<1>p -> <0>p", SystemId::GLPstar),
    ("<0><1>p -> <0>p", SystemId::GLPstar),
    ("<0>p -> [1]<0>p", SystemId::GLPstar),
    ("<0>T", SystemId::GLPSstar),
    ("[0]([0]p -> p) -> [0]p", SystemId::Jstar),
    ("<2>(p:1 & <1>q:0) -> <0>q:0", SystemId::GLPstar),
    ("<1>p & <1>~p -> <0>(p | q)", SystemId::GLP),
];

pub fn decide_corpus() -> Vec<(String, Formula, SystemId)> {
    DECIDE_CORPUS
        .iter()
        .map(|&(text, system)| (text.to_string(), parse_formula(text).expect("corpus parses"), system))
        .collect()
}
