//! Concrete syntax: formulas, model files and DOT export.
//!
//! Formula grammar (lowest precedence first):
//!
//! ```text
//! imp   := or ( "->" imp )?
//! or    := and ( "|" and )*
//! and   := unary ( "&" unary )*
//! unary := "~" unary | "<n>" unary | "[n]" unary | atom
//! atom  := "T" | "F" | name | name ":" sort | "(" imp ")"
//! sort  := digits | "w"
//! ```
//!
//! The Unicode forms `¬ ∧ ∨ → ⊤ ⊥ ◊n □n ω` are accepted as aliases.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::bitset::WorldSet;
use crate::formula::{desugar, Formula, RawFormula, Sort, Var};
use crate::kripke::{KripkeError, KripkeFrame, KripkeModel};

/// Byte range `start..end` into the parsed text.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        SourceSpan { start, end }
    }

    fn shift(self, by: usize) -> Self {
        SourceSpan { start: self.start + by, end: self.end + by }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("invalid number `{0}`")]
    InvalidNumber(String),
    #[error("variable `{name}` used with sorts {first} and {second}")]
    SortConflict { name: String, first: Sort, second: Sort },
    #[error("undeclared world `{0}`")]
    UndeclaredWorld(String),
    #[error("duplicate world `{0}`")]
    DuplicateWorld(String),
    #[error("{0}")]
    Model(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at {span}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
}

impl ParseError {
    fn new(kind: ParseErrorKind, span: SourceSpan) -> Self {
        ParseError { kind, span }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Not,
    And,
    Or,
    Arrow,
    Dia(u32),
    Box(u32),
    Top,
    Bot,
    Var(String, Option<Sort>),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Not => f.write_str("`~`"),
            Tok::And => f.write_str("`&`"),
            Tok::Or => f.write_str("`|`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Dia(n) => write!(f, "`<{n}>`"),
            Tok::Box(n) => write!(f, "`[{n}]`"),
            Tok::Top => f.write_str("`T`"),
            Tok::Bot => f.write_str("`F`"),
            Tok::Var(name, _) => write!(f, "variable `{name}`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek_char()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn number(&mut self) -> Result<u32, ParseError> {
        let start = self.pos;
        while self.peek_char().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text = &self.src[start..self.pos];
        if text.is_empty() {
            let found = self.peek_char().map_or("end of input".to_string(), |c| format!("`{c}`"));
            return Err(ParseError::new(
                ParseErrorKind::Unexpected { expected: "a modality index".into(), found },
                SourceSpan::new(start, self.pos),
            ));
        }
        text.parse()
            .map_err(|_| ParseError::new(ParseErrorKind::InvalidNumber(text.into()), SourceSpan::new(start, self.pos)))
    }

    fn expect(&mut self, want: char) -> Result<(), ParseError> {
        let start = self.pos;
        match self.bump() {
            Some(c) if c == want => Ok(()),
            other => Err(ParseError::new(
                ParseErrorKind::Unexpected {
                    expected: format!("`{want}`"),
                    found: other.map_or("end of input".to_string(), |c| format!("`{c}`")),
                },
                SourceSpan::new(start, self.pos),
            )),
        }
    }

    fn next(&mut self) -> Result<(Tok, SourceSpan), ParseError> {
        while self.peek_char().is_some_and(char::is_whitespace) {
            self.bump();
        }
        let start = self.pos;
        let Some(c) = self.bump() else {
            return Ok((Tok::End, SourceSpan::new(start, start)));
        };
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '~' | '¬' => Tok::Not,
            '&' | '∧' => Tok::And,
            '|' | '∨' => Tok::Or,
            '→' => Tok::Arrow,
            '⊤' => Tok::Top,
            '⊥' => Tok::Bot,
            '-' => {
                self.expect('>')?;
                Tok::Arrow
            }
            '<' => {
                let n = self.number()?;
                self.expect('>')?;
                Tok::Dia(n)
            }
            '[' => {
                let n = self.number()?;
                self.expect(']')?;
                Tok::Box(n)
            }
            '◊' | '◇' => Tok::Dia(self.number()?),
            '□' | '◻' => Tok::Box(self.number()?),
            c if c.is_ascii_alphabetic() || c == '_' => {
                while self
                    .peek_char()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
                {
                    self.bump();
                }
                let name = &self.src[start..self.pos];
                let sort = if self.peek_char() == Some(':') {
                    self.bump();
                    Some(self.sort()?)
                } else {
                    None
                };
                match (name, sort) {
                    ("T", None) => Tok::Top,
                    ("F", None) => Tok::Bot,
                    _ => Tok::Var(name.to_string(), sort),
                }
            }
            other => {
                return Err(ParseError::new(
                    ParseErrorKind::UnexpectedChar(other),
                    SourceSpan::new(start, self.pos),
                ))
            }
        };
        Ok((tok, SourceSpan::new(start, self.pos)))
    }

    fn sort(&mut self) -> Result<Sort, ParseError> {
        match self.peek_char() {
            Some('w') | Some('ω') => {
                self.bump();
                Ok(Sort::Omega)
            }
            _ => Ok(Sort::Finite(self.number()?)),
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    span: SourceSpan,
    sorts: BTreeMap<String, Sort>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer { src, pos: 0 };
        let (tok, span) = lexer.next()?;
        Ok(Parser { lexer, tok, span, sorts: BTreeMap::new() })
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        let (tok, span) = self.lexer.next()?;
        self.tok = tok;
        self.span = span;
        Ok(())
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError::new(
            ParseErrorKind::Unexpected { expected: expected.into(), found: self.tok.to_string() },
            self.span,
        )
    }

    fn implication(&mut self) -> Result<RawFormula, ParseError> {
        let lhs = self.disjunction()?;
        if self.tok == Tok::Arrow {
            self.advance()?;
            let rhs = self.implication()?;
            return Ok(RawFormula::Imp(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<RawFormula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.tok == Tok::Or {
            self.advance()?;
            let rhs = self.conjunction()?;
            lhs = RawFormula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<RawFormula, ParseError> {
        let mut lhs = self.unary()?;
        while self.tok == Tok::And {
            self.advance()?;
            let rhs = self.unary()?;
            lhs = RawFormula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<RawFormula, ParseError> {
        match self.tok {
            Tok::Not => {
                self.advance()?;
                Ok(RawFormula::Neg(Box::new(self.unary()?)))
            }
            Tok::Dia(n) => {
                self.advance()?;
                Ok(RawFormula::Dia(n, Box::new(self.unary()?)))
            }
            Tok::Box(n) => {
                self.advance()?;
                Ok(RawFormula::Box(n, Box::new(self.unary()?)))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<RawFormula, ParseError> {
        match std::mem::replace(&mut self.tok, Tok::End) {
            Tok::Top => {
                self.advance()?;
                Ok(RawFormula::Top)
            }
            Tok::Bot => {
                self.advance()?;
                Ok(RawFormula::Bot)
            }
            Tok::Var(name, sort) => {
                let sort = sort.unwrap_or(Sort::Omega);
                match self.sorts.get(&name) {
                    Some(&first) if first != sort => {
                        return Err(ParseError::new(
                            ParseErrorKind::SortConflict { name, first, second: sort },
                            self.span,
                        ))
                    }
                    _ => {
                        self.sorts.insert(name.clone(), sort);
                    }
                }
                self.advance()?;
                Ok(RawFormula::Var(Var::new(name, sort)))
            }
            Tok::LParen => {
                self.advance()?;
                let inner = self.implication()?;
                if self.tok != Tok::RParen {
                    return Err(self.unexpected("`)`"));
                }
                self.advance()?;
                Ok(inner)
            }
            other => {
                self.tok = other;
                Err(self.unexpected("a formula"))
            }
        }
    }
}

/// Parses surface syntax without desugaring.
pub fn parse_raw_formula(text: &str) -> Result<RawFormula, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.implication()?;
    if p.tok != Tok::End {
        return Err(p.unexpected("end of input"));
    }
    Ok(f)
}

/// Parses and desugars a formula.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_raw_formula(text).map(|raw| desugar(&raw))
}

/// Parses a formula file: one formula per line, `#` starts a comment.
/// Returns each formula with its 1-based line number.
pub fn parse_formula_file(text: &str) -> Result<Vec<(usize, Formula)>, ParseError> {
    let mut out = Vec::new();
    let mut offset = 0;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        let body = strip_comment(line);
        if !body.trim().is_empty() {
            let f = parse_formula(body).map_err(|e| ParseError { span: e.span.shift(offset), ..e })?;
            out.push((i + 1, f));
        }
        offset += line.len();
    }
    Ok(out)
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

const OR_PREC: u8 = 1;
const AND_PREC: u8 = 2;
const UNARY_PREC: u8 = 3;

fn write_formula(out: &mut String, f: &Formula, ctx: u8) {
    match f {
        Formula::Top => out.push('T'),
        Formula::Bot => out.push('F'),
        Formula::Var(v) => {
            let _ = write!(out, "{v}");
        }
        Formula::Neg(a) => {
            out.push('~');
            write_formula(out, a, UNARY_PREC);
        }
        Formula::Dia(n, a) => {
            let _ = write!(out, "<{n}>");
            write_formula(out, a, UNARY_PREC);
        }
        Formula::And(a, b) => {
            let paren = ctx > AND_PREC;
            if paren {
                out.push('(');
            }
            write_formula(out, a, AND_PREC);
            out.push_str(" & ");
            write_formula(out, b, UNARY_PREC);
            if paren {
                out.push(')');
            }
        }
        Formula::Or(a, b) => {
            let paren = ctx > OR_PREC;
            if paren {
                out.push('(');
            }
            write_formula(out, a, OR_PREC);
            out.push_str(" | ");
            write_formula(out, b, AND_PREC);
            if paren {
                out.push(')');
            }
        }
    }
}

/// Renders a formula in ASCII surface syntax with minimal parentheses.
pub fn render_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f, 0);
    out
}

fn write_sugared(out: &mut String, f: &Formula, ctx: u8) {
    if let Formula::Neg(inner) = f {
        if let Formula::Dia(n, body) = inner.as_ref() {
            if let Formula::Neg(a) = body.as_ref() {
                let _ = write!(out, "[{n}]");
                return write_sugared(out, a, UNARY_PREC);
            }
        }
    }
    if let Some((a, b)) = f.as_implication() {
        let paren = ctx > 0;
        if paren {
            out.push('(');
        }
        write_sugared(out, a, OR_PREC);
        out.push_str(" -> ");
        write_sugared(out, b, 0);
        if paren {
            out.push(')');
        }
        return;
    }
    match f {
        Formula::Top | Formula::Bot | Formula::Var(_) => write_formula(out, f, ctx),
        Formula::Neg(a) => {
            out.push('~');
            write_sugared(out, a, UNARY_PREC);
        }
        Formula::Dia(n, a) => {
            let _ = write!(out, "<{n}>");
            write_sugared(out, a, UNARY_PREC);
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            let (prec, op) = if matches!(f, Formula::And(..)) { (AND_PREC, " & ") } else { (OR_PREC, " | ") };
            let paren = ctx > prec;
            if paren {
                out.push('(');
            }
            write_sugared(out, a, prec);
            out.push_str(op);
            write_sugared(out, b, prec + 1);
            if paren {
                out.push(')');
            }
        }
    }
}

/// Like [`render_formula`], but shows `~a | b` as `a -> b` and `~<n>~a` as
/// `[n]a`. Parses back to the same formula.
pub fn render_sugared(f: &Formula) -> String {
    let mut out = String::new();
    write_sugared(&mut out, f, 0);
    out
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_formula(self))
    }
}

struct PendingEdge {
    modality: u32,
    from: (String, SourceSpan),
    to: (String, SourceSpan),
}

struct PendingVal {
    var: Var,
    worlds: Vec<(String, SourceSpan)>,
    span: SourceSpan,
}

fn span_of(text: &str, line_offset: usize, piece: &str) -> SourceSpan {
    // `piece` is a subslice of `text`
    let start = piece.as_ptr() as usize - text.as_ptr() as usize;
    SourceSpan::new(line_offset + start, line_offset + start + piece.len())
}

fn model_err(msg: impl Into<String>, span: SourceSpan) -> ParseError {
    ParseError::new(ParseErrorKind::Model(msg.into()), span)
}

/// Parses the line-oriented model format:
///
/// ```text
/// worlds a b c
/// rel 1: a b
/// val p:0 = {b, c}
/// root a
/// ```
pub fn parse_model(text: &str) -> Result<KripkeModel, ParseError> {
    let mut worlds: Vec<(String, SourceSpan)> = Vec::new();
    let mut edges = Vec::new();
    let mut vals: Vec<PendingVal> = Vec::new();
    let mut root: Option<(String, SourceSpan)> = None;

    let mut offset = 0;
    for raw_line in text.split_inclusive('\n') {
        let line_offset = offset;
        offset += raw_line.len();
        let line = strip_comment(raw_line);
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let here = span_of(line, line_offset, trimmed);
        let (keyword, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
        match keyword {
            "worlds" => {
                for w in rest.split_whitespace() {
                    let span = span_of(line, line_offset, w);
                    if worlds.iter().any(|(n, _)| n == w) {
                        return Err(ParseError::new(ParseErrorKind::DuplicateWorld(w.into()), span));
                    }
                    worlds.push((w.to_string(), span));
                }
            }
            "rel" => {
                let (idx, pair) = rest
                    .split_once(':')
                    .ok_or_else(|| model_err("expected `rel <n>: <x> <y>`", here))?;
                let idx_t = idx.trim();
                let modality: u32 = idx_t.parse().map_err(|_| {
                    ParseError::new(
                        ParseErrorKind::InvalidNumber(idx_t.into()),
                        span_of(line, line_offset, idx_t),
                    )
                })?;
                let names: Vec<&str> = pair.split_whitespace().collect();
                if names.len() != 2 {
                    return Err(model_err("a relation line names exactly two worlds", here));
                }
                edges.push(PendingEdge {
                    modality,
                    from: (names[0].into(), span_of(line, line_offset, names[0])),
                    to: (names[1].into(), span_of(line, line_offset, names[1])),
                });
            }
            "val" => {
                let (lhs, rhs) = rest
                    .split_once('=')
                    .ok_or_else(|| model_err("expected `val <name>:<sort> = {...}`", here))?;
                let decl = lhs.trim();
                let var = match parse_formula(decl) {
                    Ok(Formula::Var(v)) => v,
                    Ok(_) => return Err(model_err("expected a variable", span_of(line, line_offset, decl))),
                    Err(e) => {
                        return Err(ParseError { span: e.span.shift(span_of(line, line_offset, decl).start), ..e })
                    }
                };
                let set = rhs.trim();
                let inner = set
                    .strip_prefix('{')
                    .and_then(|s| s.strip_suffix('}'))
                    .ok_or_else(|| model_err("expected a world set `{...}`", span_of(line, line_offset, set)))?;
                let ws = inner
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|w| (w.to_string(), span_of(line, line_offset, w)))
                    .collect();
                vals.push(PendingVal { var, worlds: ws, span: here });
            }
            "root" => {
                let w = rest.trim();
                if w.is_empty() || w.contains(char::is_whitespace) {
                    return Err(model_err("expected `root <world>`", here));
                }
                root = Some((w.to_string(), span_of(line, line_offset, w)));
            }
            _ => {
                return Err(model_err(
                    format!("unknown directive `{keyword}`"),
                    span_of(line, line_offset, keyword),
                ))
            }
        }
    }

    if worlds.is_empty() {
        return Err(model_err("no `worlds` line", SourceSpan::new(0, text.len())));
    }
    let frame = KripkeFrame::new(worlds.iter().map(|(n, _)| n.clone())).map_err(|e| match e {
        KripkeError::DuplicateWorld(w) => ParseError::new(ParseErrorKind::DuplicateWorld(w), SourceSpan::new(0, 0)),
        other => model_err(other.to_string(), SourceSpan::new(0, 0)),
    })?;
    let index: BTreeMap<&str, usize> = worlds.iter().enumerate().map(|(i, (n, _))| (n.as_str(), i)).collect();
    let resolve = |(name, span): &(String, SourceSpan)| {
        index
            .get(name.as_str())
            .copied()
            .ok_or_else(|| ParseError::new(ParseErrorKind::UndeclaredWorld(name.clone()), *span))
    };
    let mut resolved = Vec::new();
    for e in &edges {
        resolved.push((e.modality, resolve(&e.from)?, resolve(&e.to)?));
    }
    let root_idx = root.as_ref().map(resolve).transpose()?;
    let mut frame = frame;
    for (k, x, y) in resolved {
        frame.add_edge(k, x, y);
    }
    let n = frame.len();
    let mut model = KripkeModel::new(frame);
    for v in &vals {
        let mut set = WorldSet::empty(n);
        for w in &v.worlds {
            set.insert(resolve(w)?);
        }
        if let Some(existing) = model.valuation().get(&v.var.name) {
            if existing.sort != v.var.sort {
                return Err(ParseError::new(
                    ParseErrorKind::SortConflict {
                        name: v.var.name.clone(),
                        first: existing.sort,
                        second: v.var.sort,
                    },
                    v.span,
                ));
            }
            set.union_with(&existing.worlds);
        }
        model.set_truth_set(&v.var, set).expect("sort checked above");
    }
    model.set_root(root_idx);
    Ok(model)
}

/// Renders a model in the format read by [`parse_model`].
pub fn render_model(model: &KripkeModel) -> String {
    let frame = &model.frame;
    let mut out = String::from("worlds");
    for w in frame.worlds() {
        out.push(' ');
        out.push_str(w);
    }
    out.push('\n');
    for (k, x, y) in frame.all_edges() {
        let _ = writeln!(out, "rel {k}: {} {}", frame.world_name(x), frame.world_name(y));
    }
    for (name, val) in model.valuation() {
        let names: Vec<&str> = val.worlds.iter().map(|w| frame.world_name(w)).collect();
        let _ = writeln!(out, "val {name}:{} = {{{}}}", val.sort, names.join(", "));
    }
    if let Some(r) = model.root_name() {
        let _ = writeln!(out, "root {r}");
    }
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering: one node per world labeled with its true variables and
/// one edge per relation pair labeled with the modality index.
pub fn export_dot(model: &KripkeModel, highlight: Option<usize>) -> String {
    let frame = &model.frame;
    let mut out = String::from("digraph kripke {\n  node [shape=ellipse];\n");
    for (i, w) in frame.worlds().iter().enumerate() {
        let truths: Vec<String> = model
            .valuation()
            .iter()
            .filter(|(_, v)| v.worlds.contains(i))
            .map(|(name, v)| format!("{name}:{}", v.sort))
            .collect();
        let label = if truths.is_empty() { w.clone() } else { format!("{w}\\n{}", truths.join(", ")) };
        let style = if highlight == Some(i) { ", style=bold, peripheries=2, color=red" } else { "" };
        let _ = writeln!(out, "  \"{}\" [label=\"{}\"{style}];", dot_escape(w), dot_escape(&label).replace("\\\\n", "\\n"));
    }
    for (k, x, y) in frame.all_edges() {
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{k}\"];",
            dot_escape(frame.world_name(x)),
            dot_escape(frame.world_name(y))
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p0() -> Formula {
        Formula::var("p", Sort::Finite(0))
    }

    #[test]
    fn implication_desugars() {
        let f = parse_formula("<1>p:0 -> p:0").unwrap();
        assert_eq!(f, Formula::or(Formula::neg(Formula::dia(1, p0())), p0()));
    }

    #[test]
    fn box_of_negation() {
        let f = parse_formula("[2]~q:w").unwrap();
        let q = Formula::var("q", Sort::Omega);
        assert_eq!(f, Formula::neg(Formula::dia(2, Formula::neg(Formula::neg(q)))));
    }

    #[test]
    fn sort_conflict_is_reported() {
        let err = parse_formula("p:1 & p:2").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::SortConflict { .. }));
        assert_eq!(err.span, SourceSpan::new(6, 9));
    }

    #[test]
    fn bare_variable_is_omega() {
        assert_eq!(parse_formula("p").unwrap(), Formula::var("p", Sort::Omega));
        assert_eq!(parse_formula("p:w").unwrap(), Formula::var("p", Sort::Omega));
    }

    #[test]
    fn precedence_and_associativity() {
        let p = || Formula::var("p", Sort::Omega);
        let q = || Formula::var("q", Sort::Omega);
        let r = || Formula::var("r", Sort::Omega);
        assert_eq!(
            parse_formula("p | q & r").unwrap(),
            Formula::or(p(), Formula::and(q(), r()))
        );
        assert_eq!(
            parse_formula("p -> q -> r").unwrap(),
            Formula::implies(p(), Formula::implies(q(), r()))
        );
        assert_eq!(
            parse_formula("p & q & r").unwrap(),
            Formula::and(Formula::and(p(), q()), r())
        );
        assert_eq!(parse_formula("~<0>p").unwrap(), Formula::neg(Formula::dia(0, p())));
    }

    #[test]
    fn unicode_aliases() {
        assert_eq!(
            parse_formula("◊1 p:0 → ¬⊥ ∧ ⊤").unwrap(),
            parse_formula("<1>p:0 -> ~F & T").unwrap()
        );
        assert_eq!(parse_formula("□0 p:ω").unwrap(), parse_formula("[0]p:w").unwrap());
    }

    #[test]
    fn errors_carry_spans() {
        for bad in ["", "p &", "(p", "<x>p", "p $ q", "p q", "<1>"] {
            let err = parse_formula(bad).unwrap_err();
            assert!(err.span.start <= err.span.end && err.span.end <= bad.len(), "{bad}: {err}");
        }
    }

    #[test]
    fn rendering() {
        assert_eq!(render_formula(&Formula::dia(1, p0())), "<1>p:0");
        let q0 = Formula::var("q", Sort::Finite(0));
        assert_eq!(render_formula(&Formula::neg(Formula::and(p0(), q0))), "~(p:0 & q:0)");
        assert_eq!(render_formula(&Formula::Top), "T");
        let nested = Formula::or(p0(), Formula::or(p0(), p0()));
        assert_eq!(render_formula(&nested), "p:0 | (p:0 | p:0)");
        assert_eq!(parse_formula(&render_formula(&nested)).unwrap(), nested);
    }

    #[test]
    fn formula_file() {
        let text = "# header\n<0>p\n\n  q:1 & T # trailing\n";
        let fs = parse_formula_file(text).unwrap();
        assert_eq!(fs.len(), 2);
        assert_eq!(fs[1].0, 4);
        let err = parse_formula_file("p\nq &\n").unwrap_err();
        assert!(err.span.start >= 2);
    }

    const SAMPLE: &str = "worlds a b\nrel 1: a b\nval p:0 = {b}\nroot a\n";

    #[test]
    fn model_parsing() {
        let m = parse_model(SAMPLE).unwrap();
        assert_eq!(m.frame.edges(1), vec![(0, 1)]);
        assert!(m.holds_var(&Var::new("p", Sort::Finite(0)), 1));
        assert!(!m.holds_var(&Var::new("p", Sort::Finite(0)), 0));
        assert_eq!(m.root(), Some(0));
        assert_eq!(parse_model(&render_model(&m)).unwrap(), m);
    }

    #[test]
    fn model_errors() {
        let e = parse_model("worlds a b\nrel 1: a c\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UndeclaredWorld("c".into()));
        assert_eq!(e.span, SourceSpan::new(20, 21));
        let e = parse_model("worlds a a\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::DuplicateWorld("a".into()));
        let e = parse_model("worlds a\nval p:0 = {a}\nval p:1 = {}\n").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::SortConflict { .. }));
        assert!(parse_model("worlds a\nrel x: a a\n").is_err());
        assert!(parse_model("worlds a\nfoo\n").is_err());
        assert!(parse_model("rel 0: a b\n").is_err());
    }

    #[test]
    fn whitespace_and_order_are_free() {
        let m = parse_model("root a\n  val   p:0={ b }\nrel 1 :  a   b\nworlds   a b # two\n").unwrap();
        assert_eq!(m, parse_model(SAMPLE).unwrap());
    }

    #[test]
    fn dot_output() {
        let single = KripkeModel::new(KripkeFrame::new(["a"]).unwrap());
        let dot = export_dot(&single, None);
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches("->").count(), 0);
        assert_eq!(dot.matches("[label=").count(), 1);

        let m = parse_model(SAMPLE).unwrap();
        let dot = export_dot(&m, Some(0));
        assert!(dot.contains("\"a\" -> \"b\" [label=\"1\"];"));
        assert!(dot.contains("\"a\" [label=\"a\", style=bold"));
        assert!(dot.contains("\"b\" [label=\"b\\np:0\"]"));
    }
}
