//! `glpstar`: decide, reduce, model-check and proof-check sorted
//! polymodal provability formulas from the command line.
//!
//! Exit status: 0 affirmative, 1 negative, 2 usage or input error,
//! 3 resource limit.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use glpstar_core::decide::{decide_with, DecideError, DecideOptions, DecideStats, Engine, Via};
use glpstar_core::formula::{adequate_closure, modal_levels, sort_of, Formula, FormulaSet};
use glpstar_core::kripke::{check_jstar_frame, check_strong_persistence, model_check, KripkeModel, ViolationReport};
use glpstar_core::oracle::{brute_force_countermodel, SearchBudget, MAX_ORACLE_WORLDS};
use glpstar_core::parser::{export_dot, parse_formula, parse_formula_file, parse_model, render_model, render_sugared};
use glpstar_core::proofs::{check_proof_with, parse_proof, CheckOptions, ProofError};
use glpstar_core::reductions::{apply_reduction, ModalitySet, NPlusVariant, ReductionKind};
use glpstar_core::{decide::reduction_target, SystemId, Verdict};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "glpstar", version, about = "Decision procedures and tools for GLP*, J*, GLP and GLPS*")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum System {
    Jstar,
    Glpstar,
    Glp,
    Glpsstar,
}

impl From<System> for SystemId {
    fn from(s: System) -> Self {
        match s {
            System::Jstar => SystemId::Jstar,
            System::Glpstar => SystemId::GLPstar,
            System::Glp => SystemId::GLP,
            System::Glpsstar => SystemId::GLPSstar,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ViaArg {
    Mplus,
    Nplus,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Variant {
    #[default]
    Default,
    Literal,
}

impl From<Variant> for NPlusVariant {
    fn from(v: Variant) -> Self {
        match v {
            Variant::Default => NPlusVariant::Default,
            Variant::Literal => NPlusVariant::Literal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Lazy,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    M,
    Mplus,
    N,
    Nplus,
    H,
    Rtheta,
    Rthetaplus,
}

#[derive(Subcommand)]
enum Command {
    /// Decide provability of a formula (or of every formula in `@file`).
    Decide {
        #[arg(long, value_enum)]
        system: System,
        #[arg(long, value_enum, default_value_t = ViaArg::Mplus)]
        via: ViaArg,
        #[arg(long, value_enum, default_value_t = Variant::Default)]
        nplus_variant: Variant,
        #[arg(long, value_enum, default_value_t = EngineArg::Lazy)]
        engine: EngineArg,
        /// Keep the countermodel as extracted instead of shrinking it.
        #[arg(long)]
        no_minimize: bool,
        /// Cap on SAT queries (lazy engine).
        #[arg(long, default_value_t = 1 << 20)]
        max_sat_calls: usize,
        /// Cap on Hintikka candidates (full engine).
        #[arg(long, default_value_t = 1 << 20)]
        max_candidates: usize,
        /// Write the countermodel in model file format.
        #[arg(long)]
        countermodel: Option<PathBuf>,
        /// Write the countermodel as a DOT graph.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Print closure sizes, elimination rounds and search counters.
        #[arg(long, short)]
        verbose: bool,
        formula: String,
    },
    /// Print a reduction premise.
    Reduce {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, value_enum, default_value_t = Variant::Default)]
        nplus_variant: Variant,
        /// Modalities for R_Θ, e.g. `0,2`; defaults to those of the formula.
        #[arg(long, value_delimiter = ',')]
        theta: Option<Vec<u32>>,
        formula: String,
    },
    /// Evaluate a formula in a model file.
    Modelcheck {
        #[arg(long)]
        model: PathBuf,
        /// World to evaluate at; defaults to the root, else every world.
        #[arg(long)]
        world: Option<String>,
        formula: String,
    },
    /// Check the J*-frame conditions and strong persistence of a model file.
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Print the adequate closure of a formula and its top-level diamond levels.
    Closure { formula: String },
    /// Print the sort of a formula.
    Sort { formula: String },
    /// Check a proof file.
    Checkproof {
        /// Match Löb as `<n>a -> <n>(a & <n>~a)`.
        #[arg(long)]
        loeb_literal: bool,
        proof: PathBuf,
    },
    /// Search exhaustively for a small countermodel.
    Oracle {
        #[arg(long, default_value_t = 3)]
        max_worlds: usize,
        /// Search countermodels of the J*-level target for this system.
        #[arg(long, value_enum, default_value_t = System::Jstar)]
        system: System,
        #[arg(long, default_value_t = 10_000_000)]
        max_models: u64,
        #[arg(long)]
        countermodel: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
        formula: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Affirmative = 0,
    Negative = 1,
    Resource = 3,
}

enum Failure {
    Input(anyhow::Error),
    Resource(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

type Run = Result<Status, Failure>;

struct Out {
    format: Format,
    text: String,
}

impl Out {
    fn line(&mut self, s: impl AsRef<str>) {
        if self.format == Format::Text {
            self.text.push_str(s.as_ref());
            self.text.push('\n');
        }
    }

    fn json(&mut self, v: Value) {
        if self.format == Format::Json {
            self.text.push_str(&serde_json::to_string_pretty(&v).expect("serializable"));
            self.text.push('\n');
        }
    }
}

fn read_source(arg: &str) -> anyhow::Result<String> {
    match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading {path}")),
        None => Ok(arg.to_string()),
    }
}

fn read_formulas(arg: &str) -> anyhow::Result<Vec<Formula>> {
    let text = read_source(arg)?;
    if let Some(path) = arg.strip_prefix('@') {
        let items = parse_formula_file(&text).map_err(|e| anyhow!("{}", caret(&text, &e)))?;
        if items.is_empty() {
            bail!("{path} contains no formulas");
        }
        Ok(items.into_iter().map(|(_, f)| f).collect())
    } else {
        Ok(vec![parse_formula(&text).map_err(|e| anyhow!("{}", caret(&text, &e)))?])
    }
}

fn read_formula(arg: &str) -> anyhow::Result<Formula> {
    let mut all = read_formulas(arg)?;
    if all.len() != 1 {
        bail!("expected one formula, found {}", all.len());
    }
    Ok(all.remove(0))
}

/// Error message with the offending span underlined when it fits on one line.
fn caret(text: &str, e: &glpstar_core::ParseError) -> String {
    let start = e.span.start.min(text.len());
    let line_start = text[..start].rfind('\n').map_or(0, |i| i + 1);
    let line_end = text[start..].find('\n').map_or(text.len(), |i| start + i);
    let line = &text[line_start..line_end];
    let col = text[line_start..start].chars().count();
    let width = text[start..e.span.end.clamp(start, line_end)].chars().count().max(1);
    format!("{e}\n  {line}\n  {}{}", " ".repeat(col), "^".repeat(width))
}

fn read_model(path: &Path) -> anyhow::Result<KripkeModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_model(&text).map_err(|e| anyhow!("{}: {}", path.display(), caret(&text, &e)))
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn model_json(model: &KripkeModel) -> Value {
    let frame = &model.frame;
    let relations: Vec<Value> = frame
        .all_edges()
        .into_iter()
        .map(|(k, x, y)| json!({"modality": k, "from": frame.world_name(x), "to": frame.world_name(y)}))
        .collect();
    let valuation: serde_json::Map<String, Value> = model
        .valuation()
        .iter()
        .map(|(name, v)| {
            let worlds: Vec<&str> = v.worlds.iter().map(|w| frame.world_name(w)).collect();
            (name.clone(), json!({"sort": v.sort.to_string(), "worlds": worlds}))
        })
        .collect();
    json!({"worlds": frame.worlds(), "root": model.root_name(), "relations": relations, "valuation": valuation})
}

fn stats_json(stats: &DecideStats) -> Value {
    serde_json::to_value(stats).expect("serializable")
}

fn decide_error(e: DecideError) -> Failure {
    match e {
        DecideError::ResourceLimit { .. } => Failure::Resource(e.to_string()),
        DecideError::IllSorted { .. } => Failure::Input(e.into()),
    }
}

fn print_stats(out: &mut Out, stats: &DecideStats) {
    out.line(format!("  closure size: {}, levels: {:?}", stats.closure_size, stats.levels));
    for (i, r) in stats.rounds.iter().enumerate() {
        out.line(format!("  round {}: {} candidates, {} survivors", i + 1, r.candidates, r.survivors));
    }
    if let Some(l) = &stats.lazy {
        out.line(format!(
            "  sat calls: {}, witness queries: {}, memo hits: {}, blocking clauses: {}, conflicts: {}",
            l.sat_calls, l.witness_queries, l.memo_hits, l.blocking_clauses, l.conflicts
        ));
    }
    if let (Some(before), Some(after)) = (stats.countermodel_worlds_before_minimization, stats.countermodel_worlds) {
        out.line(format!("  countermodel: {before} worlds before minimization, {after} after"));
    }
    out.line(format!("  elapsed: {:.3} ms", stats.elapsed.as_secs_f64() * 1000.0));
}

#[allow(clippy::too_many_arguments)]
fn cmd_decide(
    out: &mut Out,
    system: SystemId,
    opts: &DecideOptions,
    countermodel: Option<&Path>,
    dot: Option<&Path>,
    verbose: bool,
    formula: &str,
) -> Run {
    let formulas = read_formulas(formula)?;
    if formulas.len() > 1 && (countermodel.is_some() || dot.is_some()) {
        return Err(Failure::Input(anyhow!("--countermodel and --dot need a single formula")));
    }
    let mut status = Status::Affirmative;
    let mut results = Vec::new();
    for phi in &formulas {
        let decision = decide_with(system, phi, opts).map_err(decide_error)?;
        let mut entry = json!({"system": system.name(), "formula": render_sugared(phi), "target": render_sugared(&decision.target)});
        match &decision.verdict {
            Verdict::Theorem => {
                if formulas.len() > 1 {
                    out.line(format!("theorem: {}", render_sugared(phi)));
                } else {
                    out.line("theorem");
                }
                entry["verdict"] = json!("theorem");
            }
            Verdict::NonTheorem { countermodel: model, falsified } => {
                status = Status::Negative;
                if formulas.len() > 1 {
                    out.line(format!("non-theorem: {}", render_sugared(phi)));
                } else {
                    out.line("non-theorem");
                }
                out.line(format!(
                    "countermodel with {} worlds, root {} falsifies {}",
                    model.len(),
                    model.root_name().unwrap_or("?"),
                    render_sugared(falsified)
                ));
                for l in render_model(model).lines() {
                    out.line(format!("  {l}"));
                }
                if let Some(path) = countermodel {
                    write_file(path, &render_model(model))?;
                }
                if let Some(path) = dot {
                    write_file(path, &export_dot(model, model.root()))?;
                }
                entry["verdict"] = json!("non-theorem");
                entry["falsified"] = json!(render_sugared(falsified));
                entry["countermodel"] = model_json(model);
            }
        }
        if verbose {
            print_stats(out, &decision.stats);
        }
        entry["stats"] = stats_json(&decision.stats);
        results.push(entry);
    }
    if results.len() == 1 {
        out.json(results.remove(0));
    } else {
        out.json(Value::Array(results));
    }
    Ok(status)
}

fn cmd_reduce(out: &mut Out, kind: Kind, variant: Variant, theta: Option<Vec<u32>>, formula: &str) -> Run {
    let phi = read_formula(formula)?;
    let v = NPlusVariant::from(variant);
    let kind = match kind {
        Kind::M => ReductionKind::M,
        Kind::Mplus => ReductionKind::MPlus,
        Kind::N => ReductionKind::N(v),
        Kind::Nplus => ReductionKind::NPlus(v),
        Kind::H => ReductionKind::H,
        Kind::Rtheta => ReductionKind::RTheta,
        Kind::Rthetaplus => ReductionKind::RThetaPlus,
    };
    let theta: Option<ModalitySet> = theta.map(|t| t.into_iter().collect());
    let result = apply_reduction(kind, &phi, theta.as_ref());
    out.line(render_sugared(&result));
    out.json(json!({"kind": kind.to_string(), "formula": render_sugared(&phi), "result": render_sugared(&result)}));
    Ok(Status::Affirmative)
}

fn warn_absent(model: &KripkeModel, phi: &Formula) {
    for v in model.absent_variables(phi) {
        eprintln!("warning: variable {v} is not in the model's valuation and is read as false");
    }
}

fn cmd_modelcheck(out: &mut Out, model_path: &Path, world: Option<&str>, formula: &str) -> Run {
    let model = read_model(model_path)?;
    let phi = read_formula(formula)?;
    warn_absent(&model, &phi);
    let world = world.map(str::to_string).or_else(|| model.root_name().map(str::to_string));
    let (holds, failing) = match &world {
        Some(w) => {
            let holds = model_check(&model, w, &phi)?;
            (holds, if holds { vec![] } else { vec![w.clone()] })
        }
        None => {
            let truth = model.truth_set(&phi);
            let failing: Vec<String> =
                (0..model.len()).filter(|&w| !truth.contains(w)).map(|w| model.frame.world_name(w).to_string()).collect();
            (failing.is_empty(), failing)
        }
    };
    match &world {
        Some(w) => out.line(format!("{} at {w}", if holds { "true" } else { "false" })),
        None if holds => out.line("true at every world"),
        None => out.line(format!("false at {}", failing.join(" "))),
    }
    out.json(json!({"formula": render_sugared(&phi), "world": world, "holds": holds, "failing_worlds": failing}));
    Ok(if holds { Status::Affirmative } else { Status::Negative })
}

fn cmd_validate(out: &mut Out, model_path: &Path) -> Run {
    let model = read_model(model_path)?;
    let frame: ViolationReport = check_jstar_frame(&model.frame);
    let persistence: ViolationReport = check_strong_persistence(&model);
    out.line(format!("frame: {}", if frame.is_empty() { "ok".into() } else { format!("{} violations", frame.len()) }));
    for v in &frame.violations {
        out.line(format!("  {v}"));
    }
    out.line(format!(
        "persistence: {}",
        if persistence.is_empty() { "ok".into() } else { format!("{} violations", persistence.len()) }
    ));
    for v in &persistence.violations {
        out.line(format!("  {v}"));
    }
    let valid = frame.is_empty() && persistence.is_empty();
    out.json(json!({"valid": valid, "frame": frame, "persistence": persistence}));
    Ok(if valid { Status::Affirmative } else { Status::Negative })
}

fn cmd_closure(out: &mut Out, formula: &str) -> Run {
    let phi = read_formula(formula)?;
    let gamma: FormulaSet = [phi.clone()].into_iter().collect();
    let delta = adequate_closure(&gamma);
    let levels: Vec<u32> = modal_levels(&delta).into_iter().collect();
    for f in &delta {
        out.line(render_sugared(f));
    }
    out.line(format!("size: {}", delta.len()));
    out.line(format!("levels: {}", levels.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")));
    let members: Vec<String> = delta.iter().map(render_sugared).collect();
    out.json(json!({"formula": render_sugared(&phi), "closure": members, "size": delta.len(), "levels": levels}));
    Ok(Status::Affirmative)
}

fn cmd_sort(out: &mut Out, formula: &str) -> Run {
    let phi = read_formula(formula)?;
    let sort = sort_of(&phi).to_string();
    out.line(&sort);
    out.json(json!({"formula": render_sugared(&phi), "sort": sort}));
    Ok(Status::Affirmative)
}

fn cmd_checkproof(out: &mut Out, path: &Path, loeb_literal: bool) -> Run {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let proof = parse_proof(&text)?;
    match check_proof_with(&proof, CheckOptions { loeb_literal }) {
        Ok(()) => {
            out.line(format!("accepted: {} proves {} in {} lines", proof.system, render_sugared(&proof.goal), proof.lines.len()));
            out.json(json!({"accepted": true, "system": proof.system.name(), "goal": render_sugared(&proof.goal)}));
            Ok(Status::Affirmative)
        }
        Err(ProofError::Rejected { line, reason }) => {
            out.line(format!("rejected at line {line}: {reason}"));
            out.json(json!({"accepted": false, "line": line, "reason": reason}));
            Ok(Status::Negative)
        }
        Err(e) => Err(Failure::Input(e.into())),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_oracle(
    out: &mut Out,
    max_worlds: usize,
    system: SystemId,
    max_models: u64,
    countermodel: Option<&Path>,
    dot: Option<&Path>,
    formula: &str,
) -> Run {
    if max_worlds == 0 || max_worlds > MAX_ORACLE_WORLDS {
        return Err(Failure::Input(anyhow!("--max-worlds must be between 1 and {MAX_ORACLE_WORLDS}")));
    }
    let phi = read_formula(formula)?;
    let target = reduction_target(system, &phi, Via::default());
    let budget = SearchBudget { max_worlds, modalities: None, max_models };
    let result = brute_force_countermodel(&target, &budget);
    let mut report = json!({
        "system": system.name(),
        "formula": render_sugared(&phi),
        "target": render_sugared(&target),
        "models_examined": result.models_examined,
        "truncated": result.truncated,
    });
    let status = match &result.found {
        Some((model, world)) => {
            out.line(format!("countermodel found: {} worlds, falsified at {world}", model.len()));
            for l in render_model(model).lines() {
                out.line(format!("  {l}"));
            }
            if let Some(path) = countermodel {
                write_file(path, &render_model(model))?;
            }
            if let Some(path) = dot {
                write_file(path, &export_dot(model, model.root()))?;
            }
            report["countermodel"] = model_json(model);
            Status::Negative
        }
        None if result.truncated => {
            out.line(format!("search truncated after {} models", result.models_examined));
            Status::Resource
        }
        None => {
            out.line(format!(
                "no countermodel with at most {max_worlds} worlds ({} models examined)",
                result.models_examined
            ));
            Status::Affirmative
        }
    };
    out.json(report);
    Ok(status)
}

fn run(cli: Cli, out: &mut Out) -> Run {
    match cli.command {
        Command::Decide {
            system,
            via,
            nplus_variant,
            engine,
            no_minimize,
            max_sat_calls,
            max_candidates,
            countermodel,
            dot,
            verbose,
            formula,
        } => {
            let opts = DecideOptions {
                via: match via {
                    ViaArg::Mplus => Via::MPlus,
                    ViaArg::Nplus => Via::NPlus(nplus_variant.into()),
                },
                engine: match engine {
                    EngineArg::Lazy => Engine::Lazy,
                    EngineArg::Full => Engine::Full,
                },
                minimize: !no_minimize,
                max_sat_calls,
                max_candidates,
            };
            cmd_decide(out, system.into(), &opts, countermodel.as_deref(), dot.as_deref(), verbose, &formula)
        }
        Command::Reduce { kind, nplus_variant, theta, formula } => cmd_reduce(out, kind, nplus_variant, theta, &formula),
        Command::Modelcheck { model, world, formula } => cmd_modelcheck(out, &model, world.as_deref(), &formula),
        Command::Validate { model } => cmd_validate(out, &model),
        Command::Closure { formula } => cmd_closure(out, &formula),
        Command::Sort { formula } => cmd_sort(out, &formula),
        Command::Checkproof { loeb_literal, proof } => cmd_checkproof(out, &proof, loeb_literal),
        Command::Oracle { max_worlds, system, max_models, countermodel, dot, formula } => {
            cmd_oracle(out, max_worlds, system.into(), max_models, countermodel.as_deref(), dot.as_deref(), &formula)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = Out { format: cli.format, text: String::new() };
    let result = run(cli, &mut out);
    print!("{}", out.text);
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
