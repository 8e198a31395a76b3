//! Front end for the `lql` binary: run one command over one program text.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use lql_core::dynamics::{
    build_dynamics, extract_evolution, orbit, sequences_of, static_transcription, DynamicsError,
    ParametricSystem, State, StateValue, Steadiness,
};
use lql_core::field::{FieldSpec, Rational};
use lql_core::logic::{Expr, ParseError};
use lql_core::solve::{
    classify, solution_set, theorems, value_worksheet, values_on, Classification, EquationSystem,
    SolutionSet, SolveConfig, SolveError,
};
use lql_core::translate::{conjunction_polynomial, TranslationMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Translate,
    Solve,
    Worksheet,
    Theorems,
    Classify,
    Dynamics,
    Static,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Boole,
    Modular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: Command,
    pub mode: Mode,
    pub field: u64,
    pub max_enum: u64,
    pub format: Format,
    pub query: Option<String>,
    /// Start of an orbit, one comma-separated value per parameter.
    pub initial: Option<String>,
    pub steps: usize,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            mode: Mode::Modular,
            field: 2,
            max_enum: lql_core::solve::DEFAULT_MAX_ENUM,
            format: Format::Text,
            query: None,
            initial: None,
            steps: 10,
        }
    }
}

pub const EXIT_INPUT: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_MODE: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure { code: EXIT_INPUT, message: message.to_string() }
    }

    fn mode(message: impl ToString) -> Self {
        Failure { code: EXIT_MODE, message: message.to_string() }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::input(e)
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::BudgetExceeded { .. } => Failure { code: EXIT_BUDGET, message: e.to_string() },
            SolveError::ModularOnly(_) => Failure::mode(e),
            _ => Failure::input(e),
        }
    }
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::BudgetExceeded { .. } => Failure { code: EXIT_BUDGET, message: e.to_string() },
            DynamicsError::ModeIncompatible(_) => Failure::mode(e),
            DynamicsError::Solve(s) => s.into(),
            _ => Failure::input(e),
        }
    }
}

impl From<lql_core::translate::TranslateError> for Failure {
    fn from(e: lql_core::translate::TranslateError) -> Self {
        Failure::input(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub objective: String,
    pub set: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslateReport {
    pub vars: Vec<String>,
    pub domains: Vec<String>,
    pub constraints: Vec<String>,
    pub conjunction: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub vars: Vec<String>,
    pub solutions: Vec<Vec<String>>,
    pub objectives: Vec<ObjectiveValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyEntry {
    pub objective: String,
    pub classification: String,
    pub set: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorksheetRowReport {
    pub poly: String,
    pub values: Vec<String>,
    pub set: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorksheetReport {
    pub vars: Vec<String>,
    pub points: Vec<Vec<String>>,
    pub infeasible: Vec<Vec<String>>,
    pub rows: Vec<WorksheetRowReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub poly: String,
    pub formula: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionReport {
    pub from: String,
    pub to: String,
    pub label: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub initial: String,
    pub prefix: Vec<Vec<String>>,
    pub cycle: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicsReport {
    pub params: Vec<String>,
    pub objective: Option<String>,
    pub states: Vec<String>,
    pub transitions: Vec<TransitionReport>,
    pub fixed_points: Vec<String>,
    pub steadiness: Option<Steadiness>,
    pub sequences: Vec<SequenceReport>,
    /// `param := polynomial`, when the evolution is polynomial.
    pub interpolation: Option<Vec<String>>,
    pub symbolic: Option<Vec<String>>,
    pub orbit: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaticReport {
    pub vars: Vec<String>,
    pub domains: Vec<String>,
    pub constraints: Vec<String>,
    pub solutions: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", content = "result", rename_all = "snake_case")]
pub enum Report {
    Translate(TranslateReport),
    Solve(SolveReport),
    Worksheet(WorksheetReport),
    Theorems(Vec<TheoremReport>),
    Classify(Vec<ClassifyEntry>),
    Dynamics(DynamicsReport),
    Static(StaticReport),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub mode: Mode,
    pub field: Option<u64>,
    #[serde(flatten)]
    pub report: Report,
}

fn strings<T: ToString>(items: impl IntoIterator<Item = T>) -> Vec<String> {
    items.into_iter().map(|x| x.to_string()).collect()
}

fn set_text(set: &[String]) -> String {
    format!("{{{}}}", set.join(","))
}

fn solutions_of(s: &SolutionSet) -> Vec<Vec<String>> {
    s.points().map(|p| strings(p)).collect()
}

fn translation_mode(cfg: &RunConfig) -> Result<TranslationMode, Failure> {
    match cfg.mode {
        Mode::Boole => Ok(TranslationMode::Boole),
        Mode::Modular => FieldSpec::new(cfg.field)
            .map(TranslationMode::Modular)
            .map_err(|e| Failure::input(format!("--field {}: {e}", cfg.field))),
    }
}

fn objectives(sys: &ParametricSystem, cfg: &RunConfig) -> Result<Vec<Expr>, Failure> {
    match &cfg.query {
        Some(q) => Ok(vec![sys.objective(q)?]),
        None => Ok(sys.queries().to_vec()),
    }
}

fn system_lines(sys: &EquationSystem) -> (Vec<String>, Vec<String>, Vec<String>) {
    let domains = strings(sys.var_domains());
    let constraints = strings(sys.constraints());
    (strings(sys.vars().names()), domains, constraints)
}

/// Run the configured analysis and return the structured result.
pub fn analyze(cfg: &RunConfig, text: &str) -> Result<Envelope, Failure> {
    if cfg.format == Format::Dot && cfg.command != Command::Dynamics {
        return Err(Failure::mode("--format dot is only available for the dynamics command"));
    }
    if matches!(cfg.command, Command::Worksheet | Command::Theorems) && cfg.mode != Mode::Modular {
        return Err(Failure::mode("worksheet and theorems need --mode modular"));
    }
    let mode = translation_mode(cfg)?;
    let sys = ParametricSystem::parse(text, mode)?;
    let scfg = SolveConfig { max_enum: cfg.max_enum };
    let none = State(Vec::new());

    let report = match cfg.command {
        Command::Translate => {
            let eqs = sys.equation_system(&scfg)?;
            let conjunction = match mode {
                TranslationMode::Modular(f) if f.modulus() == 2 && !eqs.constraints().is_empty() => {
                    Some(format!("{} = 0", conjunction_polynomial(&eqs)?))
                }
                _ => None,
            };
            let (vars, domains, constraints) = system_lines(&eqs);
            Report::Translate(TranslateReport { vars, domains, constraints, conjunction })
        }
        Command::Solve => {
            let eqs = sys.equation_system(&scfg)?;
            let sols = solution_set(&eqs, &scfg)?;
            let mut objs = Vec::new();
            for e in objectives(&sys, cfg)? {
                let p = sys.compile(&e, &none, &scfg)?;
                objs.push(ObjectiveValue { objective: e.to_string(), set: strings(values_on(&sols, &p)?.iter()) });
            }
            Report::Solve(SolveReport {
                vars: strings(eqs.vars().names()),
                solutions: solutions_of(&sols),
                objectives: objs,
            })
        }
        Command::Classify => {
            let eqs = sys.equation_system(&scfg)?;
            let objs = objectives(&sys, cfg)?;
            if objs.is_empty() {
                return Err(Failure::input("nothing to classify; give --query or a `query` statement"));
            }
            let sols = solution_set(&eqs, &scfg)?;
            let mut out = Vec::new();
            for e in objs {
                let p = sys.compile(&e, &none, &scfg)?;
                let set = values_on(&sols, &p)?;
                debug_assert_eq!(Classification::of(&set), classify(&eqs, &p, &scfg)?);
                out.push(ClassifyEntry {
                    objective: e.to_string(),
                    classification: Classification::of(&set).to_string(),
                    set: strings(set.iter()),
                });
            }
            Report::Classify(out)
        }
        Command::Worksheet => {
            let eqs = sys.equation_system(&scfg)?;
            let ws = value_worksheet(&eqs, &scfg)?;
            Report::Worksheet(WorksheetReport {
                vars: strings(ws.vars.names()),
                points: ws.points.iter().map(|p| strings(p)).collect(),
                infeasible: ws.points.iter().zip(&ws.marked).filter(|(_, m)| **m).map(|(p, _)| strings(p)).collect(),
                rows: ws
                    .rows
                    .iter()
                    .map(|r| WorksheetRowReport {
                        poly: r.poly.to_string(),
                        values: strings(&r.values),
                        set: strings(r.set.iter()),
                    })
                    .collect(),
            })
        }
        Command::Theorems => {
            let eqs = sys.equation_system(&scfg)?;
            Report::Theorems(
                theorems(&eqs, &scfg)?
                    .into_iter()
                    .map(|t| TheoremReport { poly: t.poly.to_string(), formula: t.formula.map(|f| f.to_string()) })
                    .collect(),
            )
        }
        Command::Dynamics => Report::Dynamics(dynamics_report(&sys, cfg, &scfg)?),
        Command::Static => {
            let eqs = static_transcription(&sys, &scfg)?;
            let sols = solution_set(&eqs, &scfg)?;
            let (vars, domains, constraints) = system_lines(&eqs);
            Report::Static(StaticReport { vars, domains, constraints, solutions: solutions_of(&sols) })
        }
    };
    let field = match mode {
        TranslationMode::Modular(f) => Some(f.modulus()),
        TranslationMode::Boole => None,
    };
    Ok(Envelope { mode: cfg.mode, field, report })
}

fn parse_initial(sys: &ParametricSystem, text: &str) -> Result<State, Failure> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != sys.params().len() {
        return Err(Failure::input(format!(
            "--initial has {} values, the program has {} parameters",
            parts.len(),
            sys.params().len()
        )));
    }
    let values = parts
        .iter()
        .map(|p| p.parse::<Rational>().map(StateValue::Num).map_err(|e| Failure::input(format!("--initial: {e}"))))
        .collect::<Result<_, _>>()?;
    Ok(State(values))
}

fn dynamics_report(sys: &ParametricSystem, cfg: &RunConfig, scfg: &SolveConfig) -> Result<DynamicsReport, Failure> {
    let names = strings(sys.params().iter().map(|p| &p.name));
    let labelled = |polys: Option<Vec<lql_core::poly::MultiPoly>>| {
        polys.map(|ps| names.iter().zip(ps).map(|(n, p)| format!("{n} := {p}")).collect::<Vec<_>>())
    };
    let evolution = extract_evolution(sys, scfg)?;
    let orbit_states = match &cfg.initial {
        Some(text) => Some(strings(orbit(sys, &parse_initial(sys, text)?, cfg.steps, scfg)?)),
        None => None,
    };
    let mut report = DynamicsReport {
        params: names.clone(),
        objective: None,
        states: Vec::new(),
        transitions: Vec::new(),
        fixed_points: Vec::new(),
        steadiness: None,
        sequences: Vec::new(),
        interpolation: labelled(evolution.interpolation),
        symbolic: labelled(evolution.symbolic),
        orbit: orbit_states,
    };
    if evolution.table.is_none() {
        if cfg.format == Format::Dot {
            return Err(DynamicsError::InfiniteStateSpace.into());
        }
        return Ok(report);
    }
    let objective = match &cfg.query {
        Some(q) => sys.objective(q)?,
        None => sys.default_objective().ok_or_else(|| Failure::input("no objective to label transitions"))?,
    };
    let dynm = build_dynamics(sys, &objective, scfg)?;
    report.objective = Some(objective.to_string());
    report.states = strings(&dynm.states);
    report.transitions = dynm
        .transitions
        .iter()
        .map(|t| TransitionReport { from: t.from.to_string(), to: t.to.to_string(), label: strings(t.label.iter()) })
        .collect();
    report.fixed_points = strings(&dynm.fixed_points);
    report.steadiness = Some(dynm.steadiness);
    report.sequences = sequences_of(&dynm)
        .iter()
        .map(|s| SequenceReport {
            initial: s.initial.to_string(),
            prefix: s.prefix.iter().map(|v| strings(v.iter())).collect(),
            cycle: s.cycle.iter().map(|v| strings(v.iter())).collect(),
        })
        .collect();
    Ok(report)
}

fn render_dot(r: &DynamicsReport) -> String {
    let esc = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
    let idx = |s: &str| r.states.iter().position(|x| x == s).expect("state");
    let mut out = String::from("digraph dynamics {\n  rankdir=LR;\n");
    for (i, s) in r.states.iter().enumerate() {
        let extra = if r.fixed_points.contains(s) { ", peripheries=2" } else { "" };
        let _ = writeln!(out, "  s{i} [label=\"{}\"{extra}];", esc(s));
    }
    for t in &r.transitions {
        let _ = writeln!(out, "  s{} -> s{} [label=\"{}\"];", idx(&t.from), idx(&t.to), esc(&set_text(&t.label)));
    }
    out.push_str("}\n");
    out
}

fn render_sets(sets: &[Vec<String>], bare: bool) -> String {
    let items: Vec<String> =
        sets.iter().map(|s| if bare { s[0].clone() } else { set_text(s) }).collect();
    format!("({})", items.join(","))
}

fn render_text(env: &Envelope) -> String {
    let mut out = String::new();
    match &env.report {
        Report::Translate(r) => {
            for (v, d) in r.vars.iter().zip(&r.domains) {
                let _ = writeln!(out, "{v} in {d}");
            }
            if r.constraints.is_empty() {
                out.push_str("0 = 0\n");
            }
            for c in &r.constraints {
                let _ = writeln!(out, "{c}");
            }
            if let Some(q) = &r.conjunction {
                let _ = writeln!(out, "conjunction: {q}");
            }
        }
        Report::Solve(r) => {
            let _ = writeln!(out, "({})", r.vars.join(", "));
            let pts: Vec<String> = r.solutions.iter().map(|p| format!("({})", p.join(","))).collect();
            let _ = writeln!(out, "{{{}}}", pts.join(","));
            for o in &r.objectives {
                let _ = writeln!(out, "S({}) = {}", o.objective, set_text(&o.set));
            }
        }
        Report::Classify(entries) => {
            for e in entries {
                let _ = writeln!(out, "{}: {} {}", e.objective, e.classification, set_text(&e.set));
            }
        }
        Report::Worksheet(r) => {
            let polys: Vec<&str> = r.rows.iter().map(|x| x.poly.as_str()).collect();
            let pw = polys.iter().map(|s| s.len()).max().unwrap_or(1);
            let iw = r.rows.len().to_string().len();
            let heads: Vec<String> = r.points.iter().map(|p| format!("({})", p.join(","))).collect();
            let cw = heads.iter().map(String::len).max().unwrap_or(2);
            let _ = write!(out, "{:>iw$}  {:<pw$} |", "i", "p");
            for h in &heads {
                let _ = write!(out, " {h:>cw$}");
            }
            out.push_str(" | S\n");
            let _ = write!(out, "{:>iw$}  {:<pw$} |", "", "");
            for p in &r.points {
                let mark = if r.infeasible.contains(p) { "x" } else { "" };
                let _ = write!(out, " {mark:>cw$}");
            }
            out.push_str(" |\n");
            for (i, row) in r.rows.iter().enumerate() {
                let _ = write!(out, "{:>iw$}  {:<pw$} |", i + 1, row.poly);
                for v in &row.values {
                    let _ = write!(out, " {v:>cw$}");
                }
                let _ = writeln!(out, " | {}", set_text(&row.set));
            }
        }
        Report::Theorems(ts) => {
            let _ = writeln!(out, "{} theorems", ts.len());
            let w = ts.iter().map(|t| t.poly.len()).max().unwrap_or(0);
            for t in ts {
                match &t.formula {
                    Some(f) => {
                        let _ = writeln!(out, "{:<w$}  {f}", t.poly);
                    }
                    None => {
                        let _ = writeln!(out, "{}", t.poly);
                    }
                }
            }
        }
        Report::Dynamics(r) => {
            let _ = writeln!(out, "parameters: {}", r.params.join(", "));
            for (title, lines) in [("symbolic", &r.symbolic), ("interpolated", &r.interpolation)] {
                if let Some(lines) = lines {
                    let _ = writeln!(out, "{title}: {}", lines.join("; "));
                }
            }
            if let Some(obj) = &r.objective {
                let _ = writeln!(out, "objective: {obj}");
                for t in &r.transitions {
                    let _ = writeln!(out, "  {} -> {}  S = {}", t.from, t.to, set_text(&t.label));
                }
                let _ = writeln!(out, "fixed points: {{{}}}", r.fixed_points.join(", "));
                if let Some(s) = r.steadiness {
                    let _ = writeln!(out, "steadiness: {s}");
                }
                let bare = r.sequences.iter().all(|s| s.prefix.iter().chain(&s.cycle).all(|v| v.len() == 1));
                out.push_str("sequences:\n");
                for s in &r.sequences {
                    let _ = writeln!(
                        out,
                        "  {} => prefix {} cycle {}",
                        s.initial,
                        render_sets(&s.prefix, bare),
                        render_sets(&s.cycle, bare)
                    );
                }
            } else {
                out.push_str("state space is infinite; no transition graph\n");
            }
            if let Some(o) = &r.orbit {
                let _ = writeln!(out, "orbit: {}", o.join(" -> "));
            }
        }
        Report::Static(r) => {
            for (v, d) in r.vars.iter().zip(&r.domains) {
                let _ = writeln!(out, "{v} in {d}");
            }
            for c in &r.constraints {
                let _ = writeln!(out, "{c}");
            }
            let _ = writeln!(out, "({})", r.vars.join(", "));
            let pts: Vec<String> = r.solutions.iter().map(|p| format!("({})", p.join(","))).collect();
            let _ = writeln!(out, "{{{}}}", pts.join(","));
            if r.solutions.is_empty() {
                out.push_str("infeasible\n");
            }
        }
    }
    out
}

pub fn render(env: &Envelope, format: Format) -> String {
    match (format, &env.report) {
        (Format::Json, _) => {
            let mut s = serde_json::to_string_pretty(env).expect("report serializes");
            s.push('\n');
            s
        }
        (Format::Dot, Report::Dynamics(r)) => render_dot(r),
        _ => render_text(env),
    }
}

pub fn run(cfg: &RunConfig, text: &str) -> RunOutput {
    match analyze(cfg, text) {
        Ok(env) => RunOutput { stdout: render(&env, cfg.format), stderr: String::new(), code: 0 },
        Err(f) => RunOutput { stdout: String::new(), stderr: format!("error: {}\n", f.message), code: f.code },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CARROLL: &str = "var a, b, c;\n|- c -> (a -> !b);\n|- a -> b;\n";

    #[test]
    fn classify_carroll() {
        let mut cfg = RunConfig::new(Command::Classify);
        cfg.query = Some("c".into());
        let out = run(&cfg, CARROLL);
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert_eq!(out.stdout, "c: ambiguous {0,1}\n");
    }

    #[test]
    fn exit_codes() {
        let cfg = RunConfig::new(Command::Solve);
        assert_eq!(run(&cfg, "var x;\n|- y;").code, EXIT_INPUT);
        let mut cfg = RunConfig::new(Command::Worksheet);
        cfg.mode = Mode::Boole;
        assert_eq!(run(&cfg, CARROLL).code, EXIT_MODE);
        let mut cfg = RunConfig::new(Command::Theorems);
        cfg.max_enum = 10;
        assert_eq!(run(&cfg, CARROLL).code, EXIT_BUDGET);
        let mut cfg = RunConfig::new(Command::Solve);
        cfg.format = Format::Dot;
        assert_eq!(run(&cfg, CARROLL).code, EXIT_MODE);
        let cfg = RunConfig::new(Command::Solve);
        assert_eq!(run(&cfg, "var x in real;\nx == 1;").code, EXIT_MODE);
    }

    #[test]
    fn json_envelope_round_trips() {
        let mut cfg = RunConfig::new(Command::Solve);
        cfg.format = Format::Json;
        let env = analyze(&cfg, CARROLL).unwrap();
        let text = render(&env, Format::Json);
        let back: Envelope = serde_json::from_str(&text).unwrap();
        assert_eq!(back, env);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["command"], "solve");
        assert_eq!(v["field"], 2);
    }
}
