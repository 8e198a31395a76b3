//! Parametric systems whose update rules read the system's own solution
//! sets, and the discrete dynamical systems they induce.

use std::cell::OnceCell;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{CoeffDomain, Rational};
use crate::logic::{
    parse_expr, parse_program, BinOp, Connective, Expr, ParamDomainDecl, ParseError, Pos, Program, Statement, UnOp,
    VarDomainDecl,
};
use crate::poly::{MultiPoly, PolyError, VarSet};
use crate::solve::{
    solution_set, values_on, EquationSystem, SolutionSet, SolutionValueSet, SolveConfig, SolveError, VarDomain,
};
use crate::translate::{connective, interpolate_grid, negation, TranslateError, TranslationMode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Solve(SolveError),
    #[error(transparent)]
    Translate(TranslateError),
    #[error("enumeration needs {required} items, budget is {budget}")]
    BudgetExceeded { required: String, budget: u64 },
    #[error("{0}")]
    ModeIncompatible(String),
    #[error("the state space is infinite and the updates read solution sets")]
    InfiniteStateSpace,
    #[error("update of `{param}` yields {value}, which is not in its domain")]
    UpdateOutOfDomain { param: String, value: String },
    #[error("parameter `{0}` has non-numeric states")]
    NonNumericStates(String),
    #[error("`{0}` is a variable; updates can only read it through `$`, `?` or `|$..|`")]
    VariableInUpdate(String),
    #[error("`{0}` reads a solution set inside a constraint; declare a parameter and an update rule for it")]
    NeedsParameter(String),
    #[error("comparison `{0}` does not reduce to a constant")]
    NonConstantComparison(String),
    #[error("constant {0} used as a truth value")]
    NotTwoValued(Rational),
    #[error("type error: {0}")]
    Type(String),
    #[error("unknown identifier `{0}`")]
    Unknown(String),
    #[error("the program declares parameters; use the dynamics or static commands")]
    HasParameters,
    #[error("state has {got} values, expected {expected}")]
    StateArity { expected: usize, got: usize },
}

impl From<SolveError> for DynamicsError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::BudgetExceeded { required, budget } => DynamicsError::BudgetExceeded { required, budget },
            other => DynamicsError::Solve(other),
        }
    }
}

impl From<PolyError> for DynamicsError {
    fn from(e: PolyError) -> Self {
        SolveError::from(e).into()
    }
}

impl From<TranslateError> for DynamicsError {
    fn from(e: TranslateError) -> Self {
        match e {
            TranslateError::Solve(s) => s.into(),
            TranslateError::Poly(p) => p.into(),
            other => DynamicsError::Translate(other),
        }
    }
}

impl From<crate::field::FieldError> for DynamicsError {
    fn from(e: crate::field::FieldError) -> Self {
        PolyError::Field(e).into()
    }
}

/// Opaque state such as `{0,1}`, with the set it denotes when it parses as one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub text: String,
    pub payload: Option<SolutionValueSet>,
}

impl Label {
    pub fn new(text: &str) -> Label {
        Label { text: text.to_string(), payload: text.parse().ok() }
    }

    fn matches(&self, other: &Label) -> bool {
        self.text == other.text || (self.payload.is_some() && self.payload == other.payload)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateValue {
    Num(Rational),
    Label(Label),
}

impl fmt::Display for StateValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateValue::Num(n) => write!(f, "{n}"),
            StateValue::Label(l) => write!(f, "{}", l.text),
        }
    }
}

/// One value per parameter, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(pub Vec<StateValue>);

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        let items: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", items.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateDomain {
    Values(Vec<Rational>),
    Labels(Vec<Label>),
    Int,
    Real,
}

impl StateDomain {
    fn states(&self) -> Option<Vec<StateValue>> {
        match self {
            StateDomain::Values(vs) => Some(vs.iter().cloned().map(StateValue::Num).collect()),
            StateDomain::Labels(ls) => Some(ls.iter().cloned().map(StateValue::Label).collect()),
            StateDomain::Int | StateDomain::Real => None,
        }
    }

    fn admits(&self, v: &StateValue) -> bool {
        match (self, v) {
            (StateDomain::Values(vs), StateValue::Num(n)) => vs.contains(n),
            (StateDomain::Labels(ls), StateValue::Label(l)) => ls.contains(l),
            (StateDomain::Int, StateValue::Num(n)) => n.is_integer(),
            (StateDomain::Real, StateValue::Num(_)) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parameter {
    pub name: String,
    pub domain: StateDomain,
    /// Introduced for a `?p` or comparison written inside a constraint.
    pub implicit: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Template {
    lhs: Expr,
    rhs: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParametricSystem {
    mode: TranslationMode,
    vars: VarSet,
    var_domains: BTreeMap<String, VarDomain>,
    idempotent: Vec<String>,
    params: Vec<Parameter>,
    templates: Vec<Template>,
    updates: Vec<Expr>,
    queries: Vec<Expr>,
}

fn mode_value(mode: TranslationMode, v: &Rational, what: &str) -> Result<Rational, DynamicsError> {
    match mode {
        TranslationMode::Boole => Ok(v.clone()),
        TranslationMode::Modular(f) => match v.to_i64() {
            Some(k) if (0..f.modulus() as i64).contains(&k) => Ok(v.clone()),
            _ => Err(DynamicsError::ModeIncompatible(format!(
                "value {v} of `{what}` is not an element of F_{}",
                f.modulus()
            ))),
        },
    }
}

/// Replace each `?e`, and each comparison reading solution sets, by a fresh
/// two-valued parameter whose update rule is that sub-expression.
fn lift(e: &Expr, out: &mut Vec<(String, Expr)>) -> Result<Expr, DynamicsError> {
    let fresh = |e: &Expr, out: &mut Vec<(String, Expr)>| {
        let name = e.to_string();
        if !out.iter().any(|(n, _)| *n == name) {
            out.push((name.clone(), e.clone()));
        }
        Expr::Ident(name)
    };
    Ok(match e {
        Expr::Unary(UnOp::Provable, _) => fresh(e, out),
        Expr::Binary(BinOp::Eq | BinOp::Ne, ..) if e.has_solution_refs() => fresh(e, out),
        Expr::SolutionSet(_) | Expr::Card(_) if e.has_solution_refs() => {
            return Err(DynamicsError::NeedsParameter(e.to_string()))
        }
        Expr::Unary(op, a) => Expr::unary(*op, lift(a, out)?),
        Expr::Binary(op, a, b) => Expr::binary(*op, lift(a, out)?, lift(b, out)?),
        Expr::Set(items) => Expr::Set(items.iter().map(|i| lift(i, out)).collect::<Result<_, _>>()?),
        other => other.clone(),
    })
}

impl ParametricSystem {
    pub fn parse(text: &str, mode: TranslationMode) -> Result<Self, DynamicsError> {
        Self::from_program(&parse_program(text)?, mode)
    }

    pub fn from_program(prog: &Program, mode: TranslationMode) -> Result<Self, DynamicsError> {
        let vars = VarSet::new(prog.vars.iter().map(|v| v.name.clone()))?;
        let boole = mode == TranslationMode::Boole;
        let mut var_domains = BTreeMap::new();
        let mut idempotent = Vec::new();
        for v in &prog.vars {
            let dom = match &v.domain {
                VarDomainDecl::Logical => {
                    if boole {
                        idempotent.push(v.name.clone());
                        VarDomain::finite([Rational::zero(), Rational::one()])
                    } else {
                        VarDomain::Finite(mode.domain().elements().expect("modular"))
                    }
                }
                VarDomainDecl::Values(vs) => VarDomain::finite(
                    vs.iter().map(|x| mode_value(mode, x, &v.name)).collect::<Result<Vec<_>, _>>()?,
                ),
                VarDomainDecl::Real | VarDomainDecl::Int if !boole => {
                    return Err(DynamicsError::ModeIncompatible(format!(
                        "unbounded variable `{}` needs --mode boole",
                        v.name
                    )))
                }
                VarDomainDecl::Real => VarDomain::Real,
                VarDomainDecl::Int => VarDomain::Integer,
            };
            var_domains.insert(v.name.clone(), dom);
        }

        let mut params = Vec::new();
        for p in &prog.params {
            let domain = match &p.domain {
                ParamDomainDecl::Values(vs) => StateDomain::Values(
                    vs.iter().map(|x| mode_value(mode, x, &p.name)).collect::<Result<_, _>>()?,
                ),
                ParamDomainDecl::Labels(ls) => StateDomain::Labels(ls.iter().map(|l| Label::new(l)).collect()),
                ParamDomainDecl::Int | ParamDomainDecl::Real if !boole => {
                    return Err(DynamicsError::ModeIncompatible(format!(
                        "unbounded parameter `{}` needs --mode boole",
                        p.name
                    )))
                }
                ParamDomainDecl::Int => StateDomain::Int,
                ParamDomainDecl::Real => StateDomain::Real,
            };
            params.push(Parameter { name: p.name.clone(), domain, implicit: false });
        }

        let mut updates: Vec<Option<Expr>> = vec![None; params.len()];
        let mut templates = Vec::new();
        let mut queries = Vec::new();
        let mut lifted = Vec::new();
        for s in &prog.statements {
            match s {
                Statement::Axiom { expr, .. } => {
                    templates.push(Template { lhs: lift(expr, &mut lifted)?, rhs: Expr::num(1) })
                }
                Statement::Constraint { lhs, rhs, .. } => {
                    templates.push(Template { lhs: lift(lhs, &mut lifted)?, rhs: lift(rhs, &mut lifted)? })
                }
                Statement::Update { param, expr, .. } => {
                    let j = params.iter().position(|p| p.name == *param).expect("parser checked");
                    updates[j] = Some(expr.clone());
                }
                Statement::Query { expr, .. } => queries.push(expr.clone()),
            }
        }
        for (name, expr) in lifted {
            params.push(Parameter {
                name,
                domain: StateDomain::Values(vec![Rational::zero(), Rational::one()]),
                implicit: true,
            });
            updates.push(Some(expr));
        }
        let updates = updates
            .into_iter()
            .zip(&params)
            .map(|(u, p)| u.unwrap_or_else(|| Expr::Ident(p.name.clone())))
            .collect();
        Ok(ParametricSystem { mode, vars, var_domains, idempotent, params, templates, updates, queries })
    }

    pub fn mode(&self) -> TranslationMode {
        self.mode
    }

    pub fn domain(&self) -> CoeffDomain {
        self.mode.domain()
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn params(&self) -> &[Parameter] {
        &self.params
    }

    pub fn updates(&self) -> &[Expr] {
        &self.updates
    }

    pub fn queries(&self) -> &[Expr] {
        &self.queries
    }

    fn is_var(&self, name: &str) -> bool {
        self.vars.contains(name)
    }

    fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    /// Parse an objective and check its identifiers.
    pub fn objective(&self, text: &str) -> Result<Expr, DynamicsError> {
        let e = parse_expr(text)?;
        for name in e.idents() {
            if !self.is_var(&name) && self.param_index(&name).is_none() {
                return Err(ParseError::UndeclaredIdentifier { name, line: 1, col: 1 }.into());
            }
        }
        Ok(e)
    }

    /// Objective used when none is given: the first query, else the first
    /// variable, else the first parameter.
    pub fn default_objective(&self) -> Option<Expr> {
        self.queries
            .first()
            .cloned()
            .or_else(|| self.vars.names().first().map(|n| Expr::Ident(n.clone())))
            .or_else(|| self.params.first().map(|p| Expr::Ident(p.name.clone())))
    }

    fn check_state(&self, state: &State) -> Result<(), DynamicsError> {
        if state.0.len() != self.params.len() {
            return Err(DynamicsError::StateArity { expected: self.params.len(), got: state.0.len() });
        }
        Ok(())
    }

    /// All states of a finite state space, first parameter most significant.
    pub fn state_space(&self, cfg: &SolveConfig) -> Result<Vec<State>, DynamicsError> {
        let mut domains = Vec::new();
        for p in &self.params {
            domains.push(p.domain.states().ok_or(DynamicsError::InfiniteStateSpace)?);
        }
        let mut total: u64 = 1;
        for d in &domains {
            total = total.saturating_mul(d.len() as u64);
        }
        if total > cfg.max_enum {
            return Err(DynamicsError::BudgetExceeded { required: total.to_string(), budget: cfg.max_enum });
        }
        let mut states = vec![Vec::new()];
        for d in &domains {
            states = states
                .into_iter()
                .flat_map(|s| d.iter().map(move |v| [s.clone(), vec![v.clone()]].concat()))
                .collect();
        }
        Ok(states.into_iter().map(State).collect())
    }

    fn base_system(&self, vars: &VarSet) -> Result<EquationSystem, DynamicsError> {
        let mut sys = EquationSystem::new(self.domain(), vars);
        for (name, dom) in &self.var_domains {
            sys.set_domain(name, dom.clone())?;
        }
        for name in &self.idempotent {
            sys.push_idempotence(name)?;
        }
        Ok(sys)
    }

    fn push_template(
        &self,
        sys: &mut EquationSystem,
        ev: &Evaluator<'_>,
        t: &Template,
    ) -> Result<(), DynamicsError> {
        let lhs = ev.poly(&t.lhs, true)?;
        let rhs = ev.poly(&t.rhs, true)?;
        match rhs.constant_value() {
            Some(c) => sys.push(&lhs, &c)?,
            None => sys.push(&lhs.sub(&rhs)?, &Rational::zero())?,
        }
        Ok(())
    }

    /// The ordinary system `A(state)`.
    pub fn instantiate(&self, state: &State, cfg: &SolveConfig) -> Result<EquationSystem, DynamicsError> {
        self.check_state(state)?;
        let ev = Evaluator::concrete(self, state, cfg);
        let mut sys = self.base_system(&self.vars)?;
        for t in &self.templates {
            self.push_template(&mut sys, &ev, t)?;
        }
        Ok(sys)
    }

    /// The system of a program without parameters.
    pub fn equation_system(&self, cfg: &SolveConfig) -> Result<EquationSystem, DynamicsError> {
        if !self.params.is_empty() {
            return Err(DynamicsError::HasParameters);
        }
        self.instantiate(&State(Vec::new()), cfg)
    }

    /// Compile an expression over the variables at a given state.
    pub fn compile(&self, e: &Expr, state: &State, cfg: &SolveConfig) -> Result<MultiPoly, DynamicsError> {
        self.check_state(state)?;
        Evaluator::concrete(self, state, cfg).poly(e, true)
    }

    /// Hypothesize `state`, solve, and apply every update rule.
    pub fn step(&self, state: &State, cfg: &SolveConfig) -> Result<State, DynamicsError> {
        self.check_state(state)?;
        let ev = Evaluator::concrete(self, state, cfg);
        let mut next = Vec::with_capacity(self.params.len());
        for (p, u) in self.params.iter().zip(&self.updates) {
            let v = ev.eval(u, false)?;
            next.push(self.to_state_value(p, v)?);
        }
        Ok(State(next))
    }

    /// Solution-value set of `objective` at `state`; an objective naming only
    /// parameters takes their hypothesized values.
    pub fn objective_values(
        &self,
        objective: &Expr,
        state: &State,
        cfg: &SolveConfig,
    ) -> Result<SolutionValueSet, DynamicsError> {
        self.check_state(state)?;
        Evaluator::concrete(self, state, cfg).value_set(objective)
    }

    fn to_state_value(&self, p: &Parameter, v: Val) -> Result<StateValue, DynamicsError> {
        let out_of_domain = |value: String| DynamicsError::UpdateOutOfDomain { param: p.name.clone(), value };
        let sv = match v {
            Val::Poly(q) => match q.constant_value() {
                Some(c) => StateValue::Num(c),
                None => return Err(DynamicsError::Type(format!("update of `{}` is not constant", p.name))),
            },
            Val::Label(l) => match &p.domain {
                StateDomain::Labels(ls) => match ls.iter().find(|x| x.matches(&l)) {
                    Some(x) => StateValue::Label(x.clone()),
                    None => return Err(out_of_domain(l.text)),
                },
                _ => return Err(out_of_domain(l.text)),
            },
            Val::Set(s) => match &p.domain {
                StateDomain::Labels(ls) => match ls.iter().find(|x| x.payload.as_ref() == Some(&s)) {
                    Some(x) => StateValue::Label(x.clone()),
                    None => return Err(out_of_domain(s.to_string())),
                },
                _ => return Err(out_of_domain(s.to_string())),
            },
        };
        if !p.domain.admits(&sv) {
            return Err(out_of_domain(sv.to_string()));
        }
        Ok(sv)
    }

    fn param_vars(&self) -> Result<VarSet, DynamicsError> {
        Ok(VarSet::new(self.params.iter().map(|p| p.name.clone()))?)
    }

    /// Updates as polynomials in the parameters, when none reads a solution set.
    pub fn symbolic_updates(&self) -> Option<Vec<MultiPoly>> {
        if self.updates.iter().any(Expr::has_solution_refs) {
            return None;
        }
        let pvars = self.param_vars().ok()?;
        let cfg = SolveConfig::default();
        let ev = Evaluator::symbolic(self, pvars, &cfg);
        self.updates.iter().map(|u| ev.poly(u, false).ok()).collect()
    }
}

#[derive(Debug, Clone)]
enum Val {
    Poly(MultiPoly),
    Set(SolutionValueSet),
    Label(Label),
}

struct Evaluator<'a> {
    sys: &'a ParametricSystem,
    /// Hypothesized parameter values; `None` keeps parameters symbolic.
    state: Option<&'a State>,
    ring: VarSet,
    cfg: &'a SolveConfig,
    solutions: OnceCell<SolutionSet>,
}

impl<'a> Evaluator<'a> {
    fn concrete(sys: &'a ParametricSystem, state: &'a State, cfg: &'a SolveConfig) -> Self {
        Evaluator { sys, state: Some(state), ring: sys.vars.clone(), cfg, solutions: OnceCell::new() }
    }

    fn symbolic(sys: &'a ParametricSystem, ring: VarSet, cfg: &'a SolveConfig) -> Self {
        Evaluator { sys, state: None, ring, cfg, solutions: OnceCell::new() }
    }

    fn domain(&self) -> CoeffDomain {
        self.sys.domain()
    }

    fn constant(&self, c: &Rational) -> Result<MultiPoly, DynamicsError> {
        Ok(MultiPoly::constant(self.domain(), &self.ring, c)?)
    }

    fn solutions(&self) -> Result<&SolutionSet, DynamicsError> {
        if let Some(s) = self.solutions.get() {
            return Ok(s);
        }
        let state = self
            .state
            .ok_or_else(|| DynamicsError::Type("solution sets need hypothesized parameter values".into()))?;
        let a = self.sys.instantiate(state, self.cfg)?;
        let s = solution_set(&a, self.cfg)?;
        Ok(self.solutions.get_or_init(|| s))
    }

    fn poly(&self, e: &Expr, allow_vars: bool) -> Result<MultiPoly, DynamicsError> {
        match self.eval(e, allow_vars)? {
            Val::Poly(p) => Ok(p),
            Val::Set(s) => Err(DynamicsError::Type(format!("`{e}` is the set {s}, not a number"))),
            Val::Label(l) => Err(DynamicsError::Type(format!("`{e}` is the label {}, not a number", l.text))),
        }
    }

    fn two_valued(&self, p: MultiPoly) -> Result<MultiPoly, DynamicsError> {
        match p.constant_value() {
            Some(c) if !c.is_zero() && !c.is_one() => Err(DynamicsError::NotTwoValued(c)),
            _ => Ok(p),
        }
    }

    /// `$e`
    fn value_set(&self, e: &Expr) -> Result<SolutionValueSet, DynamicsError> {
        if !e.idents().iter().any(|n| self.sys.is_var(n)) {
            return match self.eval(e, false)? {
                Val::Poly(p) => match p.constant_value() {
                    Some(c) => Ok(SolutionValueSet::singleton(c)),
                    None => Err(DynamicsError::Type(format!("`{e}` needs hypothesized parameter values"))),
                },
                Val::Set(s) => Err(DynamicsError::Type(format!("`${e}` of the set {s}"))),
                Val::Label(l) => l
                    .payload
                    .ok_or_else(|| DynamicsError::Type(format!("label {} does not denote a set", l.text))),
            };
        }
        let p = self.poly(e, true)?;
        Ok(values_on(self.solutions()?, &p)?)
    }

    fn equal(&self, e: &Expr, a: Val, b: Val) -> Result<bool, DynamicsError> {
        Ok(match (a, b) {
            (Val::Poly(p), Val::Poly(q)) => match (p.constant_value(), q.constant_value()) {
                (Some(x), Some(y)) => x == y,
                _ => return Err(DynamicsError::NonConstantComparison(e.to_string())),
            },
            (Val::Set(s), Val::Set(t)) => s == t,
            (Val::Label(l), Val::Label(m)) => l.matches(&m),
            (Val::Label(l), Val::Set(s)) | (Val::Set(s), Val::Label(l)) => l.payload.as_ref() == Some(&s),
            _ => return Err(DynamicsError::Type(format!("`{e}` compares a number with a set"))),
        })
    }

    fn eval(&self, e: &Expr, allow_vars: bool) -> Result<Val, DynamicsError> {
        let domain = self.domain();
        Ok(match e {
            Expr::Num(n) => Val::Poly(self.constant(n)?),
            Expr::Ident(name) => {
                if self.sys.is_var(name) {
                    if !allow_vars {
                        return Err(DynamicsError::VariableInUpdate(name.clone()));
                    }
                    Val::Poly(MultiPoly::var(domain, &self.ring, name)?)
                } else {
                    let j = self.sys.param_index(name).ok_or_else(|| DynamicsError::Unknown(name.clone()))?;
                    match self.state {
                        Some(state) => match &state.0[j] {
                            StateValue::Num(n) => Val::Poly(self.constant(n)?),
                            StateValue::Label(l) => Val::Label(l.clone()),
                        },
                        None => {
                            if let StateDomain::Labels(_) = self.sys.params[j].domain {
                                return Err(DynamicsError::NonNumericStates(name.clone()));
                            }
                            Val::Poly(MultiPoly::var(domain, &self.ring, name)?)
                        }
                    }
                }
            }
            Expr::Label(text) => Val::Label(Label::new(text)),
            Expr::Set(items) => {
                let mut s = SolutionValueSet::new();
                for item in items {
                    match self.poly(item, allow_vars)?.constant_value() {
                        Some(c) => s.insert(c),
                        None => return Err(DynamicsError::Type(format!("set member `{item}` is not constant"))),
                    }
                }
                Val::Set(s)
            }
            Expr::Unary(UnOp::Neg, a) => Val::Poly(self.poly(a, allow_vars)?.neg()),
            Expr::Unary(UnOp::Not, a) => Val::Poly(negation(&self.two_valued(self.poly(a, allow_vars)?)?)),
            Expr::Unary(UnOp::Provable, a) => {
                let s = self.value_set(a)?;
                let hit = s == SolutionValueSet::singleton(Rational::one());
                Val::Poly(self.constant(&Rational::integer(hit as i64))?)
            }
            Expr::SolutionSet(a) => Val::Set(self.value_set(a)?),
            Expr::Card(a) => match self.eval(a, allow_vars)? {
                Val::Set(s) => Val::Poly(self.constant(&Rational::integer(s.len() as i64))?),
                Val::Label(Label { payload: Some(s), .. }) => {
                    Val::Poly(self.constant(&Rational::integer(s.len() as i64))?)
                }
                _ => return Err(DynamicsError::Type(format!("`|{a}|` needs a set"))),
            },
            Expr::Binary(op, a, b) => match op {
                BinOp::Eq | BinOp::Ne => {
                    let eq = self.equal(e, self.eval(a, allow_vars)?, self.eval(b, allow_vars)?)?;
                    let v = if *op == BinOp::Eq { eq } else { !eq };
                    Val::Poly(self.constant(&Rational::integer(v as i64))?)
                }
                BinOp::Add | BinOp::Sub | BinOp::Mul => {
                    let (p, q) = (self.poly(a, allow_vars)?, self.poly(b, allow_vars)?);
                    Val::Poly(match op {
                        BinOp::Add => p.add(&q)?,
                        BinOp::Sub => p.sub(&q)?,
                        _ => p.mul(&q)?,
                    })
                }
                BinOp::Div => {
                    let p = self.poly(a, allow_vars)?;
                    let q = self.poly(b, allow_vars)?;
                    let c = q
                        .constant_value()
                        .ok_or_else(|| DynamicsError::Type(format!("divisor in `{e}` is not constant")))?;
                    Val::Poly(p.scale(&domain.inv(&c)?)?)
                }
                BinOp::Pow => {
                    let p = self.poly(a, allow_vars)?;
                    let k = self
                        .poly(b, allow_vars)?
                        .constant_value()
                        .filter(|_| domain == CoeffDomain::Rational)
                        .or_else(|| b.const_value())
                        .and_then(|k| k.to_i64())
                        .and_then(|k| u32::try_from(k).ok())
                        .ok_or_else(|| DynamicsError::Type(format!("exponent in `{e}` is not a natural number")))?;
                    Val::Poly(p.pow(k))
                }
                _ => {
                    let c = Connective::from_binop(*op).expect("remaining operators are connectives");
                    let p = self.two_valued(self.poly(a, allow_vars)?)?;
                    let q = self.two_valued(self.poly(b, allow_vars)?)?;
                    Val::Poly(connective(c, &p, &q)?)
                }
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvolutionFunction {
    pub params: Vec<String>,
    /// `state -> next` over a finite state space, in state-space order.
    pub table: Option<Vec<(State, State)>>,
    /// One polynomial per parameter in the sorted parameter variables.
    pub interpolation: Option<Vec<MultiPoly>>,
    pub symbolic: Option<Vec<MultiPoly>>,
}

impl EvolutionFunction {
    pub fn next(&self, state: &State) -> Option<&State> {
        self.table.as_ref()?.iter().find(|(s, _)| s == state).map(|(_, n)| n)
    }
}

pub fn extract_evolution(sys: &ParametricSystem, cfg: &SolveConfig) -> Result<EvolutionFunction, DynamicsError> {
    let symbolic = sys.symbolic_updates();
    let states = match sys.state_space(cfg) {
        Ok(s) => s,
        Err(DynamicsError::InfiniteStateSpace) if symbolic.is_some() => {
            return Ok(EvolutionFunction {
                params: sys.params.iter().map(|p| p.name.clone()).collect(),
                table: None,
                interpolation: None,
                symbolic,
            });
        }
        Err(e) => return Err(e),
    };
    let mut table = Vec::with_capacity(states.len());
    for s in states {
        let next = sys.step(&s, cfg)?;
        table.push((s, next));
    }
    let interpolation = interpolate_table(sys, &table)?;
    Ok(EvolutionFunction {
        params: sys.params.iter().map(|p| p.name.clone()).collect(),
        table: Some(table),
        interpolation,
        symbolic,
    })
}

fn interpolate_table(
    sys: &ParametricSystem,
    table: &[(State, State)],
) -> Result<Option<Vec<MultiPoly>>, DynamicsError> {
    if sys.params.is_empty() {
        return Ok(None);
    }
    let mut grids = BTreeMap::new();
    for p in &sys.params {
        match &p.domain {
            StateDomain::Values(vs) => grids.insert(p.name.clone(), vs.clone()),
            _ => return Ok(None),
        };
    }
    let pvars = sys.param_vars()?;
    let order: Vec<usize> = pvars.names().iter().map(|n| sys.param_index(n).expect("parameter")).collect();
    let lookup: HashMap<&State, &State> = table.iter().map(|(s, n)| (s, n)).collect();
    let sorted_grids: Vec<Vec<Rational>> = pvars.names().iter().map(|n| grids[n].clone()).collect();

    // grid points in sorted-variable order, last coordinate fastest
    let mut points: Vec<Vec<Rational>> = vec![Vec::new()];
    for g in &sorted_grids {
        points = points.into_iter().flat_map(|p| g.iter().map(move |v| [p.clone(), vec![v.clone()]].concat())).collect();
    }
    let mut out = Vec::new();
    for j in 0..sys.params.len() {
        let mut values = Vec::with_capacity(points.len());
        for pt in &points {
            let mut state = vec![StateValue::Num(Rational::zero()); sys.params.len()];
            for (k, &decl) in order.iter().enumerate() {
                state[decl] = StateValue::Num(pt[k].clone());
            }
            match &lookup[&State(state)].0[j] {
                StateValue::Num(n) => values.push(n.clone()),
                StateValue::Label(_) => return Ok(None),
            }
        }
        out.push(interpolate_grid(sys.domain(), &pvars, &sorted_grids, &values)?);
    }
    Ok(Some(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Steadiness {
    Steady,
    Unsteady,
    Contingent,
}

impl Steadiness {
    pub fn from_fixed_points(n: usize) -> Steadiness {
        match n {
            0 => Steadiness::Unsteady,
            1 => Steadiness::Steady,
            _ => Steadiness::Contingent,
        }
    }
}

impl fmt::Display for Steadiness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Steadiness::Steady => "steady",
            Steadiness::Unsteady => "unsteady",
            Steadiness::Contingent => "contingent",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: State,
    pub to: State,
    /// Objective's solution-value set at `from`.
    pub label: SolutionValueSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicalSystem {
    pub params: Vec<String>,
    pub objective: Expr,
    pub states: Vec<State>,
    pub transitions: Vec<Transition>,
    pub fixed_points: Vec<State>,
    pub steadiness: Steadiness,
}

pub fn build_dynamics(
    sys: &ParametricSystem,
    objective: &Expr,
    cfg: &SolveConfig,
) -> Result<DynamicalSystem, DynamicsError> {
    let states = sys.state_space(cfg)?;
    let mut transitions = Vec::with_capacity(states.len());
    for s in &states {
        let to = sys.step(s, cfg)?;
        let label = sys.objective_values(objective, s, cfg)?;
        transitions.push(Transition { from: s.clone(), to, label });
    }
    let fixed_points: Vec<State> = transitions.iter().filter(|t| t.from == t.to).map(|t| t.from.clone()).collect();
    let steadiness = Steadiness::from_fixed_points(fixed_points.len());
    Ok(DynamicalSystem {
        params: sys.params.iter().map(|p| p.name.clone()).collect(),
        objective: objective.clone(),
        states,
        transitions,
        fixed_points,
        steadiness,
    })
}

impl DynamicalSystem {
    fn index(&self) -> HashMap<&State, usize> {
        self.states.iter().enumerate().map(|(i, s)| (s, i)).collect()
    }

    /// Graphviz rendering; fixed points get a double border.
    pub fn to_dot(&self) -> String {
        let esc = |s: String| s.replace('\\', "\\\\").replace('"', "\\\"");
        let idx = self.index();
        let mut out = String::from("digraph dynamics {\n  rankdir=LR;\n");
        for (i, s) in self.states.iter().enumerate() {
            let extra = if self.fixed_points.contains(s) { ", peripheries=2" } else { "" };
            let _ = writeln!(out, "  s{i} [label=\"{}\"{extra}];", esc(s.to_string()));
        }
        for t in &self.transitions {
            let _ = writeln!(out, "  s{} -> s{} [label=\"{}\"];", idx[&t.from], idx[&t.to], esc(t.label.to_string()));
        }
        out.push_str("}\n");
        out
    }
}

impl fmt::Display for DynamicalSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "objective: {}", self.objective)?;
        for t in &self.transitions {
            writeln!(f, "{} -> {}  {}", t.from, t.to, t.label)?;
        }
        let fps: Vec<String> = self.fixed_points.iter().map(ToString::to_string).collect();
        writeln!(f, "fixed points: {{{}}}", fps.join(", "))?;
        writeln!(f, "{}", self.steadiness)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    pub initial: State,
    pub prefix: Vec<SolutionValueSet>,
    pub cycle: Vec<SolutionValueSet>,
}

fn minimal_period(cycle: &[SolutionValueSet]) -> usize {
    let n = cycle.len();
    (1..=n).find(|&p| n % p == 0 && (p..n).all(|i| cycle[i] == cycle[i - p])).unwrap_or(n)
}

/// Shortest `(prefix, cycle)` with `prefix ++ cycle^w` equal to the value
/// sequence of the orbit `states[0..mu] (states[mu..])^w`.
fn minimal_representation(values: &[SolutionValueSet], mu: usize) -> (Vec<SolutionValueSet>, Vec<SolutionValueSet>) {
    let mut prefix = values[..mu].to_vec();
    let mut cycle = values[mu..].to_vec();
    cycle.truncate(minimal_period(&cycle));
    while let Some(last) = prefix.last() {
        if *last != cycle[cycle.len() - 1] {
            break;
        }
        prefix.pop();
        cycle.rotate_right(1);
    }
    (prefix, cycle)
}

pub fn sequences_of(dynamics: &DynamicalSystem) -> Vec<Sequence> {
    let idx = dynamics.index();
    let succ: Vec<usize> = dynamics.transitions.iter().map(|t| idx[&t.to]).collect();
    let labels: Vec<&SolutionValueSet> = dynamics.transitions.iter().map(|t| &t.label).collect();
    let mut out = Vec::new();
    for start in 0..dynamics.states.len() {
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let mut orbit = Vec::new();
        let mut cur = start;
        while !seen.contains_key(&cur) {
            seen.insert(cur, orbit.len());
            orbit.push(cur);
            cur = succ[cur];
        }
        let mu = seen[&cur];
        let values: Vec<SolutionValueSet> = orbit.iter().map(|&i| labels[i].clone()).collect();
        let (prefix, cycle) = minimal_representation(&values, mu);
        out.push(Sequence { initial: dynamics.states[start].clone(), prefix, cycle });
    }
    out
}

pub fn sequences(sys: &ParametricSystem, objective: &Expr, cfg: &SolveConfig) -> Result<Vec<Sequence>, DynamicsError> {
    Ok(sequences_of(&build_dynamics(sys, objective, cfg)?))
}

impl Sequence {
    /// Text form; braces are dropped when `singletons` is set.
    pub fn render(&self, singletons: bool) -> String {
        let show = |s: &SolutionValueSet| match (singletons, s.only()) {
            (true, Some(v)) => v.to_string(),
            _ => s.to_string(),
        };
        let join = |v: &[SolutionValueSet]| v.iter().map(show).collect::<Vec<_>>().join(",");
        format!("{} => prefix ({}) cycle ({})", self.initial, join(&self.prefix), join(&self.cycle))
    }
}

/// Whether every set in every sequence has exactly one member.
pub fn all_singletons(seqs: &[Sequence]) -> bool {
    seqs.iter().all(|s| s.prefix.iter().chain(&s.cycle).all(|v| v.len() == 1))
}

/// Orbit of `initial` under the update rules, `steps` transitions long.
pub fn orbit(
    sys: &ParametricSystem,
    initial: &State,
    steps: usize,
    cfg: &SolveConfig,
) -> Result<Vec<State>, DynamicsError> {
    let mut out = vec![initial.clone()];
    for _ in 0..steps {
        let next = sys.step(out.last().expect("non-empty"), cfg)?;
        out.push(next);
    }
    Ok(out)
}

/// Parameters become variables and each update `t := F(t)` becomes the
/// equation `t - F(t) = 0`.
pub fn static_transcription(sys: &ParametricSystem, cfg: &SolveConfig) -> Result<EquationSystem, DynamicsError> {
    for p in &sys.params {
        if let StateDomain::Labels(_) = p.domain {
            return Err(DynamicsError::NonNumericStates(p.name.clone()));
        }
    }
    let ext = VarSet::new(sys.vars.names().iter().cloned().chain(sys.params.iter().map(|p| p.name.clone())))?;
    let mut out = sys.base_system(&ext)?;
    for p in &sys.params {
        let dom = match &p.domain {
            StateDomain::Values(vs) => VarDomain::finite(vs.iter().cloned()),
            StateDomain::Int => VarDomain::Integer,
            StateDomain::Real => VarDomain::Real,
            StateDomain::Labels(_) => unreachable!(),
        };
        out.set_domain(&p.name, dom)?;
    }
    let ev = Evaluator::symbolic(sys, ext.clone(), cfg);
    for t in &sys.templates {
        sys.push_template(&mut out, &ev, t)?;
    }
    let interpolated = if sys.updates.iter().any(Expr::has_solution_refs) {
        Some(
            extract_evolution(sys, cfg)?
                .interpolation
                .ok_or_else(|| DynamicsError::NonNumericStates(sys.params[0].name.clone()))?,
        )
    } else {
        None
    };
    for (j, (p, u)) in sys.params.iter().zip(&sys.updates).enumerate() {
        let f = match &interpolated {
            Some(polys) => polys[j].rebase(&ext)?,
            None => ev.poly(u, false)?,
        };
        let residual = MultiPoly::var(sys.domain(), &ext, &p.name)?.sub(&f)?;
        if !residual.is_zero() {
            out.push(&residual, &Rational::zero())?;
        }
    }
    Ok(out)
}

/// Where a program statement came from, for diagnostics.
pub fn statement_pos(s: &Statement) -> Pos {
    match s {
        Statement::Axiom { pos, .. }
        | Statement::Constraint { pos, .. }
        | Statement::Update { pos, .. }
        | Statement::Query { pos, .. } => *pos,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::solve::solution_set;

    fn f2() -> TranslationMode {
        TranslationMode::Modular(FieldSpec::new(2).unwrap())
    }

    fn cfg() -> SolveConfig {
        SolveConfig::default()
    }

    fn num(n: i64) -> State {
        State(vec![StateValue::Num(Rational::integer(n))])
    }

    fn table_text(ev: &EvolutionFunction) -> Vec<String> {
        ev.table.as_ref().unwrap().iter().map(|(a, b)| format!("{a}->{b}")).collect()
    }

    const GOEDEL: &str = "parameter x in {0,1};\nx := !?x;\nquery x;";
    const QUAD_C: &str = "var x in real;\nparameter c in {0,1,2};\n2*x**2 + 3*x + c == 0;\nc := |$x|;\nquery x;";

    #[test]
    fn goedel_oscillates() {
        let sys = ParametricSystem::parse(GOEDEL, TranslationMode::Boole).unwrap();
        let ev = extract_evolution(&sys, &cfg()).unwrap();
        assert_eq!(table_text(&ev), ["0->1", "1->0"]);
        assert_eq!(ev.interpolation.unwrap()[0].to_string(), "-x + 1");
        let dynm = build_dynamics(&sys, &Expr::ident("x"), &cfg()).unwrap();
        assert_eq!(dynm.steadiness, Steadiness::Unsteady);
        let seqs = sequences_of(&dynm);
        assert_eq!(seqs[0].render(false), "0 => prefix () cycle ({0},{1})");
        let st = static_transcription(&sys, &cfg()).unwrap();
        assert!(solution_set(&st, &cfg()).unwrap().is_empty());
    }

    #[test]
    fn quadratic_c_worksheet() {
        let sys = ParametricSystem::parse(QUAD_C, TranslationMode::Boole).unwrap();
        let ev = extract_evolution(&sys, &cfg()).unwrap();
        assert_eq!(table_text(&ev), ["0->2", "1->2", "2->0"]);
        assert_eq!(ev.interpolation.unwrap()[0].to_string(), "-c^2 + c + 2");
        let dynm = build_dynamics(&sys, &Expr::ident("x"), &cfg()).unwrap();
        let labels: Vec<String> = dynm.transitions.iter().map(|t| t.label.to_string()).collect();
        assert_eq!(labels, ["{-3/2,0}", "{-1,-1/2}", "{}"]);
        assert_eq!(dynm.steadiness, Steadiness::Unsteady);
        let c_seq = sequences(&sys, &Expr::ident("c"), &cfg()).unwrap();
        assert_eq!(c_seq[1].render(true), "1 => prefix (1) cycle (2,0)");
        let x_seq = sequences_of(&dynm);
        assert_eq!(x_seq[2].render(false), "2 => prefix () cycle ({},{-3/2,0})");
        assert!(matches!(
            ParametricSystem::parse(QUAD_C, f2()),
            Err(DynamicsError::ModeIncompatible(_))
        ));
    }

    #[test]
    fn implicit_parameter_from_constraint() {
        let sys = ParametricSystem::parse("var y;\ny == !?y;", f2()).unwrap();
        assert_eq!(sys.params().len(), 1);
        assert!(sys.params()[0].implicit);
        assert_eq!(sys.params()[0].name, "?y");
        let dynm = build_dynamics(&sys, &Expr::ident("y"), &cfg()).unwrap();
        assert_eq!(dynm.steadiness, Steadiness::Unsteady);
        assert!(matches!(
            ParametricSystem::parse("var x in {0,1};\nx == |$x|;", f2()),
            Err(DynamicsError::NeedsParameter(_))
        ));
    }

    #[test]
    fn symbolic_fibonacci() {
        let src = "parameter a, b in int;\na := b;\nb := a + b;";
        let sys = ParametricSystem::parse(src, TranslationMode::Boole).unwrap();
        let ev = extract_evolution(&sys, &cfg()).unwrap();
        assert!(ev.table.is_none());
        let sym: Vec<String> = ev.symbolic.unwrap().iter().map(ToString::to_string).collect();
        assert_eq!(sym, ["b", "a + b"]);
        let start = State(vec![StateValue::Num(Rational::zero()), StateValue::Num(Rational::one())]);
        let firsts: Vec<String> =
            orbit(&sys, &start, 6, &cfg()).unwrap().iter().map(|s| s.0[0].to_string()).collect();
        assert_eq!(firsts, ["0", "1", "1", "2", "3", "5", "8"]);
        let st = static_transcription(&sys, &cfg()).unwrap();
        assert_eq!(solution_set(&st, &cfg()).unwrap().to_string(), "{(0,0)}");
        assert!(matches!(build_dynamics(&sys, &Expr::ident("a"), &cfg()), Err(DynamicsError::InfiniteStateSpace)));
    }

    #[test]
    fn parameterless_system_is_trivially_steady() {
        let sys = ParametricSystem::parse("var x;\n|- x;", f2()).unwrap();
        let dynm = build_dynamics(&sys, &Expr::ident("x"), &cfg()).unwrap();
        assert_eq!(dynm.states, [State(vec![])]);
        assert_eq!(dynm.steadiness, Steadiness::Steady);
        assert_eq!(dynm.transitions[0].label.to_string(), "{1}");
    }

    #[test]
    fn update_out_of_domain() {
        let sys = ParametricSystem::parse("var x;\nparameter t in {0};\n|- x;\nt := ?x;", f2()).unwrap();
        assert!(matches!(sys.step(&num(0), &cfg()), Err(DynamicsError::UpdateOutOfDomain { .. })));
        let sys = ParametricSystem::parse("var x;\nparameter t in {0,1};\nt := x;", f2()).unwrap();
        assert!(matches!(sys.step(&num(0), &cfg()), Err(DynamicsError::VariableInUpdate(_))));
    }

    #[test]
    fn labels_and_payloads() {
        let l = Label::new("{0,1}");
        assert_eq!(l.payload.as_ref().unwrap().len(), 2);
        assert!(Label::new("r in r").payload.is_none());
        assert!(l.matches(&Label::new("{1,0}")));
    }

    #[test]
    fn minimal_cycles() {
        let s = |v: i64| SolutionValueSet::singleton(Rational::integer(v));
        let (p, c) = minimal_representation(&[s(1), s(2), s(0), s(2), s(0)], 1);
        assert_eq!((p.len(), c.len()), (1, 2));
        // prefix absorbed into the cycle by rotation
        let (p, c) = minimal_representation(&[s(0), s(1), s(0)], 1);
        assert_eq!((p, c), (vec![], vec![s(0), s(1)]));
    }

    #[test]
    fn dot_export() {
        let sys = ParametricSystem::parse("parameter y in {0,1};\ny := ?y;", f2()).unwrap();
        let dynm = build_dynamics(&sys, &Expr::ident("y"), &cfg()).unwrap();
        let dot = dynm.to_dot();
        assert_eq!(dot.matches("peripheries=2").count(), 2);
        assert_eq!(dot.matches("->").count(), 2);
        assert_eq!(dynm.steadiness, Steadiness::Contingent);
    }
}
