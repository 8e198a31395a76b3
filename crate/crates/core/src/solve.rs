//! Exact solving by enumeration: solution sets, solution-value sets,
//! classification, value worksheets, inverse-value sets and theorems.
//!
//! Finite-domain variables are enumerated. Unbounded (`real`/`int`)
//! variables are solved per finite assignment: one such variable through
//! linear or quadratic roots, several through exact linear elimination.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{CoeffDomain, FieldSpec, Rational};
use crate::logic::Formula;
use crate::poly::{checked_ring_size, monomial_basis, ring_element, MultiPoly, PolyError, VarSet};
use crate::translate::back_translate;

pub const DEFAULT_MAX_ENUM: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("enumeration needs {required} items, budget is {budget}")]
    BudgetExceeded { required: String, budget: u64 },
    #[error(transparent)]
    Poly(PolyError),
    #[error("`{var}` has irrational solutions (discriminant {discriminant}); only exact rational values are supported")]
    IrrationalRoots { var: String, discriminant: Rational },
    #[error("cannot solve a degree-{degree} equation in unbounded variable `{var}`")]
    UnsupportedDegree { var: String, degree: u32 },
    #[error("unbounded variables {0:?} are not determined by the constraints")]
    Underdetermined(Vec<String>),
    #[error("several unbounded variables ({0:?}) are only supported in linear systems")]
    NonlinearUnbounded(Vec<String>),
    #[error("degenerate quadratic: leading coefficient is zero")]
    DegenerateQuadratic,
    #[error("{0} requires a modular coefficient domain")]
    ModularOnly(&'static str),
    #[error("query value {0} is not an element of the field")]
    QueryOutsideField(Rational),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

impl From<PolyError> for SolveError {
    fn from(e: PolyError) -> Self {
        match e {
            PolyError::BudgetExceeded { required, budget } => SolveError::BudgetExceeded { required, budget },
            PolyError::UnknownVariable(v) => SolveError::UnknownVariable(v),
            other => SolveError::Poly(other),
        }
    }
}

impl From<crate::field::FieldError> for SolveError {
    fn from(e: crate::field::FieldError) -> Self {
        SolveError::Poly(PolyError::Field(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveConfig {
    pub max_enum: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { max_enum: DEFAULT_MAX_ENUM }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VarDomain {
    /// Explicit values, kept sorted and distinct.
    Finite(Vec<Rational>),
    Real,
    Integer,
}

impl VarDomain {
    pub fn finite(values: impl IntoIterator<Item = Rational>) -> VarDomain {
        let set: BTreeSet<Rational> = values.into_iter().collect();
        VarDomain::Finite(set.into_iter().collect())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, VarDomain::Finite(_))
    }
}

impl fmt::Display for VarDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarDomain::Finite(vs) => {
                let s: Vec<String> = vs.iter().map(ToString::to_string).collect();
                write!(f, "{{{}}}", s.join(","))
            }
            VarDomain::Real => write!(f, "real"),
            VarDomain::Integer => write!(f, "int"),
        }
    }
}

/// `poly = rhs`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub poly: MultiPoly,
    pub rhs: Rational,
}

impl Constraint {
    /// `poly - rhs`, the polynomial that must vanish.
    pub fn residual(&self) -> MultiPoly {
        self.poly.add_constant(&-self.rhs.clone()).expect("rhs is a domain constant")
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.poly, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSystem {
    domain: CoeffDomain,
    vars: VarSet,
    domains: Vec<VarDomain>,
    constraints: Vec<Constraint>,
}

impl EquationSystem {
    /// Variables default to all of `F_d`, or to `{0,1}` over the rationals.
    pub fn new(domain: CoeffDomain, vars: &VarSet) -> Self {
        let default = match domain.elements() {
            Some(all) => VarDomain::Finite(all),
            None => VarDomain::Finite(vec![Rational::zero(), Rational::one()]),
        };
        EquationSystem { domain, vars: vars.clone(), domains: vec![default; vars.len()], constraints: Vec::new() }
    }

    pub fn domain(&self) -> CoeffDomain {
        self.domain
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn var_domains(&self) -> &[VarDomain] {
        &self.domains
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn set_domain(&mut self, name: &str, dom: VarDomain) -> Result<(), SolveError> {
        let i = self.vars.index_of(name).ok_or_else(|| SolveError::UnknownVariable(name.to_string()))?;
        self.domains[i] = match dom {
            VarDomain::Finite(vs) => VarDomain::finite(
                vs.iter().map(|v| self.domain.normalize(v)).collect::<Result<Vec<_>, _>>()?,
            ),
            other => other,
        };
        Ok(())
    }

    /// Add `poly = rhs`; `poly` may be over any subset of the variables.
    pub fn push(&mut self, poly: &MultiPoly, rhs: &Rational) -> Result<(), SolveError> {
        if poly.domain() != self.domain {
            return Err(PolyError::DomainMismatch(poly.domain(), self.domain).into());
        }
        let poly = poly.rebase(&self.vars)?;
        let rhs = self.domain.normalize(rhs)?;
        self.constraints.push(Constraint { poly, rhs });
        Ok(())
    }

    /// `x^2 - x = 0`
    pub fn push_idempotence(&mut self, name: &str) -> Result<(), SolveError> {
        let x = MultiPoly::var(self.domain, &self.vars, name)?;
        let sq = x.mul(&x)?.sub(&x)?;
        self.push(&sq, &Rational::zero())
    }

    /// Constraints of both systems; variable sets and domains must agree.
    pub fn union(&self, other: &EquationSystem) -> Result<EquationSystem, SolveError> {
        if self.vars != other.vars {
            return Err(PolyError::VarSetMismatch(self.vars.clone(), other.vars.clone()).into());
        }
        let mut out = self.clone();
        out.constraints.extend(other.constraints.iter().cloned());
        Ok(out)
    }
}

impl fmt::Display for EquationSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, dom) in self.vars.names().iter().zip(&self.domains) {
            writeln!(f, "{name} in {dom}")?;
        }
        if self.constraints.is_empty() {
            writeln!(f, "0 = 0")?;
        }
        for c in &self.constraints {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A set of coefficient-domain values, printed as `{0,1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SolutionValueSet(BTreeSet<Rational>);

impl SolutionValueSet {
    pub fn new() -> Self {
        SolutionValueSet(BTreeSet::new())
    }

    pub fn singleton(v: Rational) -> Self {
        SolutionValueSet([v].into_iter().collect())
    }

    pub fn insert(&mut self, v: Rational) {
        self.0.insert(v);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, v: &Rational) -> bool {
        self.0.contains(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rational> {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &SolutionValueSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// The single member, if there is exactly one.
    pub fn only(&self) -> Option<&Rational> {
        if self.0.len() == 1 {
            self.0.iter().next()
        } else {
            None
        }
    }
}

impl FromIterator<Rational> for SolutionValueSet {
    fn from_iter<I: IntoIterator<Item = Rational>>(iter: I) -> Self {
        SolutionValueSet(iter.into_iter().collect())
    }
}

impl fmt::Display for SolutionValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

impl FromStr for SolutionValueSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| format!("`{s}` is not a set literal"))?;
        if inner.trim().is_empty() {
            return Ok(SolutionValueSet::new());
        }
        inner
            .split(',')
            .map(|item| item.trim().parse::<Rational>().map_err(|e| e.to_string()))
            .collect()
    }
}

/// Points satisfying a system, in ascending lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSet {
    vars: VarSet,
    points: BTreeSet<Vec<Rational>>,
}

impl SolutionSet {
    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> impl Iterator<Item = &Vec<Rational>> {
        self.points.iter()
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        self.points.contains(point)
    }

    /// Restrict every point to the named coordinates.
    pub fn project(&self, names: &[&str]) -> Result<BTreeSet<Vec<Rational>>, SolveError> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.vars.index_of(n).ok_or_else(|| SolveError::UnknownVariable(n.to_string())))
            .collect::<Result<_, _>>()?;
        Ok(self.points.iter().map(|p| idx.iter().map(|&i| p[i].clone()).collect()).collect())
    }
}

pub fn format_point(p: &[Rational]) -> String {
    let items: Vec<String> = p.iter().map(ToString::to_string).collect();
    format!("({})", items.join(","))
}

impl fmt::Display for SolutionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.points.iter().map(|p| format_point(p)).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Classification {
    Necessarily(Rational),
    Ambiguous,
    Unsatisfiable,
}

impl Classification {
    pub fn of(s: &SolutionValueSet) -> Classification {
        match s.len() {
            0 => Classification::Unsatisfiable,
            1 => Classification::Necessarily(s.iter().next().cloned().expect("one member")),
            _ => Classification::Ambiguous,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Necessarily(k) => write!(f, "necessarily {k}"),
            Classification::Ambiguous => write!(f, "ambiguous"),
            Classification::Unsatisfiable => write!(f, "unsatisfiable"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticReport {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub discriminant: Rational,
    pub real_root_count: u8,
    /// Ascending; empty when the roots are irrational.
    pub rational_roots: Vec<Rational>,
}

pub fn quadratic_real_roots(a: &Rational, b: &Rational, c: &Rational) -> Result<QuadraticReport, SolveError> {
    if a.is_zero() {
        return Err(SolveError::DegenerateQuadratic);
    }
    let four = Rational::integer(4);
    let disc = b * b - &(&four * a) * c;
    let count = if disc.is_negative() {
        0
    } else if disc.is_zero() {
        1
    } else {
        2
    };
    let mut roots = Vec::new();
    if count > 0 {
        if let Some(s) = disc.sqrt_exact() {
            let two_a_inv = (&Rational::integer(2) * a).recip().expect("a != 0");
            let set: BTreeSet<Rational> =
                [&(-b) - &s, &(-b) + &s].into_iter().map(|r| r * two_a_inv.clone()).collect();
            roots = set.into_iter().collect();
        }
    }
    Ok(QuadraticReport {
        a: a.clone(),
        b: b.clone(),
        c: c.clone(),
        discriminant: disc,
        real_root_count: count,
        rational_roots: roots,
    })
}

/// Odometer over the Cartesian product of finite domains, ascending.
fn for_each_point(
    domains: &[&Vec<Rational>],
    mut visit: impl FnMut(&[Rational]) -> Result<(), SolveError>,
) -> Result<(), SolveError> {
    if domains.iter().any(|d| d.is_empty()) {
        return Ok(());
    }
    let mut idx = vec![0usize; domains.len()];
    let mut point: Vec<Rational> = domains.iter().map(|d| d[0].clone()).collect();
    loop {
        visit(&point)?;
        let mut k = domains.len();
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < domains[k].len() {
                point[k] = domains[k][idx[k]].clone();
                break;
            }
            idx[k] = 0;
            point[k] = domains[k][0].clone();
        }
    }
}

fn check_budget(sizes: impl Iterator<Item = usize>, budget: u64) -> Result<(), SolveError> {
    let mut total: u64 = 1;
    let mut exact = true;
    for s in sizes {
        match total.checked_mul(s as u64) {
            Some(t) => total = t,
            None => {
                exact = false;
                break;
            }
        }
    }
    if !exact || total > budget {
        let required = if exact { total.to_string() } else { "more than 2^64".to_string() };
        return Err(SolveError::BudgetExceeded { required, budget });
    }
    Ok(())
}

enum Roots {
    All,
    Some(BTreeSet<Rational>),
}

fn univariate_roots(coeffs: &[Rational], var: &str) -> Result<Roots, SolveError> {
    let degree = coeffs.iter().rposition(|c| !c.is_zero());
    match degree {
        None => Ok(Roots::All),
        Some(0) => Ok(Roots::Some(BTreeSet::new())),
        Some(1) => {
            let r = -(&coeffs[0] * &coeffs[1].recip().expect("nonzero"));
            Ok(Roots::Some([r].into_iter().collect()))
        }
        Some(2) => {
            let rep = quadratic_real_roots(&coeffs[2], &coeffs[1], &coeffs[0])?;
            if rep.rational_roots.len() < rep.real_root_count as usize {
                return Err(SolveError::IrrationalRoots { var: var.to_string(), discriminant: rep.discriminant });
            }
            Ok(Roots::Some(rep.rational_roots.into_iter().collect()))
        }
        Some(d) => Err(SolveError::UnsupportedDegree { var: var.to_string(), degree: d as u32 }),
    }
}

fn fits(dom: &VarDomain, v: &Rational) -> bool {
    match dom {
        VarDomain::Integer => v.is_integer(),
        VarDomain::Real => true,
        VarDomain::Finite(vs) => vs.contains(v),
    }
}

/// Solve `rows * u = rhs` exactly; `None` when inconsistent.
fn solve_linear(
    mut rows: Vec<Vec<Rational>>,
    mut rhs: Vec<Rational>,
    k: usize,
) -> Result<Option<Vec<Rational>>, usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..k {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
        rows.swap(r, p);
        rhs.swap(r, p);
        let inv = rows[r][col].recip().expect("nonzero pivot");
        for j in 0..k {
            rows[r][j] = &rows[r][j] * &inv;
        }
        rhs[r] = &rhs[r] * &inv;
        for i in 0..rows.len() {
            if i != r && !rows[i][col].is_zero() {
                let factor = rows[i][col].clone();
                for j in 0..k {
                    rows[i][j] = &rows[i][j] - &(&factor * &rows[r][j]);
                }
                rhs[i] = &rhs[i] - &(&factor * &rhs[r]);
            }
        }
        pivots.push(col);
        r += 1;
    }
    if (r..rows.len()).any(|i| !rhs[i].is_zero()) {
        return Ok(None);
    }
    if r < k {
        return Err(r);
    }
    Ok(Some(rhs[..k].to_vec()))
}

pub fn solution_set(sys: &EquationSystem, cfg: &SolveConfig) -> Result<SolutionSet, SolveError> {
    let n = sys.vars.len();
    let finite: Vec<usize> = (0..n).filter(|&i| sys.domains[i].is_finite()).collect();
    let unbounded: Vec<usize> = (0..n).filter(|&i| !sys.domains[i].is_finite()).collect();
    let fdoms: Vec<&Vec<Rational>> = finite
        .iter()
        .map(|&i| match &sys.domains[i] {
            VarDomain::Finite(v) => v,
            _ => unreachable!(),
        })
        .collect();
    check_budget(fdoms.iter().map(|d| d.len()), cfg.max_enum)?;
    let residuals: Vec<MultiPoly> = sys.constraints.iter().map(Constraint::residual).collect();
    let names: Vec<String> = unbounded.iter().map(|&i| sys.vars.names()[i].clone()).collect();
    let mut points = BTreeSet::new();

    for_each_point(&fdoms, |fpoint| {
        let mut full: Vec<Option<Rational>> = vec![None; n];
        for (slot, v) in finite.iter().zip(fpoint) {
            full[*slot] = Some(v.clone());
        }
        if unbounded.is_empty() {
            let pt: Vec<Rational> = full.into_iter().map(|v| v.expect("all finite")).collect();
            for r in &residuals {
                if !r.eval(&pt)?.is_zero() {
                    return Ok(());
                }
            }
            points.insert(pt);
            return Ok(());
        }
        let reduced: Vec<MultiPoly> = residuals.iter().map(|r| r.substitute(&full)).collect::<Result<_, _>>()?;
        if reduced.iter().any(|r| r.constant_value().is_some_and(|c| !c.is_zero())) {
            return Ok(());
        }
        let live: Vec<&MultiPoly> = reduced.iter().filter(|r| !r.is_zero()).collect();
        if unbounded.len() == 1 {
            let u = unbounded[0];
            let mut live = live;
            live.sort_by_key(|r| r.degree_in(u));
            let mut candidates: Option<BTreeSet<Rational>> = None;
            for r in live {
                candidates = Some(match candidates {
                    None => {
                        let coeffs = r.univariate_coefficients(u).expect("only u remains");
                        match univariate_roots(&coeffs, &names[0])? {
                            Roots::All => continue,
                            Roots::Some(s) => s,
                        }
                    }
                    Some(c) => {
                        let mut kept = BTreeSet::new();
                        for v in c {
                            let mut pt = vec![None; n];
                            pt[u] = Some(v.clone());
                            if r.substitute(&pt)?.is_zero() {
                                kept.insert(v);
                            }
                        }
                        kept
                    }
                });
            }
            let Some(cands) = candidates else {
                return Err(SolveError::Underdetermined(names.clone()));
            };
            for v in cands.into_iter().filter(|v| fits(&sys.domains[u], v)) {
                let mut pt = full.clone();
                pt[u] = Some(v);
                points.insert(pt.into_iter().map(|v| v.expect("complete")).collect());
            }
            return Ok(());
        }
        // several unbounded variables: linear elimination
        let k = unbounded.len();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for r in live {
            if r.degree() > 1 {
                return Err(SolveError::NonlinearUnbounded(names.clone()));
            }
            let mut row = vec![Rational::zero(); k];
            for (j, &u) in unbounded.iter().enumerate() {
                let mut e = vec![0; n];
                e[u] = 1;
                row[j] = r.coefficient(&e);
            }
            rows.push(row);
            rhs.push(-r.coefficient(&vec![0; n]));
        }
        match solve_linear(rows, rhs, k) {
            Ok(None) => Ok(()),
            Err(_) => Err(SolveError::Underdetermined(names.clone())),
            Ok(Some(sol)) => {
                if unbounded.iter().zip(&sol).all(|(&u, v)| fits(&sys.domains[u], v)) {
                    let mut pt = full.clone();
                    for (&u, v) in unbounded.iter().zip(sol) {
                        pt[u] = Some(v);
                    }
                    points.insert(pt.into_iter().map(|v| v.expect("complete")).collect());
                }
                Ok(())
            }
        }
    })?;
    Ok(SolutionSet { vars: sys.vars.clone(), points })
}

/// Image of an already computed solution set under `p`.
pub fn values_on(solutions: &SolutionSet, p: &MultiPoly) -> Result<SolutionValueSet, SolveError> {
    let p = p.rebase(solutions.vars())?;
    solutions.points().map(|pt| p.eval(pt).map_err(SolveError::from)).collect()
}

pub fn solution_value_set(
    sys: &EquationSystem,
    p: &MultiPoly,
    cfg: &SolveConfig,
) -> Result<SolutionValueSet, SolveError> {
    let p = p.rebase(&sys.vars)?;
    values_on(&solution_set(sys, cfg)?, &p)
}

pub fn classify(sys: &EquationSystem, p: &MultiPoly, cfg: &SolveConfig) -> Result<Classification, SolveError> {
    Ok(Classification::of(&solution_value_set(sys, p, cfg)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModalOp {
    /// necessarily `k`
    Box(i64),
    /// possibly `k`
    Diamond(i64),
    /// ambiguous
    Bowtie,
    /// unsatisfiable
    Oslash,
    /// determinate
    Boxdot,
}

pub fn modal_holds(op: ModalOp, s: &SolutionValueSet) -> bool {
    match op {
        ModalOp::Box(k) => s.only() == Some(&Rational::integer(k)),
        ModalOp::Diamond(k) => s.contains(&Rational::integer(k)),
        ModalOp::Bowtie => s.len() > 1,
        ModalOp::Oslash => s.is_empty(),
        ModalOp::Boxdot => s.len() == 1,
    }
}

pub fn modal_eval(sys: &EquationSystem, p: &MultiPoly, op: ModalOp, cfg: &SolveConfig) -> Result<bool, SolveError> {
    Ok(modal_holds(op, &solution_value_set(sys, p, cfg)?))
}

fn modular_field(sys: &EquationSystem, what: &'static str) -> Result<FieldSpec, SolveError> {
    match sys.domain {
        CoeffDomain::Modular(f) => Ok(f),
        CoeffDomain::Rational => Err(SolveError::ModularOnly(what)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorksheetRow {
    pub poly: MultiPoly,
    pub values: Vec<Rational>,
    pub set: SolutionValueSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueWorksheet {
    pub vars: VarSet,
    /// Every point of `(F_d)^n`, ascending.
    pub points: Vec<Vec<Rational>>,
    /// `marked[j]` iff `points[j]` is infeasible.
    pub marked: Vec<bool>,
    pub rows: Vec<WorksheetRow>,
}

pub fn value_worksheet(sys: &EquationSystem, cfg: &SolveConfig) -> Result<ValueWorksheet, SolveError> {
    let field = modular_field(sys, "the value worksheet")?;
    let d = field.modulus();
    let n = sys.vars.len();
    let rows_total = checked_ring_size(d, n, cfg.max_enum)?;
    let cols = d.pow(n as u32);
    check_budget([rows_total as usize, cols as usize].into_iter(), cfg.max_enum)?;

    let elements = sys.domain.elements().expect("modular");
    let all: Vec<&Vec<Rational>> = vec![&elements; n];
    let mut points = Vec::new();
    for_each_point(&all, |p| {
        points.push(p.to_vec());
        Ok(())
    })?;
    let feasible = solution_set(sys, cfg)?;
    let marked: Vec<bool> = points.iter().map(|p| !feasible.contains(p)).collect();

    let basis = monomial_basis(d, n);
    let mut rows = Vec::with_capacity(rows_total as usize);
    for i in 0..rows_total {
        let poly = ring_element(field, &sys.vars, &basis, i);
        let values: Vec<Rational> = points.iter().map(|p| poly.eval(p)).collect::<Result<_, _>>()?;
        let set = values.iter().zip(&marked).filter(|(_, m)| !**m).map(|(v, _)| v.clone()).collect();
        rows.push(WorksheetRow { poly, values, set });
    }
    Ok(ValueWorksheet { vars: sys.vars.clone(), points, marked, rows })
}

impl fmt::Display for ValueWorksheet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let polys: Vec<String> = self.rows.iter().map(|r| r.poly.to_string()).collect();
        let pw = polys.iter().map(String::len).max().unwrap_or(1).max(1);
        let iw = self.rows.len().to_string().len();
        let heads: Vec<String> = self.points.iter().map(|p| format_point(p)).collect();
        let cw = heads.iter().map(String::len).max().unwrap_or(2);

        write!(f, "{:>iw$}  {:<pw$} |", "i", "p")?;
        for h in &heads {
            write!(f, " {h:>cw$}")?;
        }
        writeln!(f, " | S")?;
        write!(f, "{:>iw$}  {:<pw$} |", "", "")?;
        for m in &self.marked {
            write!(f, " {:>cw$}", if *m { "x" } else { "" })?;
        }
        writeln!(f, " |")?;
        for (i, (row, p)) in self.rows.iter().zip(&polys).enumerate() {
            write!(f, "{:>iw$}  {p:<pw$} |", i + 1)?;
            for v in &row.values {
                write!(f, " {:>cw$}", v.to_string())?;
            }
            writeln!(f, " | {}", row.set)?;
        }
        Ok(())
    }
}

/// Every reduced polynomial whose solution-value set under `sys` is exactly
/// `query`, in ring-enumeration order.
pub fn inverse_value_set(
    sys: &EquationSystem,
    query: &SolutionValueSet,
    cfg: &SolveConfig,
) -> Result<Vec<MultiPoly>, SolveError> {
    let field = modular_field(sys, "inverse-value sets")?;
    let d = field.modulus();
    let mut want = vec![false; d as usize];
    for v in query.iter() {
        match v.to_i64() {
            Some(k) if (0..d as i64).contains(&k) => want[k as usize] = true,
            _ => return Err(SolveError::QueryOutsideField(v.clone())),
        }
    }
    let n = sys.vars.len();
    let total = checked_ring_size(d, n, cfg.max_enum)?;
    let basis = monomial_basis(d, n);
    let feasible = solution_set(sys, cfg)?;

    // monomial values at each feasible point, as small integers
    let table: Vec<Vec<u64>> = feasible
        .points()
        .map(|p| {
            let p: Vec<u64> = p.iter().map(|v| v.to_i64().expect("field element") as u64).collect();
            basis
                .iter()
                .map(|m| m.exponents().iter().zip(&p).fold(1u64, |acc, (&e, &x)| acc * x.pow(e) % d))
                .collect()
        })
        .collect();

    let mut out = Vec::new();
    let mut digits = vec![0u64; basis.len()];
    let mut seen = vec![false; d as usize];
    for index in 0..total {
        if index > 0 {
            // increment base-d counter, least significant digit last
            for slot in digits.iter_mut().rev() {
                *slot += 1;
                if *slot < d {
                    break;
                }
                *slot = 0;
            }
        }
        seen.iter_mut().for_each(|s| *s = false);
        for row in &table {
            let v = row.iter().zip(&digits).fold(0u64, |acc, (m, c)| (acc + m * c) % d);
            seen[v as usize] = true;
        }
        if seen == want {
            out.push(ring_element(field, &sys.vars, &basis, index));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem {
    pub poly: MultiPoly,
    /// Default back-translation (sums as `^`, products as `&`), over `F_2` only.
    pub formula: Option<Formula>,
}

pub fn theorems(sys: &EquationSystem, cfg: &SolveConfig) -> Result<Vec<Theorem>, SolveError> {
    let polys = inverse_value_set(sys, &SolutionValueSet::singleton(Rational::one()), cfg)?;
    Ok(polys
        .into_iter()
        .map(|poly| {
            let formula = back_translate(&poly).ok();
            Theorem { poly, formula }
        })
        .collect())
}
