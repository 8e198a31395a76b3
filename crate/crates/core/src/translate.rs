//! Formulas to polynomials, axioms to equation systems, and exact
//! interpolation of finite-integer functions.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{CoeffDomain, FieldError, FieldSpec, Rational};
use crate::logic::{Connective, FiniteIntegerFunction, Formula, Judgment};
use crate::poly::{descending_tuples, monomial_basis, Monomial, MultiPoly, PolyError, VarSet};
use crate::solve::{EquationSystem, SolveError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("interpolation matrix is singular")]
    SingularMatrix,
    #[error("conjunction into one equation needs F_2, not {0}")]
    ConjoinUnsupported(TranslationMode),
    #[error("constant {0} is not a truth value in {1}")]
    BadConstant(u64, TranslationMode),
    #[error("table of order {table} cannot be interpolated in {mode}")]
    OrderMismatch { table: u64, mode: TranslationMode },
    #[error("back-translation needs a polynomial over F_2")]
    NotBinary,
    #[error("grid and value counts differ ({points} points, {values} values)")]
    GridMismatch { points: usize, values: usize },
}

impl From<FieldError> for TranslateError {
    fn from(e: FieldError) -> Self {
        TranslateError::Poly(PolyError::Field(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranslationMode {
    /// Rational coefficients with `x^2 = x` side constraints.
    Boole,
    Modular(FieldSpec),
}

impl TranslationMode {
    pub fn domain(self) -> CoeffDomain {
        match self {
            TranslationMode::Boole => CoeffDomain::Rational,
            TranslationMode::Modular(f) => CoeffDomain::Modular(f),
        }
    }
}

impl fmt::Display for TranslationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TranslationMode::Boole => write!(f, "boole"),
            TranslationMode::Modular(spec) => write!(f, "modular F_{}", spec.modulus()),
        }
    }
}

/// `1 - p`
pub fn negation(p: &MultiPoly) -> MultiPoly {
    p.neg().add_constant(&Rational::one()).expect("same ring")
}

/// Polynomial of `p op q`. Boole's forms, reduced mod `d` in modular mode
/// (over `F_2` they become `p + q` for xor, `1 + p + pq` for implication, ...).
pub fn connective(op: Connective, p: &MultiPoly, q: &MultiPoly) -> Result<MultiPoly, PolyError> {
    let pq = p.mul(q)?;
    let two = Rational::integer(2);
    Ok(match op {
        Connective::And => pq,
        Connective::Or => p.add(q)?.sub(&pq)?,
        Connective::Xor => p.add(q)?.sub(&pq.scale(&two)?)?,
        Connective::Implies => negation(p).add(&pq)?,
        Connective::Iff => negation(p).sub(q)?.add(&pq.scale(&two)?)?,
        Connective::Nand => negation(&pq),
        Connective::Nor => negation(p).sub(q)?.add(&pq)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Translation {
    pub poly: MultiPoly,
    /// `x^2 - x` per atom in Boole mode, empty otherwise.
    pub side: Vec<MultiPoly>,
}

pub fn translate_formula(f: &Formula, vars: &VarSet, mode: TranslationMode) -> Result<Translation, TranslateError> {
    let poly = translate_inner(f, vars, mode)?;
    let side = match mode {
        TranslationMode::Modular(_) => Vec::new(),
        TranslationMode::Boole => f
            .atoms()
            .iter()
            .map(|a| {
                let x = MultiPoly::var(mode.domain(), vars, a)?;
                x.mul(&x)?.sub(&x)
            })
            .collect::<Result<_, _>>()?,
    };
    Ok(Translation { poly, side })
}

fn translate_inner(f: &Formula, vars: &VarSet, mode: TranslationMode) -> Result<MultiPoly, TranslateError> {
    let domain = mode.domain();
    Ok(match f {
        Formula::Atom(n) => MultiPoly::var(domain, vars, n)?,
        Formula::Const(k) => {
            let ok = match mode {
                TranslationMode::Boole => *k <= 1,
                TranslationMode::Modular(spec) => *k < spec.modulus(),
            };
            if !ok {
                return Err(TranslateError::BadConstant(*k, mode));
            }
            MultiPoly::constant(domain, vars, &Rational::integer(*k as i64))?
        }
        Formula::Not(g) => negation(&translate_inner(g, vars, mode)?),
        Formula::Bin(op, a, b) => connective(*op, &translate_inner(a, vars, mode)?, &translate_inner(b, vars, mode)?)?,
    })
}

/// Exact solve of a square system over `domain` by Gauss-Jordan elimination.
fn solve_square(
    domain: CoeffDomain,
    mut m: Vec<Vec<Rational>>,
    mut rhs: Vec<Vec<Rational>>,
) -> Result<Vec<Vec<Rational>>, TranslateError> {
    let n = m.len();
    for col in 0..n {
        let p = (col..n).find(|&i| !m[i][col].is_zero()).ok_or(TranslateError::SingularMatrix)?;
        m.swap(col, p);
        rhs.swap(col, p);
        let inv = domain.inv(&m[col][col])?;
        for j in 0..n {
            m[col][j] = domain.mul(&m[col][j], &inv);
        }
        for v in rhs[col].iter_mut() {
            *v = domain.mul(v, &inv);
        }
        for i in 0..n {
            if i == col || m[i][col].is_zero() {
                continue;
            }
            let factor = m[i][col].clone();
            for j in 0..n {
                let t = domain.mul(&factor, &m[col][j]);
                m[i][j] = domain.sub(&m[i][j], &t);
            }
            for k in 0..rhs[i].len() {
                let t = domain.mul(&factor, &rhs[col][k]);
                rhs[i][k] = domain.sub(&rhs[i][k], &t);
            }
        }
    }
    Ok(rhs)
}

fn monomial_value(domain: CoeffDomain, m: &Monomial, point: &[Rational]) -> Rational {
    // 0^0 = 1
    let mut acc = Rational::one();
    for (&e, x) in m.exponents().iter().zip(point) {
        for _ in 0..e {
            acc = domain.mul(&acc, x);
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpolation {
    pub poly: MultiPoly,
    /// Coefficients along the descending monomial vector, e.g. `(xy, x, y, 1)`.
    pub coefficients: Vec<Rational>,
}

/// The matrix `M[i][j] = t_j(a_i)` over the descending index vectors.
fn lemma_matrix(domain: CoeffDomain, d: u64, n: usize) -> (Vec<Monomial>, Vec<Vec<Rational>>) {
    let basis = monomial_basis(d, n);
    let points: Vec<Vec<Rational>> = descending_tuples(d, n)
        .into_iter()
        .map(|t| t.into_iter().map(|v| Rational::integer(v as i64)).collect())
        .collect();
    let m = points.iter().map(|a| basis.iter().map(|t| monomial_value(domain, t, a)).collect()).collect();
    (basis, m)
}

pub fn interpolate(
    table: &FiniteIntegerFunction,
    vars: &VarSet,
    mode: TranslationMode,
) -> Result<Interpolation, TranslateError> {
    if vars.len() != table.arity() {
        return Err(PolyError::ArityMismatch { expected: table.arity(), got: vars.len() }.into());
    }
    let d = table.order();
    if let TranslationMode::Modular(spec) = mode {
        if spec.modulus() != d {
            return Err(TranslateError::OrderMismatch { table: d, mode });
        }
    }
    let domain = mode.domain();
    let (basis, m) = lemma_matrix(domain, d, table.arity());
    let z: Vec<Vec<Rational>> = table.values().iter().map(|&v| vec![Rational::integer(v as i64)]).collect();
    let c: Vec<Rational> = solve_square(domain, m, z)?.into_iter().map(|mut r| r.remove(0)).collect();
    let poly = MultiPoly::from_terms(domain, vars, basis.iter().map(|t| t.exponents().to_vec()).zip(c.iter().cloned()))?;
    Ok(Interpolation { poly, coefficients: c })
}

/// Interpolate over a product grid `U_1 x ... x U_l`: `values` lists the
/// target at each grid point, with the last coordinate varying fastest.
pub fn interpolate_grid(
    domain: CoeffDomain,
    vars: &VarSet,
    grids: &[Vec<Rational>],
    values: &[Rational],
) -> Result<MultiPoly, TranslateError> {
    if grids.len() != vars.len() {
        return Err(PolyError::ArityMismatch { expected: vars.len(), got: grids.len() }.into());
    }
    let mut points: Vec<Vec<Rational>> = vec![Vec::new()];
    let mut exps: Vec<Vec<u32>> = vec![Vec::new()];
    for g in grids {
        points = points
            .iter()
            .flat_map(|p| g.iter().map(move |v| [p.clone(), vec![v.clone()]].concat()))
            .collect();
        exps = exps.iter().flat_map(|e| (0..g.len() as u32).map(move |k| [e.clone(), vec![k]].concat())).collect();
    }
    if points.len() != values.len() {
        return Err(TranslateError::GridMismatch { points: points.len(), values: values.len() });
    }
    let points: Vec<Vec<Rational>> = points
        .iter()
        .map(|p| p.iter().map(|v| domain.normalize(v)).collect::<Result<_, _>>())
        .collect::<Result<_, _>>()?;
    let basis: Vec<Monomial> = exps.into_iter().map(Monomial::new).collect();
    let m = points.iter().map(|a| basis.iter().map(|t| monomial_value(domain, t, a)).collect()).collect();
    let z = values.iter().map(|v| domain.normalize(v).map(|v| vec![v])).collect::<Result<_, _>>()?;
    let c = solve_square(domain, m, z)?;
    Ok(MultiPoly::from_terms(
        domain,
        vars,
        basis.iter().map(|t| t.exponents().to_vec()).zip(c.into_iter().map(|mut r| r.remove(0))),
    )?)
}

/// The interpolating polynomial with every table entry left symbolic:
/// `z_k` is the value at the `k`-th point in ascending order.
pub fn interpolate_indeterminate(
    d: u64,
    vars: &VarSet,
    mode: TranslationMode,
    max_enum: u64,
) -> Result<MultiPoly, TranslateError> {
    let n = vars.len();
    let size = d.checked_pow(n as u32).filter(|s| s.checked_mul(*s).is_some_and(|sq| sq <= max_enum));
    let Some(size) = size else {
        return Err(SolveError::BudgetExceeded { required: format!("({d}^{n})^2"), budget: max_enum }.into());
    };
    let size = size as usize;
    let domain = mode.domain();
    let z_names: Vec<String> = (1..=size).map(|k| format!("z{k}")).collect();
    let ext = VarSet::new(vars.names().iter().cloned().chain(z_names.iter().cloned()))?;
    let (basis, m) = lemma_matrix(domain, d, n);
    let identity: Vec<Vec<Rational>> = (0..size)
        .map(|i| (0..size).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    let inv = solve_square(domain, m, identity)?;

    let mut out = MultiPoly::zero(domain, &ext);
    for (j, t) in basis.iter().enumerate() {
        let tpoly = MultiPoly::from_terms(domain, vars, [(t.exponents().to_vec(), Rational::one())])?.rebase(&ext)?;
        let mut coeff = MultiPoly::zero(domain, &ext);
        for (i, c) in inv[j].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            // row i is the i-th descending point, i.e. ascending position size-1-i
            let z = MultiPoly::var(domain, &ext, &z_names[size - 1 - i])?;
            coeff = coeff.add(&z.scale(c)?)?;
        }
        out = out.add(&tpoly.mul(&coeff)?)?;
    }
    Ok(out)
}

/// Each judgment becomes `q_i = 1`; Boole mode adds `x^2 = x` per atom.
/// With `conjoin` (F_2 only) the equations collapse into `q* = 0`.
pub fn axioms_to_system(
    axioms: &[Judgment],
    vars: &VarSet,
    mode: TranslationMode,
    conjoin: bool,
) -> Result<EquationSystem, TranslateError> {
    let mut sys = EquationSystem::new(mode.domain(), vars);
    let mut squared = std::collections::BTreeSet::new();
    for j in axioms {
        let t = translate_formula(&j.content, vars, mode)?;
        sys.push(&t.poly, &Rational::one())?;
        for (atom, side) in j.content.atoms().into_iter().zip(t.side) {
            if squared.insert(atom) {
                sys.push(&side, &Rational::zero())?;
            }
        }
    }
    if conjoin {
        return conjoin_system(&sys);
    }
    Ok(sys)
}

/// `q* = prod(r_i + 1) - 1 = 0` where each constraint reads `r_i = 0`.
pub fn conjunction_polynomial(sys: &EquationSystem) -> Result<MultiPoly, TranslateError> {
    let mode = match sys.domain() {
        CoeffDomain::Modular(f) if f.modulus() == 2 => TranslationMode::Modular(f),
        CoeffDomain::Modular(f) => return Err(TranslateError::ConjoinUnsupported(TranslationMode::Modular(f))),
        CoeffDomain::Rational => return Err(TranslateError::ConjoinUnsupported(TranslationMode::Boole)),
    };
    let domain = mode.domain();
    let mut prod = MultiPoly::one(domain, sys.vars());
    for c in sys.constraints() {
        prod = prod.mul(&c.residual().add_constant(&Rational::one())?)?;
    }
    Ok(prod.add_constant(&-Rational::one())?)
}

pub fn conjoin_system(sys: &EquationSystem) -> Result<EquationSystem, TranslateError> {
    let q = conjunction_polynomial(sys)?;
    let mut out = EquationSystem::new(sys.domain(), sys.vars());
    for (name, dom) in sys.vars().names().iter().zip(sys.var_domains()) {
        out.set_domain(name, dom.clone())?;
    }
    out.push(&q, &Rational::zero())?;
    Ok(out)
}

/// Products become `&`, sums become `^`.
pub fn back_translate(p: &MultiPoly) -> Result<Formula, TranslateError> {
    match p.domain() {
        CoeffDomain::Modular(f) if f.modulus() == 2 => {}
        _ => return Err(TranslateError::NotBinary),
    }
    let names = p.vars().names();
    let mut sum: Option<Formula> = None;
    for (m, _) in p.terms() {
        let mut prod: Option<Formula> = None;
        for (name, &e) in names.iter().zip(m.exponents()) {
            if e > 0 {
                let a = Formula::atom(name);
                prod = Some(match prod {
                    None => a,
                    Some(acc) => Formula::bin(Connective::And, acc, a),
                });
            }
        }
        let term = prod.unwrap_or(Formula::Const(1));
        sum = Some(match sum {
            None => term,
            Some(acc) => Formula::bin(Connective::Xor, acc, term),
        });
    }
    Ok(sum.unwrap_or(Formula::Const(0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, truth_table};

    fn f2() -> TranslationMode {
        TranslationMode::Modular(FieldSpec::new(2).unwrap())
    }

    fn pq() -> VarSet {
        VarSet::new(["p", "q"]).unwrap()
    }

    fn tr(src: &str, mode: TranslationMode) -> String {
        translate_formula(&parse_formula(src).unwrap(), &pq(), mode).unwrap().poly.to_string()
    }

    #[test]
    fn implication_both_modes() {
        let t = translate_formula(&parse_formula("p -> q").unwrap(), &pq(), TranslationMode::Boole).unwrap();
        assert_eq!(t.poly.to_string(), "p*q - p + 1");
        let side: Vec<String> = t.side.iter().map(ToString::to_string).collect();
        assert_eq!(side, ["p^2 - p", "q^2 - q"]);
        let t = translate_formula(&parse_formula("p -> q").unwrap(), &pq(), f2()).unwrap();
        assert_eq!(t.poly.to_string(), "p*q + p + 1");
        assert!(t.side.is_empty());
    }

    #[test]
    fn nested_boole_translation() {
        let v = VarSet::new(["w", "y", "z"]).unwrap();
        let f = parse_formula("y & (z ^ w)").unwrap();
        let t = translate_formula(&f, &v, TranslationMode::Boole).unwrap();
        assert_eq!(t.poly.to_string(), "-2*w*y*z + w*y + y*z");
    }

    #[test]
    fn connective_rows() {
        assert_eq!(tr("!p", TranslationMode::Boole), "-p + 1");
        assert_eq!(tr("!p", f2()), "p + 1");
        assert_eq!(tr("p !| q", TranslationMode::Boole), "p*q - p - q + 1");
        assert_eq!(tr("p !| q", f2()), "p*q + p + q + 1");
        assert_eq!(tr("1", f2()), "1");
        assert_eq!(tr("0", TranslationMode::Boole), "0");
        assert!(translate_formula(&Formula::Const(2), &pq(), f2()).is_err());
    }

    #[test]
    fn xor_interpolation() {
        let xor = FiniteIntegerFunction::new(2, 2, vec![0, 1, 1, 0]).unwrap();
        let v = VarSet::new(["x", "y"]).unwrap();
        let q = interpolate(&xor, &v, TranslationMode::Boole).unwrap();
        assert_eq!(q.coefficients, [-2, 1, 1, 0].map(Rational::integer));
        assert_eq!(q.poly.to_string(), "-2*x*y + x + y");
        let m = interpolate(&xor, &v, f2()).unwrap();
        assert_eq!(m.coefficients, [0, 1, 1, 0].map(Rational::integer));
        assert_eq!(m.poly.to_string(), "x + y");
    }

    #[test]
    fn quadratic_map_interpolation() {
        // F(0)=2, F(1)=2, F(2)=0 listed at descending points 2, 1, 0
        let t = FiniteIntegerFunction::new(3, 1, vec![0, 2, 2]).unwrap();
        let c = VarSet::new(["c"]).unwrap();
        assert_eq!(interpolate(&t, &c, TranslationMode::Boole).unwrap().poly.to_string(), "-c^2 + c + 2");
        let grid = interpolate_grid(
            CoeffDomain::Rational,
            &c,
            &[vec![Rational::zero(), Rational::one(), Rational::integer(2)]],
            &[2, 2, 0].map(Rational::integer),
        )
        .unwrap();
        assert_eq!(grid.to_string(), "-c^2 + c + 2");
        let f3 = TranslationMode::Modular(FieldSpec::new(3).unwrap());
        assert!(matches!(interpolate(&t, &c, f2()), Err(TranslateError::OrderMismatch { .. })));
        assert_eq!(interpolate(&t, &c, f3).unwrap().poly.to_string(), "2*c^2 + c + 2");
    }

    #[test]
    fn indeterminate_polynomials() {
        let v = VarSet::new(["x", "y"]).unwrap();
        let p1 = interpolate_indeterminate(2, &v, TranslationMode::Boole, 1_000_000).unwrap();
        assert_eq!(
            p1.to_string(),
            "x*y*z1 - x*y*z2 - x*y*z3 + x*y*z4 - x*z1 + x*z3 - y*z1 + y*z2 + z1"
        );
        let p2 = interpolate_indeterminate(2, &v, f2(), 1_000_000).unwrap();
        assert_eq!(
            p2.to_string(),
            "x*y*z1 + x*y*z2 + x*y*z3 + x*y*z4 + x*z1 + x*z3 + y*z1 + y*z2 + z1"
        );
        // z lists the table at (0,0), (0,1), (1,0), (1,1)
        let xor = [0, 1, 1, 0].map(Rational::integer);
        let subst: Vec<Option<Rational>> = [None, None].into_iter().chain(xor.iter().cloned().map(Some)).collect();
        let back = |p: &MultiPoly| p.substitute(&subst).unwrap().rebase(&v).unwrap().to_string();
        assert_eq!(back(&p1), "-2*x*y + x + y");
        assert_eq!(back(&p2), "x + y");
        assert!(interpolate_indeterminate(3, &v, f2(), 10).is_err());
    }

    #[test]
    fn modus_ponens_conjunction() {
        let v = VarSet::new(["x", "y"]).unwrap();
        let axioms = [Judgment::new(parse_formula("x").unwrap()), Judgment::new(parse_formula("x -> y").unwrap())];
        let sys = axioms_to_system(&axioms, &v, f2(), true).unwrap();
        assert_eq!(sys.constraints().len(), 1);
        assert_eq!(sys.constraints()[0].to_string(), "x*y + 1 = 0");
        let empty = axioms_to_system(&[], &v, f2(), true).unwrap();
        assert_eq!(empty.constraints()[0].to_string(), "0 = 0");
        assert!(matches!(
            axioms_to_system(&axioms, &v, TranslationMode::Boole, true),
            Err(TranslateError::ConjoinUnsupported(_))
        ));
        let boole = axioms_to_system(&axioms, &v, TranslationMode::Boole, false).unwrap();
        assert_eq!(boole.constraints().len(), 4);
    }

    #[test]
    fn back_translation() {
        let v = VarSet::new(["x", "y"]).unwrap();
        let f = parse_formula("x ^ y ^ x & y").unwrap();
        let p = translate_formula(&f, &v, f2()).unwrap().poly;
        assert_eq!(p.to_string(), "x*y + x + y");
        let back = back_translate(&p).unwrap();
        assert_eq!(back.to_string(), "x & y ^ x ^ y");
        assert_eq!(truth_table(&back, &v, 2).unwrap(), truth_table(&f, &v, 2).unwrap());
        assert_eq!(back_translate(&MultiPoly::zero(f2().domain(), &v)).unwrap(), Formula::Const(0));
    }
}
