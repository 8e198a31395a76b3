//! Propositional formulas, truth tables, and the program language.

pub mod lexer;
pub mod parser;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::poly::{descending_tuples, VarSet};
pub use lexer::Pos;
pub use parser::{
    parse_expr, parse_program, BinOp, Expr, ParamDecl, ParamDomainDecl, Program, Statement, UnOp, VarDecl,
    VarDomainDecl,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: syntax error: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError { line: pos.line, col: pos.col, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{line}:{col}: undeclared identifier `{name}`")]
    UndeclaredIdentifier { name: String, line: usize, col: usize },
    #[error("{line}:{col}: `{name}` is declared twice")]
    DuplicateDeclaration { name: String, line: usize, col: usize },
    #[error("{line}:{col}: parameter `{name}` has more than one update rule")]
    DuplicateUpdate { name: String, line: usize, col: usize },
    #[error("{line}:{col}: `{name}` is a variable; only parameters can be updated")]
    NotAParameter { name: String, line: usize, col: usize },
    #[error("{line}:{col}: invalid domain: {message}")]
    InvalidDomain { message: String, line: usize, col: usize },
}

impl ParseError {
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            ParseError::Syntax(e) => Some((e.line, e.col)),
            ParseError::UndeclaredIdentifier { line, col, .. }
            | ParseError::DuplicateDeclaration { line, col, .. }
            | ParseError::DuplicateUpdate { line, col, .. }
            | ParseError::NotAParameter { line, col, .. }
            | ParseError::InvalidDomain { line, col, .. } => Some((*line, *col)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("standard connectives are two-valued; d = {0} needs an explicit table")]
    UnsupportedArity(u64),
    #[error("atom `{0}` is not among the declared variables")]
    UnknownAtom(String),
    #[error("constant {0} is not a truth value")]
    BadConstant(u64),
    #[error("table of order {order} and arity {arity} needs {expected} entries in [0, {order}), got {got:?}")]
    BadTable { order: u64, arity: usize, expected: usize, got: Vec<u64> },
    #[error("`{0}` is not a propositional formula")]
    NotAFormula(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Connective {
    And,
    Or,
    Xor,
    Implies,
    Iff,
    Nand,
    Nor,
}

impl Connective {
    pub const ALL: [Connective; 7] = [
        Connective::And,
        Connective::Or,
        Connective::Xor,
        Connective::Implies,
        Connective::Iff,
        Connective::Nand,
        Connective::Nor,
    ];

    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            Connective::And => a && b,
            Connective::Or => a || b,
            Connective::Xor => a != b,
            Connective::Implies => !a || b,
            Connective::Iff => a == b,
            Connective::Nand => !(a && b),
            Connective::Nor => !(a || b),
        }
    }

    fn to_binop(self) -> BinOp {
        match self {
            Connective::And => BinOp::And,
            Connective::Or => BinOp::Or,
            Connective::Xor => BinOp::Xor,
            Connective::Implies => BinOp::Implies,
            Connective::Iff => BinOp::Iff,
            Connective::Nand => BinOp::Nand,
            Connective::Nor => BinOp::Nor,
        }
    }

    pub fn from_binop(op: BinOp) -> Option<Connective> {
        Some(match op {
            BinOp::And => Connective::And,
            BinOp::Or => Connective::Or,
            BinOp::Xor => Connective::Xor,
            BinOp::Implies => Connective::Implies,
            BinOp::Iff => Connective::Iff,
            BinOp::Nand => Connective::Nand,
            BinOp::Nor => Connective::Nor,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Const(u64),
    Not(Box<Formula>),
    Bin(Connective, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(name.to_string())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn bin(op: Connective, a: Formula, b: Formula) -> Formula {
        Formula::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(n) => {
                out.insert(n.clone());
            }
            Formula::Const(_) => {}
            Formula::Not(f) => f.collect_atoms(out),
            Formula::Bin(_, a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Const(_) => 0,
            Formula::Not(f) => 1 + f.depth(),
            Formula::Bin(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Two-valued evaluation; `value` supplies each atom.
    pub fn eval(&self, value: &dyn Fn(&str) -> Option<bool>) -> Result<bool, LogicError> {
        Ok(match self {
            Formula::Atom(n) => value(n).ok_or_else(|| LogicError::UnknownAtom(n.clone()))?,
            Formula::Const(0) => false,
            Formula::Const(1) => true,
            Formula::Const(k) => return Err(LogicError::BadConstant(*k)),
            Formula::Not(f) => !f.eval(value)?,
            Formula::Bin(op, a, b) => op.apply(a.eval(value)?, b.eval(value)?),
        })
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Formula::Atom(n) => Expr::Ident(n.clone()),
            Formula::Const(k) => Expr::num(*k as i64),
            Formula::Not(f) => Expr::unary(UnOp::Not, f.to_expr()),
            Formula::Bin(op, a, b) => Expr::binary(op.to_binop(), a.to_expr(), b.to_expr()),
        }
    }

    pub fn from_expr(e: &Expr) -> Result<Formula, LogicError> {
        Ok(match e {
            Expr::Ident(n) => Formula::Atom(n.clone()),
            Expr::Num(n) => match n.to_i64() {
                Some(k) if k >= 0 => Formula::Const(k as u64),
                _ => return Err(LogicError::NotAFormula(e.to_string())),
            },
            Expr::Unary(UnOp::Not, f) => Formula::not(Formula::from_expr(f)?),
            Expr::Binary(op, a, b) => match Connective::from_binop(*op) {
                Some(c) => Formula::bin(c, Formula::from_expr(a)?, Formula::from_expr(b)?),
                None => return Err(LogicError::NotAFormula(e.to_string())),
            },
            _ => return Err(LogicError::NotAFormula(e.to_string())),
        })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, LogicError> {
    Formula::from_expr(&parse_expr(text)?)
}

/// An asserted axiom `|- content`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Judgment {
    pub content: Formula,
}

impl Judgment {
    pub fn new(content: Formula) -> Self {
        Judgment { content }
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|- {}", self.content)
    }
}

/// A map `(F_d)^n -> F_d`, listed in descending index-vector order:
/// for `d = 2, n = 2` the entries are at `(1,1), (1,0), (0,1), (0,0)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteIntegerFunction {
    order: u64,
    arity: usize,
    values: Vec<u64>,
}

impl FiniteIntegerFunction {
    pub fn new(order: u64, arity: usize, values: Vec<u64>) -> Result<Self, LogicError> {
        let expected = (order as usize).pow(arity as u32);
        if order < 2 || values.len() != expected || values.iter().any(|&v| v >= order) {
            return Err(LogicError::BadTable { order, arity, expected, got: values });
        }
        Ok(FiniteIntegerFunction { order, arity, values })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Index vectors matching [`values`](Self::values) position by position.
    pub fn points(&self) -> Vec<Vec<u64>> {
        descending_tuples(self.order, self.arity)
    }
}

pub fn truth_table(f: &Formula, vars: &VarSet, d: u64) -> Result<FiniteIntegerFunction, LogicError> {
    if d != 2 {
        return Err(LogicError::UnsupportedArity(d));
    }
    let mut values = Vec::new();
    for point in descending_tuples(2, vars.len()) {
        let lookup = |name: &str| vars.index_of(name).map(|i| point[i] == 1);
        values.push(f.eval(&lookup)? as u64);
    }
    FiniteIntegerFunction::new(2, vars.len(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn xy() -> VarSet {
        VarSet::new(["x", "y"]).unwrap()
    }

    #[test]
    fn implication_and_xor_tables() {
        let imp = parse_formula("x -> y").unwrap();
        assert_eq!(truth_table(&imp, &xy(), 2).unwrap().values(), [1, 0, 1, 1]);
        let xor = parse_formula("x ^ y").unwrap();
        assert_eq!(truth_table(&xor, &xy(), 2).unwrap().values(), [0, 1, 1, 0]);
        let t = Formula::Const(1);
        assert_eq!(truth_table(&t, &xy(), 2).unwrap().values(), [1, 1, 1, 1]);
    }

    #[test]
    fn table_errors() {
        let f = parse_formula("x & y").unwrap();
        assert_eq!(truth_table(&f, &xy(), 3), Err(LogicError::UnsupportedArity(3)));
        let g = parse_formula("x & z").unwrap();
        assert_eq!(truth_table(&g, &xy(), 2), Err(LogicError::UnknownAtom("z".into())));
        assert!(FiniteIntegerFunction::new(2, 2, vec![0, 1, 2, 0]).is_err());
        assert!(FiniteIntegerFunction::new(3, 1, vec![2, 2]).is_err());
    }

    #[test]
    fn non_formulas_rejected() {
        assert!(matches!(parse_formula("x + y"), Err(LogicError::NotAFormula(_))));
        assert!(matches!(parse_formula("$x"), Err(LogicError::NotAFormula(_))));
        assert_eq!(
            parse_formula("c -> (a -> !b)").unwrap(),
            Formula::bin(
                Connective::Implies,
                Formula::atom("c"),
                Formula::bin(Connective::Implies, Formula::atom("a"), Formula::not(Formula::atom("b")))
            )
        );
    }

    pub(crate) fn arb_formula(atoms: &'static [&'static str], depth: u32) -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            4 => prop::sample::select(atoms).prop_map(Formula::atom),
            1 => (0u64..2).prop_map(Formula::Const),
        ];
        leaf.prop_recursive(depth, 64, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (prop::sample::select(Connective::ALL.to_vec()), inner.clone(), inner)
                    .prop_map(|(op, a, b)| Formula::bin(op, a, b)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn print_parse_round_trip(f in arb_formula(&["a", "b", "c", "p"], 6)) {
            let printed = f.to_string();
            prop_assert_eq!(parse_formula(&printed).unwrap(), f, "{}", printed);
        }

        #[test]
        fn negation_complements(f in arb_formula(&["x", "y"], 4)) {
            let t = truth_table(&f, &xy(), 2).unwrap();
            let n = truth_table(&Formula::not(f), &xy(), 2).unwrap();
            for (a, b) in t.values().iter().zip(n.values()) {
                prop_assert_eq!(*b, 1 - *a);
            }
        }

        #[test]
        fn nand_complements_and(f in arb_formula(&["x", "y"], 3), g in arb_formula(&["x", "y"], 3)) {
            let and = truth_table(&Formula::bin(Connective::And, f.clone(), g.clone()), &xy(), 2).unwrap();
            let nand = truth_table(&Formula::bin(Connective::Nand, f, g), &xy(), 2).unwrap();
            for (a, b) in and.values().iter().zip(nand.values()) {
                prop_assert_eq!(*b, 1 - *a);
            }
        }
    }
}
