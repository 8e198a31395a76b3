//! Recursive-descent parser for the program language.
//!
//! Binding, loosest first: `== !=` (non-associative), `<->`, `->` (right),
//! `| !|`, `^`, `& !&`, `+ -`, `* /`, prefix `- ! ?`, `**` (right).

use std::collections::BTreeSet;
use std::fmt;

use super::lexer::{tokenize, Pos, Tok, Token};
use super::{ParseError, SyntaxError};
use crate::field::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
    /// `?e`: 1 iff the solution-value set of `e` is `{1}`.
    Provable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Eq,
    Ne,
    Iff,
    Implies,
    Or,
    Nor,
    Xor,
    And,
    Nand,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn prec(self) -> u8 {
        match self {
            BinOp::Eq | BinOp::Ne => 1,
            BinOp::Iff => 2,
            BinOp::Implies => 3,
            BinOp::Or | BinOp::Nor => 4,
            BinOp::Xor => 5,
            BinOp::And | BinOp::Nand => 6,
            BinOp::Add | BinOp::Sub => 7,
            BinOp::Mul | BinOp::Div => 8,
            BinOp::Pow => 10,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Iff => "<->",
            BinOp::Implies => "->",
            BinOp::Or => "|",
            BinOp::Nor => "!|",
            BinOp::Xor => "^",
            BinOp::And => "&",
            BinOp::Nand => "!&",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "**",
        }
    }
}

const UNARY_PREC: u8 = 9;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Num(Rational),
    Ident(String),
    /// Quoted state label such as `"{0,1}"`.
    Label(String),
    Set(Vec<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `$e`
    SolutionSet(Box<Expr>),
    /// `|e|`
    Card(Box<Expr>),
}

impl Expr {
    pub fn num(n: i64) -> Expr {
        Expr::Num(Rational::integer(n))
    }

    pub fn ident(name: &str) -> Expr {
        Expr::Ident(name.to_string())
    }

    pub fn unary(op: UnOp, e: Expr) -> Expr {
        Expr::Unary(op, Box::new(e))
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    /// Whether `$`, `?` or a cardinality occurs anywhere inside.
    pub fn has_solution_refs(&self) -> bool {
        match self {
            Expr::SolutionSet(_) | Expr::Unary(UnOp::Provable, _) => true,
            Expr::Card(e) | Expr::Unary(_, e) => e.has_solution_refs(),
            Expr::Binary(_, a, b) => a.has_solution_refs() || b.has_solution_refs(),
            Expr::Set(items) => items.iter().any(Expr::has_solution_refs),
            Expr::Num(_) | Expr::Ident(_) | Expr::Label(_) => false,
        }
    }

    pub fn idents(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_idents(&mut out);
        out
    }

    fn collect_idents(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Ident(n) => {
                out.insert(n.clone());
            }
            Expr::SolutionSet(e) | Expr::Card(e) | Expr::Unary(_, e) => e.collect_idents(out),
            Expr::Binary(_, a, b) => {
                a.collect_idents(out);
                b.collect_idents(out);
            }
            Expr::Set(items) => items.iter().for_each(|e| e.collect_idents(out)),
            Expr::Num(_) | Expr::Label(_) => {}
        }
    }

    /// Value of a closed arithmetic expression over the rationals.
    pub fn const_value(&self) -> Option<Rational> {
        match self {
            Expr::Num(n) => Some(n.clone()),
            Expr::Unary(UnOp::Neg, e) => e.const_value().map(|v| -v),
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.const_value()?, b.const_value()?);
                match op {
                    BinOp::Add => Some(a + b),
                    BinOp::Sub => Some(a - b),
                    BinOp::Mul => Some(a * b),
                    BinOp::Div => b.recip().map(|r| a * r),
                    BinOp::Pow => Some(a.pow(u32::try_from(b.to_i64()?).ok()?)),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.prec(),
            Expr::Unary(..) => UNARY_PREC,
            Expr::Num(n) if n.is_negative() || !n.is_integer() => UNARY_PREC,
            _ => u8::MAX,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, parenthesize: bool) -> fmt::Result {
    if parenthesize {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Ident(n) => write!(f, "{n}"),
            Expr::Label(s) => write!(f, "\"{s}\""),
            Expr::Set(items) => {
                write!(f, "{{")?;
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "}}")
            }
            Expr::Unary(op, e) => {
                let sym = match op {
                    UnOp::Neg => "-",
                    UnOp::Not => "!",
                    UnOp::Provable => "?",
                };
                write!(f, "{sym}")?;
                write_operand(f, e, e.prec() < UNARY_PREC)
            }
            Expr::SolutionSet(e) => {
                write!(f, "$")?;
                write_operand(f, e, !matches!(**e, Expr::Ident(_)))
            }
            Expr::Card(e) => {
                write!(f, "|")?;
                write_operand(f, e, !matches!(**e, Expr::Ident(_) | Expr::SolutionSet(_) | Expr::Set(_)))?;
                write!(f, "|")
            }
            Expr::Binary(op, a, b) => {
                let p = op.prec();
                // right-associative operators group to the right, the rest to the left
                let right_assoc = matches!(op, BinOp::Implies | BinOp::Pow);
                let non_assoc = matches!(op, BinOp::Eq | BinOp::Ne);
                let (pa, pb) = if non_assoc {
                    (a.prec() <= p, b.prec() <= p)
                } else if right_assoc {
                    (a.prec() <= p, b.prec() < p)
                } else {
                    (a.prec() < p, b.prec() <= p)
                };
                let pa = pa || (*op == BinOp::Pow && a.prec() <= UNARY_PREC);
                write_operand(f, a, pa)?;
                write!(f, " {} ", op.symbol())?;
                write_operand(f, b, pb)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarDomainDecl {
    /// Default: all of `F_d` in modular mode, `{0,1}` with `x^2 = x` in Boole mode.
    Logical,
    Real,
    Int,
    Values(Vec<Rational>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamDomainDecl {
    Values(Vec<Rational>),
    Labels(Vec<String>),
    Int,
    Real,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub domain: VarDomainDecl,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDecl {
    pub name: String,
    pub domain: ParamDomainDecl,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    /// `|- e;`, i.e. `e == 1`.
    Axiom { expr: Expr, pos: Pos },
    Constraint { lhs: Expr, rhs: Expr, pos: Pos },
    Update { param: String, expr: Expr, pos: Pos },
    Query { expr: Expr, pos: Pos },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub vars: Vec<VarDecl>,
    pub params: Vec<ParamDecl>,
    pub statements: Vec<Statement>,
}

impl Program {
    pub fn is_var(&self, name: &str) -> bool {
        self.vars.iter().any(|v| v.name == name)
    }

    pub fn is_param(&self, name: &str) -> bool {
        self.params.iter().any(|p| p.name == name)
    }

    pub fn queries(&self) -> impl Iterator<Item = &Expr> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Query { expr, .. } => Some(expr),
            _ => None,
        })
    }

    /// Check that every identifier in `expr` is declared.
    pub fn resolve(&self, expr: &Expr, pos: Pos) -> Result<(), ParseError> {
        for name in expr.idents() {
            if !self.is_var(&name) && !self.is_param(&name) {
                return Err(ParseError::UndeclaredIdentifier { name, line: pos.line, col: pos.col });
            }
        }
        Ok(())
    }
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if t != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError::new(self.pos(), msg))
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), SyntaxError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.err(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(n) => {
                self.bump();
                Ok(n)
            }
            t => self.err(format!("expected identifier, found {}", describe(&t))),
        }
    }

    fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let lhs = self.binary(2)?;
        let op = match self.peek() {
            Tok::EqEq => BinOp::Eq,
            Tok::NotEq => BinOp::Ne,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.binary(2)?;
        if matches!(self.peek(), Tok::EqEq | Tok::NotEq) {
            return self.err("comparisons do not chain; add parentheses");
        }
        Ok(Expr::binary(op, lhs, rhs))
    }

    fn infix(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Iff => BinOp::Iff,
            Tok::Implies => BinOp::Implies,
            Tok::Bar => BinOp::Or,
            Tok::Nor => BinOp::Nor,
            Tok::Caret => BinOp::Xor,
            Tok::Amp => BinOp::And,
            Tok::Nand => BinOp::Nand,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            _ => return None,
        })
    }

    /// Precedence climbing over levels 2..=8.
    fn binary(&mut self, min: u8) -> Result<Expr, SyntaxError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.infix() {
            let p = op.prec();
            if p < min {
                break;
            }
            self.bump();
            let next = if op == BinOp::Implies { p } else { p + 1 };
            let rhs = self.binary(next)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, SyntaxError> {
        let op = match self.peek() {
            Tok::Minus => UnOp::Neg,
            Tok::Bang => UnOp::Not,
            Tok::Question => UnOp::Provable,
            _ => return self.power(),
        };
        self.bump();
        let inner = self.unary()?;
        Ok(match (op, inner) {
            (UnOp::Neg, Expr::Num(n)) if !n.is_zero() => Expr::Num(-n),
            (op, inner) => Expr::unary(op, inner),
        })
    }

    fn power(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.primary()?;
        if self.eat(&Tok::StarStar) {
            let exp = self.unary()?;
            return Ok(Expr::binary(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::Num(Rational::from_big(n, 1.into())))
            }
            Tok::Ident(n) => {
                self.bump();
                Ok(Expr::Ident(n))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Label(s))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Dollar => {
                self.bump();
                let inner = match self.peek() {
                    Tok::LParen => self.primary()?,
                    _ => Expr::Ident(self.ident()?),
                };
                Ok(Expr::SolutionSet(Box::new(inner)))
            }
            Tok::Bar => {
                self.bump();
                let inner = self.unary()?;
                self.expect(Tok::Bar, "closing `|`")?;
                Ok(Expr::Card(Box::new(inner)))
            }
            Tok::LBrace => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat(&Tok::RBrace) {
                    loop {
                        items.push(self.binary(2)?);
                        if self.eat(&Tok::RBrace) {
                            break;
                        }
                        self.expect(Tok::Comma, "`,` or `}`")?;
                    }
                }
                Ok(Expr::Set(items))
            }
            t => self.err(format!("expected expression, found {}", describe(&t))),
        }
    }

    fn names(&mut self) -> Result<Vec<(String, Pos)>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            let pos = self.pos();
            out.push((self.ident()?, pos));
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    /// `{ item, ... }` of numeric constants or quoted labels.
    fn value_list(&mut self) -> Result<Result<Vec<Rational>, Vec<String>>, SyntaxError> {
        let start = self.pos();
        let Expr::Set(items) = self.primary()? else {
            return Err(SyntaxError::new(start, "expected a domain such as `{0,1}`, `int` or `real`"));
        };
        if items.is_empty() {
            return Err(SyntaxError::new(start, "a domain must not be empty"));
        }
        if items.iter().all(|e| matches!(e, Expr::Label(_))) {
            let labels = items
                .into_iter()
                .map(|e| match e {
                    Expr::Label(s) => s,
                    _ => unreachable!(),
                })
                .collect::<Vec<_>>();
            return Ok(Err(labels));
        }
        let mut values = Vec::new();
        for e in items {
            match e.const_value() {
                Some(v) => values.push(v),
                None => return Err(SyntaxError::new(start, format!("domain entry `{e}` is not a constant"))),
            }
        }
        Ok(Ok(values))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(n) => format!("number `{n}`"),
        Tok::Ident(n) => format!("identifier `{n}`"),
        Tok::Str(s) => format!("string \"{s}\""),
        Tok::Eof => "end of input".to_string(),
        other => format!("{other:?}"),
    }
}

fn check_distinct<T: PartialEq + fmt::Display>(items: &[T], pos: Pos) -> Result<(), ParseError> {
    for (i, a) in items.iter().enumerate() {
        if items[..i].contains(a) {
            return Err(ParseError::InvalidDomain {
                message: format!("value {a} listed twice"),
                line: pos.line,
                col: pos.col,
            });
        }
    }
    Ok(())
}

/// Parse a standalone expression (no declarations are checked).
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: tokenize(text)?, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err::<()>(format!("unexpected {}", describe(p.peek()))).unwrap_err().into());
    }
    Ok(e)
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser { toks: tokenize(text)?, at: 0 };
    let mut prog = Program::default();
    let mut declared: BTreeSet<String> = BTreeSet::new();
    let mut updated: BTreeSet<String> = BTreeSet::new();

    let mut declare = |name: &str, pos: Pos| -> Result<(), ParseError> {
        if !declared.insert(name.to_string()) {
            return Err(ParseError::DuplicateDeclaration { name: name.to_string(), line: pos.line, col: pos.col });
        }
        Ok(())
    };

    while *p.peek() != Tok::Eof {
        let pos = p.pos();
        match p.peek() {
            Tok::Var => {
                p.bump();
                let names = p.names()?;
                let domain = if p.eat(&Tok::In) {
                    match p.peek() {
                        Tok::Real => {
                            p.bump();
                            VarDomainDecl::Real
                        }
                        Tok::Int => {
                            p.bump();
                            VarDomainDecl::Int
                        }
                        _ => match p.value_list()? {
                            Ok(values) => {
                                check_distinct(&values, pos)?;
                                VarDomainDecl::Values(values)
                            }
                            Err(_) => {
                                return Err(ParseError::InvalidDomain {
                                    message: "variables take numeric values, not labels".into(),
                                    line: pos.line,
                                    col: pos.col,
                                })
                            }
                        },
                    }
                } else {
                    VarDomainDecl::Logical
                };
                p.expect(Tok::Semi, "`;`")?;
                for (name, npos) in names {
                    declare(&name, npos)?;
                    prog.vars.push(VarDecl { name, domain: domain.clone(), pos: npos });
                }
            }
            Tok::Parameter => {
                p.bump();
                let names = p.names()?;
                p.expect(Tok::In, "`in`")?;
                let domain = match p.peek() {
                    Tok::Real => {
                        p.bump();
                        ParamDomainDecl::Real
                    }
                    Tok::Int => {
                        p.bump();
                        ParamDomainDecl::Int
                    }
                    _ => match p.value_list()? {
                        Ok(values) => {
                            check_distinct(&values, pos)?;
                            ParamDomainDecl::Values(values)
                        }
                        Err(labels) => {
                            check_distinct(&labels, pos)?;
                            ParamDomainDecl::Labels(labels)
                        }
                    },
                };
                p.expect(Tok::Semi, "`;`")?;
                for (name, npos) in names {
                    declare(&name, npos)?;
                    prog.params.push(ParamDecl { name, domain: domain.clone(), pos: npos });
                }
            }
            Tok::Turnstile => {
                p.bump();
                let expr = p.expr()?;
                p.expect(Tok::Semi, "`;`")?;
                prog.resolve(&expr, pos)?;
                prog.statements.push(Statement::Axiom { expr, pos });
            }
            Tok::Query => {
                p.bump();
                let expr = p.expr()?;
                p.expect(Tok::Semi, "`;`")?;
                prog.resolve(&expr, pos)?;
                prog.statements.push(Statement::Query { expr, pos });
            }
            Tok::Ident(name) if p.toks[p.at + 1].tok == Tok::Assign => {
                let name = name.clone();
                p.bump();
                p.bump();
                let expr = p.expr()?;
                p.expect(Tok::Semi, "`;`")?;
                push_update(&mut prog, &mut updated, name, expr, pos)?;
            }
            _ => {
                let e = p.expr()?;
                p.expect(Tok::Semi, "`;`")?;
                let Expr::Binary(BinOp::Eq, lhs, rhs) = e else {
                    return Err(SyntaxError::new(pos, "expected a statement: declaration, `|-`, `==`, `:=` or `query`").into());
                };
                match *lhs {
                    Expr::Ident(ref name) if prog.is_param(name) && rhs.has_solution_refs() => {
                        push_update(&mut prog, &mut updated, name.clone(), *rhs, pos)?;
                    }
                    lhs => {
                        prog.resolve(&lhs, pos)?;
                        prog.resolve(&rhs, pos)?;
                        prog.statements.push(Statement::Constraint { lhs, rhs: *rhs, pos });
                    }
                }
            }
        }
    }
    Ok(prog)
}

fn push_update(
    prog: &mut Program,
    updated: &mut BTreeSet<String>,
    param: String,
    expr: Expr,
    pos: Pos,
) -> Result<(), ParseError> {
    if !prog.is_param(&param) {
        if prog.is_var(&param) {
            return Err(ParseError::NotAParameter { name: param, line: pos.line, col: pos.col });
        }
        return Err(ParseError::UndeclaredIdentifier { name: param, line: pos.line, col: pos.col });
    }
    if !updated.insert(param.clone()) {
        return Err(ParseError::DuplicateUpdate { name: param, line: pos.line, col: pos.col });
    }
    prog.resolve(&expr, pos)?;
    prog.statements.push(Statement::Update { param, expr, pos });
    Ok(())
}
