mod common;

use common::cfg;
use lql_core::dynamics::{DynamicsError, ParametricSystem, State};
use lql_core::logic::{parse_expr, ParseError};
use lql_core::solve::{classify, modal_eval, solution_set, Classification, ModalOp};
use lql_core::translate::TranslationMode;

fn f2() -> TranslationMode {
    TranslationMode::Modular(common::f(2))
}

#[test]
fn undeclared_identifier_reports_position() {
    let err = ParametricSystem::parse("var x;\n|- x & y;", f2()).unwrap_err();
    match err {
        DynamicsError::Parse(e @ ParseError::UndeclaredIdentifier { .. }) => assert_eq!(e.position().map(|p| p.0), Some(2)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn boole_mode_drops_the_wraparound_solution() {
    let src = "var x, y;\nx*y + x == 0;\nx*y + y == 0;";
    let modular = ParametricSystem::parse(src, f2()).unwrap().equation_system(&cfg()).unwrap();
    let boole = ParametricSystem::parse(src, TranslationMode::Boole).unwrap().equation_system(&cfg()).unwrap();
    assert_eq!(solution_set(&modular, &cfg()).unwrap().to_string(), "{(0,0),(1,1)}");
    assert_eq!(solution_set(&boole, &cfg()).unwrap().to_string(), "{(0,0)}");
}

#[test]
fn self_contradiction_is_unsatisfiable() {
    let sys = ParametricSystem::parse("var z;\nz == 1 - z;", TranslationMode::Boole).unwrap();
    let eqs = sys.equation_system(&cfg()).unwrap();
    let z = sys.compile(&parse_expr("z").unwrap(), &State(vec![]), &cfg()).unwrap();
    assert_eq!(classify(&eqs, &z, &cfg()).unwrap(), Classification::Unsatisfiable);
}

#[test]
fn modal_operators_on_barbershop() {
    let sys = ParametricSystem::parse("var a, b, c;\n|- c -> (a -> !b);\n|- a -> b;", f2()).unwrap();
    let eqs = sys.equation_system(&cfg()).unwrap();
    let p = |t: &str| sys.compile(&parse_expr(t).unwrap(), &State(vec![]), &cfg()).unwrap();
    assert!(modal_eval(&eqs, &p("c"), ModalOp::Diamond(1), &cfg()).unwrap());
    assert!(!modal_eval(&eqs, &p("c"), ModalOp::Box(1), &cfg()).unwrap());
    assert!(modal_eval(&eqs, &p("a & b & c"), ModalOp::Box(0), &cfg()).unwrap());
}

#[test]
fn parameters_block_plain_solving() {
    let sys = ParametricSystem::parse("parameter y in {0,1};\ny := ?y;", f2()).unwrap();
    assert!(matches!(sys.equation_system(&cfg()), Err(DynamicsError::HasParameters)));
}
