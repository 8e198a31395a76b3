#![allow(dead_code)]

use std::collections::BTreeSet;

use lql_core::dynamics::{sequences_of, DynamicalSystem, Sequence, State, StateValue, Steadiness, Transition};
use lql_core::field::{CoeffDomain, FieldSpec, Rational};
use lql_core::logic::{parse_expr, Connective, Formula};
use lql_core::poly::{monomial_basis, ring_element, ring_size, MultiPoly, VarSet};
use lql_core::solve::{
    inverse_value_set, solution_set, solution_value_set, theorems, EquationSystem, SolutionValueSet, SolveConfig,
};
use lql_core::translate::{axioms_to_system, conjoin_system, translate_formula, TranslationMode};
use lql_core::logic::Judgment;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 256;

pub fn f(d: u64) -> FieldSpec {
    FieldSpec::new(d).unwrap()
}

pub fn vars(names: &[&str]) -> VarSet {
    VarSet::new(names.iter().copied()).unwrap()
}

pub fn cfg() -> SolveConfig {
    SolveConfig::default()
}

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

pub fn arb_formula(atoms: &'static [&'static str], depth: u32) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        4 => proptest::sample::select(atoms).prop_map(Formula::atom),
        1 => (0u64..2).prop_map(Formula::Const),
    ];
    leaf.prop_recursive(depth, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (proptest::sample::select(Connective::ALL.to_vec()), inner.clone(), inner)
                .prop_map(|(c, a, b)| Formula::bin(c, a, b)),
        ]
    })
}

fn depth_limited(atoms: &'static [&'static str]) -> impl Strategy<Value = Formula> {
    arb_formula(atoms, 5).prop_filter("depth <= 5", |f| f.depth() <= 5)
}

fn bits(n: usize, k: usize) -> Vec<bool> {
    (0..n).map(|i| (k >> (n - 1 - i)) & 1 == 1).collect()
}

/// Every translation agrees with the truth table at every 0/1 point.
pub fn translation_soundness(cases: u32) -> Result<(), String> {
    const ATOMS: &[&str] = &["a", "b", "c"];
    let v = vars(ATOMS);
    run(cases, depth_limited(ATOMS), |formula| {
        for mode in [TranslationMode::Boole, TranslationMode::Modular(f(2))] {
            let t = translate_formula(&formula, &v, mode).map_err(|e| TestCaseError::fail(e.to_string()))?;
            for k in 0..8 {
                let b = bits(3, k);
                let truth = formula
                    .eval(&|name| ATOMS.iter().position(|a| *a == name).map(|i| b[i]))
                    .map_err(|e| TestCaseError::fail(e.to_string()))?;
                let point: Vec<Rational> = b.iter().map(|&x| Rational::integer(x as i64)).collect();
                let got = t.poly.eval(&point).map_err(|e| TestCaseError::fail(e.to_string()))?;
                prop_assert_eq!(got, Rational::integer(truth as i64), "{} in {}", formula, mode);
            }
        }
        Ok(())
    })
}

/// One conjoined equation has the same solutions as the axiom equations.
pub fn conjunction_equivalence(cases: u32) -> Result<(), String> {
    const ATOMS: &[&str] = &["a", "b", "c"];
    let v = vars(ATOMS);
    run(cases, proptest::collection::vec(arb_formula(ATOMS, 3), 0..4), |fs| {
        let axioms: Vec<Judgment> = fs.into_iter().map(Judgment::new).collect();
        let mode = TranslationMode::Modular(f(2));
        let many = axioms_to_system(&axioms, &v, mode, false).unwrap();
        let one = conjoin_system(&many).unwrap();
        prop_assert!(one.constraints().len() == 1);
        prop_assert_eq!(solution_set(&many, &cfg()).unwrap(), solution_set(&one, &cfg()).unwrap());
        Ok(())
    })
}

fn ring(field: FieldSpec, v: &VarSet) -> Vec<MultiPoly> {
    let d = field.modulus();
    let basis = monomial_basis(d, v.len());
    (0..ring_size(d, v.len()).unwrap()).map(|i| ring_element(field, v, &basis, i)).collect()
}

fn single(q: &MultiPoly) -> EquationSystem {
    let mut sys = EquationSystem::new(q.domain(), q.vars());
    sys.push(q, &Rational::zero()).unwrap();
    sys
}

/// For every feasible `{q = 0}` over `F_2` with up to two variables, the
/// polynomials vanishing on the solutions are exactly the multiples of `q`.
/// Returns the number of systems checked.
pub fn ideal_closed_form() -> Result<usize, String> {
    let mut checked = 0;
    for names in [&["x"][..], &["x", "y"][..]] {
        let v = vars(names);
        let all = ring(f(2), &v);
        for q in &all {
            let sys = single(q);
            if solution_set(&sys, &cfg()).unwrap().is_empty() {
                continue;
            }
            let ideal: BTreeSet<MultiPoly> =
                inverse_value_set(&sys, &SolutionValueSet::singleton(Rational::zero()), &cfg())
                    .unwrap()
                    .into_iter()
                    .collect();
            let multiples: BTreeSet<MultiPoly> = all.iter().map(|p| p.mul(q).unwrap()).collect();
            if ideal != multiples {
                return Err(format!("ideal of {q} differs from its multiples"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

fn arb_system() -> impl Strategy<Value = (u64, usize, Vec<u64>)> {
    prop_oneof![
        (Just(2u64), 1usize..=3),
        (Just(3u64), Just(1usize)),
    ]
    .prop_flat_map(|(d, n)| {
        let size = ring_size(d, n).unwrap();
        (Just(d), Just(n), proptest::collection::vec(0..size, 0..3))
    })
}

fn build(d: u64, n: usize, idx: &[u64]) -> EquationSystem {
    let names = ["x", "y", "z"];
    let v = vars(&names[..n]);
    let basis = monomial_basis(d, n);
    let mut sys = EquationSystem::new(CoeffDomain::Modular(f(d)), &v);
    for &i in idx {
        sys.push(&ring_element(f(d), &v, &basis, i), &Rational::zero()).unwrap();
    }
    sys
}

/// `S^-1({k}) = S^-1({0}) + k`.
pub fn increment_corollary(cases: u32) -> Result<(), String> {
    run(cases, arb_system(), |(d, n, idx)| {
        let sys = build(d, n, &idx);
        let zero: BTreeSet<MultiPoly> =
            inverse_value_set(&sys, &SolutionValueSet::singleton(Rational::zero()), &cfg()).unwrap().into_iter().collect();
        for k in 1..d as i64 {
            let k = Rational::integer(k);
            let got: BTreeSet<MultiPoly> =
                inverse_value_set(&sys, &SolutionValueSet::singleton(k.clone()), &cfg()).unwrap().into_iter().collect();
            let shifted: BTreeSet<MultiPoly> = zero.iter().map(|p| p.add_constant(&k).unwrap()).collect();
            prop_assert_eq!(got, shifted);
        }
        Ok(())
    })
}

/// An infeasible system gives every objective the empty set and proves nothing.
pub fn explosion_freeness(cases: u32) -> Result<(), String> {
    run(cases, (arb_system(), any::<u64>()), |((d, n, idx), pick)| {
        let mut sys = build(d, n, &idx);
        let x = MultiPoly::var(sys.domain(), &sys.vars().clone(), "x").unwrap();
        sys.push(&x, &Rational::zero()).unwrap();
        sys.push(&x, &Rational::one()).unwrap();
        prop_assert!(solution_set(&sys, &cfg()).unwrap().is_empty());
        let basis = monomial_basis(d, n);
        let p = ring_element(f(d), sys.vars(), &basis, pick % ring_size(d, n).unwrap());
        prop_assert!(solution_value_set(&sys, &p, &cfg()).unwrap().is_empty());
        let one = MultiPoly::one(sys.domain(), sys.vars());
        prop_assert!(solution_value_set(&sys, &one, &cfg()).unwrap().is_empty());
        prop_assert!(theorems(&sys, &cfg()).unwrap().is_empty());
        Ok(())
    })
}

/// Adding constraints never adds values.
pub fn monotonicity(cases: u32) -> Result<(), String> {
    let strat = (1usize..=3).prop_flat_map(|n| {
        let size = ring_size(2, n).unwrap();
        (
            Just(n),
            proptest::collection::vec(0..size, 0..3),
            proptest::collection::vec(0..size, 0..3),
            0..size,
        )
    });
    run(cases, strat, |(n, a, b, p)| {
        let sa = build(2, n, &a);
        let sb = build(2, n, &b);
        let both = sa.union(&sb).unwrap();
        let p = ring_element(f(2), sa.vars(), &monomial_basis(2, n), p);
        let small = solution_value_set(&both, &p, &cfg()).unwrap();
        let big = solution_value_set(&sa, &p, &cfg()).unwrap();
        prop_assert!(small.is_subset(&big), "{} not within {}", small, big);
        Ok(())
    })
}

pub fn expand(seq: &Sequence, len: usize) -> Vec<SolutionValueSet> {
    seq.prefix.iter().chain(seq.cycle.iter().cycle()).take(len).cloned().collect()
}

/// Sequences read off random finite dynamics are eventually periodic with
/// `prefix + cycle <= |U|`, minimal, and agree with the orbit labels.
pub fn orbit_bound(cases: u32) -> Result<(), String> {
    let strat = (1usize..=8).prop_flat_map(|n| {
        (proptest::collection::vec(0..n, n), proptest::collection::vec(0i64..3, n))
    });
    run(cases, strat, |(succ, labels)| {
        let n = succ.len();
        let state = |i: usize| State(vec![StateValue::Num(Rational::integer(i as i64))]);
        let label = |i: usize| SolutionValueSet::singleton(Rational::integer(labels[i]));
        let transitions: Vec<Transition> =
            (0..n).map(|i| Transition { from: state(i), to: state(succ[i]), label: label(i) }).collect();
        let fixed_points: Vec<State> = (0..n).filter(|&i| succ[i] == i).map(state).collect();
        let dynm = DynamicalSystem {
            params: vec!["t".into()],
            objective: parse_expr("t").unwrap(),
            states: (0..n).map(state).collect(),
            transitions,
            steadiness: Steadiness::from_fixed_points(fixed_points.len()),
            fixed_points,
        };
        for (start, seq) in sequences_of(&dynm).iter().enumerate() {
            prop_assert!(!seq.cycle.is_empty());
            prop_assert!(seq.prefix.len() + seq.cycle.len() <= n);
            let mut cur = start;
            let mut walk = Vec::new();
            for _ in 0..3 * n {
                walk.push(label(cur));
                cur = succ[cur];
            }
            prop_assert_eq!(expand(seq, 3 * n), walk);
            if let (Some(p), Some(c)) = (seq.prefix.last(), seq.cycle.last()) {
                prop_assert_ne!(p, c);
            }
            let l = seq.cycle.len();
            for q in 1..l {
                if l % q == 0 {
                    prop_assert!((q..l).any(|i| seq.cycle[i] != seq.cycle[i - q]), "period {} not minimal", l);
                }
            }
        }
        Ok(())
    })
}
