mod common;

use common::CASES;

#[test]
fn translation_matches_truth_tables() {
    common::translation_soundness(CASES).unwrap();
}

#[test]
fn conjunction_preserves_solutions() {
    common::conjunction_equivalence(CASES).unwrap();
}

#[test]
fn single_equation_ideal_is_its_multiples() {
    assert_eq!(common::ideal_closed_form().unwrap(), 3 + 15);
}

#[test]
fn inverse_sets_shift_by_constants() {
    common::increment_corollary(CASES).unwrap();
}

#[test]
fn infeasible_systems_prove_nothing() {
    common::explosion_freeness(CASES).unwrap();
}

#[test]
fn constraints_only_shrink_value_sets() {
    common::monotonicity(CASES).unwrap();
}

#[test]
fn value_sequences_are_eventually_periodic() {
    common::orbit_bound(CASES).unwrap();
}
