use chained_bell::{
    approx_state, barrett_value, bell_value, bell_value_from_probs, classical_min_bruteforce,
    nosignaling_bound, optimal_violation, strategy_value, BellMatrix, DeterministicStrategy,
    ProbabilityTable, Scenario, SolverConfig,
};
use proptest::prelude::*;

fn scenario(n: usize, d: usize) -> Scenario {
    Scenario::new(n, d).unwrap()
}

#[test]
fn deterministic_tables_reproduce_strategy_values() {
    for (n, d) in [(2, 2), (2, 3), (3, 3), (4, 2)] {
        let s = scenario(n, d);
        let (min, arg) = classical_min_bruteforce(&s, 1_000_000).unwrap();
        let table = ProbabilityTable::deterministic(s, &arg).unwrap();
        assert_eq!(bell_value_from_probs(&table), min);
        assert!((barrett_value(&table) - (d as f64 * min - 1.0)).abs() < 1e-12);
    }
}

#[test]
fn quantum_values_sit_between_the_bounds() {
    for (n, d) in [(2, 2), (2, 5), (3, 4), (6, 9)] {
        let s = scenario(n, d);
        let r = optimal_violation(s, &SolverConfig::default()).unwrap();
        assert!(r.min_eigenvalue < 1.0);
        assert!(r.min_eigenvalue > nosignaling_bound(&s));
        let m = BellMatrix::new(s);
        assert!(r.min_eigenvalue <= m.maxent_value() + 1e-12);
        assert!(r.min_eigenvalue <= bell_value(&m, &approx_state(s).vector).unwrap() + 1e-12);
    }
}

#[test]
fn optimal_table_matches_eigenvalue() {
    let s = scenario(3, 5);
    let r = optimal_violation(s, &SolverConfig::default()).unwrap();
    let table = ProbabilityTable::from_state(s, &r.optimal_state).unwrap();
    assert!((bell_value_from_probs(&table) - r.min_eigenvalue).abs() < 1e-12);
}

fn strategy(n: usize, d: usize) -> impl Strategy<Value = DeterministicStrategy> {
    (
        prop::collection::vec(0..d, n),
        prop::collection::vec(0..d, n),
    )
        .prop_map(|(a, b)| DeterministicStrategy::new(a, b))
}

proptest! {
    #[test]
    fn every_strategy_respects_the_classical_bound(
        (n, d, st) in (2usize..6, 2usize..6).prop_flat_map(|(n, d)| (Just(n), Just(d), strategy(n, d)))
    ) {
        let s = scenario(n, d);
        let v = strategy_value(&s, &st).unwrap();
        prop_assert!(v >= 1.0);
        let table = ProbabilityTable::deterministic(s, &st).unwrap();
        prop_assert_eq!(bell_value_from_probs(&table), v);
        prop_assert!((barrett_value(&table) - (d as f64 * v - 1.0)).abs() < 1e-12);
    }
}
