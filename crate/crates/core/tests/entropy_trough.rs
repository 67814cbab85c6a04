//! Where the optimal-state entropy turns around for N ≥ 3.

use chained_bell::sweep::geometric_grid;
use chained_bell::{entropy, optimal_violation, Scenario, SolverConfig};
use rayon::prelude::*;

fn curve(n: usize, grid: &[usize]) -> Vec<f64> {
    grid.par_iter()
        .map(|&d| {
            let r =
                optimal_violation(Scenario::new(n, d).unwrap(), &SolverConfig::default()).unwrap();
            entropy(&r.optimal_state).unwrap()
        })
        .collect()
}

#[test]
fn n3_trough_lies_beyond_two_thousand() {
    let grid = geometric_grid(2, 10_000, 1.25);
    let e = curve(3, &grid);
    let (imin, &emin) = e
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    assert!(imin > 0 && imin < e.len() - 1);
    assert!(emin < e[0] && emin < *e.last().unwrap());
    assert!(
        grid[imin] > 2000 && grid[imin] < 3000,
        "trough at d = {}",
        grid[imin]
    );
    // Frozen from an independent dense eigensolver.
    assert!((emin - 0.94038).abs() < 1e-4, "{emin}");
}

#[test]
fn n3_entropy_at_selected_d() {
    let grid = [2000, 2300, 4000];
    let e = curve(3, &grid);
    assert!((e[0] - 0.9403884).abs() < 1e-6);
    assert!((e[1] - 0.9403794).abs() < 1e-6);
    assert!((e[2] - 0.940494).abs() < 1e-5);
    assert!(e[1] < e[0] && e[1] < e[2]);
}

#[test]
fn n2_keeps_decreasing_on_a_wider_range() {
    let grid = geometric_grid(2, 20_000, 1.25);
    let e = curve(2, &grid);
    assert!(e.windows(2).all(|w| w[1] <= w[0] + 1e-6));
}
