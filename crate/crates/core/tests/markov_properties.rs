mod common;

use common::*;
use mobility_loci::markov::{check_aperiodic, row_normalize, stationary, StationaryOptions};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rows_are_stochastic((n, edges) in arb_strong_digraph(12)) {
        let p = row_normalize(&int_graph(n, &edges)).unwrap();
        for i in 0..n {
            let (cols, vals) = p.row(i);
            prop_assert!((vals.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(vals.iter().all(|&x| (0.0..=1.0).contains(&x)));
            prop_assert!(!cols.contains(&i));
        }
        prop_assert_eq!(p.nnz(), edges.len());
    }

    #[test]
    fn direct_solve_matches_exact_null_space((n, edges) in arb_strong_digraph(8)) {
        let pi = stationary(&row_normalize(&int_graph(n, &edges)).unwrap(), &StationaryOptions::default()).unwrap();
        let exact = rational_stationary(n, &edges);
        for i in 0..n {
            prop_assert!((pi.values()[i] - to_f64(&exact[i])).abs() <= 1e-10, "vertex {}", i);
        }
        prop_assert!(pi.residual() <= StationaryOptions::default().tol);
        prop_assert!(pi.values().iter().all(|&x| x >= 0.0));
        prop_assert!((pi.values().iter().sum::<f64>() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn scaling_weights_leaves_pi_unchanged((n, edges) in arb_strong_digraph(10), c in 1e-3f64..1e3) {
        let base = int_graph(n, &edges);
        let scaled = graph(n, &edges.iter().map(|&(a, b, w)| (a, b, w as f64 * c)).collect::<Vec<_>>());
        let opts = StationaryOptions::default();
        let x = stationary(&row_normalize(&base).unwrap(), &opts).unwrap();
        let y = stationary(&row_normalize(&scaled).unwrap(), &opts).unwrap();
        for (a, b) in x.values().iter().zip(y.values()) {
            prop_assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn period_matches_matrix_powers((n, edges) in arb_strong_digraph(8)) {
        let structure: Vec<(usize, usize)> = edges.iter().map(|e| (e.0, e.1)).collect();
        let report = check_aperiodic(&row_normalize(&int_graph(n, &edges)).unwrap()).unwrap();
        let oracle = matrix_power_period(n, &structure);
        prop_assert_eq!(report.period, oracle);
        prop_assert_eq!(report.aperiodic, oracle == 1);
    }
}

#[test]
fn layered_graphs_have_the_layer_count_as_period() {
    // every edge advances the layer by one, so all cycles have length divisible by 3
    let edges = [(0, 1), (1, 2), (2, 0), (0, 4), (4, 5), (5, 3), (3, 1), (2, 3)];
    let weighted: Vec<_> = edges.iter().map(|&(a, b)| (a, b, 1.0)).collect();
    let report = check_aperiodic(&row_normalize(&graph(6, &weighted)).unwrap()).unwrap();
    assert_eq!(report.period, matrix_power_period(6, &edges));
    assert_eq!(report.period, 3);
    assert!(!report.aperiodic);
}
