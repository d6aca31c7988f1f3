//! Factor-graph text format and sparse GVI through the public API.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use bayesproj::gvi::format::same_structure;
use bayesproj::gvi::solver::{marginals_for_factors, MarginalRoute};
use bayesproj::gvi::{
    gvi_sparse_solve, parse_graph, serialize_graph, Factor, FactorGraph, FactorKind, FactorRegistry, GaussianState,
    GviOptions, Pattern, SparseLdl, SparseSymmetric,
};
use bayesproj::Error;

fn quartic_registry() -> FactorRegistry {
    let mut reg = FactorRegistry::new();
    reg.register("quartic", 1, 1, |indices, params| {
        let c = params[0];
        Factor::new(
            FactorKind::Custom { id: "quartic".into(), params: vec![c] },
            indices,
            move |x| c * x[0].powi(4),
            move |x| DVector::from_element(1, 4.0 * c * x[0].powi(3)),
            move |x| DMatrix::from_element(1, 1, 12.0 * c * x[0] * x[0]),
        )
    });
    reg
}

const GRAPH: &str = "\
# three variables
VAR 3
FACTOR prior 0 0.5 0.25
FACTOR odom 0 1 1.0 0.04
FACTOR range 1 2 2.5 0.01 0.5
FACTOR product 0 2 1.2 0.3
FACTOR custom:quartic 2 0.05
";

#[test]
fn parse_serialize_round_trip_with_custom_factor() {
    let reg = quartic_registry();
    let g = parse_graph(GRAPH, &reg).unwrap();
    assert_eq!(g.num_vars(), 3);
    assert_eq!(g.factors().len(), 5);
    let text = serialize_graph(&g);
    let again = parse_graph(&text, &reg).unwrap();
    assert!(same_structure(&g, &again));
    assert_eq!(serialize_graph(&again), text);
    let x = DVector::from_vec(vec![0.3, 1.1, 3.4]);
    assert_eq!(g.joint_element().phi(&x), again.joint_element().phi(&x));
}

#[test]
fn unregistered_custom_factor_is_rejected() {
    let err = parse_graph(GRAPH, &FactorRegistry::new()).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 7, .. }), "{err:?}");
}

#[test]
fn malformed_lines_report_their_line() {
    let reg = quartic_registry();
    for (text, line) in [
        ("FACTOR prior 0 1 1\n", 1),
        ("VAR 2\nFACTOR prior 5 1 1\n", 2),
        ("VAR 2\nFACTOR odom 0 1 1\n", 2),
        ("VAR 2\n\nFACTOR prior 0 1 -1\n", 3),
        ("VAR 2\nFACTOR bogus 0\n", 2),
    ] {
        match parse_graph(text, &reg) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
            other => panic!("{text:?} gave {other:?}"),
        }
    }
}

#[test]
fn parsed_graph_solves_with_both_routes() {
    let g = parse_graph(GRAPH, &quartic_registry()).unwrap();
    let init = GaussianState::diagonal(&g, DVector::from_vec(vec![0.5, 1.5, 3.9]), &[0.1; 3]).unwrap();
    let opts = GviOptions { max_iters: 40, ..GviOptions::default() };
    let sparse = gvi_sparse_solve(&g, &init, &opts).unwrap();
    let dense = gvi_sparse_solve(&g, &init, &GviOptions { route: MarginalRoute::Dense, ..opts }).unwrap();
    assert!(sparse.converged(), "{:?}", sparse.termination);
    assert_eq!(sparse.iterations(), dense.iterations());
    let (a, b) = (sparse.final_state().unwrap(), dense.final_state().unwrap());
    assert!((&a.mean - &b.mean).amax() < 1e-10);
    assert!((a.info.to_dense() - b.info.to_dense()).amax() < 1e-10);
}

fn chain_graph(values: &[f64]) -> FactorGraph {
    let n = values.len();
    let mut g = FactorGraph::new(n);
    g.push(Factor::prior(0, values[0], 0.5).unwrap()).unwrap();
    for i in 1..n {
        g.push(Factor::odometry(i - 1, i, values[i], 0.1 + 0.01 * i as f64).unwrap()).unwrap();
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialization_is_lossless(values in prop::collection::vec(-1e6f64..1e6, 2..12)) {
        let g = chain_graph(&values);
        let text = serialize_graph(&g);
        let again = parse_graph(&text, &FactorRegistry::new()).unwrap();
        prop_assert!(same_structure(&g, &again));
        prop_assert_eq!(serialize_graph(&again), text);
    }

    #[test]
    fn selected_inverse_matches_dense_marginals(
        values in prop::collection::vec(-3.0f64..3.0, 3..10),
        diag in prop::collection::vec(0.5f64..4.0, 10),
    ) {
        let g = chain_graph(&values);
        let n = g.num_vars();
        let pattern = Arc::new(Pattern::from_graph(&g));
        let mut info = SparseSymmetric::zeros(pattern);
        for i in 0..n {
            info.add(i, i, diag[i] + 1.0).unwrap();
            if i > 0 {
                info.add(i, i - 1, -0.4).unwrap();
            }
        }
        let dense_cov = info.to_dense().try_inverse().unwrap();
        let sel = SparseLdl::factor(&info).unwrap().selected_inverse();
        for (i, j) in info.pattern().entries().collect::<Vec<_>>() {
            prop_assert!((sel.get(i, j) - dense_cov[(i, j)]).abs() < 1e-12);
        }
        let state = GaussianState::new(DVector::from_vec(values.clone()), info).unwrap();
        let a = marginals_for_factors(&state, &g, MarginalRoute::SelectedInverse).unwrap();
        let b = marginals_for_factors(&state, &g, MarginalRoute::Dense).unwrap();
        for (ma, mb) in a.iter().zip(&b) {
            prop_assert!((&ma.covariance - &mb.covariance).amax() < 1e-12);
            prop_assert_eq!(&ma.mean, &mb.mean);
        }
    }
}
