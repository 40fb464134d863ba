mod common;

use chaosadapt::chaos::enumerate_multiindices;
use chaosadapt::crossval::{scaled_epsilon, select_epsilon, EpsilonGrid};
use chaosadapt::rng::{gaussian_matrix, seeded_rng};
use chaosadapt::sparse::DrConfig;
use chaosadapt::{Dataset, Error};
use nalgebra::DVector;
use rand::Rng;

fn sparse_data(seed: u64, n: usize) -> Dataset {
    let mut rng = seeded_rng(seed);
    let x = gaussian_matrix(&mut rng, n, 4);
    let u = DVector::from_iterator(
        n,
        (0..n).map(|i| 1.0 + 2.0 * x[(i, 0)] - 0.7 * x[(i, 1)] * x[(i, 3)] + 0.05 * rng.gen_range(-1.0..1.0)),
    );
    Dataset::new(x, u).unwrap()
}

#[test]
fn selection_is_scaled_minimum() {
    let data = sparse_data(1, 40);
    let set = enumerate_multiindices(4, 3).unwrap();
    let rep = select_epsilon(&data, None, &set, &EpsilonGrid::default(), 0.8, 9, &DrConfig::default()).unwrap();
    let min = rep.validation_errors.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(rep.min_validation_error, min);
    assert_eq!(rep.selected_epsilon, scaled_epsilon(40, rep.n_train, min));
    assert_eq!(rep.selected_epsilon, (40.0f64 / 32.0).sqrt() * min);
    assert_eq!(rep.n_train + rep.n_valid, 40);
}

#[test]
fn agrees_with_straight_line_version() {
    let data = sparse_data(2, 36);
    let set = enumerate_multiindices(4, 3).unwrap();
    let dr = DrConfig::default();
    let rep = select_epsilon(&data, None, &set, &EpsilonGrid::RelativeToData { count: 8 }, 0.75, 4, &dr).unwrap();
    let reference = common::straight_line_crossval(&data, &set, 8, 0.75, 4, &dr);
    assert!((rep.selected_epsilon - reference).abs() <= 1e-12 * reference, "{} vs {reference}", rep.selected_epsilon);
}

#[test]
fn explicit_grid_validation() {
    let data = sparse_data(3, 30);
    let set = enumerate_multiindices(4, 2).unwrap();
    let dr = DrConfig::default();
    for bad in [vec![], vec![0.5, 0.1], vec![-1.0, 1.0]] {
        assert!(select_epsilon(&data, None, &set, &EpsilonGrid::Explicit(bad), 0.8, 1, &dr).is_err());
    }
}

#[test]
fn all_infeasible_grid_is_an_error() {
    // a linear basis cannot reach the interaction term to within 1e-8
    let data = sparse_data(4, 60);
    let set = enumerate_multiindices(4, 1).unwrap();
    let err = select_epsilon(&data, None, &set, &EpsilonGrid::Explicit(vec![1e-9, 1e-8]), 0.8, 1, &DrConfig::default())
        .unwrap_err();
    assert!(matches!(err, Error::AllGridInfeasible { .. }), "{err}");
}
