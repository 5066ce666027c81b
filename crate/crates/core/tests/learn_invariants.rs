//! Training invariants that cut across the classifier implementations:
//! row-order invariance of full-batch training and chance-level scores
//! on label-shuffled data.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::RngExt;

use notimind_core::learn::{
    cross_validate, logreg, mlp, svm, ClassifierKind, Dataset, Regime, TrainConfig,
};
use notimind_core::panas::AffectClass;
use notimind_core::seeding;

fn blobs(n_per_class: usize, spread: f64, seed: u64) -> (Array2<f64>, Vec<usize>) {
    let mut rng = seeding::rng(seed, &[71]);
    let n = n_per_class * 3;
    let mut x = Array2::zeros((n, 2));
    let mut y = Vec::with_capacity(n);
    for class in 0..3usize {
        for i in 0..n_per_class {
            let row = class * n_per_class + i;
            let center = (class as f64 - 1.0) * 4.0;
            x[[row, 0]] = center + rng.random_range(-spread..spread);
            x[[row, 1]] = -center + rng.random_range(-spread..spread);
            y.push(class);
        }
    }
    (x, y)
}

fn permuted(x: &Array2<f64>, y: &[usize], seed: u64) -> (Array2<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..y.len()).collect();
    let mut rng = seeding::rng(seed, &[72]);
    order.shuffle(&mut rng);
    let mut px = Array2::zeros(x.dim());
    let mut py = Vec::with_capacity(y.len());
    for (new_row, &old_row) in order.iter().enumerate() {
        px.row_mut(new_row).assign(&x.row(old_row));
        py.push(y[old_row]);
    }
    (px, py)
}

/// Full-batch training sees the same gradient regardless of row order,
/// so predictions on clear-margin probes must not change.
#[test]
fn training_is_invariant_to_training_row_order() {
    let (x, y) = blobs(20, 0.4, 5);
    let (px, py) = permuted(&x, &y, 6);
    let probes = blobs(10, 0.4, 7).0;

    let a = logreg::train(x.view(), &y, 300, 0.3, 0).unwrap();
    let b = logreg::train(px.view(), &py, 300, 0.3, 0).unwrap();
    assert_eq!(a.predict(probes.view()), b.predict(probes.view()), "logreg");

    let a = mlp::train(x.view(), &y, 4, 300, 0.3, 0.2, 9).unwrap();
    let b = mlp::train(px.view(), &py, 4, 300, 0.3, 0.2, 9).unwrap();
    assert_eq!(a.predict(probes.view()), b.predict(probes.view()), "mlp");

    let a = svm::train(x.view(), &y, 1.0, 0.5, svm::SmoSettings::default()).unwrap();
    let b = svm::train(px.view(), &py, 1.0, 0.5, svm::SmoSettings::default()).unwrap();
    assert_eq!(a.predict(probes.view()), b.predict(probes.view()), "svm");
}

/// Shuffled labels over pure-noise features score at chance: macro F
/// near 1/3 for all three classifiers under pooled 15-fold evaluation.
#[test]
fn shuffled_labels_score_at_chance_level() {
    let n = 3000;
    let mut rng = seeding::rng(0xC4A2, &[73]);
    let features = Array2::from_shape_fn((n, 9), |_| rng.random_range(-1.0..1.0));
    let mut labels: Vec<AffectClass> = (0..n)
        .map(|i| AffectClass::from_index(i % 3).unwrap())
        .collect();
    labels.shuffle(&mut rng);
    let dataset = Dataset {
        features,
        labels,
        user_ids: vec!["solo".to_string(); n],
        columns: (0..9).map(|i| format!("f{i}")).collect(),
    };
    // A single user under the within-subject regime is plain pooled
    // stratified 15-fold.
    let cfg = TrainConfig {
        seed: 74,
        ..TrainConfig::default()
    };
    let report = cross_validate(
        &dataset,
        Regime::WithinSubject15Fold,
        &ClassifierKind::ALL,
        &cfg,
    )
    .unwrap();
    for eval in &report.evaluations {
        assert!(
            (eval.mean - 1.0 / 3.0).abs() <= 0.05,
            "{:?} scored {:.3} on shuffled labels",
            eval.kind,
            eval.mean
        );
    }
}
