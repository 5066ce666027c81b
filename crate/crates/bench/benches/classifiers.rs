use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::RngExt;

use ndarray::Array2;
use notimind_core::learn::{logreg, mlp, svm};

fn training_data(n: usize, d: usize) -> (Array2<f64>, Vec<usize>) {
    let mut rng = notimind_core::seeding::rng(11, &[99]);
    let mut x = Array2::zeros((n, d));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 3;
        for j in 0..d {
            let center = (class as f64 - 1.0) * 1.5;
            x[[i, j]] = center + rng.random_range(-1.0..1.0);
        }
        y.push(class);
    }
    (x, y)
}

fn bench_logreg(c: &mut Criterion) {
    let (x, y) = training_data(300, 9);
    c.bench_function("logreg_train_500_epochs", |b| {
        b.iter(|| logreg::train(black_box(x.view()), &y, 500, 0.3, 0).unwrap())
    });
}

fn bench_mlp(c: &mut Criterion) {
    let (x, y) = training_data(300, 9);
    c.bench_function("mlp_train_100_epochs", |b| {
        b.iter(|| mlp::train(black_box(x.view()), &y, 6, 100, 0.3, 0.2, 0).unwrap())
    });
}

fn bench_svm(c: &mut Criterion) {
    let (x, y) = training_data(240, 9);
    c.bench_function("svm_train_ovo", |b| {
        b.iter(|| {
            svm::train(
                black_box(x.view()),
                &y,
                1.0,
                1.0 / 9.0,
                svm::SmoSettings::default(),
            )
            .unwrap()
        })
    });
}

criterion_group!(benches, bench_logreg, bench_mlp, bench_svm);
criterion_main!(benches);
