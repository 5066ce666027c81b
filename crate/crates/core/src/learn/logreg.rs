//! Multinomial (softmax) logistic regression trained by full-batch
//! gradient descent on the mean cross-entropy.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::panas::AffectClass;

use super::LearnError;

pub(crate) const N_CLASSES: usize = 3;

/// Row-wise stable softmax.
pub(crate) fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

/// Mean cross-entropy of row probabilities against class indices.
pub(crate) fn mean_cross_entropy(probs: &Array2<f64>, y: &[usize]) -> f64 {
    let n = y.len() as f64;
    -y.iter()
        .enumerate()
        .map(|(i, &c)| probs[[i, c]].ln())
        .sum::<f64>()
        / n
}

/// Argmax with ties going to the lowest class index.
pub(crate) fn argmax_rows(scores: &Array2<f64>) -> Vec<AffectClass> {
    scores
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0usize;
            for (i, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = i;
                }
            }
            AffectClass::from_index(best).expect("three columns")
        })
        .collect()
}

/// Weights are `(features, classes)`, bias `(classes,)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl LogRegModel {
    pub fn n_features(&self) -> usize {
        self.weights.nrows()
    }

    pub fn decision(&self, rows: ArrayView2<'_, f64>) -> Array2<f64> {
        rows.dot(&self.weights) + &self.bias
    }

    pub fn predict(&self, rows: ArrayView2<'_, f64>) -> Vec<AffectClass> {
        if rows.nrows() == 0 {
            return Vec::new();
        }
        argmax_rows(&self.decision(rows))
    }
}

/// Mean cross-entropy loss and its analytic gradient at the given
/// parameters.
pub fn loss_and_gradient(
    weights: &Array2<f64>,
    bias: &Array1<f64>,
    x: ArrayView2<'_, f64>,
    y: &[usize],
) -> (f64, Array2<f64>, Array1<f64>) {
    let n = y.len() as f64;
    let logits = x.dot(weights) + bias;
    let probs = softmax_rows(&logits);
    let loss = mean_cross_entropy(&probs, y);
    let mut delta = probs;
    for (i, &c) in y.iter().enumerate() {
        delta[[i, c]] -= 1.0;
    }
    delta.mapv_inplace(|v| v / n);
    let grad_w = x.t().dot(&delta);
    let grad_b = delta.sum_axis(Axis(0));
    (loss, grad_w, grad_b)
}

/// Train from zero-initialized weights. The seed is accepted for
/// interface uniformity but unused: the optimum of this convex problem
/// does not depend on it.
pub fn train(
    x: ArrayView2<'_, f64>,
    y: &[usize],
    epochs: usize,
    learning_rate: f64,
    _seed: u64,
) -> Result<LogRegModel, LearnError> {
    let d = x.ncols();
    let mut weights = Array2::zeros((d, N_CLASSES));
    let mut bias = Array1::zeros(N_CLASSES);
    for epoch in 0..epochs {
        let (loss, grad_w, grad_b) = loss_and_gradient(&weights, &bias, x, y);
        if !loss.is_finite() {
            return Err(LearnError::NonFiniteLoss { epoch });
        }
        weights -= &(grad_w * learning_rate);
        bias -= &(grad_b * learning_rate);
    }
    Ok(LogRegModel { weights, bias })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::RngExt;

    /// Central finite differences of the loss over every parameter.
    fn fd_gradients(
        weights: &Array2<f64>,
        bias: &Array1<f64>,
        x: ArrayView2<'_, f64>,
        y: &[usize],
        h: f64,
    ) -> (Array2<f64>, Array1<f64>) {
        let loss_at = |w: &Array2<f64>, b: &Array1<f64>| {
            let probs = softmax_rows(&(x.dot(w) + b));
            mean_cross_entropy(&probs, y)
        };
        let mut gw = Array2::zeros(weights.dim());
        for idx in 0..weights.len() {
            let (r, c) = (idx / weights.ncols(), idx % weights.ncols());
            let mut plus = weights.clone();
            plus[[r, c]] += h;
            let mut minus = weights.clone();
            minus[[r, c]] -= h;
            gw[[r, c]] = (loss_at(&plus, bias) - loss_at(&minus, bias)) / (2.0 * h);
        }
        let mut gb = Array1::zeros(bias.len());
        for i in 0..bias.len() {
            let mut plus = bias.clone();
            plus[i] += h;
            let mut minus = bias.clone();
            minus[i] -= h;
            gb[i] = (loss_at(weights, &plus) - loss_at(weights, &minus)) / (2.0 * h);
        }
        (gw, gb)
    }

    fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                let scale = x.abs().max(y.abs());
                if scale < 1e-8 {
                    0.0
                } else {
                    (x - y).abs() / scale
                }
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        for seed in 0..5u64 {
            let mut rng = crate::seeding::rng(seed, &[11]);
            let x = Array2::from_shape_fn((5, 3), |_| rng.random_range(-1.0..1.0));
            let y: Vec<usize> = (0..5).map(|_| rng.random_range(0..3usize)).collect();
            let w = Array2::from_shape_fn((3, 3), |_| rng.random_range(-0.5..0.5));
            let b = Array1::from_shape_fn(3, |_| rng.random_range(-0.5..0.5));
            let (_, gw, gb) = loss_and_gradient(&w, &b, x.view(), &y);
            let (fw, fb) = fd_gradients(&w, &b, x.view(), &y, 1e-5);
            let err = max_rel_err(gw.as_slice().unwrap(), fw.as_slice().unwrap())
                .max(max_rel_err(gb.as_slice().unwrap(), fb.as_slice().unwrap()));
            assert!(err < 1e-4, "seed {seed}: relative error {err}");
        }
    }

    fn blobs() -> (Array2<f64>, Vec<usize>) {
        // Three well-separated clusters, five points each.
        let centers = [(-4.0, 0.0), (0.0, 4.0), (4.0, 0.0)];
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut rng = crate::seeding::rng(3, &[21]);
        for (c, &(cx, cy)) in centers.iter().enumerate() {
            for _ in 0..5 {
                rows.push([cx + rng.random_range(-0.3..0.3), cy + rng.random_range(-0.3..0.3)]);
                labels.push(c);
            }
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        (Array2::from_shape_vec((15, 2), flat).unwrap(), labels)
    }

    fn nearest_centroid_accuracy(x: &Array2<f64>, y: &[usize]) -> f64 {
        let mut centroids = [[0.0f64; 2]; 3];
        let mut counts = [0usize; 3];
        for (row, &c) in x.rows().into_iter().zip(y) {
            centroids[c][0] += row[0];
            centroids[c][1] += row[1];
            counts[c] += 1;
        }
        for (c, count) in centroids.iter_mut().zip(counts) {
            c[0] /= count as f64;
            c[1] /= count as f64;
        }
        let mut correct = 0;
        for (row, &truth) in x.rows().into_iter().zip(y) {
            let best = (0..3)
                .min_by(|&a, &b| {
                    let da = (row[0] - centroids[a][0]).powi(2) + (row[1] - centroids[a][1]).powi(2);
                    let db = (row[0] - centroids[b][0]).powi(2) + (row[1] - centroids[b][1]).powi(2);
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            correct += (best == truth) as usize;
        }
        correct as f64 / y.len() as f64
    }

    #[test]
    fn separable_blobs_reach_full_training_accuracy() {
        let (x, y) = blobs();
        // Independent check that the data really is centroid-separable.
        assert_eq!(nearest_centroid_accuracy(&x, &y), 1.0);
        let model = train(x.view(), &y, 500, 0.3, 0).unwrap();
        let predicted = model.predict(x.view());
        let correct = predicted
            .iter()
            .zip(&y)
            .filter(|(p, &t)| p.index() == t)
            .count();
        assert_eq!(correct, y.len());
    }

    #[test]
    fn predict_handles_empty_input() {
        let model = LogRegModel {
            weights: Array2::zeros((2, 3)),
            bias: Array1::zeros(3),
        };
        assert!(model.predict(Array2::zeros((0, 2)).view()).is_empty());
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        let scores = array![[2.0, 1.0, 1.0], [1.0, 1.0, 1.0]];
        let classes = argmax_rows(&scores);
        assert_eq!(classes[0], AffectClass::Negative);
        assert_eq!(classes[1], AffectClass::Negative);
    }

    #[test]
    fn scaling_logits_preserves_predictions() {
        let scores = array![[0.2, 1.4, -0.3], [2.2, 0.1, 2.3]];
        let scaled = scores.mapv(|v| v * 7.5);
        assert_eq!(argmax_rows(&scores), argmax_rows(&scaled));
    }

    #[test]
    fn divergence_reports_epoch() {
        // Conflicting duplicate points guarantee that a huge step leaves
        // at least one row with vanishing probability on its own label.
        let x = array![[1.0, 0.0], [1.0, 0.0], [-1.0, 0.5], [0.0, -1.0]];
        let y = vec![0usize, 1, 1, 2];
        match train(x.view(), &y, 500, 1e300, 0) {
            Err(LearnError::NonFiniteLoss { epoch }) => assert!(epoch > 0),
            other => panic!("expected NonFiniteLoss, got {other:?}"),
        }
    }
}
