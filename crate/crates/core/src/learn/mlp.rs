//! One-hidden-layer feed-forward network: sigmoid hidden units, softmax
//! output, mean cross-entropy loss, trained by full-batch
//! backpropagation with classical momentum (a fraction of the previous
//! weight update is added to the current one).

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::RngExt;

use crate::panas::AffectClass;
use crate::seeding::{self, domain};

use super::logreg::{argmax_rows, mean_cross_entropy, softmax_rows, N_CLASSES};
use super::LearnError;

/// Default hidden width: halfway between input and output size, rounded
/// up (6 for the nine-feature, three-class setup).
pub fn default_hidden_size(n_features: usize, n_classes: usize) -> usize {
    (n_features + n_classes).div_ceil(2)
}

/// All network parameters. Gradients reuse the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    /// `(features, hidden)`
    pub w1: Array2<f64>,
    /// `(hidden,)`
    pub b1: Array1<f64>,
    /// `(hidden, classes)`
    pub w2: Array2<f64>,
    /// `(classes,)`
    pub b2: Array1<f64>,
}

impl MlpParams {
    pub fn zeros(n_features: usize, hidden: usize) -> MlpParams {
        MlpParams {
            w1: Array2::zeros((n_features, hidden)),
            b1: Array1::zeros(hidden),
            w2: Array2::zeros((hidden, N_CLASSES)),
            b2: Array1::zeros(N_CLASSES),
        }
    }

    /// `self += other * factor`, elementwise across all four tensors.
    fn scaled_add(&mut self, other: &MlpParams, factor: f64) {
        self.w1.scaled_add(factor, &other.w1);
        self.b1.scaled_add(factor, &other.b1);
        self.w2.scaled_add(factor, &other.w2);
        self.b2.scaled_add(factor, &other.b2);
    }

    fn scale(&mut self, factor: f64) {
        self.w1.mapv_inplace(|v| v * factor);
        self.b1.mapv_inplace(|v| v * factor);
        self.w2.mapv_inplace(|v| v * factor);
        self.b2.mapv_inplace(|v| v * factor);
    }
}

/// Uniform init in `[-0.5, 0.5]`, drawn in a fixed order (w1 row-major,
/// b1, w2 row-major, b2) so a seed fully determines the network.
pub fn init_params(n_features: usize, hidden: usize, seed: u64) -> MlpParams {
    let mut rng = seeding::rng(seed, &[domain::MODEL_INIT]);
    let mut draw = |len: usize| -> Vec<f64> {
        (0..len).map(|_| rng.random_range(-0.5..0.5)).collect()
    };
    MlpParams {
        w1: Array2::from_shape_vec((n_features, hidden), draw(n_features * hidden))
            .expect("shape matches"),
        b1: Array1::from_vec(draw(hidden)),
        w2: Array2::from_shape_vec((hidden, N_CLASSES), draw(hidden * N_CLASSES))
            .expect("shape matches"),
        b2: Array1::from_vec(draw(N_CLASSES)),
    }
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

fn hidden_activations(params: &MlpParams, x: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut a = x.dot(&params.w1) + &params.b1;
    a.mapv_inplace(sigmoid);
    a
}

fn output_probs(params: &MlpParams, hidden: &Array2<f64>) -> Array2<f64> {
    softmax_rows(&(hidden.dot(&params.w2) + &params.b2))
}

/// Mean cross-entropy at the given parameters.
pub fn loss(params: &MlpParams, x: ArrayView2<'_, f64>, y: &[usize]) -> f64 {
    let hidden = hidden_activations(params, x);
    mean_cross_entropy(&output_probs(params, &hidden), y)
}

/// Loss plus analytic gradients from one backpropagation pass.
pub fn loss_and_gradients(
    params: &MlpParams,
    x: ArrayView2<'_, f64>,
    y: &[usize],
) -> (f64, MlpParams) {
    let n = y.len() as f64;
    let hidden = hidden_activations(params, x);
    let probs = output_probs(params, &hidden);
    let loss = mean_cross_entropy(&probs, y);

    let mut delta_out = probs;
    for (i, &c) in y.iter().enumerate() {
        delta_out[[i, c]] -= 1.0;
    }
    delta_out.mapv_inplace(|v| v / n);

    let grad_w2 = hidden.t().dot(&delta_out);
    let grad_b2 = delta_out.sum_axis(Axis(0));
    let mut delta_hidden = delta_out.dot(&params.w2.t());
    delta_hidden.zip_mut_with(&hidden, |d, &a| *d *= a * (1.0 - a));
    let grad_w1 = x.t().dot(&delta_hidden);
    let grad_b1 = delta_hidden.sum_axis(Axis(0));

    (
        loss,
        MlpParams {
            w1: grad_w1,
            b1: grad_b1,
            w2: grad_w2,
            b2: grad_b2,
        },
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub params: MlpParams,
}

impl MlpModel {
    pub fn n_features(&self) -> usize {
        self.params.w1.nrows()
    }

    pub fn hidden_size(&self) -> usize {
        self.params.w1.ncols()
    }

    pub fn decision(&self, rows: ArrayView2<'_, f64>) -> Array2<f64> {
        let hidden = hidden_activations(&self.params, rows);
        hidden.dot(&self.params.w2) + &self.params.b2
    }

    pub fn predict(&self, rows: ArrayView2<'_, f64>) -> Vec<AffectClass> {
        if rows.nrows() == 0 {
            return Vec::new();
        }
        argmax_rows(&self.decision(rows))
    }
}

/// Full-batch training with classical momentum:
/// `update = -lr * gradient + momentum * previous_update`.
pub fn train(
    x: ArrayView2<'_, f64>,
    y: &[usize],
    hidden: usize,
    epochs: usize,
    learning_rate: f64,
    momentum: f64,
    seed: u64,
) -> Result<MlpModel, LearnError> {
    let mut params = init_params(x.ncols(), hidden, seed);
    let mut velocity = MlpParams::zeros(x.ncols(), hidden);
    for epoch in 0..epochs {
        let (loss, grads) = loss_and_gradients(&params, x, y);
        if !loss.is_finite() {
            return Err(LearnError::NonFiniteLoss { epoch });
        }
        velocity.scale(momentum);
        velocity.scaled_add(&grads, -learning_rate);
        params.scaled_add(&velocity, 1.0);
    }
    Ok(MlpModel { params })
}
