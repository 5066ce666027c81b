//! One-vs-one RBF-kernel SVM trained by sequential minimal optimization.
//!
//! Each class pair gets a binary machine solved by Platt-style SMO with a
//! full error cache. Working-set scans start from a rotating position
//! instead of a random one, so training is deterministic. Multiclass
//! prediction is pairwise voting with ties broken toward the class with
//! the largest summed decision margin.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::panas::AffectClass;

use super::LearnError;

/// KKT violation tolerance for the SMO stopping rule.
pub const SMO_TOLERANCE: f64 = 1e-3;
/// Minimum meaningful multiplier step.
const STEP_EPS: f64 = 1e-8;
/// Multiplier-at-bound slack.
const BOUND_EPS: f64 = 1e-12;

pub fn rbf_kernel(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>, gamma: f64) -> f64 {
    let mut d2 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        d2 += d * d;
    }
    (-gamma * d2).exp()
}

/// Dual objective `sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij`.
pub fn dual_objective(gram: &Array2<f64>, y: &[f64], alphas: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if alphas[j] != 0.0 {
                quad += alphas[i] * alphas[j] * y[i] * y[j] * gram[[i, j]];
            }
        }
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

/// Solved binary subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoOutcome {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
    pub passes: usize,
}

struct SmoState<'a> {
    gram: &'a Array2<f64>,
    y: &'a [f64],
    c: f64,
    alphas: Vec<f64>,
    errors: Vec<f64>,
    bias: f64,
    scan_offset: usize,
}

impl<'a> SmoState<'a> {
    fn new(gram: &'a Array2<f64>, y: &'a [f64], c: f64) -> Self {
        SmoState {
            gram,
            y,
            c,
            alphas: vec![0.0; y.len()],
            // With all multipliers zero the decision value is zero, so
            // the initial error is -y_i.
            errors: y.iter().map(|&v| -v).collect(),
            bias: 0.0,
            scan_offset: 0,
        }
    }

    fn non_bound(&self, i: usize) -> bool {
        self.alphas[i] > BOUND_EPS && self.alphas[i] < self.c - BOUND_EPS
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (alph1, alph2) = (self.alphas[i1], self.alphas[i2]);
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (e1, e2) = (self.errors[i1], self.errors[i2]);
        let s = y1 * y2;
        let (low, high) = if (y1 - y2).abs() > f64::EPSILON {
            ((alph2 - alph1).max(0.0), self.c.min(self.c + alph2 - alph1))
        } else {
            ((alph1 + alph2 - self.c).max(0.0), self.c.min(alph1 + alph2))
        };
        if high - low < BOUND_EPS {
            return false;
        }
        let k11 = self.gram[[i1, i1]];
        let k12 = self.gram[[i1, i2]];
        let k22 = self.gram[[i2, i2]];
        let eta = k11 + k22 - 2.0 * k12;
        let mut a2 = if eta > 0.0 {
            (alph2 + y2 * (e1 - e2) / eta).clamp(low, high)
        } else {
            // Flat direction (duplicate or collinear points): compare the
            // objective at both clip bounds.
            let f1 = y1 * (e1 + self.bias) - alph1 * k11 - s * alph2 * k12;
            let f2 = y2 * (e2 + self.bias) - s * alph1 * k12 - alph2 * k22;
            let l1 = alph1 + s * (alph2 - low);
            let h1 = alph1 + s * (alph2 - high);
            let obj_low = l1 * f1 + low * f2
                + 0.5 * l1 * l1 * k11
                + 0.5 * low * low * k22
                + s * low * l1 * k12;
            let obj_high = h1 * f1 + high * f2
                + 0.5 * h1 * h1 * k11
                + 0.5 * high * high * k22
                + s * high * h1 * k12;
            if obj_low < obj_high - STEP_EPS {
                low
            } else if obj_low > obj_high + STEP_EPS {
                high
            } else {
                alph2
            }
        };
        if (a2 - alph2).abs() < STEP_EPS * (a2 + alph2 + STEP_EPS) {
            return false;
        }
        // Snap to the box to keep multipliers exactly feasible.
        if a2 < BOUND_EPS {
            a2 = 0.0;
        } else if a2 > self.c - BOUND_EPS {
            a2 = self.c;
        }
        let mut a1 = alph1 + s * (alph2 - a2);
        if a1 < BOUND_EPS {
            a1 = 0.0;
        } else if a1 > self.c - BOUND_EPS {
            a1 = self.c;
        }

        let d1 = y1 * (a1 - alph1);
        let d2 = y2 * (a2 - alph2);
        let b1 = self.bias - e1 - d1 * k11 - d2 * k12;
        let b2 = self.bias - e2 - d1 * k12 - d2 * k22;
        let new_bias = if a1 > BOUND_EPS && a1 < self.c - BOUND_EPS {
            b1
        } else if a2 > BOUND_EPS && a2 < self.c - BOUND_EPS {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let bias_delta = new_bias - self.bias;
        for (i, err) in self.errors.iter_mut().enumerate() {
            *err += d1 * self.gram[[i1, i]] + d2 * self.gram[[i2, i]] + bias_delta;
        }
        self.alphas[i1] = a1;
        self.alphas[i2] = a2;
        self.bias = new_bias;
        // Keep cached errors exact for the two updated points when they
        // become non-bound (their decision value must equal the target).
        if self.non_bound(i1) {
            self.errors[i1] = 0.0;
        }
        if self.non_bound(i2) {
            self.errors[i2] = 0.0;
        }
        true
    }

    fn examine(&mut self, i2: usize, tol: f64) -> bool {
        let y2 = self.y[i2];
        let alph2 = self.alphas[i2];
        let e2 = self.errors[i2];
        let r2 = e2 * y2;
        let violates = (r2 < -tol && alph2 < self.c - BOUND_EPS) || (r2 > tol && alph2 > BOUND_EPS);
        if !violates {
            return false;
        }
        let n = self.y.len();
        // Heuristic 1: the non-bound point with the largest |E1 - E2|.
        let mut best: Option<(f64, usize)> = None;
        for i in 0..n {
            if self.non_bound(i) {
                let gap = (self.errors[i] - e2).abs();
                if best.is_none_or(|(g, _)| gap > g) {
                    best = Some((gap, i));
                }
            }
        }
        if let Some((_, i1)) = best {
            if self.take_step(i1, i2) {
                return true;
            }
        }
        // Heuristic 2: all non-bound points from a rotating start.
        self.scan_offset = self.scan_offset.wrapping_add(1);
        let start = self.scan_offset % n;
        for k in 0..n {
            let i1 = (start + k) % n;
            if self.non_bound(i1) && self.take_step(i1, i2) {
                return true;
            }
        }
        // Heuristic 3: everything.
        for k in 0..n {
            let i1 = (start + k) % n;
            if self.take_step(i1, i2) {
                return true;
            }
        }
        false
    }
}

/// Solve the binary dual problem on a precomputed Gram matrix. `y` must
/// be -1/+1. When `trace` is given, the dual objective is recorded after
/// every successful multiplier update.
pub fn smo_solve(
    gram: &Array2<f64>,
    y: &[f64],
    c: f64,
    tol: f64,
    max_passes: usize,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<SmoOutcome, LearnError> {
    assert_eq!(gram.nrows(), y.len());
    assert_eq!(gram.ncols(), y.len());
    let mut state = SmoState::new(gram, y, c);
    let n = y.len();
    let mut examine_all = true;
    let mut num_changed = 1usize;
    let mut passes = 0usize;
    while num_changed > 0 || examine_all {
        passes += 1;
        if passes > max_passes {
            return Err(LearnError::NoConvergence {
                pair: format!("{n}-point problem"),
                passes: max_passes,
            });
        }
        num_changed = 0;
        for i in 0..n {
            if !examine_all && !state.non_bound(i) {
                continue;
            }
            if state.examine(i, tol) {
                num_changed += 1;
                if let Some(t) = trace.as_deref_mut() {
                    t.push(dual_objective(gram, y, &state.alphas));
                }
            }
        }
        if examine_all {
            examine_all = false;
        } else if num_changed == 0 {
            examine_all = true;
        }
    }
    let objective = dual_objective(gram, y, &state.alphas);
    Ok(SmoOutcome {
        alphas: state.alphas,
        bias: state.bias,
        objective,
        passes,
    })
}

/// One binary machine of the one-vs-one ensemble. A positive decision
/// value favors `class_hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMachine {
    pub class_lo: AffectClass,
    pub class_hi: AffectClass,
    /// Support vector rows.
    pub support_vectors: Array2<f64>,
    /// `alpha_i * y_i` per support vector.
    pub coefficients: Array1<f64>,
    pub bias: f64,
}

impl PairMachine {
    pub fn decision(&self, row: ArrayView1<'_, f64>, gamma: f64) -> f64 {
        let mut sum = self.bias;
        for (sv, &coef) in self.support_vectors.rows().into_iter().zip(&self.coefficients) {
            sum += coef * rbf_kernel(row, sv, gamma);
        }
        sum
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub gamma: f64,
    pub c: f64,
    pub machines: Vec<PairMachine>,
    /// Majority training class; used when no pair machine exists.
    pub fallback: AffectClass,
    pub n_features: usize,
}

/// Training hyperparameters beyond C and gamma.
#[derive(Debug, Clone, Copy)]
pub struct SmoSettings {
    pub tolerance: f64,
    pub max_passes: usize,
}

impl Default for SmoSettings {
    fn default() -> Self {
        SmoSettings {
            tolerance: SMO_TOLERANCE,
            max_passes: 10_000,
        }
    }
}

fn gram_matrix(rows: ArrayView2<'_, f64>, gamma: f64) -> Array2<f64> {
    let n = rows.nrows();
    let mut gram = Array2::zeros((n, n));
    for i in 0..n {
        gram[[i, i]] = 1.0;
        for j in 0..i {
            let k = rbf_kernel(rows.row(i), rows.row(j), gamma);
            gram[[i, j]] = k;
            gram[[j, i]] = k;
        }
    }
    gram
}

/// Train the one-vs-one ensemble. Pairs with a missing class are
/// skipped; with no trainable pair at all the model predicts the
/// majority class.
pub fn train(
    x: ArrayView2<'_, f64>,
    y: &[usize],
    c: f64,
    gamma: f64,
    settings: SmoSettings,
) -> Result<SvmModel, LearnError> {
    let mut class_counts = [0usize; 3];
    for &label in y {
        class_counts[label] += 1;
    }
    let fallback = AffectClass::from_index(
        (0..3).max_by_key(|&i| (class_counts[i], 3 - i)).expect("three classes"),
    )
    .expect("valid index");

    let mut machines = Vec::new();
    for lo in 0..3usize {
        for hi in lo + 1..3 {
            if class_counts[lo] == 0 || class_counts[hi] == 0 {
                continue;
            }
            let indices: Vec<usize> = y
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == lo || l == hi)
                .map(|(i, _)| i)
                .collect();
            let mut sub = Array2::zeros((indices.len(), x.ncols()));
            let mut labels = Vec::with_capacity(indices.len());
            for (row, &i) in indices.iter().enumerate() {
                sub.row_mut(row).assign(&x.row(i));
                labels.push(if y[i] == hi { 1.0 } else { -1.0 });
            }
            let gram = gram_matrix(sub.view(), gamma);
            let outcome = smo_solve(
                &gram,
                &labels,
                c,
                settings.tolerance,
                settings.max_passes,
                None,
            )
            .map_err(|e| match e {
                LearnError::NoConvergence { passes, .. } => LearnError::NoConvergence {
                    pair: format!("({},{})", lo as i8 - 1, hi as i8 - 1),
                    passes,
                },
                other => other,
            })?;
            let support: Vec<usize> = outcome
                .alphas
                .iter()
                .enumerate()
                .filter(|(_, &a)| a > 0.0)
                .map(|(i, _)| i)
                .collect();
            let mut support_vectors = Array2::zeros((support.len(), x.ncols()));
            let mut coefficients = Array1::zeros(support.len());
            for (row, &i) in support.iter().enumerate() {
                support_vectors.row_mut(row).assign(&sub.row(i));
                coefficients[row] = outcome.alphas[i] * labels[i];
            }
            machines.push(PairMachine {
                class_lo: AffectClass::from_index(lo).expect("valid"),
                class_hi: AffectClass::from_index(hi).expect("valid"),
                support_vectors,
                coefficients,
                bias: outcome.bias,
            });
        }
    }
    Ok(SvmModel {
        gamma,
        c,
        machines,
        fallback,
        n_features: x.ncols(),
    })
}

impl SvmModel {
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn predict(&self, rows: ArrayView2<'_, f64>) -> Vec<AffectClass> {
        rows.rows()
            .into_iter()
            .map(|row| {
                if self.machines.is_empty() {
                    return self.fallback;
                }
                let mut votes = [0usize; 3];
                let mut margins = [0.0f64; 3];
                for machine in &self.machines {
                    let d = machine.decision(row, self.gamma);
                    let (lo, hi) = (machine.class_lo.index(), machine.class_hi.index());
                    if d > 0.0 {
                        votes[hi] += 1;
                    } else {
                        votes[lo] += 1;
                    }
                    margins[hi] += d;
                    margins[lo] -= d;
                }
                let top_votes = *votes.iter().max().expect("three classes");
                let winner = (0..3)
                    .filter(|&i| votes[i] == top_votes)
                    .max_by(|&a, &b| {
                        margins[a]
                            .partial_cmp(&margins[b])
                            .expect("finite margins")
                            .then(std::cmp::Ordering::Greater)
                    })
                    .expect("non-empty");
                AffectClass::from_index(winner).expect("valid index")
            })
            .collect()
    }
}
