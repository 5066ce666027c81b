//! Versioned line-oriented text format for trained models.
//!
//! The header names the classifier kind, feature columns and
//! normalization parameters; the body is kind-specific. Floats are
//! written in shortest round-trip form, so a loaded model predicts
//! bit-identically to the saved one.

use std::io::{BufRead, BufReader, Read, Write};

use ndarray::{Array1, Array2};

use crate::panas::AffectClass;

use super::logreg::LogRegModel;
use super::mlp::{MlpModel, MlpParams};
use super::normalize::NormalizationModel;
use super::svm::{PairMachine, SvmModel};
use super::{ClassifierKind, ClassifierModel, LearnError, TrainedModel};

const MAGIC: &str = "notimind-model v1";

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Serialize a trained model to the text format.
pub fn write_model<W: Write>(model: &TrainedModel, mut out: W) -> Result<(), LearnError> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "kind {}", model.kind().as_str())?;
    writeln!(out, "columns {}", model.columns.join(","))?;
    writeln!(out, "norm_mean {}", join(model.normalizer.means.iter().copied()))?;
    writeln!(out, "norm_std {}", join(model.normalizer.stds.iter().copied()))?;
    match &model.classifier {
        ClassifierModel::LogisticRegression(m) => {
            writeln!(out, "lr_shape {} {}", m.weights.nrows(), m.weights.ncols())?;
            for row in m.weights.rows() {
                writeln!(out, "lr_w {}", join(row.iter().copied()))?;
            }
            writeln!(out, "lr_b {}", join(m.bias.iter().copied()))?;
        }
        ClassifierModel::FeedForwardNet(m) => {
            let p = &m.params;
            writeln!(
                out,
                "ann_shape {} {} {}",
                p.w1.nrows(),
                p.w1.ncols(),
                p.w2.ncols()
            )?;
            for row in p.w1.rows() {
                writeln!(out, "ann_w1 {}", join(row.iter().copied()))?;
            }
            writeln!(out, "ann_b1 {}", join(p.b1.iter().copied()))?;
            for row in p.w2.rows() {
                writeln!(out, "ann_w2 {}", join(row.iter().copied()))?;
            }
            writeln!(out, "ann_b2 {}", join(p.b2.iter().copied()))?;
        }
        ClassifierModel::RbfSvm(m) => {
            writeln!(
                out,
                "svm_params gamma={} c={} fallback={} features={}",
                m.gamma,
                m.c,
                m.fallback.as_i8(),
                m.n_features
            )?;
            writeln!(out, "svm_machines {}", m.machines.len())?;
            for machine in &m.machines {
                writeln!(
                    out,
                    "machine {} {} {} {}",
                    machine.class_lo.as_i8(),
                    machine.class_hi.as_i8(),
                    machine.support_vectors.nrows(),
                    machine.bias
                )?;
                for (sv, &coef) in machine
                    .support_vectors
                    .rows()
                    .into_iter()
                    .zip(&machine.coefficients)
                {
                    writeln!(out, "sv {},{}", coef, join(sv.iter().copied()))?;
                }
            }
        }
    }
    Ok(())
}

struct Lines<R: BufRead> {
    reader: R,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<String, LearnError> {
        let mut buf = String::new();
        loop {
            buf.clear();
            self.line_no += 1;
            let n = self.reader.read_line(&mut buf)?;
            if n == 0 {
                return Err(LearnError::BadModelText {
                    line: self.line_no,
                    reason: "unexpected end of file".to_string(),
                });
            }
            let trimmed = buf.trim();
            if !trimmed.is_empty() {
                return Ok(trimmed.to_string());
            }
        }
    }

    fn expect_field(&mut self, key: &str) -> Result<String, LearnError> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.to_string()),
            _ => Err(LearnError::BadModelText {
                line: self.line_no,
                reason: format!("expected {key:?}, got {line:?}"),
            }),
        }
    }

    fn bad(&self, reason: impl Into<String>) -> LearnError {
        LearnError::BadModelText {
            line: self.line_no,
            reason: reason.into(),
        }
    }

    fn parse_floats(&self, raw: &str) -> Result<Vec<f64>, LearnError> {
        raw.split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| self.bad(format!("bad float list {raw:?}")))
    }
}

/// Load a model written by [`write_model`].
pub fn read_model<R: Read>(input: R) -> Result<TrainedModel, LearnError> {
    let mut lines = Lines {
        reader: BufReader::new(input),
        line_no: 0,
    };
    let magic = lines.next_line()?;
    if magic != MAGIC {
        return Err(lines.bad(format!("bad header {magic:?}")));
    }
    let kind_raw = lines.expect_field("kind")?;
    let kind = ClassifierKind::parse(&kind_raw)
        .ok_or_else(|| lines.bad(format!("unknown classifier kind {kind_raw:?}")))?;
    let columns: Vec<String> = lines
        .expect_field("columns")?
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    let means = {
        let raw = lines.expect_field("norm_mean")?;
        lines.parse_floats(&raw)?
    };
    let stds = {
        let raw = lines.expect_field("norm_std")?;
        lines.parse_floats(&raw)?
    };
    if means.len() != columns.len() || stds.len() != columns.len() {
        return Err(lines.bad("normalization arity differs from column count"));
    }
    let normalizer = NormalizationModel {
        columns: columns.clone(),
        means,
        stds,
    };

    let read_matrix = |lines: &mut Lines<BufReader<R>>,
                       key: &str,
                       rows: usize,
                       cols: usize|
     -> Result<Array2<f64>, LearnError> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let raw = lines.expect_field(key)?;
            let row = lines.parse_floats(&raw)?;
            if row.len() != cols {
                return Err(lines.bad(format!("expected {cols} values in {key} row")));
            }
            data.extend(row);
        }
        Ok(Array2::from_shape_vec((rows, cols), data).expect("shape matches"))
    };

    let classifier = match kind {
        ClassifierKind::Lr => {
            let shape = lines.expect_field("lr_shape")?;
            let (d, k) = parse_shape2(&lines, &shape)?;
            let weights = read_matrix(&mut lines, "lr_w", d, k)?;
            let bias_raw = lines.expect_field("lr_b")?;
            let bias = Array1::from_vec(lines.parse_floats(&bias_raw)?);
            if bias.len() != k {
                return Err(lines.bad("bias arity differs from class count"));
            }
            ClassifierModel::LogisticRegression(LogRegModel { weights, bias })
        }
        ClassifierKind::Ann => {
            let shape = lines.expect_field("ann_shape")?;
            let parts: Vec<usize> = shape
                .split_whitespace()
                .map(|v| v.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| lines.bad(format!("bad shape {shape:?}")))?;
            let [d, h, k] = parts.as_slice() else {
                return Err(lines.bad("ann_shape needs three sizes"));
            };
            let (d, h, k) = (*d, *h, *k);
            let w1 = read_matrix(&mut lines, "ann_w1", d, h)?;
            let b1_raw = lines.expect_field("ann_b1")?;
            let b1 = Array1::from_vec(lines.parse_floats(&b1_raw)?);
            let w2 = read_matrix(&mut lines, "ann_w2", h, k)?;
            let b2_raw = lines.expect_field("ann_b2")?;
            let b2 = Array1::from_vec(lines.parse_floats(&b2_raw)?);
            if b1.len() != h || b2.len() != k {
                return Err(lines.bad("bias arity differs from layer sizes"));
            }
            ClassifierModel::FeedForwardNet(MlpModel {
                params: MlpParams { w1, b1, w2, b2 },
            })
        }
        ClassifierKind::Svm => {
            let params = lines.expect_field("svm_params")?;
            let mut gamma = None;
            let mut c = None;
            let mut fallback = None;
            let mut features = None;
            for part in params.split_whitespace() {
                let (key, value) = part
                    .split_once('=')
                    .ok_or_else(|| lines.bad(format!("bad svm parameter {part:?}")))?;
                match key {
                    "gamma" => gamma = value.parse::<f64>().ok(),
                    "c" => c = value.parse::<f64>().ok(),
                    "fallback" => {
                        fallback = value.parse::<i8>().ok().and_then(AffectClass::from_i8)
                    }
                    "features" => features = value.parse::<usize>().ok(),
                    _ => return Err(lines.bad(format!("unknown svm parameter {key:?}"))),
                }
            }
            let (Some(gamma), Some(c), Some(fallback), Some(features)) =
                (gamma, c, fallback, features)
            else {
                return Err(lines.bad("incomplete svm parameters"));
            };
            let count = lines
                .expect_field("svm_machines")?
                .parse::<usize>()
                .map_err(|_| lines.bad("bad machine count"))?;
            let mut machines = Vec::with_capacity(count);
            for _ in 0..count {
                let header = lines.expect_field("machine")?;
                let parts: Vec<&str> = header.split_whitespace().collect();
                let [lo, hi, n_sv, bias] = parts.as_slice() else {
                    return Err(lines.bad("machine header needs four fields"));
                };
                let class_lo = lo
                    .parse::<i8>()
                    .ok()
                    .and_then(AffectClass::from_i8)
                    .ok_or_else(|| lines.bad("bad machine class"))?;
                let class_hi = hi
                    .parse::<i8>()
                    .ok()
                    .and_then(AffectClass::from_i8)
                    .ok_or_else(|| lines.bad("bad machine class"))?;
                let n_sv = n_sv
                    .parse::<usize>()
                    .map_err(|_| lines.bad("bad support count"))?;
                let bias = bias.parse::<f64>().map_err(|_| lines.bad("bad bias"))?;
                let mut coefficients = Vec::with_capacity(n_sv);
                let mut sv_data = Vec::with_capacity(n_sv * features);
                for _ in 0..n_sv {
                    let raw = lines.expect_field("sv")?;
                    let values = lines.parse_floats(&raw)?;
                    if values.len() != features + 1 {
                        return Err(lines.bad("support vector arity mismatch"));
                    }
                    coefficients.push(values[0]);
                    sv_data.extend_from_slice(&values[1..]);
                }
                machines.push(PairMachine {
                    class_lo,
                    class_hi,
                    support_vectors: Array2::from_shape_vec((n_sv, features), sv_data)
                        .expect("shape matches"),
                    coefficients: Array1::from_vec(coefficients),
                    bias,
                });
            }
            ClassifierModel::RbfSvm(SvmModel {
                gamma,
                c,
                machines,
                fallback,
                n_features: features,
            })
        }
    };
    Ok(TrainedModel {
        columns,
        normalizer,
        classifier,
    })
}

fn parse_shape2<R: BufRead>(lines: &Lines<R>, raw: &str) -> Result<(usize, usize), LearnError> {
    let parts: Vec<usize> = raw
        .split_whitespace()
        .map(|v| v.parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| lines.bad(format!("bad shape {raw:?}")))?;
    match parts.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(lines.bad("shape needs two sizes")),
    }
}
