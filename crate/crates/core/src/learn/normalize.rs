//! Z-score normalization fit on training rows only.

use ndarray::{Array2, ArrayView2};

use super::LearnError;

/// Per-column mean and sample standard deviation learned from training
/// rows. Applying the model to its own training rows yields mean 0 and
/// std 1 per column.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationModel {
    pub columns: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Fit a normalizer; constant columns are rejected by name.
pub fn fit_normalizer(
    rows: ArrayView2<'_, f64>,
    columns: &[String],
) -> Result<NormalizationModel, LearnError> {
    let n = rows.nrows();
    if n == 0 {
        return Err(LearnError::InvalidDataset(
            "cannot fit a normalizer on zero rows".to_string(),
        ));
    }
    if columns.len() != rows.ncols() {
        return Err(LearnError::InvalidDataset(
            "column name count differs from feature count".to_string(),
        ));
    }
    let mut means = Vec::with_capacity(rows.ncols());
    let mut stds = Vec::with_capacity(rows.ncols());
    for (j, name) in columns.iter().enumerate() {
        let col = rows.column(j);
        let mean = col.sum() / n as f64;
        let ss: f64 = col.iter().map(|v| (v - mean).powi(2)).sum();
        let std = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
        if std == 0.0 {
            return Err(LearnError::ConstantColumn(name.clone()));
        }
        means.push(mean);
        stds.push(std);
    }
    Ok(NormalizationModel {
        columns: columns.to_vec(),
        means,
        stds,
    })
}

impl NormalizationModel {
    pub fn apply(&self, rows: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = rows.to_owned();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (m, s) = (self.means[j], self.stds[j]);
            col.mapv_inplace(|v| (v - m) / s);
        }
        out
    }
}
