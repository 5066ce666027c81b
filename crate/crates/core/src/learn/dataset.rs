//! The learning dataset: a dense feature matrix with class labels and
//! per-row user ids.

use ndarray::Array2;

use crate::panas::AffectClass;
use crate::segment::FeatureRow;

use super::LearnError;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Rows are segments, columns the selected features.
    pub features: Array2<f64>,
    pub labels: Vec<AffectClass>,
    pub user_ids: Vec<String>,
    pub columns: Vec<String>,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// Class labels as dense indices 0..3.
    pub fn label_indices(&self) -> Vec<usize> {
        self.labels.iter().map(|c| c.index()).collect()
    }

    /// Assemble a dataset from feature CSV rows, selecting the named
    /// rate columns.
    pub fn from_rows(rows: &[FeatureRow], columns: &[String]) -> Result<Dataset, LearnError> {
        if rows.is_empty() {
            return Err(LearnError::InvalidDataset("no rows".to_string()));
        }
        if columns.is_empty() {
            return Err(LearnError::InvalidDataset("no feature columns".to_string()));
        }
        let mut data = Vec::with_capacity(rows.len() * columns.len());
        for row in rows {
            for name in columns {
                data.push(
                    row.rate(name)
                        .ok_or_else(|| LearnError::UnknownColumn(name.clone()))?,
                );
            }
        }
        Ok(Dataset {
            features: Array2::from_shape_vec((rows.len(), columns.len()), data)
                .expect("shape matches construction"),
            labels: rows.iter().map(|r| r.class).collect(),
            user_ids: rows.iter().map(|r| r.user_id.clone()).collect(),
            columns: columns.to_vec(),
        })
    }

    /// Check the dataset invariants: consistent shapes, finite values,
    /// at least as many rows as classes, and every class present.
    pub fn validate(&self) -> Result<(), LearnError> {
        let n = self.n_rows();
        if self.labels.len() != n || self.user_ids.len() != n {
            return Err(LearnError::InvalidDataset(format!(
                "{} rows but {} labels and {} user ids",
                n,
                self.labels.len(),
                self.user_ids.len()
            )));
        }
        if self.columns.len() != self.n_features() {
            return Err(LearnError::InvalidDataset(
                "column name count differs from feature count".to_string(),
            ));
        }
        if self.features.iter().any(|v| !v.is_finite()) {
            return Err(LearnError::InvalidDataset(
                "feature matrix contains non-finite values".to_string(),
            ));
        }
        if n < AffectClass::ALL.len() {
            return Err(LearnError::InvalidDataset(format!(
                "{n} rows is fewer than the number of classes"
            )));
        }
        for class in AffectClass::ALL {
            if !self.labels.contains(&class) {
                return Err(LearnError::InvalidDataset(format!(
                    "class {} has no rows",
                    class.as_i8()
                )));
            }
        }
        Ok(())
    }

    /// Row subset in the given index order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut data = Vec::with_capacity(indices.len() * self.n_features());
        for &i in indices {
            data.extend(self.features.row(i).iter().copied());
        }
        Dataset {
            features: Array2::from_shape_vec((indices.len(), self.n_features()), data)
                .expect("shape matches construction"),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            user_ids: indices.iter().map(|&i| self.user_ids[i].clone()).collect(),
            columns: self.columns.clone(),
        }
    }

    /// Distinct user ids in sorted order.
    pub fn distinct_users(&self) -> Vec<String> {
        let mut users: Vec<String> = self.user_ids.clone();
        users.sort();
        users.dedup();
        users
    }
}
