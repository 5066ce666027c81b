//! Classifier training and evaluation: z-score normalization, softmax
//! regression, a one-hidden-layer feed-forward net trained by
//! backpropagation with momentum, a one-vs-one RBF-SVM trained by SMO,
//! the two cross-validation regimes, and macro F-measure scoring.

mod dataset;
mod evaluate;
mod folds;
pub mod logreg;
mod metrics;
pub mod mlp;
mod model_io;
mod normalize;
pub mod svm;

pub use dataset::Dataset;
pub use evaluate::{
    cross_validate, summary_text, train_full, write_folds_csv, ClassifierEvaluation,
    EvaluationReport, FoldOutcome, PairwiseComparison, Regime, TrainConfig, TrainedModel,
};
pub use folds::{leave_one_user_out, stratified_kfold, FoldAssignment};
pub use logreg::LogRegModel;
pub use metrics::{add_confusion, confusion_matrix, f_measure, Confusion, FMeasure};
pub use mlp::{default_hidden_size, MlpModel, MlpParams};
pub use model_io::{read_model, write_model};
pub use normalize::{fit_normalizer, NormalizationModel};
pub use svm::{PairMachine, SmoOutcome, SvmModel};

use thiserror::Error;

use crate::panas::AffectClass;

/// The three classifier families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassifierKind {
    /// Feed-forward neural network.
    Ann,
    /// RBF-kernel support vector machine.
    Svm,
    /// Softmax logistic regression.
    Lr,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] =
        [ClassifierKind::Ann, ClassifierKind::Svm, ClassifierKind::Lr];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Ann => "ann",
            ClassifierKind::Svm => "svm",
            ClassifierKind::Lr => "lr",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ClassifierKind::Ann => "ANN",
            ClassifierKind::Svm => "SVM",
            ClassifierKind::Lr => "LR",
        }
    }

    pub fn parse(s: &str) -> Option<ClassifierKind> {
        match s.to_ascii_lowercase().as_str() {
            "ann" | "mlp" | "nn" => Some(ClassifierKind::Ann),
            "svm" => Some(ClassifierKind::Svm),
            "lr" | "logreg" => Some(ClassifierKind::Lr),
            _ => None,
        }
    }
}

/// A trained classifier of any family. Prediction expects rows already
/// normalized the same way as the training data.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierModel {
    LogisticRegression(LogRegModel),
    FeedForwardNet(MlpModel),
    RbfSvm(SvmModel),
}

impl ClassifierModel {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            ClassifierModel::LogisticRegression(_) => ClassifierKind::Lr,
            ClassifierModel::FeedForwardNet(_) => ClassifierKind::Ann,
            ClassifierModel::RbfSvm(_) => ClassifierKind::Svm,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            ClassifierModel::LogisticRegression(m) => m.n_features(),
            ClassifierModel::FeedForwardNet(m) => m.n_features(),
            ClassifierModel::RbfSvm(m) => m.n_features(),
        }
    }
}

/// Predict one class per row; rows must have the model's feature arity.
pub fn predict(
    model: &ClassifierModel,
    rows: ndarray::ArrayView2<'_, f64>,
) -> Result<Vec<AffectClass>, LearnError> {
    let expected = model.n_features();
    if rows.ncols() != expected && rows.nrows() > 0 {
        return Err(LearnError::ArityMismatch {
            expected,
            got: rows.ncols(),
        });
    }
    Ok(match model {
        ClassifierModel::LogisticRegression(m) => m.predict(rows),
        ClassifierModel::FeedForwardNet(m) => m.predict(rows),
        ClassifierModel::RbfSvm(m) => m.predict(rows),
    })
}

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("dataset is invalid: {0}")]
    InvalidDataset(String),
    #[error("unknown feature column {0:?}")]
    UnknownColumn(String),
    #[error("column {0:?} is constant on the training rows")]
    ConstantColumn(String),
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("SMO did not converge for pair {pair} within {passes} passes")]
    NoConvergence { pair: String, passes: usize },
    #[error("expected {expected} features, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("{rows} rows cannot fill {k} folds")]
    TooFewRows { rows: usize, k: usize },
    #[error("fold count must be at least 2, got {0}")]
    TooFewFolds(usize),
    #[error("leave-one-user-out needs at least 2 distinct users")]
    SingleUser,
    #[error("confusion matrix has no observations")]
    EmptyConfusion,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("fold {fold}: {source}")]
    FoldFailed {
        fold: String,
        #[source]
        source: Box<LearnError>,
    },
    #[error("model file line {line}: {reason}")]
    BadModelText { line: usize, reason: String },
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
