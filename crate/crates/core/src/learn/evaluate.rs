//! The two cross-validation regimes and the evaluation report.
//!
//! Within-subject: every user gets their own stratified k-fold run (15
//! folds by default) and per-user fold means are averaged across users.
//! Global: all users pooled, evaluated leave-one-user-out. In both
//! regimes the normalizer is fit on the training rows of each fold only,
//! and every random choice derives from the master seed plus fold and
//! classifier indices, so parallel and serial runs produce identical
//! reports.

use std::io::Write;

use ndarray::ArrayView2;
use rayon::prelude::*;

use crate::seeding::{self, domain};
use crate::stats::{bonferroni, paired_t_test};

use super::dataset::Dataset;
use super::folds::{leave_one_user_out, stratified_kfold};
use super::metrics::{add_confusion, confusion_matrix, f_measure, Confusion};
use super::normalize::{fit_normalizer, NormalizationModel};
use super::svm::SmoSettings;
use super::{logreg, mlp, predict, svm};
use super::{ClassifierKind, ClassifierModel, LearnError};

/// Evaluation regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Per-user stratified 15-fold, averaged across users.
    WithinSubject15Fold,
    /// Pooled data, leave-one-user-out.
    GlobalLeaveOneUserOut,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::WithinSubject15Fold => "within",
            Regime::GlobalLeaveOneUserOut => "global",
        }
    }

    pub fn parse(s: &str) -> Option<Regime> {
        match s.to_ascii_lowercase().as_str() {
            "within" | "within-subject" | "within_subject" => Some(Regime::WithinSubject15Fold),
            "global" | "louo" | "leave-one-user-out" => Some(Regime::GlobalLeaveOneUserOut),
            _ => None,
        }
    }
}

/// Hyperparameters shared by all classifiers plus the master seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Hidden width for the net; default halfway between input and
    /// output size.
    pub hidden_size: Option<usize>,
    pub svm_c: f64,
    /// RBF width; default `1 / n_features`.
    pub svm_gamma: Option<f64>,
    pub kfold: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 500,
            learning_rate: 0.3,
            momentum: 0.2,
            hidden_size: None,
            svm_c: 1.0,
            svm_gamma: None,
            kfold: 15,
            seed: 0,
        }
    }
}

fn train_one(
    kind: ClassifierKind,
    x: ArrayView2<'_, f64>,
    y: &[usize],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<ClassifierModel, LearnError> {
    let d = x.ncols();
    Ok(match kind {
        ClassifierKind::Lr => ClassifierModel::LogisticRegression(logreg::train(
            x,
            y,
            cfg.epochs,
            cfg.learning_rate,
            seed,
        )?),
        ClassifierKind::Ann => ClassifierModel::FeedForwardNet(mlp::train(
            x,
            y,
            cfg.hidden_size.unwrap_or_else(|| mlp::default_hidden_size(d, 3)),
            cfg.epochs,
            cfg.learning_rate,
            cfg.momentum,
            seed,
        )?),
        ClassifierKind::Svm => ClassifierModel::RbfSvm(svm::train(
            x,
            y,
            cfg.svm_c,
            cfg.svm_gamma.unwrap_or(1.0 / d as f64),
            SmoSettings::default(),
        )?),
    })
}

/// One fold's macro F score.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    /// `user` for the global regime, `user/fold` for within-subject.
    pub label: String,
    pub f_macro: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierEvaluation {
    pub kind: ClassifierKind,
    pub folds: Vec<FoldOutcome>,
    /// Within-subject: mean of per-user means. Global: mean over folds.
    pub mean: f64,
    /// Sample standard deviation over the same units as `mean`.
    pub std: f64,
    /// Confusion counts aggregated over all folds.
    pub confusion: Confusion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseComparison {
    pub a: ClassifierKind,
    pub b: ClassifierKind,
    pub t: f64,
    pub p: f64,
    pub degenerate: bool,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub regime: Regime,
    pub evaluations: Vec<ClassifierEvaluation>,
    pub comparisons: Vec<PairwiseComparison>,
    pub bonferroni_threshold: f64,
    pub warnings: Vec<String>,
}

impl EvaluationReport {
    pub fn evaluation(&self, kind: ClassifierKind) -> Option<&ClassifierEvaluation> {
        self.evaluations.iter().find(|e| e.kind == kind)
    }
}

struct FoldTask {
    label: String,
    /// Within-subject tasks group by this key when averaging.
    group: String,
    train: Vec<usize>,
    test: Vec<usize>,
}

struct FoldResult {
    per_kind: Vec<(f64, Confusion)>,
}

fn run_fold(
    dataset: &Dataset,
    task: &FoldTask,
    task_idx: usize,
    kinds: &[ClassifierKind],
    cfg: &TrainConfig,
) -> Result<FoldResult, LearnError> {
    let annotate = |e: LearnError| LearnError::FoldFailed {
        fold: task.label.clone(),
        source: Box::new(e),
    };
    let train_sub = dataset.subset(&task.train);
    let test_sub = dataset.subset(&task.test);
    let normalizer: NormalizationModel =
        fit_normalizer(train_sub.features.view(), &dataset.columns).map_err(annotate)?;
    let x_train = normalizer.apply(train_sub.features.view());
    let x_test = normalizer.apply(test_sub.features.view());
    let y_train = train_sub.label_indices();
    let mut per_kind = Vec::with_capacity(kinds.len());
    for (kind_idx, &kind) in kinds.iter().enumerate() {
        let seed = seeding::derive_seed(
            cfg.seed,
            &[domain::MODEL_INIT, task_idx as u64, kind_idx as u64],
        );
        let model = train_one(kind, x_train.view(), &y_train, cfg, seed).map_err(annotate)?;
        let predicted = predict(&model, x_test.view()).map_err(annotate)?;
        let confusion = confusion_matrix(&test_sub.labels, &predicted).map_err(annotate)?;
        let f = f_measure(&confusion).map_err(annotate)?;
        per_kind.push((f.macro_f, confusion));
    }
    Ok(FoldResult { per_kind })
}

/// Run one full cross-validation regime over the dataset.
pub fn cross_validate(
    dataset: &Dataset,
    regime: Regime,
    kinds: &[ClassifierKind],
    cfg: &TrainConfig,
) -> Result<EvaluationReport, LearnError> {
    dataset.validate()?;
    if kinds.is_empty() {
        return Err(LearnError::InvalidDataset(
            "no classifiers requested".to_string(),
        ));
    }
    let mut warnings = Vec::new();
    let mut tasks = Vec::new();
    match regime {
        Regime::GlobalLeaveOneUserOut => {
            let assignment = leave_one_user_out(&dataset.user_ids)?;
            warnings.extend(assignment.warnings.iter().cloned());
            for fold in 0..assignment.k {
                tasks.push(FoldTask {
                    label: assignment.fold_labels[fold].clone(),
                    group: assignment.fold_labels[fold].clone(),
                    train: assignment.train_indices(fold),
                    test: assignment.test_indices(fold),
                });
            }
        }
        Regime::WithinSubject15Fold => {
            for (user_idx, user) in dataset.distinct_users().into_iter().enumerate() {
                let rows: Vec<usize> = dataset
                    .user_ids
                    .iter()
                    .enumerate()
                    .filter(|(_, u)| **u == user)
                    .map(|(i, _)| i)
                    .collect();
                if rows.len() < 2 {
                    warnings.push(format!("user {user}: fewer than 2 rows, skipped"));
                    continue;
                }
                let k = cfg.kfold.min(rows.len());
                if k < cfg.kfold {
                    warnings.push(format!(
                        "user {user}: only {} rows, fold count reduced to {k}",
                        rows.len()
                    ));
                }
                let labels: Vec<_> = rows.iter().map(|&i| dataset.labels[i]).collect();
                let fold_seed =
                    seeding::derive_seed(cfg.seed, &[domain::FOLDS, user_idx as u64]);
                let assignment = stratified_kfold(&labels, k, fold_seed)?;
                warnings.extend(assignment.warnings.iter().map(|w| format!("user {user}: {w}")));
                for fold in 0..assignment.k {
                    tasks.push(FoldTask {
                        label: format!("{user}/{fold}"),
                        group: user.clone(),
                        train: assignment.train_indices(fold).iter().map(|&i| rows[i]).collect(),
                        test: assignment.test_indices(fold).iter().map(|&i| rows[i]).collect(),
                    });
                }
            }
            if tasks.is_empty() {
                return Err(LearnError::InvalidDataset(
                    "no user had enough rows for within-subject folds".to_string(),
                ));
            }
        }
    }

    let results: Vec<FoldResult> = tasks
        .par_iter()
        .enumerate()
        .map(|(task_idx, task)| run_fold(dataset, task, task_idx, kinds, cfg))
        .collect::<Result<Vec<_>, _>>()?;

    let mut evaluations = Vec::with_capacity(kinds.len());
    for (kind_idx, &kind) in kinds.iter().enumerate() {
        let folds: Vec<FoldOutcome> = tasks
            .iter()
            .zip(&results)
            .map(|(task, res)| FoldOutcome {
                label: task.label.clone(),
                f_macro: res.per_kind[kind_idx].0,
            })
            .collect();
        let mut confusion: Confusion = [[0; 3]; 3];
        for res in &results {
            add_confusion(&mut confusion, &res.per_kind[kind_idx].1);
        }
        // Aggregate per group: users for within-subject, folds for global.
        let mut group_means: Vec<f64> = Vec::new();
        let mut current: Option<(&str, f64, usize)> = None;
        for (task, fold) in tasks.iter().zip(&folds) {
            match current.as_mut() {
                Some((group, sum, count)) if *group == task.group => {
                    *sum += fold.f_macro;
                    *count += 1;
                }
                _ => {
                    if let Some((_, sum, count)) = current.take() {
                        group_means.push(sum / count as f64);
                    }
                    current = Some((&task.group, fold.f_macro, 1));
                }
            }
        }
        if let Some((_, sum, count)) = current.take() {
            group_means.push(sum / count as f64);
        }
        let mean = group_means.iter().sum::<f64>() / group_means.len() as f64;
        let std = if group_means.len() < 2 {
            0.0
        } else {
            let ss: f64 = group_means.iter().map(|m| (m - mean).powi(2)).sum();
            (ss / (group_means.len() - 1) as f64).sqrt()
        };
        evaluations.push(ClassifierEvaluation {
            kind,
            folds,
            mean,
            std,
            confusion,
        });
    }

    // Pairwise paired t-tests over the per-fold scores, then the
    // Bonferroni decision at family alpha 0.05.
    let mut comparisons = Vec::new();
    let mut p_values = Vec::new();
    for i in 0..kinds.len() {
        for j in i + 1..kinds.len() {
            let a: Vec<f64> = evaluations[i].folds.iter().map(|f| f.f_macro).collect();
            let b: Vec<f64> = evaluations[j].folds.iter().map(|f| f.f_macro).collect();
            let test = paired_t_test(&a, &b)?;
            comparisons.push(PairwiseComparison {
                a: kinds[i],
                b: kinds[j],
                t: test.t,
                p: test.p,
                degenerate: test.degenerate,
                significant: false,
            });
            p_values.push(test.p);
        }
    }
    let outcome = bonferroni(&p_values, 0.05);
    for (comparison, &decision) in comparisons.iter_mut().zip(&outcome.decisions) {
        comparison.significant = decision;
    }

    Ok(EvaluationReport {
        regime,
        evaluations,
        comparisons,
        bonferroni_threshold: outcome.threshold,
        warnings,
    })
}

/// A deployable model: normalizer plus classifier, with its column list.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub columns: Vec<String>,
    pub normalizer: NormalizationModel,
    pub classifier: ClassifierModel,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        self.classifier.kind()
    }

    /// Predict on raw (unnormalized) feature rows.
    pub fn predict_raw(
        &self,
        rows: ArrayView2<'_, f64>,
    ) -> Result<Vec<crate::panas::AffectClass>, LearnError> {
        let normalized = self.normalizer.apply(rows);
        predict(&self.classifier, normalized.view())
    }
}

/// Fit the normalizer and one classifier on the full dataset.
pub fn train_full(
    dataset: &Dataset,
    kind: ClassifierKind,
    cfg: &TrainConfig,
) -> Result<TrainedModel, LearnError> {
    dataset.validate()?;
    let normalizer = fit_normalizer(dataset.features.view(), &dataset.columns)?;
    let x = normalizer.apply(dataset.features.view());
    let y = dataset.label_indices();
    let seed = seeding::derive_seed(cfg.seed, &[domain::MODEL_INIT, u64::MAX]);
    let classifier = train_one(kind, x.view(), &y, cfg, seed)?;
    Ok(TrainedModel {
        columns: dataset.columns.clone(),
        normalizer,
        classifier,
    })
}

/// `classifier,regime,fold,f_macro` rows for any number of reports.
pub fn write_folds_csv<W: Write>(
    reports: &[&EvaluationReport],
    out: W,
) -> Result<(), LearnError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["classifier", "regime", "fold", "f_macro"])
        .map_err(|e| LearnError::Io(std::io::Error::other(e)))?;
    for report in reports {
        for evaluation in &report.evaluations {
            for fold in &evaluation.folds {
                w.write_record([
                    evaluation.kind.as_str(),
                    report.regime.as_str(),
                    &fold.label,
                    &fold.f_macro.to_string(),
                ])
                .map_err(|e| LearnError::Io(std::io::Error::other(e)))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Fixed-layout summary block: one column per classifier, Average/STD
/// rows from the within-subject report and a Global row from the global
/// report, followed by the pairwise tests.
pub fn summary_text(reports: &[&EvaluationReport]) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let within = reports
        .iter()
        .find(|r| r.regime == Regime::WithinSubject15Fold);
    let global = reports
        .iter()
        .find(|r| r.regime == Regime::GlobalLeaveOneUserOut);
    let kinds: Vec<ClassifierKind> = reports
        .first()
        .map(|r| r.evaluations.iter().map(|e| e.kind).collect())
        .unwrap_or_default();

    let _ = write!(out, "{:<12}", "");
    for kind in &kinds {
        let _ = write!(out, "{:>9}", kind.display_name());
    }
    out.push('\n');
    if let Some(report) = within {
        let _ = write!(out, "{:<12}", "Average");
        for kind in &kinds {
            let value = report.evaluation(*kind).map_or(f64::NAN, |e| e.mean);
            let _ = write!(out, "{value:>9.3}");
        }
        out.push('\n');
        let _ = write!(out, "{:<12}", "STD");
        for kind in &kinds {
            let value = report.evaluation(*kind).map_or(f64::NAN, |e| e.std);
            let _ = write!(out, "{:>9}", format!("\u{b1}{value:.3}"));
        }
        out.push('\n');
    }
    if let Some(report) = global {
        let _ = write!(out, "{:<12}", "Global");
        for kind in &kinds {
            let value = report.evaluation(*kind).map_or(f64::NAN, |e| e.mean);
            let _ = write!(out, "{value:>9.3}");
        }
        out.push('\n');
    }
    for report in reports {
        if report.comparisons.is_empty() {
            continue;
        }
        let _ = write!(
            out,
            "\npairwise tests, {} regime (Bonferroni threshold {:.4}):\n",
            report.regime.as_str(),
            report.bonferroni_threshold
        );
        for cmp in &report.comparisons {
            let verdict = if cmp.significant {
                "significant"
            } else {
                "not significant"
            };
            let degenerate = if cmp.degenerate { " (degenerate)" } else { "" };
            let _ = writeln!(
                out,
                "  {} vs {}: t={:+.3} p={:.4} {}{}",
                cmp.a.display_name(),
                cmp.b.display_name(),
                cmp.t,
                cmp.p,
                verdict,
                degenerate
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panas::AffectClass;
    use ndarray::Array2;

    /// Dataset whose features encode the label exactly. The second
    /// column carries tiny row-parity jitter so it is never constant,
    /// but z-scoring leaves the class signal dominant in both columns.
    fn perfectly_informative(n_users: usize, rows_per_user: usize) -> Dataset {
        let n = n_users * rows_per_user;
        let mut features = Array2::zeros((n, 2));
        let mut labels = Vec::with_capacity(n);
        let mut user_ids = Vec::with_capacity(n);
        for u in 0..n_users {
            for r in 0..rows_per_user {
                let i = u * rows_per_user + r;
                let class = AffectClass::from_index(i % 3).unwrap();
                features[[i, 0]] = class.as_i8() as f64 * 4.0;
                features[[i, 1]] = class.as_i8() as f64 * -2.0 + 0.01 * (i % 2) as f64;
                labels.push(class);
                user_ids.push(format!("u{u:02}"));
            }
        }
        Dataset {
            features,
            labels,
            user_ids,
            columns: vec!["k_a".into(), "e_a".into()],
        }
    }

    #[test]
    fn informative_feature_scores_one_under_both_regimes() {
        let dataset = perfectly_informative(4, 18);
        let cfg = TrainConfig {
            kfold: 6,
            seed: 9,
            epochs: 2000,
            ..TrainConfig::default()
        };
        for regime in [Regime::GlobalLeaveOneUserOut, Regime::WithinSubject15Fold] {
            let report = cross_validate(
                &dataset,
                regime,
                &[ClassifierKind::Lr, ClassifierKind::Svm],
                &cfg,
            )
            .unwrap();
            for evaluation in &report.evaluations {
                assert!(
                    evaluation.mean > 0.999,
                    "{:?} {:?} mean {}",
                    regime,
                    evaluation.kind,
                    evaluation.mean
                );
            }
            // Identical scores make the comparison degenerate with p=1.
            assert!(report.comparisons[0].degenerate);
            assert_eq!(report.comparisons[0].p, 1.0);
        }
    }

    #[test]
    fn reports_are_deterministic_given_seed() {
        let dataset = perfectly_informative(3, 12);
        let cfg = TrainConfig {
            kfold: 4,
            epochs: 60,
            seed: 33,
            ..TrainConfig::default()
        };
        let kinds = [ClassifierKind::Ann, ClassifierKind::Lr];
        let a = cross_validate(&dataset, Regime::WithinSubject15Fold, &kinds, &cfg).unwrap();
        let b = cross_validate(&dataset, Regime::WithinSubject15Fold, &kinds, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn global_regime_has_one_fold_per_user() {
        let dataset = perfectly_informative(5, 9);
        let cfg = TrainConfig {
            epochs: 40,
            ..TrainConfig::default()
        };
        let report =
            cross_validate(&dataset, Regime::GlobalLeaveOneUserOut, &[ClassifierKind::Lr], &cfg)
                .unwrap();
        assert_eq!(report.evaluations[0].folds.len(), 5);
        assert!(report.comparisons.is_empty());
    }

    #[test]
    fn within_regime_reduces_folds_for_small_users() {
        let mut dataset = perfectly_informative(2, 30);
        // Give the second user only 6 rows.
        let keep: Vec<usize> = (0..36).collect();
        dataset = dataset.subset(&keep);
        let cfg = TrainConfig {
            kfold: 15,
            epochs: 40,
            seed: 2,
            ..TrainConfig::default()
        };
        let report =
            cross_validate(&dataset, Regime::WithinSubject15Fold, &[ClassifierKind::Lr], &cfg)
                .unwrap();
        assert!(report
            .warnings
            .iter()
            .any(|w| w.contains("fold count reduced")));
        // 15 folds for the first user plus 6 for the second.
        assert_eq!(report.evaluations[0].folds.len(), 21);
    }

    #[test]
    fn invalid_dataset_is_rejected() {
        let mut dataset = perfectly_informative(2, 9);
        dataset.labels.iter_mut().for_each(|l| *l = AffectClass::Neutral);
        let err = cross_validate(
            &dataset,
            Regime::GlobalLeaveOneUserOut,
            &[ClassifierKind::Lr],
            &TrainConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, LearnError::InvalidDataset(_)));
    }

    #[test]
    fn folds_csv_and_summary_have_expected_shape() {
        let dataset = perfectly_informative(3, 9);
        let cfg = TrainConfig {
            epochs: 40,
            kfold: 3,
            ..TrainConfig::default()
        };
        let kinds = [ClassifierKind::Lr];
        let within =
            cross_validate(&dataset, Regime::WithinSubject15Fold, &kinds, &cfg).unwrap();
        let global =
            cross_validate(&dataset, Regime::GlobalLeaveOneUserOut, &kinds, &cfg).unwrap();
        let mut buf = Vec::new();
        write_folds_csv(&[&within, &global], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("classifier,regime,fold,f_macro\n"));
        // 3 users x 3 folds + 3 global folds.
        assert_eq!(text.lines().count(), 1 + 9 + 3);

        let summary = summary_text(&[&within, &global]);
        assert!(summary.contains("Average"));
        assert!(summary.contains("Global"));
        assert!(summary.contains("LR"));
    }

    #[test]
    fn trained_model_round_trips_raw_rows() {
        let dataset = perfectly_informative(3, 9);
        let cfg = TrainConfig {
            epochs: 200,
            ..TrainConfig::default()
        };
        let model = train_full(&dataset, ClassifierKind::Lr, &cfg).unwrap();
        let predicted = model.predict_raw(dataset.features.view()).unwrap();
        let correct = predicted
            .iter()
            .zip(&dataset.labels)
            .filter(|(p, t)| p == t)
            .count();
        assert_eq!(correct, dataset.n_rows());
    }
}
