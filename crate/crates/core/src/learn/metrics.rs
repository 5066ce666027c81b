//! Confusion matrices and the macro F-measure.

use crate::panas::AffectClass;

use super::LearnError;

/// 3x3 confusion counts, rows = actual class, columns = predicted class,
/// both in class order negative / neutral / positive.
pub type Confusion = [[u64; 3]; 3];

pub fn confusion_matrix(
    actual: &[AffectClass],
    predicted: &[AffectClass],
) -> Result<Confusion, LearnError> {
    if actual.len() != predicted.len() {
        return Err(LearnError::LengthMismatch(actual.len(), predicted.len()));
    }
    let mut m: Confusion = [[0; 3]; 3];
    for (a, p) in actual.iter().zip(predicted) {
        m[a.index()][p.index()] += 1;
    }
    Ok(m)
}

pub fn add_confusion(into: &mut Confusion, other: &Confusion) {
    for (row, src) in into.iter_mut().zip(other) {
        for (cell, v) in row.iter_mut().zip(src) {
            *cell += v;
        }
    }
}

/// Per-class one-vs-rest precision/recall/F plus the unweighted macro
/// average. A class with zero predictions gets precision 0, a class with
/// zero actual rows gets recall 0; a class absent on both sides is
/// flagged and contributes F = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FMeasure {
    pub precision: [f64; 3],
    pub recall: [f64; 3],
    pub per_class: [f64; 3],
    pub macro_f: f64,
    /// Class had neither actual nor predicted rows.
    pub absent: [bool; 3],
}

pub fn f_measure(confusion: &Confusion) -> Result<FMeasure, LearnError> {
    let total: u64 = confusion.iter().flatten().sum();
    if total == 0 {
        return Err(LearnError::EmptyConfusion);
    }
    let mut precision = [0.0; 3];
    let mut recall = [0.0; 3];
    let mut per_class = [0.0; 3];
    let mut absent = [false; 3];
    for c in 0..3 {
        let tp = confusion[c][c] as f64;
        let predicted: u64 = (0..3).map(|r| confusion[r][c]).sum();
        let actual: u64 = confusion[c].iter().sum();
        absent[c] = predicted == 0 && actual == 0;
        precision[c] = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
        recall[c] = if actual == 0 { 0.0 } else { tp / actual as f64 };
        let denom = precision[c] + recall[c];
        per_class[c] = if denom == 0.0 {
            0.0
        } else {
            2.0 * precision[c] * recall[c] / denom
        };
    }
    Ok(FMeasure {
        precision,
        recall,
        per_class,
        macro_f: per_class.iter().sum::<f64>() / 3.0,
        absent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_diagonal_scores_one() {
        let m: Confusion = [[10, 0, 0], [0, 7, 0], [0, 0, 3]];
        let f = f_measure(&m).unwrap();
        assert_eq!(f.per_class, [1.0, 1.0, 1.0]);
        assert_eq!(f.macro_f, 1.0);
    }

    #[test]
    fn precision_half_recall_one_gives_two_thirds() {
        // Class 0: all 10 actual rows found (recall 1.0) but 10 extra
        // predictions from class 1 (precision 0.5).
        let m: Confusion = [[10, 0, 0], [10, 0, 10], [0, 0, 20]];
        let f = f_measure(&m).unwrap();
        assert!((f.precision[0] - 0.5).abs() < 1e-12);
        assert!((f.recall[0] - 1.0).abs() < 1e-12);
        assert!((f.per_class[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn all_one_class_on_balanced_truth_gives_macro_one_sixth() {
        let m: Confusion = [[10, 0, 0], [10, 0, 0], [10, 0, 0]];
        let f = f_measure(&m).unwrap();
        assert!((f.per_class[0] - 0.5).abs() < 1e-12);
        assert_eq!(f.per_class[1], 0.0);
        assert_eq!(f.per_class[2], 0.0);
        assert!((f.macro_f - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn absent_class_is_flagged_zero() {
        let m: Confusion = [[5, 0, 0], [0, 5, 0], [0, 0, 0]];
        let f = f_measure(&m).unwrap();
        assert!(f.absent[2]);
        assert_eq!(f.per_class[2], 0.0);
    }

    #[test]
    fn empty_confusion_is_an_error() {
        let m: Confusion = [[0; 3]; 3];
        assert!(matches!(f_measure(&m), Err(LearnError::EmptyConfusion)));
    }

    #[test]
    fn f_lies_between_precision_and_recall() {
        let m: Confusion = [[8, 2, 1], [3, 9, 2], [1, 1, 12]];
        let f = f_measure(&m).unwrap();
        for c in 0..3 {
            let lo = f.precision[c].min(f.recall[c]);
            let hi = f.precision[c].max(f.recall[c]);
            assert!(f.per_class[c] >= lo - 1e-12 && f.per_class[c] <= hi + 1e-12);
        }
    }

    #[test]
    fn confusion_from_labels() {
        use AffectClass::*;
        let m = confusion_matrix(&[Negative, Neutral, Positive], &[Negative, Positive, Positive])
            .unwrap();
        assert_eq!(m[0][0], 1);
        assert_eq!(m[1][2], 1);
        assert_eq!(m[2][2], 1);
        assert!(confusion_matrix(&[Negative], &[]).is_err());
    }
}
