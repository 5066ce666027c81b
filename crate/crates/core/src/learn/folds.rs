//! Cross-validation fold assignment: seeded stratified k-fold and
//! leave-one-user-out.

use rand::seq::SliceRandom;

use crate::panas::AffectClass;
use crate::seeding::{self, domain};

use super::LearnError;

/// A complete fold assignment: every row belongs to exactly one test
/// fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldAssignment {
    pub k: usize,
    /// Test fold index per row.
    pub fold_of_row: Vec<usize>,
    /// Human-readable label per fold (fold number, or user id for
    /// leave-one-user-out).
    pub fold_labels: Vec<String>,
    pub warnings: Vec<String>,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        self.fold_of_row
            .iter()
            .enumerate()
            .filter(|(_, &f)| f == fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        self.fold_of_row
            .iter()
            .enumerate()
            .filter(|(_, &f)| f != fold)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Stratified k-fold: rows of each class are shuffled with the seeded
/// RNG and dealt round-robin over the folds through a running pointer,
/// so every fold holds each class's share within one row and the fold
/// sizes differ by at most one.
pub fn stratified_kfold(
    labels: &[AffectClass],
    k: usize,
    seed: u64,
) -> Result<FoldAssignment, LearnError> {
    if k < 2 {
        return Err(LearnError::TooFewFolds(k));
    }
    if labels.len() < k {
        return Err(LearnError::TooFewRows {
            rows: labels.len(),
            k,
        });
    }
    let mut rng = seeding::rng(seed, &[domain::FOLDS]);
    let mut warnings = Vec::new();
    let mut fold_of_row = vec![0usize; labels.len()];
    let mut next_fold = 0usize;
    for class in AffectClass::ALL {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < k {
            warnings.push(format!(
                "class {} has {} rows for {} folds; some folds get none",
                class.as_i8(),
                members.len(),
                k
            ));
        }
        members.shuffle(&mut rng);
        for row in members {
            fold_of_row[row] = next_fold;
            next_fold = (next_fold + 1) % k;
        }
    }
    Ok(FoldAssignment {
        k,
        fold_of_row,
        fold_labels: (0..k).map(|f| f.to_string()).collect(),
        warnings,
    })
}

/// One fold per distinct user, in sorted user order.
pub fn leave_one_user_out(user_ids: &[String]) -> Result<FoldAssignment, LearnError> {
    let mut users: Vec<&String> = user_ids.iter().collect();
    users.sort();
    users.dedup();
    if users.len() < 2 {
        return Err(LearnError::SingleUser);
    }
    let fold_of_row = user_ids
        .iter()
        .map(|u| users.binary_search(&u).expect("user present"))
        .collect();
    Ok(FoldAssignment {
        k: users.len(),
        fold_of_row,
        fold_labels: users.into_iter().cloned().collect(),
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use AffectClass::*;

    fn check_invariants(labels: &[AffectClass], assignment: &FoldAssignment) {
        // Every row in exactly one test fold.
        assert_eq!(assignment.fold_of_row.len(), labels.len());
        let mut seen = vec![false; labels.len()];
        for fold in 0..assignment.k {
            for i in assignment.test_indices(fold) {
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        // Per-fold class counts within +-1 of the even share.
        for class in AffectClass::ALL {
            let total = labels.iter().filter(|&&l| l == class).count();
            let share = total as f64 / assignment.k as f64;
            for fold in 0..assignment.k {
                let in_fold = assignment
                    .test_indices(fold)
                    .iter()
                    .filter(|&&i| labels[i] == class)
                    .count();
            assert!(
                    (in_fold as f64 - share).abs() <= 1.0 + 1e-9,
                    "class {:?} fold {} has {} of {} (share {})",
                    class,
                    fold,
                    in_fold,
                    total,
                    share
                );
            }
        }
    }

    #[test]
    fn thirty_rows_three_classes_fifteen_folds() {
        let labels: Vec<AffectClass> = [Negative, Neutral, Positive]
            .iter()
            .flat_map(|&c| std::iter::repeat_n(c, 10))
            .collect();
        let a = stratified_kfold(&labels, 15, 7).unwrap();
        check_invariants(&labels, &a);
        for fold in 0..15 {
            assert_eq!(a.test_indices(fold).len(), 2);
        }
        assert!(!a.warnings.is_empty());
    }

    #[test]
    fn k_equals_n_is_leave_one_out() {
        let labels = vec![Negative, Neutral, Positive, Positive, Neutral];
        let a = stratified_kfold(&labels, 5, 3).unwrap();
        check_invariants(&labels, &a);
        for fold in 0..5 {
            assert_eq!(a.test_indices(fold).len(), 1);
        }
    }

    #[test]
    fn different_seeds_differ_but_both_valid() {
        let labels: Vec<AffectClass> = (0..60)
            .map(|i| AffectClass::from_index(i % 3).unwrap())
            .collect();
        let a = stratified_kfold(&labels, 10, 1).unwrap();
        let b = stratified_kfold(&labels, 10, 2).unwrap();
        assert_ne!(a.fold_of_row, b.fold_of_row);
        check_invariants(&labels, &a);
        check_invariants(&labels, &b);
        let again = stratified_kfold(&labels, 10, 1).unwrap();
        assert_eq!(a.fold_of_row, again.fold_of_row);
    }

    #[test]
    fn too_few_rows_is_an_error() {
        let labels = vec![Negative, Positive];
        assert!(matches!(
            stratified_kfold(&labels, 15, 0),
            Err(LearnError::TooFewRows { rows: 2, k: 15 })
        ));
        assert!(matches!(
            stratified_kfold(&labels, 1, 0),
            Err(LearnError::TooFewFolds(1))
        ));
    }

    #[test]
    fn louo_one_fold_per_user() {
        let users: Vec<String> = ["u2", "u1", "u2", "u3", "u1"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let a = leave_one_user_out(&users).unwrap();
        assert_eq!(a.k, 3);
        assert_eq!(a.fold_labels, vec!["u1", "u2", "u3"]);
        // Each user's rows all land in that user's fold.
        for (row, user) in users.iter().enumerate() {
            let fold = a.fold_of_row[row];
            assert_eq!(&a.fold_labels[fold], user);
        }
    }

    #[test]
    fn louo_two_users_train_on_each_other() {
        let users: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let a = leave_one_user_out(&users).unwrap();
        assert_eq!(a.train_indices(0), vec![1]);
        assert_eq!(a.train_indices(1), vec![0]);
    }

    #[test]
    fn single_user_is_an_error() {
        let users: Vec<String> = vec!["only".to_string(); 4];
        assert!(matches!(leave_one_user_out(&users), Err(LearnError::SingleUser)));
    }
}
