//! Correlation analysis and classifier comparison machinery: Pearson
//! correlations with t-transform p-values, feature selection, the paired
//! t-test over per-fold scores, and the Bonferroni adjustment.

use std::io::Write;

use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::seeding;
use crate::segment::RATE_FEATURE_NAMES;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("constant input has no defined correlation")]
    ConstantInput,
    #[error("unknown feature name {0:?}")]
    UnknownFeatureName(String),
    #[error("csv write failed: {0}")]
    CsvWrite(String),
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewSamples {
            need: 3,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    Ok(cov / (var_x * var_y).sqrt())
}

/// Two-sided p-value for a t statistic with `df` degrees of freedom.
pub fn two_sided_p_from_t(t: f64, df: usize) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("valid dof");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

/// p-value for a correlation via the t-transform with `n - 2` degrees of
/// freedom.
fn correlation_p(r: f64, n: usize) -> f64 {
    let denom = 1.0 - r * r;
    if denom <= 0.0 {
        return 0.0;
    }
    let t = r * ((n - 2) as f64 / denom).sqrt();
    two_sided_p_from_t(t, n - 2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub feature: String,
    pub r: f64,
    pub p: f64,
    pub n: usize,
    /// The column was constant; `r` is reported as 0 by convention.
    pub constant: bool,
}

/// Per-feature correlations against the score, sorted by descending `r`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrelationReport {
    pub rows: Vec<CorrelationRow>,
}

impl CorrelationReport {
    pub fn row(&self, feature: &str) -> Option<&CorrelationRow> {
        self.rows.iter().find(|row| row.feature == feature)
    }
}

/// Correlate every named column with the score vector. Constant columns
/// are flagged rather than failing the whole table.
pub fn correlation_table(
    columns: &[(String, Vec<f64>)],
    scores: &[f64],
) -> Result<CorrelationReport, StatsError> {
    if scores.len() < 3 {
        return Err(StatsError::TooFewSamples {
            need: 3,
            got: scores.len(),
        });
    }
    let mut rows = Vec::with_capacity(columns.len());
    for (name, values) in columns {
        match pearson(values, scores) {
            Ok(r) => rows.push(CorrelationRow {
                feature: name.clone(),
                r,
                p: correlation_p(r, scores.len()),
                n: scores.len(),
                constant: false,
            }),
            Err(StatsError::ConstantInput) => rows.push(CorrelationRow {
                feature: name.clone(),
                r: 0.0,
                p: 1.0,
                n: scores.len(),
                constant: true,
            }),
            Err(other) => return Err(other),
        }
    }
    rows.sort_by(|a, b| {
        b.r.partial_cmp(&a.r)
            .expect("finite r")
            .then_with(|| a.feature.cmp(&b.feature))
    });
    Ok(CorrelationReport { rows })
}

/// The nine-feature default selection, strongest correlations first:
/// keyboard-out, emoji, remove, work, post, group, multi, screen-on,
/// unlock. Screen-off stays out to avoid collinearity with screen-on.
pub const SELECTED_FEATURES: [&str; 9] = [
    "k_a", "e_a", "r_a", "w_a", "p_a", "g_a", "m_a", "o_a", "u_a",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelectionMode {
    /// The fixed nine-feature list.
    Default,
    /// Keep features with `|r| >= threshold`, strongest first.
    Threshold(f64),
}

/// Select feature columns from a correlation report covering all eleven
/// rate features.
pub fn select_features(
    report: &CorrelationReport,
    mode: SelectionMode,
) -> Result<Vec<String>, StatsError> {
    for name in RATE_FEATURE_NAMES {
        if report.row(name).is_none() {
            return Err(StatsError::UnknownFeatureName(name.to_string()));
        }
    }
    match mode {
        SelectionMode::Default => Ok(SELECTED_FEATURES.iter().map(|s| s.to_string()).collect()),
        SelectionMode::Threshold(tau) => Ok(report
            .rows
            .iter()
            .filter(|row| !row.constant && row.r.abs() >= tau)
            .map(|row| row.feature.clone())
            .collect()),
    }
}

/// Paired t-test result. When every difference is identical the test is
/// degenerate: p is 1 for a zero mean difference and 0 otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTTest {
    pub t: f64,
    pub df: usize,
    pub p: f64,
    pub mean_diff: f64,
    pub degenerate: bool,
}

/// Two-sided paired t-test on elementwise differences `a - b`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(StatsError::TooFewSamples {
            need: 2,
            got: a.len(),
        });
    }
    let n = a.len();
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let ss: f64 = diffs.iter().map(|d| (d - mean).powi(2)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    if sd == 0.0 {
        return Ok(PairedTTest {
            t: if mean == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(mean)
            },
            df: n - 1,
            p: if mean == 0.0 { 1.0 } else { 0.0 },
            mean_diff: mean,
            degenerate: true,
        });
    }
    let t = mean / (sd / (n as f64).sqrt());
    Ok(PairedTTest {
        t,
        df: n - 1,
        p: two_sided_p_from_t(t, n - 1),
        mean_diff: mean,
        degenerate: false,
    })
}

/// Sign-flip permutation version of the paired test, for validating the
/// parametric p-value. Flipping signs keeps the sum of squared
/// differences fixed, so comparing absolute mean differences is exactly
/// equivalent to comparing absolute t statistics.
pub fn paired_t_test_permutation(
    a: &[f64],
    b: &[f64],
    shuffles: usize,
    seed: u64,
) -> Result<f64, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(StatsError::TooFewSamples {
            need: 2,
            got: a.len(),
        });
    }
    use rand::RngExt;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let observed = diffs.iter().sum::<f64>().abs() / diffs.len() as f64;
    let mut rng = seeding::rng(seed, &[0x7e57]);
    let mut at_least_as_extreme = 0usize;
    for _ in 0..shuffles {
        let sum: f64 = diffs
            .iter()
            .map(|&d| if rng.random::<bool>() { d } else { -d })
            .sum();
        if (sum.abs() / diffs.len() as f64) >= observed - 1e-15 {
            at_least_as_extreme += 1;
        }
    }
    Ok((at_least_as_extreme + 1) as f64 / (shuffles + 1) as f64)
}

/// Bonferroni-adjusted decisions for a family of p-values.
#[derive(Debug, Clone, PartialEq)]
pub struct BonferroniOutcome {
    pub family_alpha: f64,
    /// `family_alpha / m` for `m` comparisons.
    pub threshold: f64,
    /// One decision per input p-value: significant iff `p < threshold`.
    pub decisions: Vec<bool>,
}

pub fn bonferroni(p_values: &[f64], family_alpha: f64) -> BonferroniOutcome {
    let m = p_values.len().max(1);
    let threshold = family_alpha / m as f64;
    BonferroniOutcome {
        family_alpha,
        threshold,
        decisions: p_values.iter().map(|&p| p < threshold).collect(),
    }
}

/// Write a correlation report as `feature,r,p,n` CSV.
pub fn write_correlation_csv<W: Write>(
    report: &CorrelationReport,
    out: W,
) -> Result<(), StatsError> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| StatsError::CsvWrite(e.to_string());
    w.write_record(["feature", "r", "p", "n"]).map_err(fail)?;
    for row in &report.rows {
        w.write_record([
            row.feature.clone(),
            row.r.to_string(),
            row.p.to_string(),
            row.n.to_string(),
        ])
        .map_err(fail)?;
    }
    w.flush().map_err(|e| StatsError::CsvWrite(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_known_values() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-12);

        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-12);

        let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pearson_is_symmetric_and_affine_invariant() {
        let x = [0.3, -1.2, 2.5, 0.0, 4.4];
        let y = [1.0, 0.2, -0.7, 3.3, 2.0];
        let a = pearson(&x, &y).unwrap();
        let b = pearson(&y, &x).unwrap();
        assert!((a - b).abs() < 1e-12);
        let scaled: Vec<f64> = x.iter().map(|v| -3.0 * v + 7.0).collect();
        assert!((pearson(&x, &scaled).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0]),
            Err(StatsError::LengthMismatch(2, 1))
        );
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::TooFewSamples { need: 3, got: 2 })
        );
        assert_eq!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::ConstantInput)
        );
    }

    #[test]
    fn correlation_table_orders_by_descending_r() {
        let scores = vec![1.0, 2.0, 3.0, 4.0];
        let columns = vec![
            ("negated".to_string(), scores.iter().map(|v| -v).collect()),
            ("same".to_string(), scores.clone()),
        ];
        let report = correlation_table(&columns, &scores).unwrap();
        assert_eq!(report.rows[0].feature, "same");
        assert!((report.rows[0].r - 1.0).abs() < 1e-12);
        assert!((report.rows[1].r + 1.0).abs() < 1e-12);
        assert!(report.rows[0].p < 1e-6);
    }

    #[test]
    fn constant_column_is_flagged_not_fatal() {
        let scores = vec![1.0, 2.0, 3.0, 4.0];
        let columns = vec![("flat".to_string(), vec![5.0; 4])];
        let report = correlation_table(&columns, &scores).unwrap();
        assert!(report.rows[0].constant);
        assert_eq!(report.rows[0].r, 0.0);
    }

    fn table5_like_report() -> CorrelationReport {
        let values = [
            ("k_a", 0.46),
            ("e_a", 0.35),
            ("m_a", 0.22),
            ("p_a", 0.13),
            ("o_a", 0.09),
            ("r_a", 0.08),
            ("u_a", -0.07),
            ("g_a", -0.08),
            ("f_a", -0.2),
            ("s_a", -0.3),
            ("w_a", -0.35),
        ];
        CorrelationReport {
            rows: values
                .iter()
                .map(|&(f, r)| CorrelationRow {
                    feature: f.to_string(),
                    r,
                    p: 0.001,
                    n: 3000,
                    constant: false,
                })
                .collect(),
        }
    }

    #[test]
    fn default_selection_is_the_fixed_nine() {
        let selected = select_features(&table5_like_report(), SelectionMode::Default).unwrap();
        assert_eq!(selected, SELECTED_FEATURES.map(String::from).to_vec());
    }

    #[test]
    fn threshold_selection() {
        let report = table5_like_report();
        let selected = select_features(&report, SelectionMode::Threshold(0.33)).unwrap();
        assert_eq!(selected, vec!["k_a", "e_a", "w_a"]);
        let none = select_features(&report, SelectionMode::Threshold(1.1)).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn selection_requires_full_rate_coverage() {
        let mut report = table5_like_report();
        report.rows.retain(|row| row.feature != "w_a");
        assert_eq!(
            select_features(&report, SelectionMode::Default),
            Err(StatsError::UnknownFeatureName("w_a".to_string()))
        );
    }

    #[test]
    fn paired_t_degenerate_cases() {
        let a = [0.5, 0.6, 0.7];
        let t = paired_t_test(&a, &a).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.p, 1.0);

        let b: Vec<f64> = a.iter().map(|v| v - 0.1).collect();
        let t = paired_t_test(&a, &b).unwrap();
        assert!(t.degenerate);
        assert_eq!(t.p, 0.0);
        assert!(t.mean_diff > 0.0);
    }

    #[test]
    fn paired_t_hand_computed_example() {
        // diffs 0.02, -0.01, 0.03, 0.00, 0.01 -> t = 1.41421, p = 0.23020
        let a = [0.72, 0.69, 0.73, 0.70, 0.71];
        let b = [0.70, 0.70, 0.70, 0.70, 0.70];
        let t = paired_t_test(&a, &b).unwrap();
        assert!((t.t - std::f64::consts::SQRT_2).abs() < 1e-6, "t = {}", t.t);
        assert!((t.p - 0.230_199_64).abs() < 1e-6, "p = {}", t.p);
        // Two-sided symmetry.
        let swapped = paired_t_test(&b, &a).unwrap();
        assert!((t.p - swapped.p).abs() < 1e-12);
    }

    #[test]
    fn t_table_cross_check() {
        // t = 2.776 at 4 dof is the classic two-sided 5% critical value.
        assert!((two_sided_p_from_t(2.776, 4) - 0.05).abs() < 2e-4);
    }

    #[test]
    fn permutation_test_agrees_with_parametric() {
        use rand::RngExt;
        let mut rng = crate::seeding::rng(97, &[1]);
        for case in 0..4u64 {
            let n = 12 + 3 * case as usize;
            let a: Vec<f64> = (0..n)
                .map(|_| 0.72 + 0.03 * rng.random::<f64>() - 0.015 + 0.01)
                .collect();
            let b: Vec<f64> = (0..n).map(|_| 0.72 + 0.03 * rng.random::<f64>() - 0.015).collect();
            let parametric = paired_t_test(&a, &b).unwrap().p;
            let permuted = paired_t_test_permutation(&a, &b, 10_000, 1234 + case).unwrap();
            assert!(
                (parametric - permuted).abs() < 0.02,
                "parametric {parametric} vs permuted {permuted}"
            );
        }
    }

    #[test]
    fn bonferroni_threshold_and_decisions() {
        let outcome = bonferroni(&[0.007, 0.009, 0.002], 0.05);
        assert!((outcome.threshold - 0.05 / 3.0).abs() < 1e-12);
        assert_eq!(outcome.decisions, vec![true, true, true]);

        let outcome = bonferroni(&[0.04, 0.012, 0.003], 0.05);
        assert_eq!(outcome.decisions, vec![false, true, true]);
    }

    #[test]
    fn bonferroni_is_monotone_in_alpha() {
        let ps = [0.001, 0.016, 0.02, 0.3];
        let loose = bonferroni(&ps, 0.05);
        let strict = bonferroni(&ps, 0.01);
        for (l, s) in loose.decisions.iter().zip(&strict.decisions) {
            // Lowering alpha never makes a non-significant result significant.
            assert!(*l || !*s);
        }
    }

    #[test]
    fn correlation_csv_shape() {
        let report = table5_like_report();
        let mut buf = Vec::new();
        write_correlation_csv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("feature,r,p,n"));
        assert_eq!(text.lines().count(), 1 + report.rows.len());
        assert!(text.lines().nth(1).unwrap().starts_with("k_a,0.46"));
    }
}
