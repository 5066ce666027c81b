//! End-to-end cohort verification: run the real pipeline over generated
//! logs and compare every recovered segment against the ground truth.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

use crate::enrich::Detectors;
use crate::ingest::{format_timestamp, parse_event_log, parse_panas_log};
use crate::segment::{build_segments, SegmentConfig, RATE_FEATURE_NAMES};

use super::generate::GroundTruthRow;
use super::SynthError;

const RATE_TOLERANCE: f64 = 1e-9;
const MAX_REPORTED: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub user_id: String,
    pub t_start: DateTime<Utc>,
    pub t_end: DateTime<Utc>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub segments_checked: usize,
    /// First few divergences, for diagnostics.
    pub mismatches: Vec<Mismatch>,
    pub total_mismatches: usize,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.total_mismatches == 0
    }
}

/// Parse the logs, enrich with the default detectors, segment with the
/// default 10-hour rule, and compare recovered rates (within 1e-9) and
/// label scores (exactly) against the ground truth rows.
pub fn verify_cohort(
    events_jsonl: &str,
    panas_jsonl: &str,
    ground_truth: &[GroundTruthRow],
) -> Result<VerifyReport, SynthError> {
    let (events, event_errors) = parse_event_log(events_jsonl.as_bytes())?;
    if let Some(first) = event_errors.first() {
        return Err(SynthError::Pipeline(format!(
            "{} event lines failed to parse; first: {first}",
            event_errors.len()
        )));
    }
    let (entries, entry_errors) = parse_panas_log(panas_jsonl.as_bytes())?;
    if let Some(first) = entry_errors.first() {
        return Err(SynthError::Pipeline(format!(
            "{} report lines failed to parse; first: {first}",
            entry_errors.len()
        )));
    }
    let detectors = Detectors::default();
    let enriched: Vec<_> = events.into_iter().map(|ev| detectors.enrich(ev)).collect();
    let result = build_segments(&enriched, &entries, &SegmentConfig::default());

    let mut recovered: BTreeMap<(String, i64, i64), &crate::segment::Segment> = BTreeMap::new();
    for seg in &result.segments {
        recovered.insert(
            (
                seg.user_id.clone(),
                seg.t_start.timestamp_millis(),
                seg.t_end.timestamp_millis(),
            ),
            seg,
        );
    }

    let mut mismatches: Vec<Mismatch> = Vec::new();
    let mut total = 0usize;
    let mut push = |m: Mismatch, total: &mut usize| {
        *total += 1;
        if mismatches.len() < MAX_REPORTED {
            mismatches.push(m);
        }
    };

    for row in ground_truth {
        let key = (
            row.user_id.clone(),
            row.t_start.timestamp_millis(),
            row.t_end.timestamp_millis(),
        );
        match recovered.remove(&key) {
            None => push(
                Mismatch {
                    user_id: row.user_id.clone(),
                    t_start: row.t_start,
                    t_end: row.t_end,
                    reason: "segment missing from pipeline output".to_string(),
                },
                &mut total,
            ),
            Some(seg) => {
                if seg.label_score != row.score {
                    push(
                        Mismatch {
                            user_id: row.user_id.clone(),
                            t_start: row.t_start,
                            t_end: row.t_end,
                            reason: format!(
                                "label score {} differs from expected {}",
                                seg.label_score, row.score
                            ),
                        },
                        &mut total,
                    );
                    continue;
                }
                let rates = seg.features.rates();
                if let Some(j) = (0..11).find(|&j| (rates[j] - row.rates[j]).abs() > RATE_TOLERANCE)
                {
                    push(
                        Mismatch {
                            user_id: row.user_id.clone(),
                            t_start: row.t_start,
                            t_end: row.t_end,
                            reason: format!(
                                "{} is {} expected {}",
                                RATE_FEATURE_NAMES[j], rates[j], row.rates[j]
                            ),
                        },
                        &mut total,
                    );
                }
            }
        }
    }
    // Anything the pipeline found that the generator did not plan is a
    // divergence too.
    for seg in recovered.into_values() {
        push(
            Mismatch {
                user_id: seg.user_id.clone(),
                t_start: seg.t_start,
                t_end: seg.t_end,
                reason: format!(
                    "unexpected segment ending {}",
                    format_timestamp(seg.t_end)
                ),
            },
            &mut total,
        );
    }

    Ok(VerifyReport {
        segments_checked: ground_truth.len(),
        mismatches,
        total_mismatches: total,
    })
}
