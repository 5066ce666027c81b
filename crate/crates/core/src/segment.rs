//! Inter-report segmentation and the rate feature vector.
//!
//! A segment spans the half-open interval `(t_start, t_end]` between two
//! consecutive PANAS entries of one user and is labeled by the entry at
//! its end. Segments longer than the maximum gap (default 10 hours) are
//! dismissed entirely. State counts over a segment turn into percentage
//! rates: the six event states as shares of all events, the sub-categories
//! as shares of posted notifications, plus the emoji rate per non-multi
//! post and the work rate per non-system post.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{DateTime, Duration, NaiveDate, Timelike, Utc};
use thiserror::Error;

use crate::enrich::EnrichedEvent;
use crate::ingest::{format_timestamp, EventState, PanasEntry, RingerMode};
use crate::panas::{score, AffectClass, DiscretizationModel};

#[derive(Debug, Error)]
pub enum SegmentError {
    #[error("segment for {user} at {t_end} has no class label")]
    MissingClass { user: String, t_end: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("feature csv row {row}: {reason}")]
    BadRow { row: usize, reason: String },
}

/// Raw state and category counts over one segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RawCounts {
    /// The six exhaustive, disjoint event states.
    pub p: u32,
    pub r: u32,
    pub o: u32,
    pub f: u32,
    pub u: u32,
    pub k: u32,
    /// Subsets of posted notifications.
    pub m: u32,
    pub g: u32,
    pub w: u32,
    pub s: u32,
    /// Total emoji count over posted messages.
    pub e: u32,
    /// Total events; always `p + r + o + f + u + k`.
    pub n: u32,
}

/// The column names of the eleven rate features, in canonical order.
pub const RATE_FEATURE_NAMES: [&str; 11] = [
    "p_a", "r_a", "o_a", "f_a", "u_a", "k_a", "s_a", "m_a", "g_a", "e_a", "w_a",
];

/// Percentage rates plus segment metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub p_a: f64,
    pub r_a: f64,
    pub o_a: f64,
    pub f_a: f64,
    pub u_a: f64,
    pub k_a: f64,
    pub s_a: f64,
    pub m_a: f64,
    pub g_a: f64,
    pub e_a: f64,
    pub w_a: f64,
    /// Hour of day of the segment start, UTC, metadata only.
    pub hour_of_day: u8,
    /// Dominant ringer mode over the segment, metadata only.
    pub volume_mode: RingerMode,
}

impl FeatureVector {
    pub fn rate(&self, name: &str) -> Option<f64> {
        Some(match name {
            "p_a" => self.p_a,
            "r_a" => self.r_a,
            "o_a" => self.o_a,
            "f_a" => self.f_a,
            "u_a" => self.u_a,
            "k_a" => self.k_a,
            "s_a" => self.s_a,
            "m_a" => self.m_a,
            "g_a" => self.g_a,
            "e_a" => self.e_a,
            "w_a" => self.w_a,
            _ => return None,
        })
    }

    pub fn rates(&self) -> [f64; 11] {
        [
            self.p_a, self.r_a, self.o_a, self.f_a, self.u_a, self.k_a, self.s_a, self.m_a,
            self.g_a, self.e_a, self.w_a,
        ]
    }
}

/// One labeled inter-report segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub user_id: String,
    pub t_start: DateTime<Utc>,
    pub t_end: DateTime<Utc>,
    pub counts: RawCounts,
    pub features: FeatureVector,
    /// Balance score of the PANAS entry at `t_end`.
    pub label_score: i32,
    /// Assigned after discretization.
    pub label_class: Option<AffectClass>,
}

/// Segmentation parameters.
#[derive(Debug, Clone, Copy)]
pub struct SegmentConfig {
    /// Segments longer than this are dismissed.
    pub max_gap: Duration,
    /// Upper clamp for the emoji rate, which is a rate per non-multi post
    /// and can exceed 100.
    pub emoji_rate_cap: f64,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        SegmentConfig {
            max_gap: Duration::hours(10),
            emoji_rate_cap: 500.0,
        }
    }
}

/// Segmentation output with event conservation accounting.
#[derive(Debug, Clone, Default)]
pub struct SegmentationResult {
    pub segments: Vec<Segment>,
    pub total_events: usize,
    pub assigned_events: usize,
    pub dropped_events: usize,
    /// Consecutive report pairs dismissed for exceeding the maximum gap.
    pub dismissed_gaps: usize,
}

/// Count states over the events of one segment. The four posted-subset
/// counters only consider posted events, and the emoji sum skips nothing:
/// multi-notification posts already enrich to zero emojis.
pub fn count_states<'a>(events: impl IntoIterator<Item = &'a EnrichedEvent>) -> RawCounts {
    let mut c = RawCounts::default();
    for ev in events {
        c.n += 1;
        match ev.base.state {
            EventState::Posted => {
                c.p += 1;
                c.m += ev.is_multi as u32;
                c.g += ev.is_group as u32;
                c.w += ev.is_work as u32;
                c.s += ev.is_system as u32;
                c.e += ev.emoji_count;
            }
            EventState::Removed => c.r += 1,
            EventState::ScreenOn => c.o += 1,
            EventState::ScreenOff => c.f += 1,
            EventState::Unlock => c.u += 1,
            EventState::KeyboardOut => c.k += 1,
        }
    }
    c
}

fn dominant_volume(volumes: &[RingerMode]) -> RingerMode {
    let mut counts = [0usize; 4];
    for v in volumes {
        counts[RingerMode::ALL.iter().position(|m| m == v).expect("mode")] += 1;
    }
    if volumes.is_empty() {
        return RingerMode::Unknown;
    }
    let best = *counts.iter().max().expect("non-empty");
    RingerMode::ALL[counts.iter().position(|&c| c == best).expect("max exists")]
}

/// Compute the rate vector from segment counts. Any rate with a zero
/// denominator is defined as 0 so feature rows stay dense.
pub fn feature_vector(
    counts: &RawCounts,
    t_start: DateTime<Utc>,
    volumes: &[RingerMode],
    cfg: &SegmentConfig,
) -> FeatureVector {
    let rate = |num: u32, den: u32| {
        if den == 0 {
            0.0
        } else {
            100.0 * num as f64 / den as f64
        }
    };
    let e_a = if counts.p <= counts.m {
        0.0
    } else {
        (100.0 * counts.e as f64 / (counts.p - counts.m) as f64).min(cfg.emoji_rate_cap)
    };
    // A work post can also be flagged system (flags are not exclusive),
    // so clamp to keep the percentage invariant.
    let w_a = if counts.p <= counts.s {
        0.0
    } else {
        (100.0 * counts.w as f64 / (counts.p - counts.s) as f64).clamp(0.0, 100.0)
    };
    FeatureVector {
        p_a: rate(counts.p, counts.n),
        r_a: rate(counts.r, counts.n),
        o_a: rate(counts.o, counts.n),
        f_a: rate(counts.f, counts.n),
        u_a: rate(counts.u, counts.n),
        k_a: rate(counts.k, counts.n),
        s_a: rate(counts.s, counts.p),
        m_a: rate(counts.m, counts.p),
        g_a: rate(counts.g, counts.p),
        e_a,
        w_a,
        hour_of_day: t_start.hour() as u8,
        volume_mode: dominant_volume(volumes),
    }
}

/// Build one segment per consecutive PANAS pair per user, dropping pairs
/// further apart than `cfg.max_gap` and assigning each event to at most
/// one segment via the `(t_start, t_end]` convention.
///
/// Both inputs must be sorted per user by time, as the ingest parsers
/// guarantee.
pub fn build_segments(
    events: &[EnrichedEvent],
    panas_entries: &[PanasEntry],
    cfg: &SegmentConfig,
) -> SegmentationResult {
    let mut by_user: BTreeMap<&str, Vec<&EnrichedEvent>> = BTreeMap::new();
    for ev in events {
        by_user.entry(&ev.base.user_id).or_default().push(ev);
    }
    let mut entries_by_user: BTreeMap<&str, Vec<&PanasEntry>> = BTreeMap::new();
    for entry in panas_entries {
        entries_by_user.entry(&entry.user_id).or_default().push(entry);
    }

    let mut result = SegmentationResult {
        total_events: events.len(),
        ..SegmentationResult::default()
    };
    static NO_EVENTS: Vec<&EnrichedEvent> = Vec::new();
    for (user, entries) in &entries_by_user {
        let user_events = by_user.get(user).unwrap_or(&NO_EVENTS);
        for pair in entries.windows(2) {
            let (start, end) = (pair[0], pair[1]);
            if end.timestamp - start.timestamp > cfg.max_gap {
                result.dismissed_gaps += 1;
                continue;
            }
            let lo = user_events.partition_point(|ev| ev.base.timestamp <= start.timestamp);
            let hi = user_events.partition_point(|ev| ev.base.timestamp <= end.timestamp);
            let segment_events = &user_events[lo..hi];
            result.assigned_events += segment_events.len();
            let counts = count_states(segment_events.iter().copied());
            let volumes: Vec<RingerMode> =
                segment_events.iter().map(|ev| ev.base.volume).collect();
            let features = feature_vector(&counts, start.timestamp, &volumes, cfg);
            result.segments.push(Segment {
                user_id: user.to_string(),
                t_start: start.timestamp,
                t_end: end.timestamp,
                counts,
                features,
                label_score: score(end).balance,
                label_class: None,
            });
        }
    }
    result.dropped_events = result.total_events - result.assigned_events;
    result
}

/// Assign classes from one global discretization model.
pub fn assign_classes(segments: &mut [Segment], model: &DiscretizationModel) {
    for seg in segments {
        seg.label_class = Some(model.classify(seg.label_score));
    }
}

/// Assign classes from per-user models; segments of users absent from the
/// map keep their previous label.
pub fn assign_classes_per_user(
    segments: &mut [Segment],
    models: &BTreeMap<String, DiscretizationModel>,
) {
    for seg in segments {
        if let Some(model) = models.get(&seg.user_id) {
            seg.label_class = Some(model.classify(seg.label_score));
        }
    }
}

/// Per-user-per-day response counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseRateReport {
    /// `(user, local calendar day, entry count)`, sorted.
    pub per_user_day: Vec<(String, NaiveDate, u32)>,
    /// Fraction of user-days with at least three entries.
    pub fraction_days_with_3plus: f64,
    /// True when there were no entries at all so the fraction is
    /// reported as 0 by convention.
    pub undefined: bool,
}

/// Count entries per user per local calendar day (fixed offset from UTC)
/// and the share of user-days with three or more entries.
pub fn response_rate(panas_entries: &[PanasEntry], tz_offset_hours: i32) -> ResponseRateReport {
    let mut counts: BTreeMap<(String, NaiveDate), u32> = BTreeMap::new();
    for entry in panas_entries {
        let local = entry.timestamp + Duration::hours(tz_offset_hours as i64);
        *counts
            .entry((entry.user_id.clone(), local.date_naive()))
            .or_insert(0) += 1;
    }
    if counts.is_empty() {
        return ResponseRateReport {
            per_user_day: Vec::new(),
            fraction_days_with_3plus: 0.0,
            undefined: true,
        };
    }
    let days = counts.len();
    let good = counts.values().filter(|&&c| c >= 3).count();
    ResponseRateReport {
        per_user_day: counts.into_iter().map(|((u, d), c)| (u, d, c)).collect(),
        fraction_days_with_3plus: good as f64 / days as f64,
        undefined: false,
    }
}

/// The fixed feature CSV header.
pub const FEATURE_CSV_HEADER: [&str; 18] = [
    "user", "t_start", "t_end", "p_a", "r_a", "o_a", "f_a", "u_a", "k_a", "s_a", "m_a", "g_a",
    "e_a", "w_a", "hour", "volume", "score", "class",
];

/// One parsed feature CSV row; the bridge between the segment pipeline
/// and the learning stage.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub user_id: String,
    pub t_start: DateTime<Utc>,
    pub t_end: DateTime<Utc>,
    pub rates: [f64; 11],
    pub hour: u8,
    pub volume: RingerMode,
    pub score: i32,
    pub class: AffectClass,
}

impl FeatureRow {
    pub fn rate(&self, name: &str) -> Option<f64> {
        RATE_FEATURE_NAMES
            .iter()
            .position(|&c| c == name)
            .map(|i| self.rates[i])
    }
}

/// Write the feature matrix CSV. Every segment must carry a class label.
pub fn write_feature_csv<W: Write>(segments: &[Segment], out: W) -> Result<(), SegmentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FEATURE_CSV_HEADER)?;
    for seg in segments {
        let class = seg.label_class.ok_or_else(|| SegmentError::MissingClass {
            user: seg.user_id.clone(),
            t_end: format_timestamp(seg.t_end),
        })?;
        let mut record = vec![
            seg.user_id.clone(),
            format_timestamp(seg.t_start),
            format_timestamp(seg.t_end),
        ];
        record.extend(seg.features.rates().iter().map(|v| v.to_string()));
        record.push(seg.features.hour_of_day.to_string());
        record.push(seg.features.volume_mode.as_str().to_string());
        record.push(seg.label_score.to_string());
        record.push(class.as_i8().to_string());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a feature matrix CSV produced by [`write_feature_csv`].
pub fn read_feature_csv<R: Read>(input: R) -> Result<Vec<FeatureRow>, SegmentError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    {
        let headers = reader.headers()?;
        let expected: Vec<&str> = FEATURE_CSV_HEADER.to_vec();
        let got: Vec<&str> = headers.iter().collect();
        if got != expected {
            return Err(SegmentError::BadRow {
                row: 1,
                reason: format!("unexpected header {got:?}"),
            });
        }
    }
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let row_no = idx + 2;
        let bad = |reason: String| SegmentError::BadRow { row: row_no, reason };
        let field = |i: usize| -> Result<&str, SegmentError> {
            record
                .get(i)
                .ok_or_else(|| bad(format!("missing column {i}")))
        };
        let ts = |i: usize| -> Result<DateTime<Utc>, SegmentError> {
            let raw = field(i)?;
            DateTime::parse_from_rfc3339(raw)
                .map(|t| t.with_timezone(&Utc))
                .map_err(|_| bad(format!("bad timestamp {raw:?}")))
        };
        let mut rates = [0.0f64; 11];
        for (j, slot) in rates.iter_mut().enumerate() {
            let raw = field(3 + j)?;
            *slot = raw
                .parse::<f64>()
                .map_err(|_| bad(format!("bad rate {raw:?}")))?;
        }
        let class_raw = field(17)?;
        let class = class_raw
            .parse::<i8>()
            .ok()
            .and_then(AffectClass::from_i8)
            .ok_or_else(|| bad(format!("bad class {class_raw:?}")))?;
        rows.push(FeatureRow {
            user_id: field(0)?.to_string(),
            t_start: ts(1)?,
            t_end: ts(2)?,
            rates,
            hour: field(14)?
                .parse::<u8>()
                .map_err(|_| bad("bad hour".to_string()))?,
            volume: RingerMode::parse_lenient(field(15)?),
            score: field(16)?
                .parse::<i32>()
                .map_err(|_| bad("bad score".to_string()))?,
            class,
        });
    }
    Ok(rows)
}
