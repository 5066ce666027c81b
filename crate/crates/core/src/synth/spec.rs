//! Cohort specification: sizes, timing, state mix, sub-rate targets and
//! the planted feature-affect couplings.

use std::collections::BTreeMap;

use chrono::NaiveDate;

use crate::config::KvFile;
use crate::segment::RATE_FEATURE_NAMES;

use super::SynthError;

/// Latent affect score distribution: rounded Gaussian, clipped to the
/// balance range.
pub const LATENT_MEAN: f64 = 4.78;
pub const LATENT_STD: f64 = 5.08;

/// Everything the generator needs. All randomness flows from `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortSpec {
    pub n_users: usize,
    pub days: usize,
    /// Reports per day, evenly spaced over the 24h cycle.
    pub panas_per_day: usize,
    /// Poisson mean of events per inter-report segment.
    pub events_per_segment: f64,
    /// Target state shares in percent: posted, removed, screen-on,
    /// screen-off, unlock, keyboard-out.
    pub state_mix: [f64; 6],
    /// Sub-rate targets in percent of posted notifications.
    pub target_system: f64,
    pub target_multi: f64,
    pub target_group: f64,
    pub target_work: f64,
    /// Target emoji rate per eligible post, in percent.
    pub target_emoji: f64,
    /// Signed correlation targets per rate feature name.
    pub couplings: BTreeMap<String, f64>,
    /// Std of the integer perturbation between the latent score driving
    /// behavior and the reported score labeling the segment.
    pub label_noise: f64,
    /// Probability that a scheduled report is skipped, creating gaps
    /// long enough to be dismissed.
    pub missed_report_prob: f64,
    /// Per-user state-mix jitter in percentage points.
    pub user_jitter: f64,
    /// Relative per-user jitter of the sub-rate bases (multi, group,
    /// system, work, emoji). Users differ in their baseline behavior,
    /// which is what gives per-user models an edge over pooled ones.
    pub user_subrate_jitter: f64,
    /// Relative per-user jitter of the planted coupling strength.
    pub user_coupling_jitter: f64,
    pub start_date: NaiveDate,
    pub seed: u64,
}

/// The default planted couplings, strongest positive first.
pub fn default_couplings() -> BTreeMap<String, f64> {
    [
        ("k_a", 0.46),
        ("e_a", 0.35),
        ("m_a", 0.22),
        ("p_a", 0.13),
        ("o_a", 0.09),
        ("r_a", 0.08),
        ("u_a", -0.07),
        ("g_a", -0.08),
        ("w_a", -0.35),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            n_users: 34,
            days: 35,
            panas_per_day: 3,
            events_per_segment: 160.0,
            state_mix: [31.0, 5.0, 15.0, 15.0, 10.0, 20.0],
            target_system: 6.0,
            target_multi: 17.0,
            target_group: 13.0,
            target_work: 7.0,
            target_emoji: 9.0,
            couplings: default_couplings(),
            label_noise: 0.0,
            missed_report_prob: 0.05,
            user_jitter: 5.0,
            user_subrate_jitter: 0.5,
            user_coupling_jitter: 0.6,
            start_date: NaiveDate::from_ymd_opt(2021, 3, 1).expect("valid date"),
            seed: 42,
        }
    }
}

impl CohortSpec {
    /// Parse from the key-value spec file; absent keys keep defaults.
    /// `coupling none` clears the default couplings, `coupling
    /// k_a=0.46,w_a=-0.35` replaces them.
    pub fn from_kv(kv: &KvFile) -> Result<Self, SynthError> {
        let mut spec = CohortSpec::default();
        for key in kv.keys() {
            match key {
                "n_users" | "days" | "panas_per_day" | "events_per_segment" | "state_mix"
                | "target_system" | "target_multi" | "target_group" | "target_work"
                | "target_emoji" | "coupling" | "label_noise" | "missed_report_prob"
                | "user_jitter" | "user_subrate_jitter" | "user_coupling_jitter"
                | "start_date" | "seed" => {}
                other => {
                    return Err(SynthError::InvalidSpec(format!("unknown key {other:?}")));
                }
            }
        }
        if let Some(v) = kv.get_u64("n_users")? {
            spec.n_users = v as usize;
        }
        if let Some(v) = kv.get_u64("days")? {
            spec.days = v as usize;
        }
        if let Some(v) = kv.get_u64("panas_per_day")? {
            spec.panas_per_day = v as usize;
        }
        if let Some(v) = kv.get_f64("events_per_segment")? {
            spec.events_per_segment = v;
        }
        if let Some(parts) = kv.get_list("state_mix") {
            if parts.len() != 6 {
                return Err(SynthError::InvalidSpec(
                    "state_mix needs 6 comma-separated shares".to_string(),
                ));
            }
            for (slot, part) in spec.state_mix.iter_mut().zip(&parts) {
                *slot = part
                    .parse::<f64>()
                    .map_err(|_| SynthError::InvalidSpec(format!("bad state share {part:?}")))?;
            }
        }
        if let Some(v) = kv.get_f64("target_system")? {
            spec.target_system = v;
        }
        if let Some(v) = kv.get_f64("target_multi")? {
            spec.target_multi = v;
        }
        if let Some(v) = kv.get_f64("target_group")? {
            spec.target_group = v;
        }
        if let Some(v) = kv.get_f64("target_work")? {
            spec.target_work = v;
        }
        if let Some(v) = kv.get_f64("target_emoji")? {
            spec.target_emoji = v;
        }
        if let Some(raw) = kv.get("coupling") {
            spec.couplings = parse_couplings(raw)?;
        }
        if let Some(v) = kv.get_f64("label_noise")? {
            spec.label_noise = v;
        }
        if let Some(v) = kv.get_f64("missed_report_prob")? {
            spec.missed_report_prob = v;
        }
        if let Some(v) = kv.get_f64("user_jitter")? {
            spec.user_jitter = v;
        }
        if let Some(v) = kv.get_f64("user_subrate_jitter")? {
            spec.user_subrate_jitter = v;
        }
        if let Some(v) = kv.get_f64("user_coupling_jitter")? {
            spec.user_coupling_jitter = v;
        }
        if let Some(raw) = kv.get("start_date") {
            spec.start_date = NaiveDate::parse_from_str(raw, "%Y-%m-%d")
                .map_err(|_| SynthError::InvalidSpec(format!("bad start_date {raw:?}")))?;
        }
        if let Some(v) = kv.get_u64("seed")? {
            spec.seed = v;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: String| Err(SynthError::InvalidSpec(msg));
        if self.panas_per_day == 0 || self.panas_per_day > 24 {
            return fail("panas_per_day must be in 1..=24".to_string());
        }
        if self.events_per_segment < 0.0 || !self.events_per_segment.is_finite() {
            return fail("events_per_segment must be non-negative".to_string());
        }
        // The published shares sum to 96; the mix is normalized to
        // fractions internally, so only gross mistakes are rejected.
        let mix_sum: f64 = self.state_mix.iter().sum();
        if (mix_sum - 100.0).abs() > 10.0 {
            return fail(format!("state_mix sums to {mix_sum}, expected ~100"));
        }
        if self.state_mix.iter().any(|&s| s <= 0.0) {
            return fail("every state share must be positive".to_string());
        }
        for (name, target) in [
            ("target_system", self.target_system),
            ("target_multi", self.target_multi),
            ("target_group", self.target_group),
            ("target_work", self.target_work),
        ] {
            if !(0.0..=90.0).contains(&target) {
                return fail(format!("{name} must be in [0, 90], got {target}"));
            }
        }
        if self.target_emoji < 0.0 {
            return fail("target_emoji must be non-negative".to_string());
        }
        for (feature, &r) in &self.couplings {
            if !RATE_FEATURE_NAMES.contains(&feature.as_str()) {
                return fail(format!("unknown coupling feature {feature:?}"));
            }
            if !(-1.0..=1.0).contains(&r) {
                return fail(format!("coupling {feature}={r} outside [-1, 1]"));
            }
        }
        if !(0.0..=1.0).contains(&self.missed_report_prob) {
            return fail("missed_report_prob must be a probability".to_string());
        }
        if self.label_noise < 0.0 || self.user_jitter < 0.0 {
            return fail("noise parameters must be non-negative".to_string());
        }
        if !(0.0..=0.9).contains(&self.user_subrate_jitter)
            || !(0.0..=0.9).contains(&self.user_coupling_jitter)
        {
            return fail("relative user jitters must be in [0, 0.9]".to_string());
        }
        Ok(())
    }
}

fn parse_couplings(raw: &str) -> Result<BTreeMap<String, f64>, SynthError> {
    let raw = raw.trim();
    if raw.eq_ignore_ascii_case("none") {
        return Ok(BTreeMap::new());
    }
    if raw.eq_ignore_ascii_case("default") {
        return Ok(default_couplings());
    }
    let mut map = BTreeMap::new();
    for part in raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (feature, value) = part
            .split_once('=')
            .ok_or_else(|| SynthError::InvalidSpec(format!("bad coupling entry {part:?}")))?;
        let r = value
            .trim()
            .parse::<f64>()
            .map_err(|_| SynthError::InvalidSpec(format!("bad coupling value {value:?}")))?;
        map.insert(feature.trim().to_string(), r);
    }
    Ok(map)
}
