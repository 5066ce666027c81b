//! Deterministic cohort generation with planted feature-affect
//! couplings.
//!
//! Each segment draws a latent affect score; the per-event state and
//! content probabilities are shifted linearly in the standardized score.
//! Shift strengths are calibrated per feature by simulating the segment
//! machinery over a grid and inverting the measured shift-to-correlation
//! curve, so the generator hits requested Pearson targets without a
//! closed-form noise model. Event text is materialized from pools that
//! are exactly neutral to the default detectors, which lets the
//! generator know every flag the pipeline will recover.

use chrono::{DateTime, Duration, NaiveTime, Utc};
use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::ingest::{
    event_to_json_line, format_timestamp, panas_to_json_line, EventState, NotificationEvent,
    PanasEntry, PanasItems, RingerMode,
};
use crate::seeding::{self, domain};
use crate::segment::{feature_vector, RawCounts, SegmentConfig, RATE_FEATURE_NAMES};
use crate::stats::pearson;

use super::spec::{CohortSpec, LATENT_MEAN, LATENT_STD};
use super::SynthError;

const SOCIAL_APPS: [&str; 4] = ["whatsapp", "messenger", "telegram", "snapchat"];
const SENDERS: [&str; 8] = ["Alice", "Ben", "Cara", "Dan", "Eve", "Finn", "Gina", "Hugo"];
const WORK_SENDERS: [&str; 4] = ["Boss", "HR", "Team-Lead", "Accounts"];
const GROUPS: [&str; 4] = ["Hiking-Club", "Family", "Book-Circle", "Five-a-Side"];
const SOCIAL_PHRASES: [&str; 10] = [
    "see you soon",
    "sounds good",
    "on my way",
    "that was fun",
    "can you call me",
    "lunch tomorrow?",
    "happy birthday!",
    "thanks a lot",
    "good night",
    "how did it go",
];
const WORK_PHRASES: [&str; 6] = [
    "quarterly report attached",
    "meeting moved to Monday",
    "please review the draft",
    "invoice approved",
    "Re: budget approval",
    "standup notes",
];
const SYSTEM_PHRASES: [&str; 5] = [
    "Cable charging",
    "Battery at 80%",
    "Updating 3 apps",
    "WIFI networks available",
    "USB debugging connected",
];
const EMOJI_POOL: [char; 10] = [
    '\u{1F600}', '\u{1F602}', '\u{2764}', '\u{1F44D}', '\u{1F389}', '\u{1F525}', '\u{1F3A5}',
    '\u{1F4F7}', '\u{1F355}', '\u{1F622}',
];

/// Probability shifts per unit of standardized score.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Shifts {
    /// Additive share shift per state.
    states: [f64; 6],
    multi: f64,
    group: f64,
    system: f64,
    work: f64,
    /// Relative shift of the emoji intensity.
    emoji_rel: f64,
}

impl Shifts {
    fn slot_mut(&mut self, feature: &str) -> &mut f64 {
        match feature {
            "p_a" => &mut self.states[0],
            "r_a" => &mut self.states[1],
            "o_a" => &mut self.states[2],
            "f_a" => &mut self.states[3],
            "u_a" => &mut self.states[4],
            "k_a" => &mut self.states[5],
            "m_a" => &mut self.multi,
            "g_a" => &mut self.group,
            "s_a" => &mut self.system,
            "w_a" => &mut self.work,
            "e_a" => &mut self.emoji_rel,
            _ => unreachable!("validated feature name"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Channel {
    Social,
    Work,
    System,
}

#[derive(Debug, Clone, Copy)]
struct PostPlan {
    multi: bool,
    channel: Channel,
    group: bool,
    emoji: u32,
}

#[derive(Debug, Clone, Copy)]
enum EventPlan {
    Post(PostPlan),
    Removed,
    ScreenOn,
    ScreenOff,
    Unlock,
    KeyboardOut,
}

struct EffectiveProbs {
    states: [f64; 6],
    multi: f64,
    group: f64,
    system: f64,
    work: f64,
    emoji_lambda: f64,
}

/// Per-user idiosyncrasies: baseline behavior rates and per-feature
/// coupling strengths differ between users. Population-marginal
/// couplings stay on target (the scales average to one and calibration
/// measures the mixture), but an individual user expresses affect
/// through an individual feature mix, which is what gives
/// within-subject models their edge over a pooled model on an unseen
/// user.
struct UserProfile {
    mix: [f64; 6],
    /// Multiplicative offsets for multi, group, system, work, emoji.
    subrate_scale: [f64; 5],
    /// Per-channel coupling scales: six states, then multi, group,
    /// system, work, emoji.
    coupling_scale: [f64; 11],
}

fn draw_profile(spec: &CohortSpec, rng: &mut ChaCha8Rng) -> UserProfile {
    let mut mix = [0.0; 6];
    let mut sum = 0.0;
    for (slot, &base) in mix.iter_mut().zip(&spec.state_mix) {
        let jitter = rng.random_range(-spec.user_jitter..=spec.user_jitter);
        *slot = ((base + jitter) / 100.0).max(0.002);
        sum += *slot;
    }
    for s in &mut mix {
        *s /= sum;
    }
    let j = spec.user_subrate_jitter;
    let mut subrate_scale = [1.0; 5];
    for s in &mut subrate_scale {
        *s = 1.0 + rng.random_range(-j..=j);
    }
    let cj = spec.user_coupling_jitter;
    let mut coupling_scale = [1.0; 11];
    for s in &mut coupling_scale {
        *s = 1.0 + rng.random_range(-cj..=cj);
    }
    UserProfile {
        mix,
        subrate_scale,
        coupling_scale,
    }
}

fn effective_probs(
    spec: &CohortSpec,
    shifts: &Shifts,
    profile: &UserProfile,
    z: f64,
) -> EffectiveProbs {
    let cs = &profile.coupling_scale;
    let mut states = [0.0; 6];
    let mut sum = 0.0;
    for i in 0..6 {
        states[i] = (profile.mix[i] + shifts.states[i] * cs[i] * z).clamp(0.002, 0.98);
        sum += states[i];
    }
    for s in &mut states {
        *s /= sum;
    }
    let base = |target: f64, scale: f64| target / 100.0 * scale;
    EffectiveProbs {
        states,
        multi: (base(spec.target_multi, profile.subrate_scale[0]) + shifts.multi * cs[6] * z)
            .clamp(0.0, 0.9),
        group: (base(spec.target_group, profile.subrate_scale[1]) + shifts.group * cs[7] * z)
            .clamp(0.0, 0.9),
        system: (base(spec.target_system, profile.subrate_scale[2]) + shifts.system * cs[8] * z)
            .clamp(0.0, 0.45),
        work: (base(spec.target_work, profile.subrate_scale[3]) + shifts.work * cs[9] * z)
            .clamp(0.0, 0.45),
        emoji_lambda: (base(spec.target_emoji, profile.subrate_scale[4])
            * (1.0 + shifts.emoji_rel * cs[10] * z))
            .max(0.0),
    }
}

fn draw_latent(rng: &mut ChaCha8Rng) -> i32 {
    let normal = Normal::new(LATENT_MEAN, LATENT_STD).expect("valid parameters");
    (normal.sample(rng).round() as i32).clamp(-20, 20)
}

fn standardize(score: i32) -> f64 {
    (score as f64 - LATENT_MEAN) / LATENT_STD
}

fn draw_poisson(rng: &mut ChaCha8Rng, mean: f64) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive mean");
    let v: f64 = dist.sample(rng);
    v as u32
}

fn plan_segment(n_events: u32, probs: &EffectiveProbs, rng: &mut ChaCha8Rng) -> Vec<EventPlan> {
    let mut plan = Vec::with_capacity(n_events as usize);
    for _ in 0..n_events {
        let mut u: f64 = rng.random();
        let mut state = 5usize;
        for (i, &share) in probs.states.iter().enumerate() {
            if u < share {
                state = i;
                break;
            }
            u -= share;
        }
        plan.push(match state {
            0 => {
                let multi = rng.random::<f64>() < probs.multi;
                let c: f64 = rng.random();
                let channel = if c < probs.system {
                    Channel::System
                } else if c < probs.system + probs.work {
                    Channel::Work
                } else {
                    Channel::Social
                };
                let group = channel != Channel::System && rng.random::<f64>() < probs.group;
                let emoji = if multi || channel == Channel::System {
                    0
                } else {
                    draw_poisson(rng, probs.emoji_lambda)
                };
                EventPlan::Post(PostPlan {
                    multi,
                    channel,
                    group,
                    emoji,
                })
            }
            1 => EventPlan::Removed,
            2 => EventPlan::ScreenOn,
            3 => EventPlan::ScreenOff,
            4 => EventPlan::Unlock,
            _ => EventPlan::KeyboardOut,
        });
    }
    plan
}

fn counts_from_plan(plan: &[EventPlan]) -> RawCounts {
    let mut c = RawCounts::default();
    for event in plan {
        c.n += 1;
        match event {
            EventPlan::Post(post) => {
                c.p += 1;
                c.m += post.multi as u32;
                c.g += post.group as u32;
                c.w += (post.channel == Channel::Work) as u32;
                c.s += (post.channel == Channel::System) as u32;
                c.e += post.emoji;
            }
            EventPlan::Removed => c.r += 1,
            EventPlan::ScreenOn => c.o += 1,
            EventPlan::ScreenOff => c.f += 1,
            EventPlan::Unlock => c.u += 1,
            EventPlan::KeyboardOut => c.k += 1,
        }
    }
    c
}

/// Measure the correlation a single-feature shift achieves, simulating
/// the exact segment machinery and rate formulas. Profiles are redrawn
/// per segment; the variance they contribute is the same as under
/// per-user profiles, so the measured correlation matches generation.
fn measure_coupling(
    spec: &CohortSpec,
    feature: &str,
    shift_value: f64,
    rng: &mut ChaCha8Rng,
    n_sims: usize,
) -> f64 {
    let mut shifts = Shifts::default();
    *shifts.slot_mut(feature) = shift_value;
    let cfg = SegmentConfig::default();
    let t0 = DateTime::<Utc>::from_timestamp(0, 0).expect("epoch");
    let mut rates = Vec::with_capacity(n_sims);
    let mut scores = Vec::with_capacity(n_sims);
    for _ in 0..n_sims {
        let profile = draw_profile(spec, rng);
        let latent = draw_latent(rng);
        let z = standardize(latent);
        let n_events = draw_poisson(rng, spec.events_per_segment);
        let probs = effective_probs(spec, &shifts, &profile, z);
        let plan = plan_segment(n_events, &probs, rng);
        let counts = counts_from_plan(&plan);
        let features = feature_vector(&counts, t0, &[], &cfg);
        rates.push(features.rate(feature).expect("valid feature"));
        scores.push(latent as f64);
    }
    pearson(&rates, &scores).unwrap_or(0.0)
}

fn max_shift(spec: &CohortSpec, feature: &str) -> f64 {
    let state_idx = RATE_FEATURE_NAMES
        .iter()
        .position(|&f| f == feature)
        .expect("valid feature");
    match feature {
        "p_a" | "r_a" | "o_a" | "f_a" | "u_a" | "k_a" => {
            let base = spec.state_mix[state_idx] / 100.0;
            ((0.9 - base).min(base) / 2.0).max(1e-4)
        }
        "m_a" => ((0.9 - spec.target_multi / 100.0).min(spec.target_multi / 100.0) / 2.0).max(1e-4),
        "g_a" => ((0.9 - spec.target_group / 100.0).min(spec.target_group / 100.0) / 2.0).max(1e-4),
        "s_a" => ((0.45 - spec.target_system / 100.0).min(spec.target_system / 100.0) / 2.0).max(1e-4),
        "w_a" => ((0.45 - spec.target_work / 100.0).min(spec.target_work / 100.0) / 2.0).max(1e-4),
        "e_a" => 0.5,
        _ => unreachable!("validated feature name"),
    }
}

const CALIBRATION_GRID: usize = 7;
const CALIBRATION_SIMS: usize = 4000;

/// Calibrate every requested coupling by inverting the simulated
/// shift-to-correlation curve. Shifts are calibrated one feature at a
/// time; joint cross-talk through state renormalization is second-order
/// for the share features and absent for the per-post channels.
pub fn calibrate_shifts(spec: &CohortSpec) -> Result<Shifts, SynthError> {
    let mut shifts = Shifts::default();
    for (feature, &target) in &spec.couplings {
        if target.abs() < 1e-9 {
            continue;
        }
        let feature_idx = RATE_FEATURE_NAMES
            .iter()
            .position(|f| f == feature)
            .expect("validated name") as u64;
        let s_max = max_shift(spec, feature);
        let mut grid_r = [0.0f64; CALIBRATION_GRID];
        for (i, r_slot) in grid_r.iter_mut().enumerate().skip(1) {
            let s = s_max * i as f64 / (CALIBRATION_GRID - 1) as f64;
            let mut rng = seeding::rng(
                spec.seed,
                &[domain::SYNTH_CALIBRATION, feature_idx, i as u64],
            );
            *r_slot = measure_coupling(spec, feature, s, &mut rng, CALIBRATION_SIMS);
        }
        // The curve is monotone up to simulation noise.
        for i in 1..CALIBRATION_GRID {
            grid_r[i] = grid_r[i].max(grid_r[i - 1]);
        }
        let wanted = target.abs();
        let max_feasible = grid_r[CALIBRATION_GRID - 1];
        if wanted > max_feasible {
            return Err(SynthError::InfeasibleCoupling {
                feature: feature.clone(),
                requested: target,
                max_feasible,
            });
        }
        let mut shift = s_max;
        for i in 1..CALIBRATION_GRID {
            if grid_r[i] >= wanted {
                let (r0, r1) = (grid_r[i - 1], grid_r[i]);
                let s0 = s_max * (i - 1) as f64 / (CALIBRATION_GRID - 1) as f64;
                let s1 = s_max * i as f64 / (CALIBRATION_GRID - 1) as f64;
                let fraction = if r1 > r0 { (wanted - r0) / (r1 - r0) } else { 1.0 };
                shift = s0 + fraction * (s1 - s0);
                break;
            }
        }
        *shifts.slot_mut(feature) = target.signum() * shift;
    }
    Ok(shifts)
}

/// PANAS items realizing a balance score: positives are raised from the
/// all-ones baseline first, then negatives, one item at a time.
pub fn items_for_balance(balance: i32) -> PanasItems {
    let mut positives = [1u8; 5];
    let mut negatives = [1u8; 5];
    let mut remaining = balance.unsigned_abs().min(20);
    let side = if balance >= 0 { &mut positives } else { &mut negatives };
    for item in side.iter_mut() {
        let add = remaining.min(4) as u8;
        *item += add;
        remaining -= add as u32;
        if remaining == 0 {
            break;
        }
    }
    let [determined, attentive, alert, inspired, active] = positives;
    let [upset, ashamed, nervous, afraid, hostile] = negatives;
    PanasItems {
        determined,
        attentive,
        alert,
        inspired,
        active,
        upset,
        ashamed,
        nervous,
        afraid,
        hostile,
    }
}

/// One retained segment's ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthRow {
    pub user_id: String,
    pub t_start: DateTime<Utc>,
    pub t_end: DateTime<Utc>,
    /// Latent score that drove the event rates.
    pub latent: i32,
    /// Reported score labeling the segment (latent plus label noise).
    pub score: i32,
    pub rates: [f64; 11],
}

/// A generated cohort: both logs as JSON-lines text plus the ground
/// truth table.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub events_jsonl: String,
    pub panas_jsonl: String,
    pub ground_truth: Vec<GroundTruthRow>,
}

pub const GROUND_TRUTH_HEADER: &str =
    "user,t_start,t_end,latent,score,p_a,r_a,o_a,f_a,u_a,k_a,s_a,m_a,g_a,e_a,w_a";

impl Cohort {
    pub fn ground_truth_csv(&self) -> String {
        let mut out = String::from(GROUND_TRUTH_HEADER);
        out.push('\n');
        for row in &self.ground_truth {
            out.push_str(&row.user_id);
            out.push(',');
            out.push_str(&format_timestamp(row.t_start));
            out.push(',');
            out.push_str(&format_timestamp(row.t_end));
            out.push(',');
            out.push_str(&row.latent.to_string());
            out.push(',');
            out.push_str(&row.score.to_string());
            for rate in row.rates {
                out.push(',');
                out.push_str(&rate.to_string());
            }
            out.push('\n');
        }
        out
    }
}

pub fn parse_ground_truth_csv(text: &str) -> Result<Vec<GroundTruthRow>, SynthError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == GROUND_TRUTH_HEADER => {}
        other => {
            return Err(SynthError::BadGroundTruth(format!(
                "unexpected header {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: &str| SynthError::BadGroundTruth(format!("row {}: {reason}", idx + 2));
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 16 {
            return Err(bad("expected 16 columns"));
        }
        let ts = |raw: &str| {
            DateTime::parse_from_rfc3339(raw)
                .map(|t| t.with_timezone(&Utc))
                .map_err(|_| bad("bad timestamp"))
        };
        let mut rates = [0.0; 11];
        for (slot, raw) in rates.iter_mut().zip(&parts[5..16]) {
            *slot = raw.parse::<f64>().map_err(|_| bad("bad rate"))?;
        }
        rows.push(GroundTruthRow {
            user_id: parts[0].to_string(),
            t_start: ts(parts[1])?,
            t_end: ts(parts[2])?,
            latent: parts[3].parse().map_err(|_| bad("bad latent"))?,
            score: parts[4].parse().map_err(|_| bad("bad score"))?,
            rates,
        });
    }
    Ok(rows)
}

fn pick<'a, T>(items: &'a [T], rng: &mut ChaCha8Rng) -> &'a T {
    &items[rng.random_range(0..items.len())]
}

fn post_strings(post: &PostPlan, rng: &mut ChaCha8Rng) -> (String, String) {
    let mut name = match post.channel {
        Channel::System => "com.android.systemui : Android System".to_string(),
        Channel::Work => format!("gmail : {}", pick(&WORK_SENDERS, rng)),
        Channel::Social => format!("{} : {}", pick(&SOCIAL_APPS, rng), pick(&SENDERS, rng)),
    };
    if post.group {
        name.push_str(" @ ");
        name.push_str(pick(&GROUPS, rng));
    }
    let message = if post.multi {
        format!("{} new messages", rng.random_range(2..=9u32))
    } else {
        match post.channel {
            Channel::System => (*pick(&SYSTEM_PHRASES, rng)).to_string(),
            Channel::Work | Channel::Social => {
                let phrase = if post.channel == Channel::Work {
                    *pick(&WORK_PHRASES, rng)
                } else {
                    *pick(&SOCIAL_PHRASES, rng)
                };
                let mut msg = phrase.to_string();
                if post.emoji > 0 {
                    msg.push(' ');
                    let mut has_video = false;
                    for _ in 0..post.emoji {
                        let c = *pick(&EMOJI_POOL, rng);
                        has_video |= c == '\u{1F3A5}';
                        msg.push(c);
                    }
                    if has_video {
                        msg.push_str(" 0:42");
                    }
                }
                msg
            }
        }
    };
    (name, message)
}

fn draw_volume(rng: &mut ChaCha8Rng) -> RingerMode {
    let u: f64 = rng.random();
    if u < 0.6 {
        RingerMode::Normal
    } else if u < 0.85 {
        RingerMode::Vibrate
    } else {
        RingerMode::Silent
    }
}

/// Generate a full cohort. Identical spec and seed produce byte-identical
/// logs.
pub fn generate_cohort(spec: &CohortSpec) -> Result<Cohort, SynthError> {
    spec.validate()?;
    let shifts = calibrate_shifts(spec)?;
    let cfg = SegmentConfig::default();
    let slot_gap_secs = 24 * 3600 / spec.panas_per_day as i64;
    let jitter_bound = (slot_gap_secs / 3).min(1200);

    let mut events_jsonl = String::new();
    let mut panas_jsonl = String::new();
    let mut ground_truth = Vec::new();

    for user_idx in 0..spec.n_users {
        let mut rng = seeding::rng(spec.seed, &[domain::SYNTH_USER, user_idx as u64]);
        let user_id = format!("u{user_idx:03}");
        let profile = draw_profile(spec, &mut rng);

        let day0 = spec.start_date.and_time(NaiveTime::MIN).and_utc();
        let mut report_times: Vec<DateTime<Utc>> = Vec::new();
        for day in 0..spec.days {
            for slot in 0..spec.panas_per_day {
                let jitter = if jitter_bound > 0 {
                    rng.random_range(-jitter_bound..=jitter_bound)
                } else {
                    0
                };
                let at = day0
                    + Duration::seconds(day as i64 * 86_400 + slot as i64 * slot_gap_secs + jitter);
                if rng.random::<f64>() >= spec.missed_report_prob {
                    report_times.push(at);
                }
            }
        }

        let mut user_events: Vec<NotificationEvent> = Vec::new();
        let mut entries: Vec<PanasEntry> = Vec::new();
        let noise_normal = (spec.label_noise > 0.0)
            .then(|| Normal::new(0.0, spec.label_noise).expect("positive std"));
        let reported_score = |latent: i32, rng: &mut ChaCha8Rng| -> i32 {
            match &noise_normal {
                None => latent,
                Some(dist) => (latent + dist.sample(rng).round() as i32).clamp(-20, 20),
            }
        };

        if let Some(&first) = report_times.first() {
            let latent = draw_latent(&mut rng);
            let score = reported_score(latent, &mut rng);
            entries.push(PanasEntry {
                timestamp: first,
                user_id: user_id.clone(),
                items: items_for_balance(score),
            });
        }
        for pair in report_times.windows(2) {
            let (t_start, t_end) = (pair[0], pair[1]);
            let latent = draw_latent(&mut rng);
            let score = reported_score(latent, &mut rng);
            let z = standardize(latent);
            let n_events = draw_poisson(&mut rng, spec.events_per_segment);
            let probs = effective_probs(spec, &shifts, &profile, z);
            let plan = plan_segment(n_events, &probs, &mut rng);

            let gap_ms = (t_end - t_start).num_milliseconds();
            let mut offsets: Vec<i64> = (0..plan.len())
                .map(|_| rng.random_range(1..=gap_ms))
                .collect();
            offsets.sort_unstable();

            let mut volumes = Vec::with_capacity(plan.len());
            for (event_plan, offset) in plan.iter().zip(&offsets) {
                let timestamp = t_start + Duration::milliseconds(*offset);
                let volume = draw_volume(&mut rng);
                volumes.push(volume);
                let (event_name, state, message) = match event_plan {
                    EventPlan::Post(post) => {
                        let (name, msg) = post_strings(post, &mut rng);
                        (name, EventState::Posted, msg)
                    }
                    EventPlan::Removed => (
                        format!("{} : {}", pick(&SOCIAL_APPS, &mut rng), pick(&SENDERS, &mut rng)),
                        EventState::Removed,
                        String::new(),
                    ),
                    EventPlan::ScreenOn => {
                        ("android : screen".to_string(), EventState::ScreenOn, String::new())
                    }
                    EventPlan::ScreenOff => {
                        ("android : screen".to_string(), EventState::ScreenOff, String::new())
                    }
                    EventPlan::Unlock => {
                        ("android : screen".to_string(), EventState::Unlock, String::new())
                    }
                    EventPlan::KeyboardOut => {
                        ("android : screen".to_string(), EventState::KeyboardOut, String::new())
                    }
                };
                user_events.push(NotificationEvent {
                    timestamp,
                    user_id: user_id.clone(),
                    event_name,
                    state,
                    message,
                    volume,
                });
            }

            entries.push(PanasEntry {
                timestamp: t_end,
                user_id: user_id.clone(),
                items: items_for_balance(score),
            });

            if t_end - t_start <= cfg.max_gap {
                let counts = counts_from_plan(&plan);
                let features = feature_vector(&counts, t_start, &volumes, &cfg);
                ground_truth.push(GroundTruthRow {
                    user_id: user_id.clone(),
                    t_start,
                    t_end,
                    latent,
                    score,
                    rates: features.rates(),
                });
            }
        }

        for event in &user_events {
            events_jsonl.push_str(&event_to_json_line(event));
            events_jsonl.push('\n');
        }
        for entry in &entries {
            panas_jsonl.push_str(&panas_to_json_line(entry));
            panas_jsonl.push('\n');
        }
    }

    Ok(Cohort {
        events_jsonl,
        panas_jsonl,
        ground_truth,
    })
}

/// Recovered-rate matrix of a cohort's ground truth, as named columns
/// plus the label scores. Convenience for correlation checks.
pub fn ground_truth_columns(rows: &[GroundTruthRow]) -> (Vec<(String, Vec<f64>)>, Vec<f64>) {
    let mut columns: Vec<(String, Vec<f64>)> = RATE_FEATURE_NAMES
        .iter()
        .map(|&name| (name.to_string(), Vec::with_capacity(rows.len())))
        .collect();
    let mut scores = Vec::with_capacity(rows.len());
    for row in rows {
        for (j, (_, column)) in columns.iter_mut().enumerate() {
            column.push(row.rates[j]);
        }
        scores.push(row.score as f64);
    }
    (columns, scores)
}
