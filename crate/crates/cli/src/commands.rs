//! The five subcommands: ingest, features, correlate, train, synth.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;

use notimind_core::config::KvFile;
use notimind_core::enrich::{DetectorConfig, Detectors, EmojiTable};
use notimind_core::ingest::{
    event_to_json_line, panas_to_json_line, parse_event_log, parse_panas_log, NotificationEvent,
    PanasEntry, ParseError,
};
use notimind_core::learn::{
    cross_validate, read_model, summary_text, train_full, write_folds_csv, write_model,
    ClassifierKind, Dataset, EvaluationReport, Regime, TrainConfig,
};
use notimind_core::panas::{discretize, distribution_report, score, DiscretizationModel};
use notimind_core::segment::{
    assign_classes, assign_classes_per_user, build_segments, read_feature_csv, response_rate,
    write_feature_csv, FeatureRow, Segment, SegmentConfig, SegmentationResult,
    RATE_FEATURE_NAMES,
};
use notimind_core::stats::{
    correlation_table, select_features, write_correlation_csv, CorrelationReport, SelectionMode,
};
use notimind_core::synth::{generate_cohort, verify_cohort, CohortSpec};

use crate::config::ConfigLayer;

fn ensure_out_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn error_report(kind: &str, errors: &[ParseError]) -> String {
    let mut out = String::new();
    for err in errors {
        let _ = writeln!(out, "{kind} {err}");
    }
    out
}

// ---------------------------------------------------------------------
// ingest

#[derive(Debug, Args, Default, Clone)]
pub struct IngestArgs {
    /// Event log (JSON lines).
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// PANAS log (JSON lines).
    #[arg(long)]
    pub panas: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Treat malformed lines as warnings instead of failing.
    #[arg(long)]
    pub lenient: bool,
    /// Run-config file; flags win over its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Accepted for interface uniformity; parsing is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Parse and validate both logs, write normalized record files plus
/// `parse_errors.txt`. Fails (exit 1) on any malformed line unless
/// lenient.
pub fn run_ingest(args: &IngestArgs) -> Result<()> {
    let layer = ConfigLayer::load(args.config.as_deref())?;
    let events_path = layer
        .path("events", args.events.clone())
        .ok_or_else(|| anyhow!("--events is required"))?;
    let panas_path = layer
        .path("panas", args.panas.clone())
        .ok_or_else(|| anyhow!("--panas is required"))?;
    let out = layer
        .path("out", args.out.clone())
        .ok_or_else(|| anyhow!("--out is required"))?;
    let lenient = layer.flag("lenient", args.lenient)?;
    ensure_out_dir(&out)?;

    let (events, event_errors) = parse_event_log(read_input(&events_path)?.as_bytes())?;
    let (entries, entry_errors) = parse_panas_log(read_input(&panas_path)?.as_bytes())?;

    let mut normalized_events = String::new();
    for ev in &events {
        normalized_events.push_str(&event_to_json_line(ev));
        normalized_events.push('\n');
    }
    write_file(&out.join("events.jsonl"), &normalized_events)?;
    let mut normalized_entries = String::new();
    for entry in &entries {
        normalized_entries.push_str(&panas_to_json_line(entry));
        normalized_entries.push('\n');
    }
    write_file(&out.join("panas.jsonl"), &normalized_entries)?;

    let mut errors_text = error_report("events", &event_errors);
    errors_text.push_str(&error_report("panas", &entry_errors));
    write_file(&out.join("parse_errors.txt"), &errors_text)?;

    let total_errors = event_errors.len() + entry_errors.len();
    println!(
        "ingest: {} events, {} reports, {} malformed lines",
        events.len(),
        entries.len(),
        total_errors
    );
    if total_errors > 0 && !lenient {
        bail!("{total_errors} malformed lines (rerun with --lenient to keep going)");
    }
    Ok(())
}

// ---------------------------------------------------------------------
// features

#[derive(Debug, Args, Default, Clone)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[arg(long)]
    pub panas: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Detector configuration (key-value file).
    #[arg(long)]
    pub detector_config: Option<PathBuf>,
    /// Emoji table file overriding the bundled one.
    #[arg(long)]
    pub emoji_table: Option<PathBuf>,
    /// Discretization mode: `global` (default) or `per-user`.
    #[arg(long)]
    pub discretize: Option<String>,
    /// Maximum inter-report gap in hours before a segment is dismissed.
    #[arg(long)]
    pub max_gap_hours: Option<f64>,
    /// Upper clamp for the emoji rate.
    #[arg(long)]
    pub emoji_rate_cap: Option<f64>,
    /// Timezone offset for response-rate calendar days.
    #[arg(long)]
    pub tz_offset_hours: Option<i64>,
    /// Skip malformed log lines instead of failing.
    #[arg(long)]
    pub lenient: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

struct FeaturePipelineOutput {
    segmentation: SegmentationResult,
    entries: Vec<PanasEntry>,
    cuts_text: BTreeMap<String, String>,
    warnings: Vec<String>,
}

impl FeaturePipelineOutput {
    fn segments(&self) -> &[Segment] {
        &self.segmentation.segments
    }
}

fn run_feature_pipeline(
    events: Vec<NotificationEvent>,
    entries: Vec<PanasEntry>,
    detectors: &Detectors,
    cfg: &SegmentConfig,
    per_user: bool,
) -> Result<FeaturePipelineOutput> {
    let enriched: Vec<_> = events.into_iter().map(|ev| detectors.enrich(ev)).collect();
    let mut segmentation = build_segments(&enriched, &entries, cfg);
    let mut warnings = Vec::new();
    let mut cuts_text = BTreeMap::new();

    let scores: Vec<i32> = entries.iter().map(|e| score(e).balance).collect();
    let global_model = discretize(&scores).context("fitting the score discretization")?;
    if per_user {
        let mut models: BTreeMap<String, DiscretizationModel> = BTreeMap::new();
        let mut by_user: BTreeMap<&str, Vec<i32>> = BTreeMap::new();
        for entry in &entries {
            by_user
                .entry(&entry.user_id)
                .or_default()
                .push(score(entry).balance);
        }
        for (user, user_scores) in by_user {
            match discretize(&user_scores) {
                Ok(model) => {
                    models.insert(user.to_string(), model);
                }
                Err(e) => {
                    warnings.push(format!("user {user}: {e}; falling back to the global cuts"));
                    models.insert(user.to_string(), global_model);
                }
            }
        }
        for (user, model) in &models {
            cuts_text.insert(user.clone(), model.to_text());
        }
        assign_classes_per_user(&mut segmentation.segments, &models);
    } else {
        cuts_text.insert(String::new(), global_model.to_text());
        assign_classes(&mut segmentation.segments, &global_model);
    }
    Ok(FeaturePipelineOutput {
        segmentation,
        entries,
        cuts_text,
        warnings,
    })
}

fn overall_state_shares(segments: &[Segment]) -> Option<[f64; 6]> {
    let mut counts = [0u64; 6];
    for seg in segments {
        let c = &seg.counts;
        for (slot, v) in counts
            .iter_mut()
            .zip([c.p, c.r, c.o, c.f, c.u, c.k])
        {
            *slot += v as u64;
        }
    }
    let total: u64 = counts.iter().sum();
    (total > 0).then(|| counts.map(|c| 100.0 * c as f64 / total as f64))
}

fn features_summary(
    output: &FeaturePipelineOutput,
    tz_offset_hours: i64,
    per_user: bool,
) -> Result<String> {
    let mut text = String::new();
    let seg = &output.segmentation;
    let _ = writeln!(
        text,
        "segments {}\ndismissed_gaps {}\nevents_assigned {}\nevents_dropped {}",
        seg.segments.len(),
        seg.dismissed_gaps,
        seg.assigned_events,
        seg.dropped_events
    );
    let scores: Vec<i32> = output.entries.iter().map(|e| score(e).balance).collect();
    let dist = distribution_report(&scores).context("score distribution")?;
    let _ = writeln!(
        text,
        "score_n {}\nscore_mean {:.4}\nscore_std {:.4}\nscore_positive_pct {:.1}\nscore_negative_pct {:.1}\nscore_min {}\nscore_max {}",
        dist.n,
        dist.mean,
        dist.std,
        100.0 * dist.frac_positive,
        100.0 * dist.frac_negative,
        dist.min,
        dist.max
    );
    if per_user {
        let _ = writeln!(text, "discretization per-user ({} models)", output.cuts_text.len());
    } else if let Some(cuts) = output.cuts_text.get("") {
        for line in cuts.lines() {
            let _ = writeln!(text, "discretization_{line}");
        }
    }
    let rr = response_rate(&output.entries, tz_offset_hours as i32);
    let _ = writeln!(
        text,
        "response_days_with_3plus_pct {:.1}{}",
        100.0 * rr.fraction_days_with_3plus,
        if rr.undefined { " (no entries)" } else { "" }
    );
    if let Some(shares) = overall_state_shares(output.segments()) {
        let labels = ["post", "removed", "screen_on", "screen_off", "unlock", "keyboard_out"];
        for (label, share) in labels.iter().zip(shares) {
            let _ = writeln!(text, "share_{label} {share:.2}");
        }
    }
    for warning in &output.warnings {
        let _ = writeln!(text, "warning {warning}");
    }
    Ok(text)
}

/// Full feature extraction: parse, enrich, score, discretize, segment,
/// and write the feature matrix CSV plus a distribution summary.
pub fn run_features(args: &FeaturesArgs) -> Result<()> {
    crate::apply_thread_cap();
    let layer = ConfigLayer::load(args.config.as_deref())?;
    let events_path = layer
        .path("events", args.events.clone())
        .ok_or_else(|| anyhow!("--events is required"))?;
    let panas_path = layer
        .path("panas", args.panas.clone())
        .ok_or_else(|| anyhow!("--panas is required"))?;
    let out = layer
        .path("out", args.out.clone())
        .ok_or_else(|| anyhow!("--out is required"))?;
    let lenient = layer.flag("lenient", args.lenient)?;
    ensure_out_dir(&out)?;

    let detector_config = match layer.path("detector_config", args.detector_config.clone()) {
        None => DetectorConfig::default(),
        Some(path) => {
            let kv = KvFile::parse(&read_input(&path)?)
                .with_context(|| format!("parsing detector config {}", path.display()))?;
            DetectorConfig::from_kv(&kv)?
        }
    };
    let emoji_table = match layer.path("emoji_table", args.emoji_table.clone()) {
        None => EmojiTable::bundled().clone(),
        Some(path) => EmojiTable::parse(&read_input(&path)?)
            .with_context(|| format!("parsing emoji table {}", path.display()))?,
    };
    let detectors = Detectors::new(detector_config, emoji_table)?;

    let discretize_mode = layer
        .string("discretize", args.discretize.clone())
        .unwrap_or_else(|| "global".to_string());
    let per_user = match discretize_mode.as_str() {
        "global" => false,
        "per-user" | "per_user" => true,
        other => bail!("unknown discretize mode {other:?} (use global or per-user)"),
    };
    let max_gap_hours = layer.f64("max_gap_hours", args.max_gap_hours)?.unwrap_or(10.0);
    let emoji_rate_cap = layer.f64("emoji_rate_cap", args.emoji_rate_cap)?.unwrap_or(500.0);
    let tz_offset = layer.i64("tz_offset_hours", args.tz_offset_hours)?.unwrap_or(0);
    let cfg = SegmentConfig {
        max_gap: chrono::Duration::milliseconds((max_gap_hours * 3_600_000.0) as i64),
        emoji_rate_cap,
    };

    let (events, event_errors) = parse_event_log(read_input(&events_path)?.as_bytes())
        .context("stage ingest: reading event log")?;
    let (entries, entry_errors) = parse_panas_log(read_input(&panas_path)?.as_bytes())
        .context("stage ingest: reading report log")?;
    let n_bad = event_errors.len() + entry_errors.len();
    if n_bad > 0 && !lenient {
        bail!("stage ingest: {n_bad} malformed lines (use --lenient to skip them)");
    }

    let output = run_feature_pipeline(events, entries, &detectors, &cfg, per_user)
        .context("stage segment")?;

    let mut csv_bytes = Vec::new();
    write_feature_csv(output.segments(), &mut csv_bytes)
        .context("stage features: writing csv")?;
    fs::write(out.join("features.csv"), &csv_bytes)
        .with_context(|| format!("writing {}", out.join("features.csv").display()))?;

    if per_user {
        let cuts_dir = out.join("cuts");
        ensure_out_dir(&cuts_dir)?;
        for (user, text) in &output.cuts_text {
            write_file(&cuts_dir.join(format!("{user}.txt")), text)?;
        }
    } else {
        write_file(
            &out.join("discretization.txt"),
            output.cuts_text.get("").expect("global cuts"),
        )?;
    }
    let summary = features_summary(&output, tz_offset, per_user).context("stage summary")?;
    write_file(&out.join("summary.txt"), &summary)?;
    println!(
        "features: {} segments from {} reports ({} gaps dismissed)",
        output.segments().len(),
        output.entries.len(),
        output.segmentation.dismissed_gaps
    );
    Ok(())
}

// ---------------------------------------------------------------------
// correlate

#[derive(Debug, Args, Default, Clone)]
pub struct CorrelateArgs {
    /// Feature matrix CSV produced by `features`.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn correlation_from_rows(rows: &[FeatureRow]) -> Result<CorrelationReport> {
    let scores: Vec<f64> = rows.iter().map(|r| r.score as f64).collect();
    let columns: Vec<(String, Vec<f64>)> = RATE_FEATURE_NAMES
        .iter()
        .map(|&name| {
            (
                name.to_string(),
                rows.iter().map(|r| r.rate(name).expect("known column")).collect(),
            )
        })
        .collect();
    Ok(correlation_table(&columns, &scores)?)
}

pub fn run_correlate(args: &CorrelateArgs) -> Result<()> {
    let layer = ConfigLayer::load(args.config.as_deref())?;
    let features_path = layer
        .path("features", args.features.clone())
        .ok_or_else(|| anyhow!("--features is required"))?;
    let out = layer
        .path("out", args.out.clone())
        .ok_or_else(|| anyhow!("--out is required"))?;
    ensure_out_dir(&out)?;

    let rows = read_feature_csv(read_input(&features_path)?.as_bytes())?;
    let report = correlation_from_rows(&rows)?;
    let mut csv_bytes = Vec::new();
    write_correlation_csv(&report, &mut csv_bytes)?;
    fs::write(out.join("correlations.csv"), &csv_bytes)
        .with_context(|| format!("writing {}", out.join("correlations.csv").display()))?;
    for row in report.rows.iter().take(3) {
        println!("correlate: {} r={:+.3} p={:.4}", row.feature, row.r, row.p);
    }
    Ok(())
}

// ---------------------------------------------------------------------
// train

#[derive(Debug, Args, Default, Clone)]
pub struct TrainArgs {
    /// Feature matrix CSV produced by `features`.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `within`, `global`, or `both` (default).
    #[arg(long)]
    pub regime: Option<String>,
    /// Comma-separated subset of ann,svm,lr (default all).
    #[arg(long)]
    pub classifiers: Option<String>,
    /// Feature selection: `default` (the fixed nine) or `threshold:<t>`.
    #[arg(long)]
    pub selection: Option<String>,
    #[arg(long)]
    pub epochs: Option<u64>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub momentum: Option<f64>,
    /// Hidden layer width (default: halfway between inputs and classes).
    #[arg(long)]
    pub hidden: Option<u64>,
    #[arg(long)]
    pub svm_c: Option<f64>,
    #[arg(long)]
    pub svm_gamma: Option<f64>,
    #[arg(long)]
    pub kfold: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_classifiers(raw: &str) -> Result<Vec<ClassifierKind>> {
    let mut kinds = Vec::new();
    for part in raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let kind = ClassifierKind::parse(part)
            .ok_or_else(|| anyhow!("unknown classifier {part:?} (use ann, svm, lr)"))?;
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    if kinds.is_empty() {
        bail!("no classifiers selected");
    }
    Ok(kinds)
}

fn parse_regimes(raw: &str) -> Result<Vec<Regime>> {
    match raw.to_ascii_lowercase().as_str() {
        "both" => Ok(vec![Regime::WithinSubject15Fold, Regime::GlobalLeaveOneUserOut]),
        other => Regime::parse(other)
            .map(|r| vec![r])
            .ok_or_else(|| anyhow!("unknown regime {other:?} (use within, global, both)")),
    }
}

pub fn run_train(args: &TrainArgs) -> Result<()> {
    crate::apply_thread_cap();
    let layer = ConfigLayer::load(args.config.as_deref())?;
    let features_path = layer
        .path("features", args.features.clone())
        .ok_or_else(|| anyhow!("--features is required"))?;
    let out = layer
        .path("out", args.out.clone())
        .ok_or_else(|| anyhow!("--out is required"))?;
    ensure_out_dir(&out)?;

    let regimes = parse_regimes(
        &layer
            .string("regime", args.regime.clone())
            .unwrap_or_else(|| "both".to_string()),
    )?;
    let kinds = parse_classifiers(
        &layer
            .string("classifiers", args.classifiers.clone())
            .unwrap_or_else(|| "ann,svm,lr".to_string()),
    )?;
    let selection_raw = layer
        .string("selection", args.selection.clone())
        .unwrap_or_else(|| "default".to_string());

    let rows = read_feature_csv(read_input(&features_path)?.as_bytes())?;
    let selected = if selection_raw == "default" {
        select_features(&correlation_from_rows(&rows)?, SelectionMode::Default)?
    } else if let Some(tau_raw) = selection_raw.strip_prefix("threshold:") {
        let tau: f64 = tau_raw
            .trim()
            .parse()
            .map_err(|_| anyhow!("bad threshold {tau_raw:?}"))?;
        let picked = select_features(&correlation_from_rows(&rows)?, SelectionMode::Threshold(tau))?;
        if picked.is_empty() {
            bail!("threshold {tau} selects no features");
        }
        picked
    } else {
        bail!("unknown selection mode {selection_raw:?} (use default or threshold:<t>)");
    };

    let mut train_cfg = TrainConfig::default();
    if let Some(v) = layer.u64("epochs", args.epochs)? {
        train_cfg.epochs = v as usize;
    }
    if let Some(v) = layer.f64("learning_rate", args.learning_rate)? {
        train_cfg.learning_rate = v;
    }
    if let Some(v) = layer.f64("momentum", args.momentum)? {
        train_cfg.momentum = v;
    }
    if let Some(v) = layer.u64("hidden", args.hidden)? {
        train_cfg.hidden_size = Some(v as usize);
    }
    if let Some(v) = layer.f64("svm_c", args.svm_c)? {
        train_cfg.svm_c = v;
    }
    if let Some(v) = layer.f64("svm_gamma", args.svm_gamma)? {
        train_cfg.svm_gamma = Some(v);
    }
    if let Some(v) = layer.u64("kfold", args.kfold)? {
        train_cfg.kfold = v as usize;
    }
    train_cfg.seed = layer.u64("seed", args.seed)?.unwrap_or(0);

    let dataset = Dataset::from_rows(&rows, &selected)?;
    let mut reports: Vec<EvaluationReport> = Vec::new();
    for &regime in &regimes {
        let report = cross_validate(&dataset, regime, &kinds, &train_cfg)
            .with_context(|| format!("cross-validation, {} regime", regime.as_str()))?;
        reports.push(report);
    }
    let report_refs: Vec<&EvaluationReport> = reports.iter().collect();

    let mut folds_bytes = Vec::new();
    write_folds_csv(&report_refs, &mut folds_bytes)?;
    fs::write(out.join("folds.csv"), &folds_bytes)
        .with_context(|| format!("writing {}", out.join("folds.csv").display()))?;

    let mut summary = String::new();
    let _ = writeln!(summary, "features {}", selected.join(","));
    let _ = writeln!(summary, "rows {}", dataset.n_rows());
    let _ = writeln!(summary, "seed {}", train_cfg.seed);
    summary.push('\n');
    summary.push_str(&summary_text(&report_refs));
    for report in &reports {
        for warning in &report.warnings {
            let _ = writeln!(summary, "warning [{}] {}", report.regime.as_str(), warning);
        }
    }
    write_file(&out.join("summary.txt"), &summary)?;

    let models_dir = out.join("models");
    ensure_out_dir(&models_dir)?;
    for &kind in &kinds {
        let model = train_full(&dataset, kind, &train_cfg)
            .with_context(|| format!("training the final {} model", kind.display_name()))?;
        let mut bytes = Vec::new();
        write_model(&model, &mut bytes)?;
        let path = models_dir.join(format!("{}.model", kind.as_str()));
        fs::write(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
        // A model file that does not load identically is a bug.
        let reloaded = read_model(bytes.as_slice())?;
        if reloaded != model {
            bail!("model round-trip mismatch for {}", kind.as_str());
        }
    }

    for report in &reports {
        for eval in &report.evaluations {
            println!(
                "train [{}] {}: macro-F {:.3} (std {:.3}, {} folds)",
                report.regime.as_str(),
                eval.kind.display_name(),
                eval.mean,
                eval.std,
                eval.folds.len()
            );
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------
// synth

#[derive(Debug, Args, Default, Clone)]
pub struct SynthArgs {
    /// Cohort spec (key-value file); defaults are used when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run the pipeline over the generated logs and check the ground
    /// truth round trip.
    #[arg(long)]
    pub verify: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn run_synth(args: &SynthArgs) -> Result<()> {
    let layer = ConfigLayer::load(args.config.as_deref())?;
    let out = layer
        .path("out", args.out.clone())
        .ok_or_else(|| anyhow!("--out is required"))?;
    ensure_out_dir(&out)?;

    let mut spec = match layer.path("spec", args.spec.clone()) {
        None => CohortSpec::default(),
        Some(path) => {
            let kv = KvFile::parse(&read_input(&path)?)
                .with_context(|| format!("parsing cohort spec {}", path.display()))?;
            CohortSpec::from_kv(&kv)?
        }
    };
    if let Some(seed) = layer.u64("seed", args.seed)? {
        spec.seed = seed;
    }

    let cohort = generate_cohort(&spec)?;
    write_file(&out.join("events.jsonl"), &cohort.events_jsonl)?;
    write_file(&out.join("panas.jsonl"), &cohort.panas_jsonl)?;
    write_file(&out.join("ground_truth.csv"), &cohort.ground_truth_csv())?;
    println!(
        "synth: {} users, {} retained segments, {} event bytes",
        spec.n_users,
        cohort.ground_truth.len(),
        cohort.events_jsonl.len()
    );

    if layer.flag("verify", args.verify)? {
        let report = verify_cohort(&cohort.events_jsonl, &cohort.panas_jsonl, &cohort.ground_truth)?;
        if !report.is_clean() {
            for m in &report.mismatches {
                eprintln!("mismatch: {} {}..{}: {}", m.user_id, m.t_start, m.t_end, m.reason);
            }
            bail!("{} of {} segments diverged", report.total_mismatches, report.segments_checked);
        }
        println!("verify: {} segments match exactly", report.segments_checked);
    }
    Ok(())
}
