//! Category detectors and message content metrics.
//!
//! Each posted/removed notification is tagged with group / work / system /
//! multi flags and content metrics (emoji count and descriptions, media
//! presence, message length). Screen interaction events carry no content
//! and always enrich to all-false flags and zero counts.
//!
//! The work and system detectors are keyword driven and configurable; the
//! defaults are documented on [`DetectorConfig`]. Emoji detection uses a
//! bundled static codepoint table so builds are deterministic and offline.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use crate::config::{ConfigError, KvFile};
use crate::ingest::NotificationEvent;

#[derive(Debug, Error)]
pub enum EnrichError {
    #[error("emoji table line {line}: {reason}")]
    BadEmojiTable { line: usize, reason: String },
    #[error("detector config: {0}")]
    Config(#[from] ConfigError),
    #[error("detector regex: {0}")]
    Regex(#[from] regex::Error),
}

/// Codepoint table driving emoji detection: membership ranges plus a
/// codepoint-to-name map. A named codepoint is always a member; members
/// without a name decode to `UNKNOWN`.
#[derive(Debug, Clone)]
pub struct EmojiTable {
    names: HashMap<u32, String>,
    ranges: Vec<(u32, u32)>,
}

const BUNDLED_EMOJI_TABLE: &str = include_str!("../assets/emoji_table.txt");

impl EmojiTable {
    /// Parse the two-column tab-separated table format:
    /// `HEX<TAB>NAME` entries and `HEX..HEX<TAB>RANGE-NAME` ranges.
    pub fn parse(text: &str) -> Result<Self, EnrichError> {
        let mut names = HashMap::new();
        let mut ranges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| EnrichError::BadEmojiTable {
                line: idx + 1,
                reason: reason.to_string(),
            };
            let (codes, name) = line.split_once('\t').ok_or_else(|| bad("missing tab"))?;
            let name = name.trim();
            if name.is_empty() {
                return Err(bad("empty name"));
            }
            if let Some((lo, hi)) = codes.split_once("..") {
                let lo = u32::from_str_radix(lo.trim(), 16).map_err(|_| bad("bad hex"))?;
                let hi = u32::from_str_radix(hi.trim(), 16).map_err(|_| bad("bad hex"))?;
                if lo > hi {
                    return Err(bad("range lower bound above upper bound"));
                }
                ranges.push((lo, hi));
            } else {
                let cp = u32::from_str_radix(codes.trim(), 16).map_err(|_| bad("bad hex"))?;
                names.insert(cp, name.to_string());
            }
        }
        ranges.sort_unstable();
        Ok(EmojiTable { names, ranges })
    }

    /// The table compiled into the crate.
    pub fn bundled() -> &'static EmojiTable {
        static TABLE: OnceLock<EmojiTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            EmojiTable::parse(BUNDLED_EMOJI_TABLE).expect("bundled emoji table is well-formed")
        })
    }

    pub fn is_emoji(&self, c: char) -> bool {
        let cp = c as u32;
        self.names.contains_key(&cp)
            || self
                .ranges
                .binary_search_by(|&(lo, hi)| {
                    if cp < lo {
                        std::cmp::Ordering::Greater
                    } else if cp > hi {
                        std::cmp::Ordering::Less
                    } else {
                        std::cmp::Ordering::Equal
                    }
                })
                .is_ok()
    }

    pub fn name(&self, c: char) -> Option<&str> {
        self.names.get(&(c as u32)).map(|s| s.as_str())
    }

    /// Named codepoints, for callers that need to emit real emoji text.
    pub fn named_codepoints(&self) -> impl Iterator<Item = (char, &str)> {
        let mut entries: Vec<_> = self.names.iter().collect();
        entries.sort_by_key(|(cp, _)| **cp);
        entries
            .into_iter()
            .filter_map(|(cp, name)| char::from_u32(*cp).map(|c| (c, name.as_str())))
    }
}

/// Detector configuration with auditable defaults.
///
/// * `work_originators`: originator-name tokens that mark a sender as
///   work related (email clients and LinkedIn).
/// * `work_tags`: message prefixes that mark forwarded/replied mail.
/// * `work_detect_email_address`: also treat an `@domain.tld` token in
///   the message body as a work marker.
/// * `system_keywords`: substrings of the message or event name that mark
///   system notifications.
/// * `system_originators`: originator services that are always system.
/// * `multi_pattern`: enable aggregate-banner detection
///   (`"5 new messages"`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectorConfig {
    pub work_originators: Vec<String>,
    pub work_tags: Vec<String>,
    pub work_detect_email_address: bool,
    pub system_keywords: Vec<String>,
    pub system_originators: Vec<String>,
    pub multi_pattern: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        let list = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        DetectorConfig {
            // "gm" covers the gmail package name (com.google.android.gm).
            work_originators: list(&["gmail", "gm", "email", "outlook", "k9", "linkedin"]),
            work_tags: list(&["re:", "fwd:"]),
            work_detect_email_address: true,
            system_keywords: list(&["updating", "wifi", "usb"]),
            system_originators: list(&["com.android.systemui"]),
            multi_pattern: true,
        }
    }
}

impl DetectorConfig {
    /// Load from the key-value detector config format. Missing keys keep
    /// their defaults; unknown keys are an error.
    pub fn from_kv(kv: &KvFile) -> Result<Self, ConfigError> {
        let mut cfg = DetectorConfig::default();
        for key in kv.keys() {
            match key {
                "work_originators" | "work_tags" | "system_keywords" | "system_originators"
                | "work_detect_email_address" | "multi_pattern" => {}
                other => return Err(ConfigError::UnknownKey(other.to_string())),
            }
        }
        if let Some(v) = kv.get_list("work_originators") {
            cfg.work_originators = v;
        }
        if let Some(v) = kv.get_list("work_tags") {
            cfg.work_tags = v;
        }
        if let Some(v) = kv.get_bool("work_detect_email_address")? {
            cfg.work_detect_email_address = v;
        }
        if let Some(v) = kv.get_list("system_keywords") {
            cfg.system_keywords = v;
        }
        if let Some(v) = kv.get_list("system_originators") {
            cfg.system_originators = v;
        }
        if let Some(v) = kv.get_bool("multi_pattern")? {
            cfg.multi_pattern = v;
        }
        Ok(cfg)
    }
}

/// An event plus derived category flags and content metrics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnrichedEvent {
    pub base: NotificationEvent,
    pub is_group: bool,
    pub is_work: bool,
    pub is_system: bool,
    pub is_multi: bool,
    pub emoji_count: u32,
    pub emoji_descriptions: Vec<String>,
    pub has_video: bool,
    pub video_length_seconds: Option<u32>,
    pub has_image: bool,
    pub message_length: u32,
}

/// Media markers extracted from a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MediaInfo {
    pub has_video: bool,
    pub video_length_seconds: Option<u32>,
    pub has_image: bool,
}

const VIDEO_EMOJI: char = '\u{1F3A5}';
const IMAGE_EMOJI: char = '\u{1F4F7}';

/// Group messages are tagged with `@` in the event name.
pub fn detect_group(event: &NotificationEvent) -> bool {
    event.event_name.contains('@')
}

/// Count emoji codepoints and decode their descriptions in order of
/// appearance. Members without a table name decode to `UNKNOWN`.
pub fn count_emojis(message: &str, table: &EmojiTable) -> (u32, Vec<String>) {
    let mut descriptions = Vec::new();
    for c in message.chars() {
        if table.is_emoji(c) {
            descriptions.push(table.name(c).unwrap_or("UNKNOWN").to_string());
        }
    }
    (descriptions.len() as u32, descriptions)
}

fn parse_duration_token(token: &str) -> Option<u32> {
    let parts: Vec<&str> = token.split(':').collect();
    let nums: Option<Vec<u32>> = parts
        .iter()
        .map(|p| {
            if p.is_empty() || p.len() > 9 || !p.bytes().all(|b| b.is_ascii_digit()) {
                None
            } else {
                p.parse::<u32>().ok()
            }
        })
        .collect();
    match nums?.as_slice() {
        [m, s] => Some(m * 60 + s),
        [h, m, s] => Some(h * 3600 + m * 60 + s),
        _ => None,
    }
}

/// Detect video/image markers. Video length is taken from the first
/// `m:ss` or `h:mm:ss` token after the video emoji; an unparseable or
/// missing duration leaves the length absent but the flag set.
pub fn detect_media(message: &str) -> MediaInfo {
    let has_image = message.contains(IMAGE_EMOJI);
    match message.find(VIDEO_EMOJI) {
        None => MediaInfo {
            has_video: false,
            video_length_seconds: None,
            has_image,
        },
        Some(pos) => {
            let tail = &message[pos + VIDEO_EMOJI.len_utf8()..];
            let video_length_seconds = tail.split_whitespace().find_map(parse_duration_token);
            MediaInfo {
                has_video: true,
                video_length_seconds,
                has_image,
            }
        }
    }
}

/// Compiled detectors. Build once from a [`DetectorConfig`] and an
/// [`EmojiTable`], then use freely from any thread.
#[derive(Debug)]
pub struct Detectors {
    config: DetectorConfig,
    emoji: EmojiTable,
    work_originators: Vec<String>,
    system_keywords: Vec<String>,
    system_originators: Vec<String>,
    work_tag_re: Option<Regex>,
    email_re: Regex,
    multi_re: Regex,
}

impl Default for Detectors {
    fn default() -> Self {
        Detectors::new(DetectorConfig::default(), EmojiTable::bundled().clone())
            .expect("default detector config compiles")
    }
}

impl Detectors {
    pub fn new(config: DetectorConfig, emoji: EmojiTable) -> Result<Self, EnrichError> {
        let lower = |xs: &[String]| xs.iter().map(|s| s.to_lowercase()).collect::<Vec<_>>();
        let work_tag_re = if config.work_tags.is_empty() {
            None
        } else {
            let alts: Vec<String> = config.work_tags.iter().map(|t| regex::escape(t)).collect();
            Some(Regex::new(&format!(
                r#"(?i)(^|[\s\[("'<])({})"#,
                alts.join("|")
            ))?)
        };
        let email_re = Regex::new(r"(?i)@[a-z0-9][a-z0-9._-]*\.[a-z]{2,}")?;
        let multi_re = Regex::new(r"(?i)^\s*([0-9]+)\s+(?:new\s+)?messages?\s*$")?;
        Ok(Detectors {
            work_originators: lower(&config.work_originators),
            system_keywords: lower(&config.system_keywords),
            system_originators: lower(&config.system_originators),
            config,
            emoji,
            work_tag_re,
            email_re,
            multi_re,
        })
    }

    pub fn config(&self) -> &DetectorConfig {
        &self.config
    }

    pub fn emoji_table(&self) -> &EmojiTable {
        &self.emoji
    }

    /// Work detection: originator token match (email clients, LinkedIn)
    /// or an email tag / address inside the message body.
    pub fn detect_work(&self, event: &NotificationEvent) -> bool {
        let name = event.event_name.to_lowercase();
        let mut tokens = name
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty());
        if tokens.any(|t| self.work_originators.iter().any(|o| o == t)) {
            return true;
        }
        if let Some(re) = &self.work_tag_re {
            if re.is_match(&event.message) {
                return true;
            }
        }
        self.config.work_detect_email_address && self.email_re.is_match(&event.message)
    }

    /// System detection: keyword in message or event name, or a system
    /// originator service.
    pub fn detect_system(&self, event: &NotificationEvent) -> bool {
        let name = event.event_name.to_lowercase();
        let msg = event.message.to_lowercase();
        self.system_originators.iter().any(|o| name.contains(o))
            || self
                .system_keywords
                .iter()
                .any(|k| name.contains(k) || msg.contains(k))
    }

    /// Aggregate banner detection: an integer of at least 2 followed by
    /// "message(s)" / "new messages" and nothing else.
    pub fn detect_multi(&self, event: &NotificationEvent) -> bool {
        if !self.config.multi_pattern {
            return false;
        }
        match self.multi_re.captures(&event.message) {
            None => false,
            // An unparseably long digit run is still a count >= 2.
            Some(caps) => caps[1].parse::<u64>().map(|n| n >= 2).unwrap_or(true),
        }
    }

    /// Apply every detector; pure and deterministic.
    pub fn enrich(&self, event: NotificationEvent) -> EnrichedEvent {
        if event.state.is_screen_event() {
            return EnrichedEvent {
                base: event,
                is_group: false,
                is_work: false,
                is_system: false,
                is_multi: false,
                emoji_count: 0,
                emoji_descriptions: Vec::new(),
                has_video: false,
                video_length_seconds: None,
                has_image: false,
                message_length: 0,
            };
        }
        let is_group = detect_group(&event);
        let is_work = self.detect_work(&event);
        let is_system = self.detect_system(&event);
        let is_multi = self.detect_multi(&event);
        let media = detect_media(&event.message);
        // Aggregate banners hide the underlying messages, so they carry
        // no per-message emoji semantics.
        let (emoji_count, emoji_descriptions) = if is_multi {
            (0, Vec::new())
        } else {
            count_emojis(&event.message, &self.emoji)
        };
        let message_length = event.message.chars().count() as u32;
        EnrichedEvent {
            base: event,
            is_group,
            is_work,
            is_system,
            is_multi,
            emoji_count,
            emoji_descriptions,
            has_video: media.has_video,
            video_length_seconds: media.video_length_seconds,
            has_image: media.has_image,
            message_length,
        }
    }
}
