//! Parsing and validation of the two JSON-lines input formats: the
//! notification event log and the PANAS self-report log.
//!
//! Both parsers are total over their input: every non-blank line becomes
//! exactly one record or one line-numbered error, and nothing is silently
//! dropped. Events are returned sorted by `(user_id, timestamp)` so the
//! output is a deterministic function of the input line multiset.

use std::io::{self, BufRead};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

/// What a log row records: a notification lifecycle event or a screen
/// interaction. Every row carries exactly one of these states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventState {
    Posted,
    Removed,
    ScreenOn,
    ScreenOff,
    Unlock,
    KeyboardOut,
}

impl EventState {
    pub const ALL: [EventState; 6] = [
        EventState::Posted,
        EventState::Removed,
        EventState::ScreenOn,
        EventState::ScreenOff,
        EventState::Unlock,
        EventState::KeyboardOut,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EventState::Posted => "Posted",
            EventState::Removed => "Removed",
            EventState::ScreenOn => "ScreenOn",
            EventState::ScreenOff => "ScreenOff",
            EventState::Unlock => "Unlock",
            EventState::KeyboardOut => "KeyboardOut",
        }
    }

    fn parse(s: &str) -> Option<EventState> {
        Self::ALL.iter().copied().find(|st| st.as_str() == s)
    }

    /// True for screen interaction states (no notification content).
    pub fn is_screen_event(self) -> bool {
        matches!(
            self,
            EventState::ScreenOn | EventState::ScreenOff | EventState::Unlock | EventState::KeyboardOut
        )
    }
}

/// Phone ringer mode at event time. Unrecognized input maps to `Unknown`
/// rather than failing the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum RingerMode {
    Normal,
    Vibrate,
    Silent,
    #[default]
    Unknown,
}

impl RingerMode {
    pub const ALL: [RingerMode; 4] = [
        RingerMode::Normal,
        RingerMode::Vibrate,
        RingerMode::Silent,
        RingerMode::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RingerMode::Normal => "Normal",
            RingerMode::Vibrate => "Vibrate",
            RingerMode::Silent => "Silent",
            RingerMode::Unknown => "Unknown",
        }
    }

    pub fn parse_lenient(s: &str) -> RingerMode {
        match s.to_ascii_lowercase().as_str() {
            "normal" => RingerMode::Normal,
            "vibrate" => RingerMode::Vibrate,
            "silent" => RingerMode::Silent,
            _ => RingerMode::Unknown,
        }
    }
}

/// One validated notification event log row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotificationEvent {
    pub timestamp: DateTime<Utc>,
    pub user_id: String,
    /// Originating app or service, optionally with sender and group,
    /// e.g. `whatsapp : William @ Friendship-Group`.
    pub event_name: String,
    pub state: EventState,
    pub message: String,
    pub volume: RingerMode,
}

impl NotificationEvent {
    /// Total ordering used for log output: user, time, then remaining
    /// fields so ties are broken deterministically.
    fn sort_key(&self) -> impl Ord + '_ {
        (
            &self.user_id,
            self.timestamp,
            self.state,
            &self.event_name,
            &self.message,
            self.volume,
        )
    }
}

/// The ten I-PANAS-SF item scores, each in `[1, 5]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PanasItems {
    pub determined: u8,
    pub attentive: u8,
    pub alert: u8,
    pub inspired: u8,
    pub active: u8,
    pub upset: u8,
    pub ashamed: u8,
    pub nervous: u8,
    pub afraid: u8,
    pub hostile: u8,
}

pub const PANAS_ITEM_NAMES: [&str; 10] = [
    "Determined",
    "Attentive",
    "Alert",
    "Inspired",
    "Active",
    "Upset",
    "Ashamed",
    "Nervous",
    "Afraid",
    "Hostile",
];

impl PanasItems {
    pub fn get(&self, name: &str) -> Option<u8> {
        Some(match name {
            "Determined" => self.determined,
            "Attentive" => self.attentive,
            "Alert" => self.alert,
            "Inspired" => self.inspired,
            "Active" => self.active,
            "Upset" => self.upset,
            "Ashamed" => self.ashamed,
            "Nervous" => self.nervous,
            "Afraid" => self.afraid,
            "Hostile" => self.hostile,
            _ => return None,
        })
    }
}

/// One timestamped self-report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PanasEntry {
    pub timestamp: DateTime<Utc>,
    pub user_id: String,
    pub items: PanasItems,
}

/// Why a single line failed to parse.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("not a JSON object: {0}")]
    BadJson(String),
    #[error("missing field {0:?}")]
    MissingField(String),
    #[error("bad timestamp {0:?} (RFC-3339 UTC required)")]
    BadTimestamp(String),
    #[error("unknown event state {0:?}")]
    BadState(String),
    #[error("item {item:?} out of range: {value}")]
    BadItemRange { item: String, value: String },
    #[error("duplicate entry for user {user:?} at {ts}")]
    DuplicateEntry { user: String, ts: String },
}

/// A parse failure located in its source stream.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based line number in the input stream.
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn object_of(line: &str) -> Result<serde_json::Map<String, Value>, ParseErrorKind> {
    match serde_json::from_str::<Value>(line) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(other) => Err(ParseErrorKind::BadJson(format!(
            "expected an object, got {other}"
        ))),
        Err(e) => Err(ParseErrorKind::BadJson(e.to_string())),
    }
}

fn required_str<'a>(
    map: &'a serde_json::Map<String, Value>,
    key: &str,
) -> Result<&'a str, ParseErrorKind> {
    map.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| ParseErrorKind::MissingField(key.to_string()))
}

fn parse_utc_timestamp(raw: &str) -> Result<DateTime<Utc>, ParseErrorKind> {
    let parsed = DateTime::parse_from_rfc3339(raw)
        .map_err(|_| ParseErrorKind::BadTimestamp(raw.to_string()))?;
    if parsed.offset().local_minus_utc() != 0 {
        return Err(ParseErrorKind::BadTimestamp(raw.to_string()));
    }
    Ok(parsed.with_timezone(&Utc))
}

/// Parse one event record. Unknown `state` values are a hard error while
/// unknown `vol` values degrade to [`RingerMode::Unknown`].
pub fn parse_event_line(line: &str) -> Result<NotificationEvent, ParseErrorKind> {
    let map = object_of(line)?;
    let ts = parse_utc_timestamp(required_str(&map, "ts")?)?;
    let user = required_str(&map, "user")?;
    if user.is_empty() {
        return Err(ParseErrorKind::MissingField("user".to_string()));
    }
    let name = required_str(&map, "name")?;
    let state_raw = required_str(&map, "state")?;
    let state = EventState::parse(state_raw)
        .ok_or_else(|| ParseErrorKind::BadState(state_raw.to_string()))?;
    let msg = required_str(&map, "msg")?;
    let vol = RingerMode::parse_lenient(required_str(&map, "vol")?);
    Ok(NotificationEvent {
        timestamp: ts,
        user_id: user.to_string(),
        event_name: name.to_string(),
        state,
        message: msg.to_string(),
        volume: vol,
    })
}

/// Parse one PANAS record; all ten items must be integers in `[1, 5]`.
pub fn parse_panas_line(line: &str) -> Result<PanasEntry, ParseErrorKind> {
    let map = object_of(line)?;
    let ts = parse_utc_timestamp(required_str(&map, "ts")?)?;
    let user = required_str(&map, "user")?;
    if user.is_empty() {
        return Err(ParseErrorKind::MissingField("user".to_string()));
    }
    let mut values = [0u8; 10];
    for (slot, name) in values.iter_mut().zip(PANAS_ITEM_NAMES) {
        let raw = map
            .get(name)
            .ok_or_else(|| ParseErrorKind::MissingField(name.to_string()))?;
        let v = raw.as_i64().ok_or_else(|| ParseErrorKind::BadItemRange {
            item: name.to_string(),
            value: raw.to_string(),
        })?;
        if !(1..=5).contains(&v) {
            return Err(ParseErrorKind::BadItemRange {
                item: name.to_string(),
                value: v.to_string(),
            });
        }
        *slot = v as u8;
    }
    let [determined, attentive, alert, inspired, active, upset, ashamed, nervous, afraid, hostile] =
        values;
    Ok(PanasEntry {
        timestamp: ts,
        user_id: user.to_string(),
        items: PanasItems {
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
        },
    })
}

/// Parse a whole event log. Malformed lines are collected, not fatal;
/// blank lines are skipped. Events come back sorted by `(user, time)`.
pub fn parse_event_log<R: BufRead>(
    reader: R,
) -> io::Result<(Vec<NotificationEvent>, Vec<ParseError>)> {
    let mut events = Vec::new();
    let mut errors = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_event_line(&line) {
            Ok(ev) => events.push(ev),
            Err(kind) => errors.push(ParseError { line: idx + 1, kind }),
        }
    }
    events.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok((events, errors))
}

/// Parse a whole PANAS log. Later records that repeat an already-seen
/// `(user, timestamp)` pair are rejected as duplicates.
pub fn parse_panas_log<R: BufRead>(reader: R) -> io::Result<(Vec<PanasEntry>, Vec<ParseError>)> {
    let mut entries: Vec<PanasEntry> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut errors = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_panas_line(&line) {
            Ok(entry) => {
                if seen.insert((entry.user_id.clone(), entry.timestamp)) {
                    entries.push(entry);
                } else {
                    errors.push(ParseError {
                        line: idx + 1,
                        kind: ParseErrorKind::DuplicateEntry {
                            user: entry.user_id.clone(),
                            ts: format_timestamp(entry.timestamp),
                        },
                    });
                }
            }
            Err(kind) => errors.push(ParseError { line: idx + 1, kind }),
        }
    }
    entries.sort_by(|a, b| (&a.user_id, a.timestamp).cmp(&(&b.user_id, b.timestamp)));
    Ok((entries, errors))
}

/// RFC-3339 UTC with fixed millisecond precision; the canonical textual
/// timestamp form for all outputs.
pub fn format_timestamp(ts: DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Millis, true)
}

#[derive(Serialize)]
struct EventRecord<'a> {
    ts: String,
    user: &'a str,
    name: &'a str,
    state: &'a str,
    msg: &'a str,
    vol: &'a str,
}

/// Serialize an event back to its JSON-lines form (no trailing newline).
pub fn event_to_json_line(ev: &NotificationEvent) -> String {
    serde_json::to_string(&EventRecord {
        ts: format_timestamp(ev.timestamp),
        user: &ev.user_id,
        name: &ev.event_name,
        state: ev.state.as_str(),
        msg: &ev.message,
        vol: ev.volume.as_str(),
    })
    .expect("event record serializes")
}

/// Serialize a PANAS entry back to its JSON-lines form.
pub fn panas_to_json_line(entry: &PanasEntry) -> String {
    let mut map = serde_json::Map::new();
    map.insert("ts".into(), Value::String(format_timestamp(entry.timestamp)));
    map.insert("user".into(), Value::String(entry.user_id.clone()));
    for name in PANAS_ITEM_NAMES {
        let v = entry.items.get(name).expect("known item name");
        map.insert(name.into(), Value::Number(v.into()));
    }
    serde_json::to_string(&Value::Object(map)).expect("panas record serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    const GROUP_LINE: &str = r#"{"ts":"2016-04-12T09:30:00.000Z","user":"u07","name":"whatsapp : William @ Friendship-Group","state":"Posted","msg":"hi 😀","vol":"Normal"}"#;

    #[test]
    fn parses_a_full_event_line() {
        let ev = parse_event_line(GROUP_LINE).unwrap();
        assert_eq!(ev.state, EventState::Posted);
        assert_eq!(ev.volume, RingerMode::Normal);
        assert_eq!(ev.user_id, "u07");
        assert_eq!(ev.event_name, "whatsapp : William @ Friendship-Group");
        assert_eq!(ev.message, "hi 😀");
    }

    #[test]
    fn empty_message_is_valid() {
        let line = GROUP_LINE.replace(r#""msg":"hi 😀""#, r#""msg":"""#);
        let ev = parse_event_line(&line).unwrap();
        assert_eq!(ev.message, "");
    }

    #[test]
    fn unknown_state_is_a_hard_error() {
        let line = GROUP_LINE.replace("Posted", "Snoozed");
        assert_eq!(
            parse_event_line(&line),
            Err(ParseErrorKind::BadState("Snoozed".to_string()))
        );
    }

    #[test]
    fn unknown_volume_maps_to_unknown() {
        let line = GROUP_LINE.replace("Normal", "Loud");
        assert_eq!(parse_event_line(&line).unwrap().volume, RingerMode::Unknown);
    }

    #[test]
    fn missing_fields_are_named() {
        let line = r#"{"ts":"2016-04-12T09:30:00.000Z","user":"u07"}"#;
        assert_eq!(
            parse_event_line(line),
            Err(ParseErrorKind::MissingField("name".to_string()))
        );
    }

    #[test]
    fn non_utc_offset_is_rejected() {
        let line = GROUP_LINE.replace("2016-04-12T09:30:00.000Z", "2016-04-12T09:30:00.000+02:00");
        assert!(matches!(
            parse_event_line(&line),
            Err(ParseErrorKind::BadTimestamp(_))
        ));
    }

    #[test]
    fn log_collects_errors_with_line_numbers() {
        let input = format!("{GROUP_LINE}\n{GROUP_LINE}\nnot json\n");
        let (events, errors) = parse_event_log(Cursor::new(input)).unwrap();
        assert_eq!(events.len(), 2);
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].line, 3);
    }

    #[test]
    fn log_sorts_by_user_then_time() {
        let l1 = GROUP_LINE
            .replace("u07", "u09")
            .replace("09:30:00", "08:00:00");
        let l2 = GROUP_LINE.replace("09:30:00", "11:00:00");
        let l3 = GROUP_LINE; // u07 09:30
        let input = format!("{l1}\n{l2}\n{l3}\n");
        let (events, errors) = parse_event_log(Cursor::new(input)).unwrap();
        assert!(errors.is_empty());
        let order: Vec<_> = events
            .iter()
            .map(|e| (e.user_id.as_str(), e.timestamp))
            .collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);
        assert_eq!(events[0].user_id, "u07");
    }

    fn panas_line(user: &str, ts: &str, upset: u8) -> String {
        format!(
            r#"{{"ts":"{ts}","user":"{user}","Determined":3,"Attentive":3,"Alert":3,"Inspired":3,"Active":3,"Upset":{upset},"Ashamed":3,"Nervous":3,"Afraid":3,"Hostile":3}}"#
        )
    }

    #[test]
    fn parses_valid_panas_entry() {
        let entry = parse_panas_line(&panas_line("u01", "2016-04-12T09:00:00.000Z", 3)).unwrap();
        assert_eq!(entry.items.upset, 3);
        assert_eq!(entry.items.get("Hostile"), Some(3));
    }

    #[test]
    fn item_out_of_range_is_rejected() {
        let err = parse_panas_line(&panas_line("u01", "2016-04-12T09:00:00.000Z", 6)).unwrap_err();
        assert_eq!(
            err,
            ParseErrorKind::BadItemRange {
                item: "Upset".to_string(),
                value: "6".to_string()
            }
        );
    }

    #[test]
    fn duplicate_user_timestamp_rejected_second() {
        let a = panas_line("u01", "2016-04-12T09:00:00.000Z", 3);
        let b = panas_line("u01", "2016-04-12T09:00:00.000Z", 4);
        let (entries, errors) = parse_panas_log(Cursor::new(format!("{a}\n{b}\n"))).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].items.upset, 3);
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].line, 2);
        assert!(matches!(errors[0].kind, ParseErrorKind::DuplicateEntry { .. }));
    }

    #[test]
    fn blank_lines_are_ignored_and_counts_conserve() {
        let input = format!("\n{GROUP_LINE}\n\nbroken\n{GROUP_LINE}\n");
        let (events, errors) = parse_event_log(Cursor::new(input.clone())).unwrap();
        let non_blank = input.lines().filter(|l| !l.trim().is_empty()).count();
        assert_eq!(events.len() + errors.len(), non_blank);
    }

    #[test]
    fn event_round_trip_is_structural_identity() {
        let ev = parse_event_line(GROUP_LINE).unwrap();
        let reparsed = parse_event_line(&event_to_json_line(&ev)).unwrap();
        assert_eq!(ev, reparsed);
    }

    #[test]
    fn panas_round_trip_is_structural_identity() {
        let entry = parse_panas_line(&panas_line("u02", "2016-04-13T10:30:00.000Z", 2)).unwrap();
        let reparsed = parse_panas_line(&panas_to_json_line(&entry)).unwrap();
        assert_eq!(entry, reparsed);
    }
}
