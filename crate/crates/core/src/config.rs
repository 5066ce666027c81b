//! Minimal key-value configuration format shared by detector configs,
//! cohort specs and CLI run configs.
//!
//! One `key value` pair per line. `#` starts a comment, blank lines are
//! ignored, the first whitespace separates key from value and the value
//! runs to the end of the line. Lists are comma-separated.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key value`, got {got:?}")]
    BadLine { line: usize, got: String },
    #[error("duplicate key {0:?}")]
    DuplicateKey(String),
    #[error("key {key:?}: {reason}")]
    BadValue { key: String, reason: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
}

/// Parsed key-value file. Keys keep insertion order for error reporting
/// but lookups go through a map.
#[derive(Debug, Clone, Default)]
pub struct KvFile {
    map: BTreeMap<String, String>,
}

impl KvFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = match line.split_once(char::is_whitespace) {
                Some((k, v)) => (k.trim(), v.trim()),
                None => {
                    return Err(ConfigError::BadLine {
                        line: idx + 1,
                        got: raw.to_string(),
                    })
                }
            };
            if map.insert(key.to_string(), value.to_string()).is_some() {
                return Err(ConfigError::DuplicateKey(key.to_string()));
            }
        }
        Ok(KvFile { map })
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(|k| k.as_str())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|v| v.as_str())
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.parse_with(key, |v| v.parse::<u64>().ok(), "expected an unsigned integer")
    }

    pub fn get_i64(&self, key: &str) -> Result<Option<i64>, ConfigError> {
        self.parse_with(key, |v| v.parse::<i64>().ok(), "expected an integer")
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.parse_with(key, |v| v.parse::<f64>().ok(), "expected a number")
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.parse_with(
            key,
            |v| match v.to_ascii_lowercase().as_str() {
                "on" | "true" | "yes" | "1" => Some(true),
                "off" | "false" | "no" | "0" => Some(false),
                _ => None,
            },
            "expected on/off",
        )
    }

    /// Comma-separated list; entries are trimmed, empties dropped.
    pub fn get_list(&self, key: &str) -> Option<Vec<String>> {
        self.get(key).map(|v| {
            v.split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect()
        })
    }

    fn parse_with<T>(
        &self,
        key: &str,
        f: impl Fn(&str) -> Option<T>,
        reason: &str,
    ) -> Result<Option<T>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => f(v).map(Some).ok_or_else(|| ConfigError::BadValue {
                key: key.to_string(),
                reason: format!("{reason}, got {v:?}"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_comments_and_blanks() {
        let kv = KvFile::parse("# header\nseed 42\n\nname  two words \n").unwrap();
        assert_eq!(kv.get_u64("seed").unwrap(), Some(42));
        assert_eq!(kv.get("name"), Some("two words"));
        assert_eq!(kv.get("missing"), None);
    }

    #[test]
    fn rejects_bare_key_and_duplicates() {
        assert!(matches!(
            KvFile::parse("lonely"),
            Err(ConfigError::BadLine { line: 1, .. })
        ));
        assert!(matches!(
            KvFile::parse("a 1\na 2"),
            Err(ConfigError::DuplicateKey(_))
        ));
    }

    #[test]
    fn lists_and_bools() {
        let kv = KvFile::parse("xs a, b ,c\nflag on\n").unwrap();
        assert_eq!(kv.get_list("xs").unwrap(), vec!["a", "b", "c"]);
        assert_eq!(kv.get_bool("flag").unwrap(), Some(true));
        assert!(KvFile::parse("flag maybe").unwrap().get_bool("flag").is_err());
    }
}
