//! Flag/config merging: every option can come from a flag or from the
//! run-config key-value file, and flags win.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use notimind_core::config::KvFile;

pub struct ConfigLayer {
    kv: KvFile,
}

impl ConfigLayer {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let kv = match path {
            None => KvFile::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                KvFile::parse(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
        };
        Ok(ConfigLayer { kv })
    }

    pub fn string(&self, key: &str, flag: Option<String>) -> Option<String> {
        flag.or_else(|| self.kv.get(key).map(|v| v.to_string()))
    }

    pub fn path(&self, key: &str, flag: Option<PathBuf>) -> Option<PathBuf> {
        flag.or_else(|| self.kv.get(key).map(PathBuf::from))
    }

    pub fn u64(&self, key: &str, flag: Option<u64>) -> Result<Option<u64>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => Ok(self.kv.get_u64(key)?),
        }
    }

    pub fn f64(&self, key: &str, flag: Option<f64>) -> Result<Option<f64>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => Ok(self.kv.get_f64(key)?),
        }
    }

    pub fn i64(&self, key: &str, flag: Option<i64>) -> Result<Option<i64>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => Ok(self.kv.get_i64(key)?),
        }
    }

    pub fn flag(&self, key: &str, flag: bool) -> Result<bool> {
        if flag {
            return Ok(true);
        }
        Ok(self.kv.get_bool(key)?.unwrap_or(false))
    }
}
