//! Flat `key = value` configuration files.
//!
//! One entry per line, `#` starts a comment, list values are separated by
//! whitespace. Every key must be consumed by the reader; leftovers are
//! reported with their line number.

use std::path::Path;
use std::str::FromStr;

use crate::corpus::strip_comment;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    entries: Vec<Entry>,
}

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    key: String,
    value: String,
}

impl KvConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<Entry> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = strip_comment(raw).trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(Error::Config {
                    line,
                    message: format!("expected `key = value`, found {body:?}"),
                });
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config {
                    line,
                    message: "empty key".into(),
                });
            }
            if let Some(prev) = entries.iter().find(|e| e.key == key) {
                return Err(Error::Config {
                    line,
                    message: format!("duplicate key {key:?} (first set on line {})", prev.line),
                });
            }
            entries.push(Entry {
                line,
                key: key.to_string(),
                value: value.trim().to_string(),
            });
        }
        Ok(KvConfig { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Entries of `other` replace or extend those of `self`.
    pub fn merged(mut self, other: KvConfig) -> KvConfig {
        for e in other.entries {
            self.entries.retain(|x| x.key != e.key);
            self.entries.push(e);
        }
        self
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.retain(|x| x.key != key);
        self.entries.push(Entry {
            line: 0,
            key: key.to_string(),
            value: value.to_string(),
        });
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.iter().any(|e| e.key == key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.key.as_str())
    }

    fn take_entry(&mut self, key: &str) -> Option<Entry> {
        let i = self.entries.iter().position(|e| e.key == key)?;
        Some(self.entries.remove(i))
    }

    pub fn take_str(&mut self, key: &str) -> Option<String> {
        self.take_entry(key).map(|e| e.value)
    }

    pub fn take<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(e) = self.take_entry(key) else {
            return Ok(None);
        };
        e.value.parse().map(Some).map_err(|err| Error::Config {
            line: e.line,
            message: format!("{key}: cannot parse {:?}: {err}", e.value),
        })
    }

    pub fn take_list(&mut self, key: &str) -> Option<Vec<String>> {
        self.take_str(key)
            .map(|v| v.split_whitespace().map(str::to_string).collect())
    }

    /// Takes every key starting with `prefix`, sorted by the remainder.
    pub fn take_prefixed(&mut self, prefix: &str) -> Vec<(String, String)> {
        let mut out = Vec::new();
        self.entries.retain(|e| match e.key.strip_prefix(prefix) {
            Some(rest) => {
                out.push((rest.to_string(), e.value.clone()));
                false
            }
            None => true,
        });
        out.sort_by_key(|a| natural_key(&a.0));
        out
    }

    /// Errors on the first key no reader consumed.
    pub fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some(e) => Err(Error::Config {
                line: e.line,
                message: format!("unknown key {:?}", e.key),
            }),
        }
    }
}

fn natural_key(s: &str) -> (u64, String) {
    (s.parse().unwrap_or(u64::MAX), s.to_string())
}

/// Error for a value that parsed but is out of range.
pub(crate) fn invalid(key: &str, message: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("{key}: {message}"))
}
