//! Flat `key = value` configuration files with `[section]` headers.
//!
//! ```text
//! # shared by every subcommand
//! seed = 7
//!
//! [conserve]
//! n = 256
//! L = 32pi
//! ```
//!
//! A key is looked up in the subcommand's section first, then at top level.
//! Command-line flags override both.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    origin: String,
    entries: BTreeMap<(String, String), Entry>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut out = Self {
            origin: origin.to_string(),
            entries: BTreeMap::new(),
        };
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| out.error(line, "unterminated section header"))?;
                section = name.trim().to_string();
                if section.is_empty() {
                    return Err(out.error(line, "empty section name"));
                }
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| out.error(line, &format!("expected `key = value`, got `{content}`")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(out.error(line, "missing key"));
            }
            let slot = (section.clone(), key.to_string());
            if let Some(prev) = out.entries.get(&slot) {
                return Err(out.error(line, &format!("duplicate key `{key}` (first set on line {})", prev.line)));
            }
            out.entries.insert(
                slot,
                Entry {
                    value: value.trim().to_string(),
                    line,
                },
            );
        }
        Ok(out)
    }

    fn error(&self, line: usize, message: &str) -> Error {
        Error::Config {
            location: format!("{}:{line}", self.origin),
            message: message.to_string(),
        }
    }

    fn lookup(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .or_else(|| self.entries.get(&(String::new(), key.to_string())))
    }

    /// Raw value of `key` as seen from `section`.
    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.lookup(section, key).map(|e| e.value.as_str())
    }

    /// Parses `key` with `parse`, reporting the line on failure.
    pub fn get_with<T>(&self, section: &str, key: &str, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Result<Option<T>> {
        match self.lookup(section, key) {
            None => Ok(None),
            Some(e) => parse(&e.value)
                .map(Some)
                .map_err(|m| self.error(e.line, &format!("field `{key}`: {m}"))),
        }
    }

    pub fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get_with(section, key, |s| s.parse::<T>().map_err(|e| format!("cannot parse `{s}`: {e}")))
    }

    /// Keys that `section` can see but that are not in `known`.
    pub fn unknown_keys(&self, section: &str, known: &[&str]) -> Vec<String> {
        self.entries
            .keys()
            .filter(|(sec, key)| (sec.is_empty() || sec == section) && !known.contains(&key.as_str()))
            .map(|(sec, key)| if sec.is_empty() { key.clone() } else { format!("{sec}.{key}") })
            .collect()
    }
}

/// A real number, optionally written as a multiple of π (`32pi`, `pi`, `0.5*pi`).
pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    let lower = t.to_ascii_lowercase();
    let v = if let Some(head) = lower.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*').trim();
        let k = if head.is_empty() {
            1.0
        } else {
            head.parse::<f64>().map_err(|e| format!("cannot parse `{t}`: {e}"))?
        };
        k * std::f64::consts::PI
    } else {
        t.parse::<f64>().map_err(|e| format!("cannot parse `{t}`: {e}"))?
    };
    if !v.is_finite() {
        return Err(format!("`{t}` is not finite"));
    }
    Ok(v)
}

/// Comma-separated reals.
pub fn parse_real_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(parse_real).collect()
}

/// `true`/`false`/`yes`/`no`/`1`/`0`.
pub fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(format!("expected a boolean, got `{other}`")),
    }
}
