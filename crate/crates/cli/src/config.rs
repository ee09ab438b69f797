//! `key = value` run configuration and flag/file/default resolution.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::CliError;

pub const KEYS: &[&str] = &[
    "squeezing_db",
    "model",
    "convention",
    "n",
    "aspect_ratio",
    "trials",
    "seed",
    "mode",
    "bipartitions",
    "output",
    "format",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Default,
    Config,
    Flag,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Default => "default",
            Source::Config => "config",
            Source::Flag => "flag",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| CliError::Usage(format!("config line {}: {msg}", i + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(bad(format!("unknown key {key:?}")));
            }
            if value.is_empty() {
                return Err(bad(format!("missing value for {key:?}")));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(bad(format!("duplicate key {key:?}")));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

/// Resolves settings in flag > file > default order and remembers where
/// each value came from.
#[derive(Debug, Default)]
pub struct Resolver {
    file: ConfigFile,
    used: Vec<(&'static str, String, Source)>,
}

impl Resolver {
    pub fn new(file: ConfigFile) -> Self {
        Self { file, used: Vec::new() }
    }

    pub fn raw(&mut self, key: &'static str, flag: Option<String>, default: &str) -> String {
        let (value, source) = match (flag, self.file.get(key)) {
            (Some(v), _) => (v, Source::Flag),
            (None, Some(v)) => (v.to_string(), Source::Config),
            (None, None) => (default.to_string(), Source::Default),
        };
        self.used.push((key, value.clone(), source));
        value
    }

    pub fn get<T>(
        &mut self,
        key: &'static str,
        flag: Option<String>,
        default: &str,
        parse: impl FnOnce(&str) -> Result<T, String>,
    ) -> Result<T, CliError> {
        let v = self.raw(key, flag, default);
        parse(&v).map_err(|e| CliError::Usage(format!("invalid {key} {v:?}: {e}")))
    }

    /// `key=value (source)` for every resolved setting, in lookup order.
    pub fn provenance(&self) -> String {
        self.used.iter().map(|(k, v, s)| format!("{k}={v} ({s})")).collect::<Vec<_>>().join(", ")
    }
}
