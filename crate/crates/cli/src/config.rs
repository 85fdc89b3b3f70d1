//! Flat `key = value` configuration files with `#` comments.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Keys every file may carry; manifests record them for reference only.
const INFORMATIONAL: [&str; 2] = ["command", "version"];

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    origin: Option<PathBuf>,
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.origin = Some(path.to_path_buf());
        Ok(cfg)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!("config line {}: expected `key = value`", no + 1)));
            };
            let key = key.trim().replace('-', "_");
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!("config line {}: duplicate key `{key}`", no + 1)));
            }
        }
        Ok(Self { origin: None, entries })
    }

    /// Rejects keys the current subcommand does not understand.
    pub fn check_keys(&self, allowed: &[&str]) -> CliResult<()> {
        for key in self.entries.keys() {
            if !allowed.contains(&key.as_str()) && !INFORMATIONAL.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("{}: unknown key `{key}`", self.describe())));
            }
        }
        Ok(())
    }

    pub fn get_with<T, E: Display>(&self, key: &str, parse: impl Fn(&str) -> Result<T, E>) -> CliResult<Option<T>> {
        self.entries
            .get(key)
            .map(|v| parse(v).map_err(|e| CliError::Usage(format!("{}: `{key}`: {e}", self.describe()))))
            .transpose()
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: Display,
    {
        self.get_with(key, str::parse::<T>)
    }

    fn describe(&self) -> String {
        match &self.origin {
            Some(p) => format!("config {}", p.display()),
            None => "config".to_string(),
        }
    }
}

/// `flag` if given, else the file value, else nothing.
pub fn pick<T>(flag: Option<T>, file: &ConfigFile, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> CliResult<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get_with(key, parse),
    }
}

/// Renders entries in the format [`ConfigFile::parse`] reads back.
pub fn render(header: &str, entries: &[(&str, String)]) -> String {
    let mut out = format!("# {header}\n");
    for (k, v) in entries {
        out.push_str(&format!("{k} = {v}\n"));
    }
    out
}
