//! Flat `key = value` config files and flag/file/default resolution.
//!
//! Keys match the long flag names; `-` and `_` are interchangeable. Lines
//! starting with `#` and blank lines are ignored. Every key in the file must
//! be consumed by the subcommand, so typos surface as usage errors.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Debug, Default)]
pub struct Settings {
    source: Option<PathBuf>,
    values: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Settings {
    pub fn parse_str(text: &str, source: Option<PathBuf>) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        let name = source.clone().unwrap_or_else(|| PathBuf::from("<config>"));
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "{}:{}: expected key=value, got {line:?}",
                    name.display(),
                    i + 1
                )));
            };
            let key = normalize(k);
            if key.is_empty() {
                return Err(CliError::Usage(format!(
                    "{}:{}: empty key",
                    name.display(),
                    i + 1
                )));
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!(
                    "{}:{}: duplicate key {key}",
                    name.display(),
                    i + 1
                )));
            }
        }
        Ok(Self {
            source,
            values,
            used: RefCell::default(),
        })
    }

    /// Load `path`, or an empty set when no config file was given.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Self::parse_str(&text, Some(p.to_path_buf()))
            }
        }
    }

    fn lookup(&self, key: &str) -> Option<&String> {
        let key = normalize(key);
        let v = self.values.get(&key);
        if v.is_some() {
            self.used.borrow_mut().insert(key);
        }
        v
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(&normalize(key))
    }

    /// The value from the config file, if present.
    pub fn file_value<T>(&self, key: &str) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.lookup(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                CliError::Usage(format!(
                    "{}: bad value {raw:?} for {key}: {e}",
                    self.source_name()
                ))
            }),
        }
    }

    /// Flag, else config file, else `default`.
    pub fn resolve<T>(&self, key: &str, flag: Option<T>, default: T) -> CliResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.resolve_opt(key, flag)?.unwrap_or(default))
    }

    /// Flag, else config file.
    pub fn resolve_opt<T>(&self, key: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let from_file = self.file_value(key)?;
        Ok(flag.or(from_file))
    }

    /// A switch set by its flag or by a boolean in the config file.
    pub fn resolve_switch(&self, key: &str, flag: bool) -> CliResult<bool> {
        let from_file = self.file_value::<bool>(key)?;
        Ok(flag || from_file.unwrap_or(false))
    }

    /// Fails if the file holds keys no resolver asked for.
    pub fn finish(&self) -> CliResult<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self
            .values
            .keys()
            .filter(|k| !used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(format!(
                "{}: unknown key(s) for this subcommand: {}",
                self.source_name(),
                unknown.join(", ")
            )))
        }
    }

    fn source_name(&self) -> String {
        self.source
            .as_ref()
            .map_or_else(|| "<config>".to_string(), |p| p.display().to_string())
    }
}
