//! `key=value` config files. Keys are the long flag names; `_` and `-` are
//! interchangeable. Unknown keys are an error.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

pub const KEYS: &[&str] = &[
    "n",
    "m",
    "p",
    "eta",
    "eps",
    "seed",
    "c-newman",
    "jobs",
    "format",
    "out",
    "deterministic",
    "kind",
    "seeds",
    "codes",
    "max-iters",
    "ensembles",
    "runs",
    "code",
    "channel",
    "input",
];

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value, got {raw:?}", lineno + 1))?;
            let key = k.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key {:?}", lineno + 1, k.trim()));
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(format!("line {}: duplicate key {key:?}", lineno + 1));
            }
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| format!("config key {key}: {e}")))
            .transpose()
    }
}
