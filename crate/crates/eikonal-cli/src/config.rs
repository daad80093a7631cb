//! Flat key=value configuration with `[section]` headers. Keys are stored
//! as "section.key"; keys before any header have no prefix.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Clone, Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .with_context(|| format!("line {}: unterminated section header", lineno + 1))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected key = value", lineno + 1))?;
            let full = if section.is_empty() {
                key.trim().to_string()
            } else {
                format!("{section}.{}", key.trim())
            };
            entries.insert(full, value.trim().to_string());
        }
        Ok(Config { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn get_usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(raw) => raw
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .with_context(|| format!("{key}: bad integer '{s}'"))
                })
                .collect(),
        }
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(raw) => raw.parse().with_context(|| format!("{key}: bad integer '{raw}'")),
        }
    }
}

/// Settings for the verify command, with validation.
#[derive(Clone, Debug)]
pub struct VerifySettings {
    pub grids: Vec<usize>,
    pub identities: Option<String>,
    pub seed: u64,
    pub out: String,
}

impl VerifySettings {
    pub fn from_config(config: &Config) -> Result<Self> {
        let grids = config.get_usize_list("verify.grids", &[65, 129, 257])?;
        if grids.is_empty() {
            bail!("verify.grids must list at least one grid");
        }
        for &n in &grids {
            if n < 8 {
                bail!("verify.grids: grid {n} too coarse, need at least 8 nodes per side");
            }
        }
        if grids.windows(2).any(|w| w[0] >= w[1]) {
            bail!("verify.grids must be strictly increasing");
        }
        let identities = config
            .get("verify.identities")
            .filter(|s| !s.is_empty() && *s != "all")
            .map(|s| s.to_string());
        Ok(VerifySettings {
            grids,
            identities,
            seed: config.get_u64("verify.seed", 0)?,
            out: config.get("verify.out").unwrap_or("suite.csv").to_string(),
        })
    }
}
