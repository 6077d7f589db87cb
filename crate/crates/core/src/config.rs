//! Run configuration: one TOML file with a section per module.
//!
//! ```toml
//! [run]
//! targets = ["thrombin", "VEGF"]
//! store_path = "aptamine.db"
//! workers = 4
//!
//! [sequence]
//! min_len = 20
//! max_len = 100
//!
//! [net]
//! contact_email = "me@example.org"
//! ```
//!
//! Values resolve as command-line flag, then file, then built-in default. The
//! file comes from `--config` or `APTAMINE_CONFIG`; `NCBI_API_KEY` fills
//! `net.api_key` when the file leaves it unset.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::curate::{target_key, CurateConfig};
use crate::docingest::DocingestConfig;
use crate::netdiscovery::{NetConfig, API_KEY_ENV};
use crate::querygen::QueryConfig;
use crate::semfilter::SemfilterConfig;
use crate::seqextract::SequenceBounds;
use crate::tierreport::ReportFormat;

/// Environment variable naming the config file.
pub const CONFIG_ENV: &str = "APTAMINE_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Io(String, String),
    #[error("cannot parse {0}: {1}")]
    Parse(String, String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSection {
    pub targets: Vec<String>,
    /// One target per line; blank lines and lines starting with `#` are skipped.
    pub targets_file: Option<PathBuf>,
    pub pdf_dir: Option<PathBuf>,
    pub store_path: PathBuf,
    pub out_dir: PathBuf,
    pub offline: bool,
    pub workers: usize,
    pub formats: Vec<ReportFormat>,
    /// Fetch supplement files linked from PMC landing pages.
    pub harvest_supplements: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            targets: Vec::new(),
            targets_file: None,
            pdf_dir: None,
            store_path: PathBuf::from("aptamine.db"),
            out_dir: PathBuf::from("out"),
            offline: false,
            workers: 4,
            formats: ReportFormat::ALL.to_vec(),
            harvest_supplements: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub run: RunSection,
    pub queries: QueryConfig,
    pub net: NetConfig,
    pub sequence: SequenceBounds,
    pub curate: CurateConfig,
    pub semfilter: SemfilterConfig,
    pub docingest: DocingestConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(origin.to_string(), e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.display().to_string(), e.to_string()))?;
        Self::from_toml(&text, &path.display().to_string())
    }

    /// Reads `explicit`, else the file named by `APTAMINE_CONFIG`, else
    /// defaults, then applies `NCBI_API_KEY`.
    pub fn load(explicit: Option<&Path>) -> Result<Self, ConfigError> {
        let env_path = std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
        let mut config = match explicit.map(Path::to_path_buf).or(env_path) {
            Some(p) => Self::from_file(&p)?,
            None => Self::default(),
        };
        if config.net.api_key.is_none() {
            config.net.api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.trim().is_empty());
        }
        Ok(config)
    }

    /// Sets both the extraction and the validation length bounds.
    pub fn set_length_bounds(&mut self, min_len: Option<usize>, max_len: Option<usize>) {
        if let Some(v) = min_len {
            self.sequence.min_len = v;
            self.curate.min_len = v;
        }
        if let Some(v) = max_len {
            self.sequence.max_len = v;
            self.curate.max_len = v;
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        if self.run.workers == 0 {
            return Err(ConfigError::Invalid("workers must be at least 1".into()));
        }
        if self.run.formats.is_empty() {
            return Err(ConfigError::Invalid("no report formats selected".into()));
        }
        SequenceBounds::new(self.sequence.min_len, self.sequence.max_len).map_err(|e| invalid(&e))?;
        self.curate.validate().map_err(|e| invalid(&e))?;
        self.queries.validate().map_err(|e| invalid(&e))?;
        self.net.validate().map_err(|e| invalid(&e))?;
        if self.semfilter.max_concurrent == 0 {
            return Err(ConfigError::Invalid("semfilter.max_concurrent must be at least 1".into()));
        }
        if self.docingest.max_tokens == 0 {
            return Err(ConfigError::Invalid("docingest.max_tokens must be at least 1".into()));
        }
        Ok(())
    }

    /// Inline targets followed by the targets file, trimmed, without
    /// duplicates (case-insensitive, first spelling kept).
    pub fn resolve_targets(&self) -> Result<Vec<String>, ConfigError> {
        let mut all: Vec<String> = self.run.targets.iter().map(|t| t.trim().to_string()).collect();
        if let Some(path) = &self.run.targets_file {
            let text =
                std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.display().to_string(), e.to_string()))?;
            all.extend(parse_targets_file(&text));
        }
        let mut seen = std::collections::HashSet::new();
        Ok(all
            .into_iter()
            .filter(|t| !t.is_empty() && seen.insert(target_key(t)))
            .collect())
    }

    /// Path of the keyword index kept next to the store.
    pub fn index_path(&self) -> PathBuf {
        let mut p = self.run.store_path.clone().into_os_string();
        p.push(".index.json");
        PathBuf::from(p)
    }

    /// TOML rendering with the API key masked.
    pub fn to_toml(&self) -> String {
        let mut shown = self.clone();
        if shown.net.api_key.is_some() {
            shown.net.api_key = Some("********".into());
        }
        toml::to_string_pretty(&shown).expect("config serializes to TOML")
    }

    /// Short hash of the effective settings, without the API key.
    pub fn fingerprint(&self) -> String {
        let mut c = self.clone();
        c.net.api_key = None;
        let text = toml::to_string(&c).expect("config serializes to TOML");
        hex::encode(&Sha256::digest(text.as_bytes())[..8])
    }
}

pub fn parse_targets_file(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}
