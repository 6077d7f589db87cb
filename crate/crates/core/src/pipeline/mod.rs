//! `ingest`, `search` and `export` orchestration.
//!
//! Workers take targets from a shared queue. They share one rate limiter,
//! one semantic filter and one store writer behind a mutex. Per-target
//! results are put in canonical order before anything is written, so the
//! reports do not depend on the worker count.

mod ingest;
mod mine;
mod search;

pub use ingest::{FileOutcome, FileStatus, IngestSummary};
pub use search::SearchOutcome;

use std::io::Write;
use std::sync::Arc;
use std::time::Duration;

use thiserror::Error;

use crate::clock::{Clock, SystemClock};
use crate::config::{ConfigError, RunConfig};
use crate::curate::{export_csv, Store, StoreError};
use crate::docingest::IndexError;
use crate::netdiscovery::{Fetcher, HttpTransport, NetError, UreqTransport};
use crate::semfilter::{ModelBackend, SemanticFilter};
use crate::tierreport::ReportError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("storage: {0}")]
    Store(#[from] StoreError),
    #[error("keyword index: {0}")]
    Index(#[from] IndexError),
    #[error("report: {0}")]
    Report(#[from] ReportError),
    #[error("network setup: {0}")]
    Net(#[from] NetError),
    #[error("no readable documents in {0}")]
    NoReadableDocuments(String),
    #[error("{0}")]
    Io(String),
}

/// One configured run. Network, model and clock can be swapped for tests.
pub struct Pipeline {
    config: RunConfig,
    clock: Arc<dyn Clock>,
    transport: Option<Arc<dyn HttpTransport>>,
    model: Option<Arc<dyn ModelBackend>>,
}

impl Pipeline {
    pub fn new(config: RunConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        Ok(Pipeline {
            config,
            clock: Arc::new(SystemClock),
            transport: None,
            model: None,
        })
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    /// Replaces the real network.
    pub fn with_transport(mut self, transport: Arc<dyn HttpTransport>) -> Self {
        self.transport = Some(transport);
        self
    }

    /// Replaces the model named by `semfilter.endpoint`.
    pub fn with_model(mut self, model: Arc<dyn ModelBackend>) -> Self {
        self.model = Some(model);
        self
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub(crate) fn filter(&self) -> SemanticFilter {
        match &self.model {
            Some(m) => SemanticFilter::with_model(self.config.semfilter.clone(), m.clone()),
            None => SemanticFilter::from_config(self.config.semfilter.clone()),
        }
    }

    pub(crate) fn fetcher(&self) -> Result<Fetcher, NetError> {
        let transport = self.transport.clone().unwrap_or_else(|| {
            Arc::new(UreqTransport::new(Duration::from_secs(self.config.net.timeout_s))) as Arc<dyn HttpTransport>
        });
        Fetcher::new(self.config.net.clone(), transport)
    }

    pub(crate) fn open_store(&self) -> Result<Store, PipelineError> {
        Ok(Store::open(&self.config.run.store_path)?)
    }

    /// Writes every stored sequence as CSV and returns the row count.
    pub fn export(&self, out: impl Write) -> Result<usize, PipelineError> {
        let path = &self.config.run.store_path;
        if !path.exists() {
            return Err(StoreError::Corrupt(format!("no store at {}", path.display())).into());
        }
        Ok(export_csv(&self.open_store()?, out)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn export_needs_an_existing_store() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::default();
        c.run.store_path = dir.path().join("missing.db");
        let p = Pipeline::new(c).unwrap();
        assert!(matches!(p.export(Vec::new()), Err(PipelineError::Store(_))));
    }

    #[test]
    fn empty_store_exports_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::default();
        c.run.store_path = dir.path().join("s.db");
        Store::open(&c.run.store_path).unwrap();
        let p = Pipeline::new(c).unwrap();
        let mut out = Vec::new();
        assert_eq!(p.export(&mut out).unwrap(), 0);
        assert_eq!(String::from_utf8(out).unwrap().lines().count(), 1);
    }

    #[test]
    fn invalid_config_is_refused() {
        let mut c = RunConfig::default();
        c.run.workers = 0;
        assert!(matches!(Pipeline::new(c), Err(PipelineError::Config(_))));
    }
}
