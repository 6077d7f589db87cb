use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use tracing::{info, warn};

use super::mine::Miner;
use super::{Pipeline, PipelineError};
use crate::config::ConfigError;
use crate::curate::{dedup, CuratedSequence, DocumentRecord};
use crate::docingest::{doc_id, ingest_bytes, list_documents, IngestedDocument, KeywordIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileStatus {
    Ingested,
    /// Same bytes were ingested before.
    Unchanged,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileOutcome {
    pub path: String,
    pub doc_id: Option<String>,
    pub status: FileStatus,
    pub candidates: usize,
    pub sequences: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    /// In path order.
    pub files: Vec<FileOutcome>,
    pub sequences_stored: usize,
}

impl IngestSummary {
    pub fn count(&self, status: FileStatus) -> usize {
        self.files.iter().filter(|f| f.status == status).count()
    }
}

enum Processed {
    Unchanged(String),
    Failed(String),
    Done(Box<IngestedDocument>, Vec<CuratedSequence>, usize),
}

impl Pipeline {
    /// Ingests every file in `pdf_dir`. Documents whose bytes are already
    /// recorded are skipped. Sequences are stored with an empty target name
    /// after the aptamer judgment alone; target assignment happens during
    /// `search`.
    pub fn ingest(&self) -> Result<IngestSummary, PipelineError> {
        let dir = self
            .config
            .run
            .pdf_dir
            .clone()
            .ok_or_else(|| ConfigError::Invalid("ingest needs --pdf-dir".into()))?;
        if !dir.is_dir() {
            return Err(ConfigError::Invalid(format!("{} is not a directory", dir.display())).into());
        }
        let files = list_documents(&dir).map_err(|e| PipelineError::Io(e.to_string()))?;
        let mut store = self.open_store()?;
        let known: HashSet<String> = store.documents()?.into_iter().map(|d| d.doc_id).collect();
        let processed = self.process_files(&files, &known);

        let index_path = self.config.index_path();
        let mut index = KeywordIndex::load(&index_path)?;
        let mut summary = IngestSummary::default();
        let now = self.clock.now();
        for (path, p) in files.iter().zip(processed) {
            let path_str = path.display().to_string();
            let outcome = match p {
                Processed::Unchanged(id) => FileOutcome {
                    path: path_str,
                    doc_id: Some(id),
                    status: FileStatus::Unchanged,
                    candidates: 0,
                    sequences: 0,
                    error: None,
                },
                Processed::Failed(e) => {
                    warn!(path = %path_str, error = %e, "document skipped");
                    FileOutcome {
                        path: path_str,
                        doc_id: None,
                        status: FileStatus::Failed,
                        candidates: 0,
                        sequences: 0,
                        error: Some(e),
                    }
                }
                Processed::Done(doc, kept, candidates) => {
                    for rec in &kept {
                        store.upsert(rec)?;
                    }
                    store.record_document(&DocumentRecord {
                        doc_id: doc.doc_id.clone(),
                        path: path_str.clone(),
                        title: doc.metadata.title.clone(),
                        ingested_at: now,
                        candidates,
                    })?;
                    index.add_document(doc.index_entry(), doc.chunks(self.config.docingest.max_tokens));
                    summary.sequences_stored += kept.len();
                    info!(path = %path_str, candidates, sequences = kept.len(), "document ingested");
                    FileOutcome {
                        path: path_str,
                        doc_id: Some(doc.doc_id.clone()),
                        status: FileStatus::Ingested,
                        candidates,
                        sequences: kept.len(),
                        error: None,
                    }
                }
            };
            summary.files.push(outcome);
        }
        if summary.count(FileStatus::Failed) == summary.files.len() {
            return Err(PipelineError::NoReadableDocuments(dir.display().to_string()));
        }
        index.save(&index_path)?;
        Ok(summary)
    }

    fn process_files(&self, files: &[PathBuf], known: &HashSet<String>) -> Vec<Processed> {
        let filter = self.filter();
        let miner = Miner {
            filter: &filter,
            bounds: self.config.sequence,
            curate: &self.config.curate,
            created_at: self.clock.now(),
            model_name: &self.config.semfilter.model,
        };
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<Option<Processed>>> = Mutex::new((0..files.len()).map(|_| None).collect());
        std::thread::scope(|s| {
            for _ in 0..self.config.run.workers.min(files.len().max(1)) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(path) = files.get(i) else { break };
                    let p = self.process_file(path, known, &miner);
                    results.lock().expect("results lock")[i] = Some(p);
                });
            }
        });
        results
            .into_inner()
            .expect("results lock")
            .into_iter()
            .map(|p| p.expect("every file processed"))
            .collect()
    }

    fn process_file(&self, path: &Path, known: &HashSet<String>, miner: &Miner<'_>) -> Processed {
        let bytes = match std::fs::read(path) {
            Ok(b) => b,
            Err(e) => return Processed::Failed(e.to_string()),
        };
        let id = doc_id(&bytes);
        if known.contains(&id) {
            return Processed::Unchanged(id);
        }
        let doc = match ingest_bytes(&bytes, &path.display().to_string(), &self.config.docingest) {
            Ok(d) => d,
            Err(e) => return Processed::Failed(e.to_string()),
        };
        let mined = miner.mine(&doc.text, None, "", &doc.metadata, Some(&doc.doc_id));
        Processed::Done(Box::new(doc), dedup(mined.kept), mined.candidates)
    }
}
