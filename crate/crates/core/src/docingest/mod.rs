//! Local documents: text extraction, section labels, word-count chunks and a
//! keyword index used to shortlist chunks for a target.

mod chunk;
mod extract;
mod index;
mod pdf;
mod sections;

pub use chunk::{chunk, token_count, DocumentChunk, DEFAULT_MAX_TOKENS};
pub use extract::extract_text;
pub use index::{tokenize, Hit, IndexError, IndexedDocument, KeywordIndex, INDEX_FORMAT};
pub use pdf::text_to_pdf;
pub use sections::{heading_label, label_at, label_sections, LabeledSpan, SectionLabel};

use std::path::{Path, PathBuf};
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::metadataxml::{normalize_ws, ArticleMetadata, Source};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IngestError {
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("conversion failed: {0}")]
    ConversionFailed(String),
    #[error("cannot read {0}: {1}")]
    Io(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DocingestConfig {
    /// External converter, e.g. `"marker_single {input} --output {output}"`.
    pub converter_cmd: Option<String>,
    pub max_tokens: usize,
}

impl Default for DocingestConfig {
    fn default() -> Self {
        DocingestConfig {
            converter_cmd: None,
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestedDocument {
    /// SHA-256 of the file bytes, hex.
    pub doc_id: String,
    pub path: String,
    pub text: String,
    pub sections: Vec<LabeledSpan>,
    pub metadata: ArticleMetadata,
}

impl IngestedDocument {
    pub fn chunks(&self, max_tokens: usize) -> Vec<DocumentChunk> {
        chunk(&self.doc_id, &self.text, &self.sections, max_tokens)
    }

    pub fn index_entry(&self) -> IndexedDocument {
        IndexedDocument {
            doc_id: self.doc_id.clone(),
            path: self.path.clone(),
            metadata: self.metadata.clone(),
        }
    }
}

pub fn doc_id(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

static DOI_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"10\.\d{4,9}/\S+").expect("doi pattern"));

/// Bytes of text treated as "the first two pages" when looking for a DOI.
const DOI_SCAN_BYTES: usize = 6000;

/// Title from the first non-blank line, DOI from the opening text.
pub fn guess_metadata(text: &str, path: &str) -> ArticleMetadata {
    let title = text
        .lines()
        .map(|l| normalize_ws(l.trim_start_matches('#')))
        .find(|l| !l.is_empty())
        .unwrap_or_else(|| {
            Path::new(path)
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.to_string())
        });
    let mut head_end = text.len().min(DOI_SCAN_BYTES);
    while !text.is_char_boundary(head_end) {
        head_end -= 1;
    }
    let doi = DOI_RE
        .find(&text[..head_end])
        .map(|m| m.as_str().trim_end_matches(['.', ',', ';', ')', ']', '"', '\'']).to_string());
    ArticleMetadata {
        pmid: None,
        pmcid: None,
        doi,
        title,
        authors: Vec::new(),
        journal: String::new(),
        year: None,
        source: Source::LocalPDF,
        url: Some(format!("file://{path}")),
    }
}

/// Converts bytes already read from `path`.
pub fn ingest_bytes(bytes: &[u8], path: &str, config: &DocingestConfig) -> Result<IngestedDocument, IngestError> {
    let text = extract_text(bytes, config.converter_cmd.as_deref())?;
    Ok(IngestedDocument {
        doc_id: doc_id(bytes),
        path: path.to_string(),
        sections: label_sections(&text),
        metadata: guess_metadata(&text, path),
        text,
    })
}

pub fn ingest_file(path: &Path, config: &DocingestConfig) -> Result<IngestedDocument, IngestError> {
    let bytes = std::fs::read(path).map_err(|e| IngestError::Io(path.display().to_string(), e.to_string()))?;
    ingest_bytes(&bytes, &path.display().to_string(), config)
}

/// Regular, non-hidden files directly inside `dir`, sorted by name.
pub fn list_documents(dir: &Path) -> Result<Vec<PathBuf>, IngestError> {
    let io = |e: std::io::Error| IngestError::Io(dir.display().to_string(), e.to_string());
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let entry = entry.map_err(io)?;
        let hidden = entry.file_name().to_string_lossy().starts_with('.');
        if !hidden && entry.file_type().map_err(io)?.is_file() {
            out.push(entry.path());
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doc_ids_are_content_hashes() {
        assert_eq!(doc_id(b"abc"), doc_id(b"abc"));
        assert_ne!(doc_id(b"abc"), doc_id(b"abd"));
        assert_eq!(doc_id(b"").len(), 64);
    }

    #[test]
    fn metadata_guess() {
        let text = "\n\n# Thrombin  aptamers revisited\nJ Chem 2020, doi: 10.1021/acs.2020.123.\n";
        let m = guess_metadata(text, "/docs/a.md");
        assert_eq!(m.title, "Thrombin aptamers revisited");
        assert_eq!(m.doi.as_deref(), Some("10.1021/acs.2020.123"));
        assert_eq!(m.source, Source::LocalPDF);
        assert!(m.is_valid());
    }

    #[test]
    fn ingest_directory() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("b.txt"), "Second\n\nAbstract\nbody").unwrap();
        std::fs::write(dir.path().join("a.pdf"), text_to_pdf(&["First", "", "GGTTGGTGTGGTTGG"])).unwrap();
        std::fs::write(dir.path().join(".hidden"), "x").unwrap();
        let files = list_documents(dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let docs: Vec<_> = files
            .iter()
            .map(|p| ingest_file(p, &DocingestConfig::default()).unwrap())
            .collect();
        assert_eq!(docs[0].metadata.title, "First");
        assert!(docs[0].text.contains("GGTTGGTGTGGTTGG"));
        assert_eq!(docs[1].sections.iter().map(|s| s.label).collect::<Vec<_>>(), vec![
            SectionLabel::Unknown,
            SectionLabel::Abstract
        ]);
        let again = ingest_file(&files[1], &DocingestConfig::default()).unwrap();
        assert_eq!(again, docs[1]);
    }
}
