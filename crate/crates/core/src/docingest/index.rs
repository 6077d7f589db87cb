use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::chunk::DocumentChunk;
use crate::metadataxml::ArticleMetadata;

/// Format tag written into persisted indexes.
pub const INDEX_FORMAT: &str = "aptamine-keyword-index/1";

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("query has no searchable terms")]
    EmptyQuery,
    #[error("index file {0}: {1}")]
    Io(String, String),
    #[error("index file has format {found:?}, expected {INDEX_FORMAT:?}")]
    Format { found: String },
}

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Per-document data kept next to the chunks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedDocument {
    pub doc_id: String,
    pub path: String,
    pub metadata: ArticleMetadata,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Persisted {
    format: String,
    documents: Vec<IndexedDocument>,
    chunks: Vec<DocumentChunk>,
}

/// A ranked query result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hit<'a> {
    pub chunk: &'a DocumentChunk,
    pub score: usize,
}

/// Inverted index from token to `(chunk position, term frequency)`.
/// Chunks are kept ordered by `(doc_id, chunk_index)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeywordIndex {
    documents: BTreeMap<String, IndexedDocument>,
    chunks: Vec<DocumentChunk>,
    postings: BTreeMap<String, Vec<(usize, usize)>>,
}

impl KeywordIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_chunks(chunks: Vec<DocumentChunk>) -> Self {
        let mut idx = KeywordIndex {
            chunks,
            ..Self::default()
        };
        idx.rebuild();
        idx
    }

    fn rebuild(&mut self) {
        self.chunks
            .sort_by(|a, b| (&a.doc_id, a.chunk_index).cmp(&(&b.doc_id, b.chunk_index)));
        self.postings.clear();
        for (pos, c) in self.chunks.iter().enumerate() {
            let mut tf: BTreeMap<String, usize> = BTreeMap::new();
            for t in tokenize(&c.text) {
                *tf.entry(t).or_default() += 1;
            }
            for (t, n) in tf {
                self.postings.entry(t).or_default().push((pos, n));
            }
        }
    }

    /// Adds or replaces one document's chunks.
    pub fn add_document(&mut self, doc: IndexedDocument, chunks: Vec<DocumentChunk>) {
        self.chunks.retain(|c| c.doc_id != doc.doc_id);
        self.chunks.extend(chunks);
        self.documents.insert(doc.doc_id.clone(), doc);
        self.rebuild();
    }

    pub fn contains_document(&self, doc_id: &str) -> bool {
        self.documents.contains_key(doc_id)
    }

    pub fn document(&self, doc_id: &str) -> Option<&IndexedDocument> {
        self.documents.get(doc_id)
    }

    pub fn documents(&self) -> impl Iterator<Item = &IndexedDocument> {
        self.documents.values()
    }

    pub fn chunks(&self) -> &[DocumentChunk] {
        &self.chunks
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    /// Chunks containing any query term, by descending summed term
    /// frequency, ties by `(doc_id, chunk_index)`.
    pub fn query(&self, terms: &str) -> Result<Vec<Hit<'_>>, IndexError> {
        let mut terms = tokenize(terms);
        terms.sort();
        terms.dedup();
        if terms.is_empty() {
            return Err(IndexError::EmptyQuery);
        }
        let mut scores: BTreeMap<usize, usize> = BTreeMap::new();
        for t in &terms {
            for &(pos, tf) in self.postings.get(t).into_iter().flatten() {
                *scores.entry(pos).or_default() += tf;
            }
        }
        let mut hits: Vec<(usize, usize)> = scores.into_iter().collect();
        // Positions already follow (doc_id, chunk_index), so a stable sort by
        // score keeps the tie order.
        hits.sort_by_key(|h| std::cmp::Reverse(h.1));
        Ok(hits
            .into_iter()
            .map(|(pos, score)| Hit {
                chunk: &self.chunks[pos],
                score,
            })
            .collect())
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let io = |e: String| IndexError::Io(path.display().to_string(), e);
        let data = Persisted {
            format: INDEX_FORMAT.to_string(),
            documents: self.documents.values().cloned().collect(),
            chunks: self.chunks.clone(),
        };
        let json = serde_json::to_vec(&data).map_err(|e| io(e.to_string()))?;
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, json).map_err(|e| io(e.to_string()))?;
        std::fs::rename(&tmp, path).map_err(|e| io(e.to_string()))
    }

    /// Loads an index, or returns an empty one if `path` does not exist.
    pub fn load(path: &Path) -> Result<Self, IndexError> {
        if !path.exists() {
            return Ok(Self::new());
        }
        let io = |e: String| IndexError::Io(path.display().to_string(), e);
        let bytes = std::fs::read(path).map_err(|e| io(e.to_string()))?;
        let data: Persisted = serde_json::from_slice(&bytes).map_err(|e| io(e.to_string()))?;
        if data.format != INDEX_FORMAT {
            return Err(IndexError::Format { found: data.format });
        }
        let mut idx = KeywordIndex {
            documents: data.documents.into_iter().map(|d| (d.doc_id.clone(), d)).collect(),
            chunks: data.chunks,
            postings: BTreeMap::new(),
        };
        idx.rebuild();
        Ok(idx)
    }
}

#[cfg(test)]
mod tests {
    use super::super::sections::SectionLabel;
    use super::*;
    use proptest::prelude::*;

    fn chunk(doc: &str, i: usize, text: &str) -> DocumentChunk {
        DocumentChunk {
            doc_id: doc.into(),
            chunk_index: i,
            text: text.into(),
            token_count: text.split_whitespace().count(),
            section_label: SectionLabel::Unknown,
            start: 0,
        }
    }

    fn ids(hits: &[Hit<'_>]) -> Vec<(String, usize)> {
        hits.iter().map(|h| (h.chunk.doc_id.clone(), h.chunk.chunk_index)).collect()
    }

    #[test]
    fn absent_term_and_empty_query() {
        let idx = KeywordIndex::from_chunks(vec![chunk("a", 0, "thrombin aptamer")]);
        assert!(idx.query("vegf").unwrap().is_empty());
        assert!(matches!(idx.query(" ;; "), Err(IndexError::EmptyQuery)));
    }

    #[test]
    fn ranked_by_term_frequency() {
        let idx = KeywordIndex::from_chunks(vec![
            chunk("a", 0, "thrombin once"),
            chunk("b", 0, "Thrombin, thrombin; THROMBIN"),
        ]);
        let hits = idx.query("thrombin").unwrap();
        assert_eq!(ids(&hits), vec![("b".into(), 0), ("a".into(), 0)]);
        assert_eq!(hits[0].score, 3);
    }

    #[test]
    fn ties_follow_doc_and_chunk_order() {
        let idx = KeywordIndex::from_chunks(vec![
            chunk("b", 1, "kd"),
            chunk("b", 0, "kd"),
            chunk("a", 2, "kd"),
        ]);
        assert_eq!(
            ids(&idx.query("Kd").unwrap()),
            vec![("a".into(), 2), ("b".into(), 0), ("b".into(), 1)]
        );
    }

    #[test]
    fn persistence_round_trip_and_format_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.json");
        let mut idx = KeywordIndex::new();
        let meta = ArticleMetadata {
            pmid: None,
            pmcid: None,
            doi: None,
            title: "T".into(),
            authors: vec![],
            journal: String::new(),
            year: None,
            source: crate::metadataxml::Source::LocalPDF,
            url: Some("file://x".into()),
        };
        idx.add_document(
            IndexedDocument {
                doc_id: "a".into(),
                path: "x".into(),
                metadata: meta,
            },
            vec![chunk("a", 0, "hello world")],
        );
        idx.save(&path).unwrap();
        assert_eq!(KeywordIndex::load(&path).unwrap(), idx);
        std::fs::write(&path, r#"{"format":"other/9","documents":[],"chunks":[]}"#).unwrap();
        assert!(matches!(KeywordIndex::load(&path), Err(IndexError::Format { .. })));
        assert!(KeywordIndex::load(&dir.path().join("missing.json")).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn every_token_finds_its_chunk(texts in prop::collection::vec("[a-zA-Z0-9 ,.]{1,60}", 1..10)) {
            let chunks: Vec<_> = texts.iter().enumerate().map(|(i, t)| chunk("d", i, t)).collect();
            let idx = KeywordIndex::from_chunks(chunks);
            for (i, t) in texts.iter().enumerate() {
                for tok in tokenize(t) {
                    let hits = idx.query(&tok).unwrap();
                    prop_assert!(hits.iter().any(|h| h.chunk.chunk_index == i));
                }
            }
        }
    }
}
