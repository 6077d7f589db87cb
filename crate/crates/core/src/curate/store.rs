use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use rusqlite::{params, Connection, OptionalExtension, Transaction};
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{target_key, union_affinities, union_articles, CuratedSequence, ValidationState, ValidationStatus};
use crate::metadataxml::ArticleMetadata;
use crate::seqextract::{AffinityKind, AffinityMeasurement, ExperimentalConditions, Span};

pub const SCHEMA_VERSION: i32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("database error: {0}")]
    Sqlite(#[from] rusqlite::Error),
    #[error("stored value could not be decoded: {0}")]
    Corrupt(String),
    #[error("store schema version {found} is newer than supported {supported}")]
    TooNew { found: i32, supported: i32 },
}

impl From<serde_json::Error> for StoreError {
    fn from(e: serde_json::Error) -> Self {
        StoreError::Corrupt(e.to_string())
    }
}

/// Forward-only migrations; entry `i` upgrades version `i` to `i + 1`.
const MIGRATIONS: &[&str] = &[r"
CREATE TABLE articles (
    key      TEXT PRIMARY KEY,
    pmid     TEXT,
    pmcid    TEXT,
    doi      TEXT,
    title    TEXT NOT NULL,
    authors  TEXT NOT NULL,
    journal  TEXT NOT NULL,
    year     INTEGER,
    source   TEXT NOT NULL,
    url      TEXT
);
CREATE TABLE sequences (
    id                     TEXT PRIMARY KEY,
    core                   TEXT NOT NULL,
    target_key             TEXT NOT NULL,
    target_name            TEXT NOT NULL,
    length                 INTEGER NOT NULL,
    gc_fraction            TEXT NOT NULL,
    orientation_normalized INTEGER NOT NULL,
    modifications          TEXT NOT NULL,
    validation             TEXT NOT NULL,
    validation_notes       TEXT NOT NULL,
    confidence             TEXT NOT NULL,
    verdict_backend        TEXT NOT NULL,
    article_key            TEXT NOT NULL REFERENCES articles(key),
    context_snippet        TEXT NOT NULL,
    created_at             TEXT NOT NULL,
    raw                    TEXT NOT NULL,
    was_joined             INTEGER NOT NULL,
    decoration_issue       TEXT,
    UNIQUE (core, target_key)
);
CREATE TABLE sequence_articles (
    sequence_id TEXT NOT NULL REFERENCES sequences(id),
    article_key TEXT NOT NULL REFERENCES articles(key),
    PRIMARY KEY (sequence_id, article_key)
);
CREATE TABLE affinities (
    sequence_id TEXT NOT NULL REFERENCES sequences(id),
    kind        TEXT NOT NULL,
    value       TEXT NOT NULL,
    unit        TEXT NOT NULL,
    value_nm    TEXT NOT NULL,
    span_start  INTEGER NOT NULL,
    span_end    INTEGER NOT NULL,
    context     TEXT NOT NULL,
    source_doc  TEXT NOT NULL DEFAULT '',
    UNIQUE (sequence_id, source_doc, span_start, span_end, kind, value_nm, unit)
);
CREATE TABLE conditions (
    sequence_id TEXT PRIMARY KEY REFERENCES sequences(id),
    ph          TEXT,
    temperature TEXT,
    buffer      TEXT,
    source_doc  TEXT,
    flagged     TEXT NOT NULL
);
CREATE TABLE runs (
    id          INTEGER PRIMARY KEY AUTOINCREMENT,
    started_at  TEXT NOT NULL,
    finished_at TEXT NOT NULL,
    command     TEXT NOT NULL,
    summary     TEXT NOT NULL
);
CREATE TABLE documents (
    doc_id      TEXT PRIMARY KEY,
    path        TEXT NOT NULL,
    title       TEXT NOT NULL,
    ingested_at TEXT NOT NULL,
    candidates  INTEGER NOT NULL
);
CREATE INDEX sequences_target ON sequences (target_key, created_at, core);
"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: String,
    pub path: String,
    pub title: String,
    pub ingested_at: DateTime<Utc>,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub command: String,
    pub summary: serde_json::Value,
}

fn ts(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Micros, true)
}

fn parse_ts(s: &str) -> Result<DateTime<Utc>, StoreError> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| StoreError::Corrupt(format!("timestamp {s:?}: {e}")))
}

fn parse_dec(s: &str) -> Result<Decimal, StoreError> {
    s.parse().map_err(|e| StoreError::Corrupt(format!("decimal {s:?}: {e}")))
}

/// SQLite-backed curated sequence store. Use one `Store` as the single
/// writer; separate connections may read concurrently.
pub struct Store {
    conn: Connection,
    #[cfg(test)]
    fail_mid_upsert: bool,
}

impl Store {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref();
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| StoreError::Corrupt(format!("{}: {e}", parent.display())))?;
        }
        Self::init(Connection::open(path)?)
    }

    pub fn open_in_memory() -> Result<Self, StoreError> {
        Self::init(Connection::open_in_memory()?)
    }

    fn init(mut conn: Connection) -> Result<Self, StoreError> {
        conn.busy_timeout(std::time::Duration::from_secs(10))?;
        conn.pragma_update(None, "foreign_keys", "ON")?;
        let found: i32 = conn.pragma_query_value(None, "user_version", |r| r.get(0))?;
        let supported = MIGRATIONS.len() as i32;
        if found > supported {
            return Err(StoreError::TooNew { found, supported });
        }
        for (v, sql) in MIGRATIONS.iter().enumerate().skip(found as usize) {
            let tx = conn.transaction()?;
            tx.execute_batch(sql)?;
            tx.pragma_update(None, "user_version", v as i32 + 1)?;
            tx.commit()?;
        }
        Ok(Store {
            conn,
            #[cfg(test)]
            fail_mid_upsert: false,
        })
    }

    pub fn schema_version(&self) -> Result<i32, StoreError> {
        Ok(self.conn.pragma_query_value(None, "user_version", |r| r.get(0))?)
    }

    /// Inserts `record`, or merges it into the existing row with the same
    /// `(core, target)`. Runs in one transaction.
    pub fn upsert(&mut self, record: &CuratedSequence) -> Result<String, StoreError> {
        let tx = self.conn.transaction()?;
        let merged = match load_one(&tx, &record.id)? {
            Some(mut existing) => {
                existing.merge(record.clone());
                existing
            }
            None => record.clone(),
        };
        write_record(&tx, &merged)?;
        #[cfg(test)]
        if self.fail_mid_upsert {
            panic!("injected failure mid-transaction");
        }
        tx.commit()?;
        Ok(merged.id)
    }

    /// Every row for a target (case-insensitive), ordered by
    /// `(created_at, core)`. Flagged rows are included.
    pub fn query_store(&self, target_name: &str) -> Result<Vec<CuratedSequence>, StoreError> {
        let mut stmt = self
            .conn
            .prepare("SELECT id FROM sequences WHERE target_key = ?1 ORDER BY created_at, core")?;
        let ids: Vec<String> = stmt
            .query_map([target_key(target_name)], |r| r.get(0))?
            .collect::<Result<_, _>>()?;
        ids.iter()
            .map(|id| load_one(&self.conn, id)?.ok_or_else(|| StoreError::Corrupt(format!("row {id} vanished"))))
            .collect()
    }

    /// All rows ordered by `(target_key, core)`.
    pub fn all_sequences(&self) -> Result<Vec<CuratedSequence>, StoreError> {
        let mut stmt = self.conn.prepare("SELECT id FROM sequences ORDER BY target_key, core")?;
        let ids: Vec<String> = stmt.query_map([], |r| r.get(0))?.collect::<Result<_, _>>()?;
        ids.iter()
            .map(|id| load_one(&self.conn, id)?.ok_or_else(|| StoreError::Corrupt(format!("row {id} vanished"))))
            .collect()
    }

    pub fn count_sequences(&self) -> Result<usize, StoreError> {
        Ok(self.conn.query_row("SELECT COUNT(*) FROM sequences", [], |r| r.get::<_, i64>(0))? as usize)
    }

    pub fn has_document(&self, doc_id: &str) -> Result<bool, StoreError> {
        Ok(self
            .conn
            .query_row("SELECT 1 FROM documents WHERE doc_id = ?1", [doc_id], |_| Ok(()))
            .optional()?
            .is_some())
    }

    pub fn record_document(&mut self, doc: &DocumentRecord) -> Result<(), StoreError> {
        self.conn.execute(
            "INSERT OR REPLACE INTO documents (doc_id, path, title, ingested_at, candidates) VALUES (?1, ?2, ?3, ?4, ?5)",
            params![doc.doc_id, doc.path, doc.title, ts(&doc.ingested_at), doc.candidates as i64],
        )?;
        Ok(())
    }

    pub fn documents(&self) -> Result<Vec<DocumentRecord>, StoreError> {
        let mut stmt = self
            .conn
            .prepare("SELECT doc_id, path, title, ingested_at, candidates FROM documents ORDER BY doc_id")?;
        let rows: Vec<(String, String, String, String, i64)> = stmt
            .query_map([], |r| Ok((r.get(0)?, r.get(1)?, r.get(2)?, r.get(3)?, r.get(4)?)))?
            .collect::<Result<_, _>>()?;
        rows.into_iter()
            .map(|(doc_id, path, title, at, candidates)| {
                Ok(DocumentRecord {
                    doc_id,
                    path,
                    title,
                    ingested_at: parse_ts(&at)?,
                    candidates: candidates as usize,
                })
            })
            .collect()
    }

    pub fn record_run(&mut self, run: &RunRecord) -> Result<i64, StoreError> {
        self.conn.execute(
            "INSERT INTO runs (started_at, finished_at, command, summary) VALUES (?1, ?2, ?3, ?4)",
            params![ts(&run.started_at), ts(&run.finished_at), run.command, run.summary.to_string()],
        )?;
        Ok(self.conn.last_insert_rowid())
    }

    pub fn runs(&self) -> Result<Vec<RunRecord>, StoreError> {
        let mut stmt = self
            .conn
            .prepare("SELECT started_at, finished_at, command, summary FROM runs ORDER BY id")?;
        let rows: Vec<(String, String, String, String)> = stmt
            .query_map([], |r| Ok((r.get(0)?, r.get(1)?, r.get(2)?, r.get(3)?)))?
            .collect::<Result<_, _>>()?;
        rows.into_iter()
            .map(|(s, f, command, summary)| {
                Ok(RunRecord {
                    started_at: parse_ts(&s)?,
                    finished_at: parse_ts(&f)?,
                    command,
                    summary: serde_json::from_str(&summary)?,
                })
            })
            .collect()
    }

    #[cfg(test)]
    pub(crate) fn inject_upsert_failure(&mut self) {
        self.fail_mid_upsert = true;
    }
}

fn upsert_article(tx: &Transaction<'_>, a: &ArticleMetadata) -> Result<String, StoreError> {
    let key = a.provenance_key();
    tx.execute(
        "INSERT INTO articles (key, pmid, pmcid, doi, title, authors, journal, year, source, url)
         VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10)
         ON CONFLICT(key) DO UPDATE SET
            pmid = COALESCE(articles.pmid, excluded.pmid),
            pmcid = COALESCE(articles.pmcid, excluded.pmcid),
            doi = COALESCE(articles.doi, excluded.doi),
            url = COALESCE(articles.url, excluded.url),
            year = COALESCE(articles.year, excluded.year),
            journal = CASE WHEN articles.journal = '' THEN excluded.journal ELSE articles.journal END,
            authors = CASE WHEN articles.authors = '[]' THEN excluded.authors ELSE articles.authors END",
        params![
            key,
            a.pmid,
            a.pmcid,
            a.doi,
            a.title,
            serde_json::to_string(&a.authors)?,
            a.journal,
            a.year,
            serde_json::to_value(a.source)?.as_str().unwrap_or_default(),
            a.url,
        ],
    )?;
    Ok(key)
}

fn write_record(tx: &Transaction<'_>, r: &CuratedSequence) -> Result<(), StoreError> {
    let primary = r
        .articles
        .first()
        .ok_or_else(|| StoreError::Corrupt(format!("record {} has no article", r.id)))?;
    let article_key = upsert_article(tx, primary)?;
    tx.execute(
        "INSERT INTO sequences (id, core, target_key, target_name, length, gc_fraction, orientation_normalized,
            modifications, validation, validation_notes, confidence, verdict_backend, article_key, context_snippet,
            created_at, raw, was_joined, decoration_issue)
         VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, ?12, ?13, ?14, ?15, ?16, ?17, ?18)
         ON CONFLICT(id) DO UPDATE SET
            target_name = excluded.target_name, length = excluded.length, gc_fraction = excluded.gc_fraction,
            orientation_normalized = excluded.orientation_normalized, modifications = excluded.modifications,
            validation = excluded.validation, validation_notes = excluded.validation_notes,
            confidence = excluded.confidence, verdict_backend = excluded.verdict_backend,
            article_key = excluded.article_key, context_snippet = excluded.context_snippet,
            created_at = excluded.created_at, raw = excluded.raw, was_joined = excluded.was_joined,
            decoration_issue = excluded.decoration_issue",
        params![
            r.id,
            r.core,
            target_key(&r.target_name),
            r.target_name,
            r.length as i64,
            r.gc_fraction.to_string(),
            r.orientation_normalized,
            serde_json::to_string(&r.modifications)?,
            r.validation.status.as_str(),
            r.validation.notes,
            r.confidence.to_string(),
            r.verdict_backend,
            article_key,
            r.context_snippet,
            ts(&r.created_at),
            r.raw,
            r.was_joined,
            r.decoration_issue,
        ],
    )?;
    for a in &r.articles {
        let key = upsert_article(tx, a)?;
        tx.execute(
            "INSERT OR IGNORE INTO sequence_articles (sequence_id, article_key) VALUES (?1, ?2)",
            params![r.id, key],
        )?;
    }
    for m in &r.affinities {
        tx.execute(
            "INSERT OR IGNORE INTO affinities (sequence_id, kind, value, unit, value_nm, span_start, span_end, context, source_doc)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9)",
            params![
                r.id,
                m.kind.as_str(),
                m.value.to_string(),
                m.unit,
                m.value_nm.to_string(),
                m.span.start as i64,
                m.span.end as i64,
                m.context,
                m.source_doc.clone().unwrap_or_default(),
            ],
        )?;
    }
    if let Some(c) = &r.conditions {
        tx.execute(
            "INSERT OR REPLACE INTO conditions (sequence_id, ph, temperature, buffer, source_doc, flagged)
             VALUES (?1, ?2, ?3, ?4, ?5, ?6)",
            params![
                r.id,
                c.ph.map(|d| d.to_string()),
                c.temperature.map(|d| d.to_string()),
                c.buffer,
                c.source_doc,
                serde_json::to_string(&c.flagged)?,
            ],
        )?;
    }
    Ok(())
}

fn load_article(conn: &Connection, key: &str) -> Result<ArticleMetadata, StoreError> {
    let row = conn.query_row(
        "SELECT pmid, pmcid, doi, title, authors, journal, year, source, url FROM articles WHERE key = ?1",
        [key],
        |r| {
            Ok((
                r.get::<_, Option<String>>(0)?,
                r.get::<_, Option<String>>(1)?,
                r.get::<_, Option<String>>(2)?,
                r.get::<_, String>(3)?,
                r.get::<_, String>(4)?,
                r.get::<_, String>(5)?,
                r.get::<_, Option<i32>>(6)?,
                r.get::<_, String>(7)?,
                r.get::<_, Option<String>>(8)?,
            ))
        },
    )?;
    let (pmid, pmcid, doi, title, authors, journal, year, source, url) = row;
    Ok(ArticleMetadata {
        pmid,
        pmcid,
        doi,
        title,
        authors: serde_json::from_str(&authors)?,
        journal,
        year,
        source: serde_json::from_value(serde_json::Value::String(source))?,
        url,
    })
}

fn parse_kind(s: &str) -> Result<AffinityKind, StoreError> {
    Ok(match s {
        "Kd" => AffinityKind::Kd,
        "Ki" => AffinityKind::Ki,
        "IC50" => AffinityKind::IC50,
        "EC50" => AffinityKind::EC50,
        other => return Err(StoreError::Corrupt(format!("affinity kind {other:?}"))),
    })
}

type SequenceRow = (
    String,
    String,
    i64,
    String,
    bool,
    String,
    String,
    String,
    String,
    String,
    String,
    String,
    String,
    String,
    bool,
    Option<String>,
);

fn load_one(conn: &Connection, id: &str) -> Result<Option<CuratedSequence>, StoreError> {
    let row: Option<SequenceRow> = conn
        .query_row(
            "SELECT core, target_name, length, gc_fraction, orientation_normalized, modifications, validation,
                    validation_notes, confidence, verdict_backend, article_key, context_snippet, created_at, raw,
                    was_joined, decoration_issue
             FROM sequences WHERE id = ?1",
            [id],
            |r| {
                Ok((
                    r.get(0)?,
                    r.get(1)?,
                    r.get(2)?,
                    r.get(3)?,
                    r.get(4)?,
                    r.get(5)?,
                    r.get(6)?,
                    r.get(7)?,
                    r.get(8)?,
                    r.get(9)?,
                    r.get(10)?,
                    r.get(11)?,
                    r.get(12)?,
                    r.get(13)?,
                    r.get(14)?,
                    r.get(15)?,
                ))
            },
        )
        .optional()?;
    let Some((
        core,
        target_name,
        length,
        gc,
        orientation_normalized,
        mods,
        validation,
        notes,
        confidence,
        backend,
        article_key,
        context_snippet,
        created_at,
        raw,
        was_joined,
        decoration_issue,
    )) = row
    else {
        return Ok(None);
    };

    let mut stmt = conn.prepare("SELECT article_key FROM sequence_articles WHERE sequence_id = ?1 ORDER BY article_key")?;
    let keys: Vec<String> = stmt.query_map([id], |r| r.get(0))?.collect::<Result<_, _>>()?;
    let primary = load_article(conn, &article_key)?;
    let others = keys
        .iter()
        .filter(|k| **k != article_key)
        .map(|k| load_article(conn, k))
        .collect::<Result<Vec<_>, _>>()?;
    let articles = union_articles(vec![primary], others);

    let mut stmt = conn.prepare(
        "SELECT kind, value, unit, value_nm, span_start, span_end, context, source_doc FROM affinities WHERE sequence_id = ?1",
    )?;
    let raw_affinities: Vec<(String, String, String, String, i64, i64, String, String)> = stmt
        .query_map([id], |r| {
            Ok((r.get(0)?, r.get(1)?, r.get(2)?, r.get(3)?, r.get(4)?, r.get(5)?, r.get(6)?, r.get(7)?))
        })?
        .collect::<Result<_, _>>()?;
    let affinities = raw_affinities
        .into_iter()
        .map(|(kind, value, unit, value_nm, s, e, context, source_doc)| {
            Ok(AffinityMeasurement {
                kind: parse_kind(&kind)?,
                value: parse_dec(&value)?,
                unit,
                value_nm: parse_dec(&value_nm)?,
                span: Span::new(s as usize, e as usize),
                context,
                source_doc: (!source_doc.is_empty()).then_some(source_doc),
            })
        })
        .collect::<Result<Vec<_>, StoreError>>()?;

    let conditions = conn
        .query_row(
            "SELECT ph, temperature, buffer, source_doc, flagged FROM conditions WHERE sequence_id = ?1",
            [id],
            |r| {
                Ok((
                    r.get::<_, Option<String>>(0)?,
                    r.get::<_, Option<String>>(1)?,
                    r.get::<_, Option<String>>(2)?,
                    r.get::<_, Option<String>>(3)?,
                    r.get::<_, String>(4)?,
                ))
            },
        )
        .optional()?
        .map(|(ph, temp, buffer, source_doc, flagged)| -> Result<_, StoreError> {
            Ok(ExperimentalConditions {
                ph: ph.as_deref().map(parse_dec).transpose()?,
                temperature: temp.as_deref().map(parse_dec).transpose()?,
                buffer,
                source_doc,
                flagged: serde_json::from_str(&flagged)?,
            })
        })
        .transpose()?;

    Ok(Some(CuratedSequence {
        id: id.to_string(),
        core,
        length: length as usize,
        gc_fraction: parse_dec(&gc)?,
        orientation_normalized,
        modifications: serde_json::from_str(&mods)?,
        validation: ValidationStatus {
            status: ValidationState::parse(&validation)
                .ok_or_else(|| StoreError::Corrupt(format!("validation {validation:?}")))?,
            notes,
        },
        confidence: parse_dec(&confidence)?,
        verdict_backend: backend,
        target_name,
        articles,
        affinities: union_affinities(affinities, Vec::new()),
        conditions,
        context_snippet,
        created_at: parse_ts(&created_at)?,
        raw,
        was_joined,
        decoration_issue,
    }))
}
