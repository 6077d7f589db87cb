use std::io::Write;

use super::{CuratedSequence, Store, StoreError};

/// Column order of every sequence CSV. `export_csv` prepends `target`.
pub const CSV_COLUMNS: [&str; 14] = [
    "sequence",
    "length",
    "gc",
    "validation",
    "confidence",
    "affinity_kind",
    "affinity_value",
    "affinity_unit",
    "pmid",
    "doi",
    "title",
    "journal",
    "year",
    "context_snippet",
];

/// Characters of context kept in CSV output.
pub const SNIPPET_CHARS: usize = 300;

pub fn truncate_chars(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

/// One CSV row in [`CSV_COLUMNS`] order. Affinity columns describe the first
/// affinity; article columns the primary article.
pub fn sequence_csv_row(r: &CuratedSequence) -> Vec<String> {
    let aff = r.affinities.first();
    let art = r.primary_article();
    let snippet = r.context_snippet.split_whitespace().collect::<Vec<_>>().join(" ");
    vec![
        r.core.clone(),
        r.length.to_string(),
        r.gc_fraction.round_dp(4).normalize().to_string(),
        r.validation.status.as_str().to_string(),
        r.confidence.round_dp(4).normalize().to_string(),
        aff.map(|a| a.kind.as_str().to_string()).unwrap_or_default(),
        aff.map(|a| a.value.to_string()).unwrap_or_default(),
        aff.map(|a| a.unit.clone()).unwrap_or_default(),
        art.and_then(|a| a.pmid.clone()).unwrap_or_default(),
        art.and_then(|a| a.doi.clone()).unwrap_or_default(),
        art.map(|a| a.title.clone()).unwrap_or_default(),
        art.map(|a| a.journal.clone()).unwrap_or_default(),
        art.and_then(|a| a.year).map(|y| y.to_string()).unwrap_or_default(),
        truncate_chars(&snippet, SNIPPET_CHARS).to_string(),
    ]
}

/// Writes the whole sequences table, ordered by target then core. Returns
/// the number of data rows.
pub fn export_csv(store: &Store, out: impl Write) -> Result<usize, StoreError> {
    let rows = store.all_sequences()?;
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| StoreError::Corrupt(format!("csv: {e}"));
    w.write_record(std::iter::once("target").chain(CSV_COLUMNS)).map_err(io)?;
    for r in &rows {
        w.write_record(std::iter::once(r.target_name.clone()).chain(sequence_csv_row(r)))
            .map_err(io)?;
    }
    w.flush().map_err(|e| StoreError::Corrupt(format!("csv: {e}")))?;
    Ok(rows.len())
}
