use serde::{Deserialize, Serialize};

use super::sections::{label_at, LabeledSpan, SectionLabel};
use crate::seqextract::paragraph_ranges;

/// Chunk size limit, in whitespace-delimited words.
pub const DEFAULT_MAX_TOKENS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentChunk {
    pub doc_id: String,
    pub chunk_index: usize,
    pub text: String,
    pub token_count: usize,
    pub section_label: SectionLabel,
    /// Byte offset of `text` in the document.
    pub start: usize,
}

pub fn token_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// `(start, end)` ranges of sentences inside `[start, end)`.
fn sentence_ranges(text: &str, start: usize, end: usize) -> Vec<(usize, usize)> {
    let slice = &text[start..end];
    let bytes = slice.as_bytes();
    let mut out = Vec::new();
    let mut s = 0;
    for (i, &b) in bytes.iter().enumerate() {
        if matches!(b, b'.' | b'!' | b'?') && bytes.get(i + 1).is_some_and(|n| n.is_ascii_whitespace()) {
            out.push((start + s, start + i + 1));
            s = i + 1 + slice[i + 1..].len() - slice[i + 1..].trim_start().len();
        }
    }
    if s < slice.len() && !slice[s..].trim().is_empty() {
        out.push((start + s, end));
    }
    out
}

/// Splits `[start, end)` into pieces of at most `max` words.
fn hard_split(text: &str, start: usize, end: usize, max: usize) -> Vec<(usize, usize)> {
    let slice = &text[start..end];
    let words: Vec<(usize, usize)> = slice
        .split_whitespace()
        .map(|w| {
            let off = w.as_ptr() as usize - slice.as_ptr() as usize;
            (start + off, start + off + w.len())
        })
        .collect();
    words.chunks(max).map(|c| (c[0].0, c[c.len() - 1].1)).collect()
}

/// Units no larger than `max` words: whole paragraphs, else sentences, else
/// word runs.
fn units(text: &str, max: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for (ps, pe) in paragraph_ranges(text) {
        let n = token_count(&text[ps..pe]);
        if n <= max {
            out.push((ps, pe, n));
            continue;
        }
        for (ss, se) in sentence_ranges(text, ps, pe) {
            let n = token_count(&text[ss..se]);
            if n <= max {
                out.push((ss, se, n));
            } else {
                for (hs, he) in hard_split(text, ss, se, max) {
                    out.push((hs, he, token_count(&text[hs..he])));
                }
            }
        }
    }
    out
}

/// Greedy packing of units into chunks of at most `max_tokens` words. A
/// chunk never crosses a section boundary. Chunk texts are slices of `text`.
pub fn chunk(doc_id: &str, text: &str, sections: &[LabeledSpan], max_tokens: usize) -> Vec<DocumentChunk> {
    let max = max_tokens.max(1);
    let mut out: Vec<DocumentChunk> = Vec::new();
    let mut current: Option<(usize, usize, usize, SectionLabel)> = None;
    let section_of = |pos: usize| sections.iter().rposition(|s| s.start <= pos).unwrap_or(0);

    let flush = |c: (usize, usize, usize, SectionLabel), out: &mut Vec<DocumentChunk>| {
        out.push(DocumentChunk {
            doc_id: doc_id.to_string(),
            chunk_index: out.len(),
            text: text[c.0..c.1].to_string(),
            token_count: c.2,
            section_label: c.3,
            start: c.0,
        });
    };

    for (us, ue, n) in units(text, max) {
        current = match current {
            Some(c) if c.2 + n <= max && section_of(c.0) == section_of(us) => Some((c.0, ue, c.2 + n, c.3)),
            Some(c) => {
                flush(c, &mut out);
                Some((us, ue, n, label_at(sections, us)))
            }
            None => Some((us, ue, n, label_at(sections, us))),
        };
    }
    if let Some(c) = current {
        flush(c, &mut out);
    }
    out
}
