//! Deterministic detection of nucleotide sequences, modification notation,
//! binding affinities and experimental conditions.
//!
//! All offsets are byte offsets into the scanned text.

mod affinity;
mod conditions;
mod context;
mod modifications;
mod sequences;

pub use affinity::{extract_affinities, unit_factor_nm, AffinityKind, AffinityMeasurement};
pub use conditions::{extract_conditions, ExperimentalConditions};
pub use context::{context_window, context_window_range, paragraph_ranges};
pub use modifications::{parse_modifications, DecorationError, ParsedToken};
pub use sequences::find_sequences;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn shifted(self, by: usize) -> Self {
        Span::new(self.start + by, self.end + by)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModPosition {
    FivePrimeEnd,
    /// Number of core bases preceding the modification.
    Interior(usize),
    ThreePrimeEnd,
}

/// How the modification was written: `*dT` or `^FAM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Notation {
    Star,
    Caret,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Modification {
    pub position: ModPosition,
    pub code: String,
    pub notation: Notation,
}

/// Orientation markers found around a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Orientation {
    #[default]
    Unmarked,
    /// Written `5'-...-3'`.
    Forward,
    /// Written `3'-...-5'`.
    Reversed,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("min_len must be >= 10 (got {0})")]
    MinTooSmall(usize),
    #[error("max_len must be <= 500 (got {0})")]
    MaxTooLarge(usize),
    #[error("min_len {0} must be below max_len {1}")]
    Inverted(usize, usize),
}

/// Accepted core length range, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SequenceBounds {
    pub min_len: usize,
    pub max_len: usize,
}

impl Default for SequenceBounds {
    fn default() -> Self {
        SequenceBounds {
            min_len: 20,
            max_len: 100,
        }
    }
}

impl SequenceBounds {
    pub fn new(min_len: usize, max_len: usize) -> Result<Self, BoundsError> {
        if min_len < 10 {
            return Err(BoundsError::MinTooSmall(min_len));
        }
        if max_len > 500 {
            return Err(BoundsError::MaxTooLarge(max_len));
        }
        if min_len >= max_len {
            return Err(BoundsError::Inverted(min_len, max_len));
        }
        Ok(SequenceBounds { min_len, max_len })
    }

    pub fn contains(&self, len: usize) -> bool {
        (self.min_len..=self.max_len).contains(&len)
    }
}

/// A detected nucleotide run with its decorations and surrounding text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceCandidate {
    /// Text as matched, including decorations and wrap separators.
    pub raw: String,
    /// Uppercase A/C/G/T/U only, in written order.
    pub core: String,
    pub modifications: Vec<Modification>,
    pub orientation: Orientation,
    /// Set once the core has been reversed into 5'->3' order.
    pub orientation_normalized: bool,
    pub span: Span,
    pub context: String,
    /// Byte offset of `context` within the scanned text.
    pub context_start: usize,
    /// The run was assembled across spaces, hyphens or a line break.
    pub was_joined: bool,
    /// Set when decorations could not be parsed; the candidate is kept.
    pub decoration_issue: Option<String>,
    pub source_doc: Option<String>,
}

impl SequenceCandidate {
    /// Location of the candidate inside its own `context`.
    pub fn anchor_in_context(&self) -> Option<(usize, usize)> {
        let start = self.span.start.checked_sub(self.context_start)?;
        let end = start + (self.span.end - self.span.start);
        (end <= self.context.len()).then_some((start, end))
    }
}

pub(crate) fn is_nucleotide(c: char) -> bool {
    matches!(c, 'A' | 'C' | 'G' | 'T' | 'U' | 'a' | 'c' | 'g' | 't' | 'u')
}

pub(crate) fn is_separator(c: char) -> bool {
    c.is_whitespace() || matches!(c, '-' | '\u{2010}' | '\u{2011}' | '\u{2013}')
}

pub(crate) fn is_prime(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{2032}')
}
