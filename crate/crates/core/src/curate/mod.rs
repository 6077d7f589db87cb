//! Validation, harmonization, deduplication and storage of curated
//! sequences. Nothing here consults the semantic classifier.

mod export;
mod store;

pub use export::{export_csv, sequence_csv_row, truncate_chars, CSV_COLUMNS, SNIPPET_CHARS};
pub use store::{DocumentRecord, RunRecord, Store, StoreError, SCHEMA_VERSION};

use std::cmp::Ordering;
use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::metadataxml::ArticleMetadata;
use crate::seqextract::{
    AffinityMeasurement, ExperimentalConditions, ModPosition, Modification, Orientation, ParsedToken,
    SequenceCandidate,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurateError {
    #[error("sequence is empty")]
    EmptySequence,
    #[error("invalid curation bounds: {0}")]
    InvalidBounds(String),
}

/// Length and GC bounds, inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurateConfig {
    pub min_len: usize,
    pub max_len: usize,
    pub gc_min: Decimal,
    pub gc_max: Decimal,
}

impl Default for CurateConfig {
    fn default() -> Self {
        CurateConfig {
            min_len: 20,
            max_len: 100,
            gc_min: Decimal::new(20, 2),
            gc_max: Decimal::new(80, 2),
        }
    }
}

impl CurateConfig {
    pub fn validate(&self) -> Result<(), CurateError> {
        if self.min_len == 0 || self.min_len > self.max_len {
            return Err(CurateError::InvalidBounds(format!("length [{}, {}]", self.min_len, self.max_len)));
        }
        if self.gc_min < Decimal::ZERO || self.gc_max > Decimal::ONE || self.gc_min > self.gc_max {
            return Err(CurateError::InvalidBounds(format!("gc [{}, {}]", self.gc_min, self.gc_max)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ValidationState {
    Valid,
    FlaggedLength,
    #[serde(rename = "FlaggedGC")]
    FlaggedGc,
    FlaggedAlphabet,
    FlaggedMultiple,
}

impl ValidationState {
    pub fn as_str(self) -> &'static str {
        match self {
            ValidationState::Valid => "Valid",
            ValidationState::FlaggedLength => "FlaggedLength",
            ValidationState::FlaggedGc => "FlaggedGC",
            ValidationState::FlaggedAlphabet => "FlaggedAlphabet",
            ValidationState::FlaggedMultiple => "FlaggedMultiple",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "Valid" => ValidationState::Valid,
            "FlaggedLength" => ValidationState::FlaggedLength,
            "FlaggedGC" => ValidationState::FlaggedGc,
            "FlaggedAlphabet" => ValidationState::FlaggedAlphabet,
            "FlaggedMultiple" => ValidationState::FlaggedMultiple,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationStatus {
    pub status: ValidationState,
    /// One `;`-separated note per violation, empty when valid.
    pub notes: String,
}

impl ValidationStatus {
    pub fn is_valid(&self) -> bool {
        self.status == ValidationState::Valid
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuratedSequence {
    pub id: String,
    pub core: String,
    pub length: usize,
    pub gc_fraction: Decimal,
    pub orientation_normalized: bool,
    pub modifications: Vec<Modification>,
    pub validation: ValidationStatus,
    pub confidence: Decimal,
    /// `"heuristic"` or `"model:<name>"`.
    pub verdict_backend: String,
    pub target_name: String,
    /// Primary article first, then any merged duplicates by provenance key.
    pub articles: Vec<ArticleMetadata>,
    pub affinities: Vec<AffinityMeasurement>,
    pub conditions: Option<ExperimentalConditions>,
    pub context_snippet: String,
    pub created_at: DateTime<Utc>,
    /// Canonical rendering of the harmonized token.
    pub raw: String,
    pub was_joined: bool,
    pub decoration_issue: Option<String>,
}

/// Lowercased, trimmed target name used for keys and lookups.
pub fn target_key(target_name: &str) -> String {
    target_name.trim().to_lowercase()
}

/// Stable row id derived from `(core, target)`.
pub fn sequence_id(core: &str, target_name: &str) -> String {
    let mut h = Sha256::new();
    h.update(core.as_bytes());
    h.update([0]);
    h.update(target_key(target_name).as_bytes());
    hex::encode(&h.finalize()[..8])
}

fn gc_count(core: &str) -> usize {
    core.chars().filter(|c| matches!(c, 'G' | 'C' | 'g' | 'c')).count()
}

/// `(G + C) / length` as an exact decimal (repeating fractions are rounded
/// at 28 significant digits).
pub fn gc_content(core: &str) -> Result<Decimal, CurateError> {
    let len = core.chars().count();
    if len == 0 {
        return Err(CurateError::EmptySequence);
    }
    Ok((Decimal::from(gc_count(core)) / Decimal::from(len)).normalize())
}

/// Classifies a core against the configured bounds. Every input gets exactly
/// one status; nothing is discarded.
pub fn validate(core: &str, config: &CurateConfig) -> ValidationStatus {
    let mut flags = Vec::new();
    let len = core.chars().count();

    let bad: Vec<char> = core.chars().filter(|c| !matches!(c, 'A' | 'C' | 'G' | 'T' | 'U')).collect();
    if !bad.is_empty() {
        flags.push((ValidationState::FlaggedAlphabet, format!("alphabet: unexpected {:?}", bad.iter().collect::<String>())));
    } else if core.contains('T') && core.contains('U') {
        flags.push((ValidationState::FlaggedAlphabet, "alphabet: mixes T and U".to_string()));
    }
    if len < config.min_len || len > config.max_len {
        flags.push((
            ValidationState::FlaggedLength,
            format!("length {len} outside [{}, {}]", config.min_len, config.max_len),
        ));
    }
    if len > 0 {
        // gc_min <= count/len <= gc_max, cross-multiplied.
        let count = Decimal::from(gc_count(core));
        let n = Decimal::from(len);
        if count < config.gc_min * n || count > config.gc_max * n {
            let gc = gc_content(core).unwrap_or_default().round_dp(2);
            flags.push((
                ValidationState::FlaggedGc,
                format!("gc {gc} outside [{}, {}]", config.gc_min, config.gc_max),
            ));
        }
    }

    let status = match flags.len() {
        0 => ValidationState::Valid,
        1 => flags[0].0,
        _ => ValidationState::FlaggedMultiple,
    };
    ValidationStatus {
        status,
        notes: flags.into_iter().map(|(_, n)| n).collect::<Vec<_>>().join("; "),
    }
}

/// Uppercases the core and, for runs written `3'-...-5'`, reverses it into
/// 5'->3' order with modification positions remapped. Idempotent.
pub fn harmonize(candidate: &SequenceCandidate) -> SequenceCandidate {
    let mut out = candidate.clone();
    out.core = candidate.core.to_uppercase();
    if candidate.orientation == Orientation::Reversed && !candidate.orientation_normalized {
        let len = out.core.chars().count();
        out.core = out.core.chars().rev().collect();
        for m in &mut out.modifications {
            m.position = match m.position {
                ModPosition::FivePrimeEnd => ModPosition::ThreePrimeEnd,
                ModPosition::ThreePrimeEnd => ModPosition::FivePrimeEnd,
                ModPosition::Interior(i) => ModPosition::Interior(len.saturating_sub(i)),
            };
        }
        out.modifications.sort_by_key(|m| m.position);
        out.orientation = Orientation::Forward;
        out.orientation_normalized = true;
    }
    if out.decoration_issue.is_none() {
        out.raw = ParsedToken {
            core: out.core.clone(),
            modifications: out.modifications.clone(),
            orientation: out.orientation,
        }
        .render();
    }
    out
}

impl CuratedSequence {
    /// Builds the pre-storage record for a harmonized candidate. Confidence,
    /// backend, affinities and conditions are filled in by the caller.
    pub fn from_candidate(
        candidate: &SequenceCandidate,
        target_name: &str,
        article: ArticleMetadata,
        created_at: DateTime<Utc>,
        config: &CurateConfig,
    ) -> Self {
        let c = harmonize(candidate);
        CuratedSequence {
            id: sequence_id(&c.core, target_name),
            length: c.core.chars().count(),
            gc_fraction: gc_content(&c.core).unwrap_or_default(),
            orientation_normalized: c.orientation_normalized,
            modifications: c.modifications.clone(),
            validation: validate(&c.core, config),
            confidence: Decimal::ZERO,
            verdict_backend: String::new(),
            target_name: target_name.trim().to_string(),
            articles: vec![article],
            affinities: Vec::new(),
            conditions: None,
            context_snippet: c.context.clone(),
            created_at,
            raw: c.raw.clone(),
            was_joined: c.was_joined,
            decoration_issue: c.decoration_issue.clone(),
            core: c.core,
        }
    }

    pub fn primary_article(&self) -> Option<&ArticleMetadata> {
        self.articles.first()
    }

    fn primary_key(&self) -> String {
        self.primary_article().map(|a| a.provenance_key()).unwrap_or_default()
    }

    /// Survivor order: earliest `created_at`, then provenance key, then
    /// remaining text fields so the choice never depends on input order.
    pub fn survivor_cmp(&self, other: &Self) -> Ordering {
        self.created_at
            .cmp(&other.created_at)
            .then_with(|| self.primary_key().cmp(&other.primary_key()))
            .then_with(|| self.raw.cmp(&other.raw))
            .then_with(|| self.context_snippet.cmp(&other.context_snippet))
            .then_with(|| other.confidence.cmp(&self.confidence))
    }

    /// Merges a duplicate into `self`: the better survivor keeps its scalar
    /// fields; articles and affinities are unioned.
    pub fn merge(&mut self, other: CuratedSequence) {
        let (mut keep, lose) = if other.survivor_cmp(self) == Ordering::Less {
            (other, std::mem::replace(self, placeholder()))
        } else {
            (std::mem::replace(self, placeholder()), other)
        };
        keep.articles = union_articles(keep.articles, lose.articles);
        keep.affinities = union_affinities(keep.affinities, lose.affinities);
        if keep.conditions.as_ref().is_none_or(|c| c.is_empty()) && lose.conditions.is_some() {
            keep.conditions = lose.conditions;
        }
        *self = keep;
    }
}

fn placeholder() -> CuratedSequence {
    CuratedSequence {
        id: String::new(),
        core: String::new(),
        length: 0,
        gc_fraction: Decimal::ZERO,
        orientation_normalized: false,
        modifications: Vec::new(),
        validation: ValidationStatus {
            status: ValidationState::Valid,
            notes: String::new(),
        },
        confidence: Decimal::ZERO,
        verdict_backend: String::new(),
        target_name: String::new(),
        articles: Vec::new(),
        affinities: Vec::new(),
        conditions: None,
        context_snippet: String::new(),
        created_at: DateTime::<Utc>::MIN_UTC,
        raw: String::new(),
        was_joined: false,
        decoration_issue: None,
    }
}

/// Keeps the first article of `primary`, then every other distinct article
/// ordered by provenance key.
pub(crate) fn union_articles(primary: Vec<ArticleMetadata>, extra: Vec<ArticleMetadata>) -> Vec<ArticleMetadata> {
    let mut all = primary.into_iter();
    let Some(mut head) = all.next() else {
        return union_articles(extra, Vec::new());
    };
    let mut rest: Vec<ArticleMetadata> = Vec::new();
    for a in all.chain(extra) {
        if head.same_article(&a) {
            head.absorb(&a);
        } else if let Some(existing) = rest.iter_mut().find(|r| r.same_article(&a)) {
            existing.absorb(&a);
        } else {
            rest.push(a);
        }
    }
    rest.sort_by_key(|a| a.provenance_key());
    std::iter::once(head).chain(rest).collect()
}

fn affinity_key(a: &AffinityMeasurement) -> (Option<String>, usize, usize, String, Decimal, String) {
    (a.source_doc.clone(), a.span.start, a.span.end, a.kind.as_str().to_string(), a.value_nm, a.unit.clone())
}

pub(crate) fn union_affinities(a: Vec<AffinityMeasurement>, b: Vec<AffinityMeasurement>) -> Vec<AffinityMeasurement> {
    let mut map = BTreeMap::new();
    for m in a.into_iter().chain(b) {
        map.entry(affinity_key(&m)).or_insert(m);
    }
    map.into_values().collect()
}

/// Collapses records with identical cores into one survivor each. Output is
/// ordered by `(created_at, core)`.
pub fn dedup(records: Vec<CuratedSequence>) -> Vec<CuratedSequence> {
    let mut groups: BTreeMap<String, Vec<CuratedSequence>> = BTreeMap::new();
    for r in records {
        groups.entry(r.core.clone()).or_default().push(r);
    }
    let mut out: Vec<CuratedSequence> = groups
        .into_values()
        .map(|mut group| {
            group.sort_by(|a, b| a.survivor_cmp(b));
            let mut it = group.into_iter();
            let mut survivor = it.next().expect("non-empty group");
            for r in it {
                survivor.merge(r);
            }
            survivor
        })
        .collect();
    out.sort_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.core.cmp(&b.core)));
    out
}


#[cfg(test)]
mod tests {
    use super::testing::*;
    use super::*;
    use crate::seqextract::{parse_modifications, Notation};
    use proptest::prelude::*;

    fn dec(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    #[test]
    fn gc_examples() {
        assert_eq!(gc_content("ATGC").unwrap(), dec("0.5"));
        assert_eq!(gc_content("AAAA").unwrap(), dec("0"));
        assert_eq!(gc_content("GGCC").unwrap(), dec("1"));
        assert_eq!(gc_content(""), Err(CurateError::EmptySequence));
    }

    #[test]
    fn validation_examples() {
        let cfg = CurateConfig::default();
        assert_eq!(validate("ACGTACGTACGTACGTACGT", &cfg).status, ValidationState::Valid);
        let g = validate(&"G".repeat(20), &cfg);
        assert_eq!(g.status, ValidationState::FlaggedGc);
        assert!(g.notes.contains("gc 1"));
        // 101-mer with 91 G/C bases: gc ~ 0.90.
        let long = format!("{}{}", "G".repeat(91), "A".repeat(10));
        let v = validate(&long, &cfg);
        assert_eq!(v.status, ValidationState::FlaggedMultiple);
        assert!(v.notes.contains("length 101") && v.notes.contains("gc 0.90"));
        assert_eq!(validate("ACGUACGTACGTACGTACGA", &cfg).status, ValidationState::FlaggedAlphabet);
    }

    #[test]
    fn gc_bounds_are_inclusive() {
        let cfg = CurateConfig::default();
        // 4 of 20 = 0.20 and 16 of 20 = 0.80 sit exactly on the bounds.
        let low = format!("{}{}", "G".repeat(4), "A".repeat(16));
        let high = format!("{}{}", "G".repeat(16), "A".repeat(4));
        assert!(validate(&low, &cfg).is_valid());
        assert!(validate(&high, &cfg).is_valid());
        let below = format!("{}{}", "G".repeat(3), "A".repeat(17));
        assert_eq!(validate(&below, &cfg).status, ValidationState::FlaggedGc);
    }

    #[test]
    fn reversed_run_is_normalized() {
        let parsed = parse_modifications("3'-TGCA-5'").unwrap();
        let mut c = candidate(&parsed.core);
        c.orientation = parsed.orientation;
        let h = harmonize(&c);
        assert_eq!(h.core, "ACGT");
        assert!(h.orientation_normalized);
        assert_eq!(harmonize(&h), h);
    }

    #[test]
    fn lowercase_is_upcased_only() {
        let h = harmonize(&candidate("acgtacgt"));
        assert_eq!(h.core, "ACGTACGT");
        assert!(!h.orientation_normalized);
    }

    #[test]
    fn reversal_remaps_modifications() {
        let parsed = parse_modifications("3'-^FAM-AC*dTGT-5'").unwrap();
        let mut c = candidate(&parsed.core);
        c.orientation = parsed.orientation;
        c.modifications = parsed.modifications;
        let h = harmonize(&c);
        assert_eq!(h.core, "TGCA");
        assert_eq!(
            h.modifications,
            vec![
                Modification { position: ModPosition::Interior(2), code: "dT".into(), notation: Notation::Star },
                Modification { position: ModPosition::ThreePrimeEnd, code: "FAM".into(), notation: Notation::Caret },
            ]
        );
        assert_eq!(harmonize(&h), h);
    }

    #[test]
    fn dedup_examples() {
        let a = record("ACGTACGTACGTACGTACGT", "thrombin", "1", 10);
        let b = record("ACGTACGTACGTACGTACGT", "thrombin", "2", 5);
        let c = record("ACGTACGTACGTACGTACGA", "thrombin", "3", 1);
        let out = dedup(vec![a, b.clone(), c]);
        assert_eq!(out.len(), 2);
        let merged = out.iter().find(|r| r.core.ends_with('T')).unwrap();
        assert_eq!(merged.created_at, b.created_at);
        let pmids: Vec<_> = merged.articles.iter().map(|a| a.pmid.clone().unwrap()).collect();
        assert_eq!(pmids, vec!["2", "1"]);
        assert!(dedup(Vec::new()).is_empty());
    }

    fn at_content(s: &str) -> Decimal {
        let at = s.chars().filter(|c| matches!(c, 'A' | 'T' | 'U')).count();
        Decimal::from(at) / Decimal::from(s.len())
    }

    /// Pairwise oracle: group indices by exact core comparison, no maps.
    fn oracle(records: &[CuratedSequence]) -> Vec<(String, DateTime<Utc>, Vec<String>)> {
        let mut seen = vec![false; records.len()];
        let mut out = Vec::new();
        for i in 0..records.len() {
            if seen[i] {
                continue;
            }
            let mut earliest = records[i].created_at;
            let mut keys = Vec::new();
            for j in i..records.len() {
                if records[j].core == records[i].core {
                    seen[j] = true;
                    earliest = earliest.min(records[j].created_at);
                    for a in &records[j].articles {
                        if !keys.contains(&a.provenance_key()) {
                            keys.push(a.provenance_key());
                        }
                    }
                }
            }
            keys.sort();
            out.push((records[i].core.clone(), earliest, keys));
        }
        out.sort();
        out
    }

    fn summary(records: &[CuratedSequence]) -> Vec<(String, DateTime<Utc>, Vec<String>)> {
        let mut out: Vec<_> = records
            .iter()
            .map(|r| {
                let mut keys: Vec<_> = r.articles.iter().map(|a| a.provenance_key()).collect();
                keys.sort();
                (r.core.clone(), r.created_at, keys)
            })
            .collect();
        out.sort();
        out
    }

    fn arb_records() -> impl Strategy<Value = Vec<CuratedSequence>> {
        // Small alphabet of cores so groups actually form.
        prop::collection::vec((0usize..12, 0u32..30, 0i64..50), 0..200).prop_map(|items| {
            items
                .into_iter()
                .map(|(core, pmid, t)| {
                    let core: String = format!("{core:04b}").chars().map(|c| if c == '1' { 'G' } else { 'A' }).collect();
                    record(&core.repeat(5), "t", &pmid.to_string(), t)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn gc_plus_at_is_one(s in "[ACGT]{1,120}") {
            prop_assert_eq!((gc_content(&s).unwrap() + at_content(&s)).round_dp(20), Decimal::ONE);
        }

        #[test]
        fn validate_always_returns_one_status(s in "[ACGTUN]{0,150}") {
            let v = validate(&s, &CurateConfig::default());
            prop_assert_eq!(v.is_valid(), v.notes.is_empty());
        }

        #[test]
        fn dedup_matches_pairwise_oracle(records in arb_records()) {
            prop_assert_eq!(summary(&dedup(records.clone())), oracle(&records));
        }

        #[test]
        fn dedup_is_idempotent_and_order_insensitive(records in arb_records(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let once = dedup(records.clone());
            prop_assert_eq!(dedup(once.clone()), once.clone());
            let mut shuffled = records;
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(dedup(shuffled), once);
        }

        #[test]
        fn harmonize_is_idempotent(core in "[acgtACGT]{4,40}", reversed in any::<bool>()) {
            let mut c = candidate(&core);
            if reversed {
                c.orientation = Orientation::Reversed;
            }
            let once = harmonize(&c);
            prop_assert_eq!(harmonize(&once), once);
        }
    }
}
