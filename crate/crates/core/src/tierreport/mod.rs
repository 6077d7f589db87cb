//! Per-target tier outcome, report files and the run summary.
//!
//! A target is in exactly one tier:
//!
//! | curated sequences | leads | tier |
//! |---|---|---|
//! | some | any | `Tier1` |
//! | none | some | `Tier2` |
//! | none | none | `Tier3` (every source found is still listed) |
//!
//! Run-level hit rates are nested instead: see [`RunSummary`].

mod emit;
mod summary;

pub use emit::{emit_report, render_csv, render_json, render_txt, unique_slugs, ReportFormat};
pub use summary::{summarize_run, write_summary, HitRates, RunSummary, TierCounts};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curate::CuratedSequence;
use crate::metadataxml::ArticleMetadata;

/// Version tag written into every JSON report and summary.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot summarize a run with no reports")]
    EmptyRun,
    #[error("{0}: {1}")]
    Io(String, String),
    #[error("report invariant violated: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tier {
    Tier1,
    Tier2,
    Tier3,
}

impl Tier {
    pub fn number(self) -> u8 {
        match self {
            Tier::Tier1 => 1,
            Tier::Tier2 => 2,
            Tier::Tier3 => 3,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Tier::Tier1 => "curated sequences found",
            Tier::Tier2 => "aptamer-relevant references found, no sequence extracted",
            Tier::Tier3 => "literature sources only",
        }
    }
}

pub fn classify_tier(curated: &[CuratedSequence], leads: &[ArticleMetadata], _all_sources: &[ArticleMetadata]) -> Tier {
    if !curated.is_empty() {
        Tier::Tier1
    } else if !leads.is_empty() {
        Tier::Tier2
    } else {
        Tier::Tier3
    }
}

/// Counters collected while processing one target.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub queries_issued: u64,
    pub fetches: u64,
    pub model_calls: u64,
    pub fallbacks: u64,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetReport {
    pub format_version: u32,
    pub target_name: String,
    pub tier: Tier,
    /// Sorted by `(core, id)`.
    pub curated: Vec<CuratedSequence>,
    /// Aptamer-relevant articles without an extracted sequence, by provenance key.
    pub leads: Vec<ArticleMetadata>,
    /// Every unique article seen for the target, by provenance key.
    pub all_sources: Vec<ArticleMetadata>,
    pub run_stats: RunStats,
}

fn sort_articles(v: &mut Vec<ArticleMetadata>) {
    v.sort_by_cached_key(ArticleMetadata::provenance_key);
    v.dedup_by(|a, b| a.provenance_key() == b.provenance_key());
}

fn contains(sources: &[ArticleMetadata], a: &ArticleMetadata) -> bool {
    sources.iter().any(|s| s.same_article(a))
}

impl TargetReport {
    /// Builds a report in canonical order. Leads and curated articles missing
    /// from `all_sources` are added to it.
    pub fn new(
        target_name: &str,
        mut curated: Vec<CuratedSequence>,
        mut leads: Vec<ArticleMetadata>,
        mut all_sources: Vec<ArticleMetadata>,
        run_stats: RunStats,
    ) -> Self {
        curated.sort_by(|a, b| (&a.core, &a.id).cmp(&(&b.core, &b.id)));
        let referenced: Vec<ArticleMetadata> = leads
            .iter()
            .chain(curated.iter().flat_map(|c| c.articles.iter()))
            .cloned()
            .collect();
        for a in referenced {
            if !contains(&all_sources, &a) {
                all_sources.push(a);
            }
        }
        sort_articles(&mut leads);
        sort_articles(&mut all_sources);
        TargetReport {
            format_version: FORMAT_VERSION,
            target_name: target_name.to_string(),
            tier: classify_tier(&curated, &leads, &all_sources),
            curated,
            leads,
            all_sources,
            run_stats,
        }
    }

    /// Checks the tier rule and the subset relations.
    pub fn check(&self) -> Result<(), ReportError> {
        let expected = classify_tier(&self.curated, &self.leads, &self.all_sources);
        if self.tier != expected {
            return Err(ReportError::Invariant(format!("tier {:?} should be {expected:?}", self.tier)));
        }
        let referenced = self.leads.iter().chain(self.curated.iter().flat_map(|c| c.articles.iter()));
        for a in referenced {
            if !contains(&self.all_sources, a) {
                return Err(ReportError::Invariant(format!("{} missing from all_sources", a.provenance_key())));
            }
        }
        Ok(())
    }
}

/// Lowercase ASCII alphanumerics with every other run collapsed to one
/// hyphen, trimmed. Falls back to `"target"` when nothing is left.
pub fn slug(target: &str) -> String {
    let mut out = String::new();
    for c in target.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    let trimmed = out.trim_end_matches('-');
    if trimmed.is_empty() {
        "target".into()
    } else {
        trimmed.to_string()
    }
}


#[cfg(test)]
mod tests {
    use super::testing::report;
    use super::*;
    use crate::curate::testing::article;

    #[test]
    fn truth_table() {
        for curated in [0, 2] {
            for leads in [0, 5] {
                for sources in [0, 7] {
                    let r = report("t", curated, leads, sources);
                    let expected = match (curated > 0, leads > 0) {
                        (true, _) => Tier::Tier1,
                        (false, true) => Tier::Tier2,
                        (false, false) => Tier::Tier3,
                    };
                    assert_eq!(r.tier, expected, "{curated} {leads} {sources}");
                    r.check().unwrap();
                }
            }
        }
    }

    #[test]
    fn tier3_lists_every_source() {
        let r = report("t", 0, 0, 7);
        assert_eq!(r.tier, Tier::Tier3);
        assert_eq!(r.all_sources.len(), 7);
    }

    #[test]
    fn subsets_are_completed() {
        let r = report("t", 2, 3, 1);
        assert_eq!(r.all_sources.len(), 1 + 3 + 2);
        let mut bad = r.clone();
        bad.all_sources.retain(|a| a.pmid.as_deref() != Some("50"));
        assert!(bad.check().is_err());
        let mut wrong = r;
        wrong.tier = Tier::Tier2;
        assert!(wrong.check().is_err());
    }

    #[test]
    fn duplicate_sources_collapse() {
        let r = TargetReport::new("t", vec![], vec![article("1")], vec![article("1"), article("1")], RunStats::default());
        assert_eq!(r.all_sources.len(), 1);
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("anti-MUC1 (v2)"), "anti-muc1-v2");
        assert_eq!(slug("  Thrombin  "), "thrombin");
        assert_eq!(slug("α-thrombin"), "thrombin");
        assert_eq!(slug("()"), "target");
    }
}
