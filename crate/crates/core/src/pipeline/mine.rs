use chrono::{DateTime, Utc};
use rust_decimal::Decimal;

use crate::curate::{CurateConfig, CuratedSequence};
use crate::metadataxml::ArticleMetadata;
use crate::semfilter::{Backend, ClassificationRequest, SemanticFilter};
use crate::seqextract::{extract_affinities, extract_conditions, find_sequences, SequenceBounds};

/// Result of scanning one text.
#[derive(Debug, Default)]
pub(crate) struct Mined {
    pub kept: Vec<CuratedSequence>,
    pub candidates: usize,
    pub model_calls: u64,
    pub fallbacks: u64,
}

/// Extraction plus classification for one text. Deterministic except for
/// what the model backend returns.
pub(crate) struct Miner<'a> {
    pub filter: &'a SemanticFilter,
    pub bounds: SequenceBounds,
    pub curate: &'a CurateConfig,
    pub created_at: DateTime<Utc>,
    pub model_name: &'a str,
}

impl Miner<'_> {
    /// With a target, candidates must pass both judgments; without one
    /// (`target` empty) only the aptamer judgment applies.
    pub fn mine(
        &self,
        text: &str,
        abstract_text: Option<&str>,
        target: &str,
        article: &ArticleMetadata,
        source_doc: Option<&str>,
    ) -> Mined {
        let mut out = Mined::default();
        for mut cand in find_sequences(text, self.bounds) {
            out.candidates += 1;
            cand.source_doc = source_doc.map(String::from);
            let req = ClassificationRequest::for_candidate(&cand, abstract_text, target);
            let (keep, confidence, backend) = if target.trim().is_empty() {
                let v = self.filter.classify_candidate(&req);
                if self.filter.uses_model() {
                    out.model_calls += 1;
                    out.fallbacks += u64::from(v.backend == Backend::Heuristic);
                }
                let backend = match v.backend {
                    Backend::Model => format!("model:{}", self.model_name),
                    Backend::Heuristic => "heuristic".to_string(),
                };
                (v.is_aptamer, v.confidence, backend)
            } else {
                let j = self.filter.judge(&req);
                out.model_calls += u64::from(j.model_calls);
                out.fallbacks += u64::from(j.fallbacks);
                (j.keep, j.confidence, j.verdict_backend)
            };
            if !keep {
                continue;
            }
            out.kept.push(self.record(&cand, target, article, source_doc, confidence, backend));
        }
        out
    }

    fn record(
        &self,
        cand: &crate::seqextract::SequenceCandidate,
        target: &str,
        article: &ArticleMetadata,
        source_doc: Option<&str>,
        confidence: Decimal,
        backend: String,
    ) -> CuratedSequence {
        let mut rec = CuratedSequence::from_candidate(cand, target, article.clone(), self.created_at, self.curate);
        rec.confidence = confidence;
        rec.verdict_backend = backend;
        rec.affinities = extract_affinities(&cand.context);
        for a in &mut rec.affinities {
            a.source_doc = source_doc.map(String::from);
        }
        let mut cond = extract_conditions(&cand.context);
        if !cond.is_empty() {
            cond.source_doc = source_doc.map(String::from);
            rec.conditions = Some(cond);
        }
        rec
    }
}
