//! Semantic judgments on sequence candidates: "is this an aptamer?" and
//! "does it bind the queried target?".
//!
//! A language model answers through a fixed one-line grammar; whenever the
//! model is absent, unreachable or off-grammar, the keyword heuristic answers
//! instead with confidence capped at 0.5. Verdicts never contain sequence
//! text, so nothing the model writes can re-enter curation.

mod heuristic;
mod model;
mod prompt;
mod verdict;

pub use heuristic::{is_aptamer_reference, mentions, Heuristic, HeuristicConfig};
pub use model::{response_text, HttpModel, ModelBackend, ModelError};
pub use prompt::{load_template, render_prompt, substitute, PromptError, PLACEHOLDERS, TEMPLATE_NAMES};
pub use verdict::{parse_verdict, redact_sequences, ParseFailure, ParsedVerdict};

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::seqextract::SequenceCandidate;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRequest {
    pub core_sequence: String,
    pub context: String,
    #[serde(rename = "abstract")]
    pub abstract_text: Option<String>,
    pub target_name: String,
    /// Byte range of the candidate inside `context`, when known.
    pub anchor: Option<(usize, usize)>,
}

impl ClassificationRequest {
    pub fn new(core: &str, context: &str, abstract_text: Option<String>, target_name: &str) -> Self {
        ClassificationRequest {
            core_sequence: core.to_string(),
            context: context.to_string(),
            abstract_text,
            target_name: target_name.to_string(),
            anchor: None,
        }
    }

    pub fn for_candidate(c: &SequenceCandidate, abstract_text: Option<&str>, target_name: &str) -> Self {
        ClassificationRequest {
            core_sequence: c.core.to_uppercase(),
            context: c.context.clone(),
            abstract_text: abstract_text.map(str::to_string),
            target_name: target_name.to_string(),
            anchor: c.anchor_in_context(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Backend {
    Model,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationVerdict {
    pub is_aptamer: bool,
    pub matches_target: bool,
    pub confidence: Decimal,
    pub rationale: String,
    pub backend: Backend,
}

/// Outcome of both judgments for one candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgement {
    pub keep: bool,
    pub is_aptamer: bool,
    pub matches_target: bool,
    /// Lower of the two verdict confidences.
    pub confidence: Decimal,
    /// `"heuristic"` if any verdict came from the heuristic, else
    /// `"model:<name>"`.
    pub verdict_backend: String,
    pub rationale: String,
    /// Model requests made for this judgement.
    pub model_calls: u32,
    /// Verdicts that fell back to the heuristic although a model is configured.
    pub fallbacks: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SemfilterConfig {
    /// Completion endpoint; unset means heuristic only.
    pub endpoint: Option<String>,
    pub model: String,
    pub max_concurrent: usize,
    pub timeout_s: u64,
    pub max_tokens: u32,
    /// Directory of `{template}.txt` files overriding the built-ins.
    pub template_dir: Option<PathBuf>,
    pub heuristic: HeuristicConfig,
}

impl Default for SemfilterConfig {
    fn default() -> Self {
        SemfilterConfig {
            endpoint: None,
            model: "llama3.2:1b".to_string(),
            max_concurrent: 1,
            timeout_s: 60,
            max_tokens: 128,
            template_dir: None,
            heuristic: HeuristicConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterMetrics {
    pub model_calls: u64,
    pub transport_failures: u64,
    pub parse_failures: u64,
    pub heuristic_verdicts: u64,
}

#[derive(Default)]
struct Counters {
    model_calls: AtomicU64,
    transport_failures: AtomicU64,
    parse_failures: AtomicU64,
    heuristic_verdicts: AtomicU64,
}

struct Slots {
    free: Mutex<usize>,
    cv: Condvar,
}

struct SlotGuard<'a>(&'a Slots);

impl Slots {
    fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock().expect("slot lock");
        while *free == 0 {
            free = self.cv.wait(free).expect("slot lock");
        }
        *free -= 1;
        SlotGuard(self)
    }
}

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("slot lock") += 1;
        self.0.cv.notify_one();
    }
}

const FALLBACK_CAP: Decimal = Decimal::from_parts(5, 0, 0, false, 1);

pub struct SemanticFilter {
    config: SemfilterConfig,
    heuristic: Heuristic,
    model: Option<Arc<dyn ModelBackend>>,
    slots: Slots,
    counters: Counters,
}

impl SemanticFilter {
    pub fn heuristic(config: SemfilterConfig) -> Self {
        Self::build(config, None)
    }

    pub fn with_model(config: SemfilterConfig, model: Arc<dyn ModelBackend>) -> Self {
        Self::build(config, Some(model))
    }

    /// HTTP model when `endpoint` is set, heuristic otherwise.
    pub fn from_config(config: SemfilterConfig) -> Self {
        let model = config.endpoint.as_deref().map(|e| {
            Arc::new(HttpModel::new(e, &config.model, Duration::from_secs(config.timeout_s), config.max_tokens))
                as Arc<dyn ModelBackend>
        });
        Self::build(config, model)
    }

    fn build(config: SemfilterConfig, model: Option<Arc<dyn ModelBackend>>) -> Self {
        SemanticFilter {
            heuristic: Heuristic::new(config.heuristic.clone()),
            slots: Slots {
                free: Mutex::new(config.max_concurrent.max(1)),
                cv: Condvar::new(),
            },
            config,
            model,
            counters: Counters::default(),
        }
    }

    pub fn uses_model(&self) -> bool {
        self.model.is_some()
    }

    pub fn metrics(&self) -> FilterMetrics {
        FilterMetrics {
            model_calls: self.counters.model_calls.load(Ordering::Relaxed),
            transport_failures: self.counters.transport_failures.load(Ordering::Relaxed),
            parse_failures: self.counters.parse_failures.load(Ordering::Relaxed),
            heuristic_verdicts: self.counters.heuristic_verdicts.load(Ordering::Relaxed),
        }
    }

    fn heuristic_verdict(&self, req: &ClassificationRequest, target_focus: bool) -> ClassificationVerdict {
        self.counters.heuristic_verdicts.fetch_add(1, Ordering::Relaxed);
        let apt = self.heuristic.is_aptamer(req);
        let (matches, tconf, trationale) = self.heuristic.matches_target(req);
        let (confidence, rationale) = if target_focus {
            (tconf, trationale)
        } else {
            (apt.confidence, apt.rationale)
        };
        ClassificationVerdict {
            is_aptamer: apt.is_aptamer,
            matches_target: matches,
            confidence,
            rationale,
            backend: Backend::Heuristic,
        }
    }

    fn ask_model(&self, template: &str, req: &ClassificationRequest) -> Option<ClassificationVerdict> {
        let model = self.model.as_ref()?;
        let prompt = match render_prompt(template, req, self.config.template_dir.as_deref()) {
            Ok(p) => p,
            Err(e) => {
                tracing::warn!(error = %e, "prompt rendering failed, using heuristic");
                return None;
            }
        };
        self.counters.model_calls.fetch_add(1, Ordering::Relaxed);
        let output = {
            let _slot = self.slots.acquire();
            model.generate(&prompt)
        };
        let output = match output {
            Ok(o) => o,
            Err(e) => {
                self.counters.transport_failures.fetch_add(1, Ordering::Relaxed);
                tracing::warn!(error = %e, "model call failed, using heuristic");
                return None;
            }
        };
        match parse_verdict(&output) {
            Ok(v) => Some(ClassificationVerdict {
                is_aptamer: v.is_aptamer,
                matches_target: v.matches_target,
                confidence: v.confidence,
                rationale: v.rationale,
                backend: Backend::Model,
            }),
            Err(e) => {
                self.counters.parse_failures.fetch_add(1, Ordering::Relaxed);
                tracing::warn!(error = %e, "unparseable model verdict, using heuristic");
                None
            }
        }
    }

    fn judge_with(&self, template: &str, req: &ClassificationRequest, target_focus: bool) -> ClassificationVerdict {
        if self.model.is_none() {
            return self.heuristic_verdict(req, target_focus);
        }
        self.ask_model(template, req).unwrap_or_else(|| {
            let mut v = self.heuristic_verdict(req, target_focus);
            v.confidence = v.confidence.min(FALLBACK_CAP);
            v
        })
    }

    pub fn classify_candidate(&self, req: &ClassificationRequest) -> ClassificationVerdict {
        self.judge_with("classify_candidate", req, false)
    }

    pub fn verify_target_assignment(&self, req: &ClassificationRequest) -> ClassificationVerdict {
        self.judge_with("verify_target", req, true)
    }

    /// Classifies, then verifies the target for candidates judged aptamers.
    pub fn judge(&self, req: &ClassificationRequest) -> Judgement {
        let label = |b: Backend| match b {
            Backend::Model => format!("model:{}", self.config.model),
            Backend::Heuristic => "heuristic".to_string(),
        };
        let tally = |vs: &[&ClassificationVerdict]| {
            if self.model.is_none() {
                return (0, 0);
            }
            let fallbacks = vs.iter().filter(|v| v.backend == Backend::Heuristic).count() as u32;
            (vs.len() as u32, fallbacks)
        };
        let c = self.classify_candidate(req);
        if !c.is_aptamer {
            let (model_calls, fallbacks) = tally(&[&c]);
            return Judgement {
                keep: false,
                is_aptamer: false,
                matches_target: c.matches_target,
                confidence: c.confidence,
                verdict_backend: label(c.backend),
                rationale: c.rationale,
                model_calls,
                fallbacks,
            };
        }
        let t = self.verify_target_assignment(req);
        let (model_calls, fallbacks) = tally(&[&c, &t]);
        let backend = if c.backend == Backend::Model && t.backend == Backend::Model {
            Backend::Model
        } else {
            Backend::Heuristic
        };
        Judgement {
            keep: t.matches_target,
            is_aptamer: true,
            matches_target: t.matches_target,
            confidence: c.confidence.min(t.confidence),
            verdict_backend: label(backend),
            rationale: format!("{}; {}", c.rationale, t.rationale),
            model_calls,
            fallbacks,
        }
    }
}
