use regex::Regex;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::ClassificationRequest;

/// Keyword rules for the offline backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeuristicConfig {
    pub negative_keywords: Vec<String>,
    pub positive_keywords: Vec<String>,
    /// Characters on each side of the candidate searched for negatives.
    pub negative_window: usize,
    pub base_confidence: Decimal,
    pub step: Decimal,
    pub cap: Decimal,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        let words = |ws: &[&str]| ws.iter().map(|s| s.to_string()).collect();
        HeuristicConfig {
            negative_keywords: words(&["primer", "forward", "reverse", "probe", "amplification", "PCR"]),
            positive_keywords: words(&["aptamer", "SELEX", "binding", "Kd", "dissociation"]),
            negative_window: 200,
            base_confidence: Decimal::new(6, 1),
            step: Decimal::new(1, 1),
            cap: Decimal::new(9, 1),
        }
    }
}

/// Keyword matcher: case-insensitive, whole word with an optional plural `s`.
pub(crate) fn keyword_re(word: &str) -> Regex {
    Regex::new(&format!(r"(?i)\b{}s?\b", regex::escape(word))).expect("escaped keyword")
}

/// Compiled form of [`HeuristicConfig`].
#[derive(Debug, Clone)]
pub struct Heuristic {
    config: HeuristicConfig,
    negatives: Vec<(String, Regex)>,
    positives: Vec<(String, Regex)>,
}

pub(crate) struct AptamerCall {
    pub is_aptamer: bool,
    pub confidence: Decimal,
    pub rationale: String,
}

fn char_floor(s: &str, i: usize) -> usize {
    let mut i = i.min(s.len());
    while !s.is_char_boundary(i) {
        i -= 1;
    }
    i
}

fn window(text: &str, start: usize, end: usize, chars: usize) -> &str {
    let start = char_floor(text, start);
    let end = char_floor(text, end).max(start);
    let lo = text[..start].char_indices().rev().nth(chars.saturating_sub(1)).map(|(i, _)| i).unwrap_or(0);
    let lo = if chars == 0 { start } else { lo };
    let hi = text[end..].char_indices().nth(chars).map(|(i, _)| end + i).unwrap_or(text.len());
    &text[lo..hi]
}

/// Case-insensitive occurrence of `name` not flanked by word characters.
pub fn mentions(text: &str, name: &str) -> bool {
    let hay = text.to_lowercase();
    let needle = name.to_lowercase();
    let is_word = |c: char| c.is_alphanumeric() || c == '_';
    hay.match_indices(&needle).any(|(i, m)| {
        !hay[..i].chars().next_back().is_some_and(is_word) && !hay[i + m.len()..].chars().next().is_some_and(is_word)
    })
}

static APTAMER_WORD: std::sync::LazyLock<Regex> =
    std::sync::LazyLock::new(|| Regex::new(r"(?i)\b(?:aptamers?|SELEX)\b").expect("static pattern"));

/// Text that names the target and talks about aptamers or SELEX. Used to
/// pick research leads among articles without an extracted sequence.
pub fn is_aptamer_reference(text: &str, target_name: &str) -> bool {
    let name = target_name.trim();
    !name.is_empty() && APTAMER_WORD.is_match(text) && mentions(text, name)
}

impl Heuristic {
    pub fn new(config: HeuristicConfig) -> Self {
        let compile = |ws: &[String]| ws.iter().map(|w| (w.clone(), keyword_re(w))).collect();
        Heuristic {
            negatives: compile(&config.negative_keywords),
            positives: compile(&config.positive_keywords),
            config,
        }
    }

    fn scaled(&self, hits: usize) -> Decimal {
        (self.config.base_confidence + self.config.step * Decimal::from(hits)).min(self.config.cap)
    }

    pub(crate) fn is_aptamer(&self, req: &ClassificationRequest) -> AptamerCall {
        let (start, end) = req
            .anchor
            .or_else(|| req.context.find(&req.core_sequence).map(|s| (s, s + req.core_sequence.len())))
            .unwrap_or((0, req.context.len()));
        let near = window(&req.context, start, end, self.config.negative_window);
        let neg: Vec<&str> = self
            .negatives
            .iter()
            .filter(|(_, re)| re.is_match(near))
            .map(|(w, _)| w.as_str())
            .collect();
        if !neg.is_empty() {
            return AptamerCall {
                is_aptamer: false,
                confidence: self.scaled(neg.len()),
                rationale: format!("reagent keywords near candidate: {}", neg.join(", ")),
            };
        }
        let abstract_text = req.abstract_text.as_deref().unwrap_or("");
        let pos: Vec<&str> = self
            .positives
            .iter()
            .filter(|(_, re)| re.is_match(&req.context) || re.is_match(abstract_text))
            .map(|(w, _)| w.as_str())
            .collect();
        if pos.is_empty() {
            return AptamerCall {
                is_aptamer: false,
                confidence: Decimal::new(5, 1),
                rationale: "no aptamer keywords in context".to_string(),
            };
        }
        AptamerCall {
            is_aptamer: true,
            confidence: self.scaled(pos.len()),
            rationale: format!("aptamer keywords: {}", pos.join(", ")),
        }
    }

    /// `(matches, confidence, rationale)`: the target as a whole word in the
    /// context, or failing that in the abstract.
    pub(crate) fn matches_target(&self, req: &ClassificationRequest) -> (bool, Decimal, String) {
        let name = req.target_name.trim();
        if name.is_empty() {
            return (false, Decimal::new(5, 1), "no target name".to_string());
        }
        if mentions(&req.context, name) {
            (true, self.scaled(1), "target named in context".to_string())
        } else if req.abstract_text.as_deref().is_some_and(|a| mentions(a, name)) {
            (true, self.config.base_confidence, "target named in abstract".to_string())
        } else {
            (false, Decimal::new(5, 1), "target not mentioned".to_string())
        }
    }
}
