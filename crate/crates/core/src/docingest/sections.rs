use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SectionLabel {
    Abstract,
    Introduction,
    Methods,
    Results,
    Discussion,
    Supplement,
    Unknown,
}

/// Byte range `[start, end)` of one labeled section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSpan {
    pub label: SectionLabel,
    pub start: usize,
    pub end: usize,
}

const VOCABULARY: &[(&str, SectionLabel)] = &[
    ("abstract", SectionLabel::Abstract),
    ("summary", SectionLabel::Abstract),
    ("introduction", SectionLabel::Introduction),
    ("background", SectionLabel::Introduction),
    ("methods", SectionLabel::Methods),
    ("method", SectionLabel::Methods),
    ("materials and methods", SectionLabel::Methods),
    ("methods and materials", SectionLabel::Methods),
    ("experimental", SectionLabel::Methods),
    ("experimental section", SectionLabel::Methods),
    ("experimental procedures", SectionLabel::Methods),
    ("results", SectionLabel::Results),
    ("discussion", SectionLabel::Discussion),
    ("conclusion", SectionLabel::Discussion),
    ("conclusions", SectionLabel::Discussion),
    ("supplementary material", SectionLabel::Supplement),
    ("supplementary materials", SectionLabel::Supplement),
    ("supplementary information", SectionLabel::Supplement),
    ("supplementary data", SectionLabel::Supplement),
    ("supporting information", SectionLabel::Supplement),
    ("supplement", SectionLabel::Supplement),
    ("appendix", SectionLabel::Supplement),
];

static HEADING_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^\s*(?:#{1,6}\s*)?(?:(?:\d+(?:\.\d+)*|[IVX]+)[.)]?\s+)?([A-Za-z][A-Za-z &]*?)\s*:?\s*$")
        .expect("heading pattern")
});

fn lookup(name: &str) -> Option<SectionLabel> {
    VOCABULARY.iter().find(|(n, _)| *n == name).map(|(_, l)| *l)
}

/// Label for a heading line, if it is one. Compound headings such as
/// "Results and Discussion" take the first canonical part.
pub fn heading_label(line: &str) -> Option<SectionLabel> {
    if line.len() > 80 {
        return None;
    }
    let caps = HEADING_RE.captures(line)?;
    let name = caps[1].split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    lookup(&name).or_else(|| {
        name.split(" and ")
            .flat_map(|p| p.split(" & "))
            .map(str::trim)
            .find_map(lookup)
    })
}

/// Splits `text` at heading lines. Text before the first heading becomes an
/// `Unknown` span; spans are contiguous, ordered and cover the whole text.
pub fn label_sections(text: &str) -> Vec<LabeledSpan> {
    let mut spans: Vec<LabeledSpan> = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if let Some(label) = heading_label(line.trim_end_matches(['\n', '\r'])) {
            match spans.last_mut() {
                Some(last) => last.end = offset,
                None if text[..offset].trim().is_empty() => {}
                None => spans.push(LabeledSpan {
                    label: SectionLabel::Unknown,
                    start: 0,
                    end: offset,
                }),
            }
            let start = if spans.is_empty() { 0 } else { offset };
            spans.push(LabeledSpan {
                label,
                start,
                end: text.len(),
            });
        }
        offset += line.len();
    }
    if spans.is_empty() {
        spans.push(LabeledSpan {
            label: SectionLabel::Unknown,
            start: 0,
            end: text.len(),
        });
    }
    spans
}

/// Label of the span containing byte `pos`.
pub fn label_at(spans: &[LabeledSpan], pos: usize) -> SectionLabel {
    spans
        .iter()
        .rev()
        .find(|s| s.start <= pos)
        .map(|s| s.label)
        .unwrap_or(SectionLabel::Unknown)
}
