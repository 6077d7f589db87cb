//! Nucleotide run detection.
//!
//! Text is split into words on whitespace and hyphens. Words made only of
//! bases (plus `*code` modifications) are nucleotide words; consecutive
//! nucleotide words are joined into one run when the gap between them is a
//! plain wrap (at most one line break and one hyphen, no punctuation) and the
//! words look like sequence fragments rather than prose (see
//! [`can_join`]). Orientation markers and `^LABEL` decorations directly
//! attached to a run become part of its raw text.

use super::context::context_window_range;
use super::modifications::{parse_modifications, star_code_len};
use super::{is_nucleotide, is_prime, is_separator, Orientation, SequenceBounds, SequenceCandidate, Span};

const LEADING_PUNCT: &[char] = &['(', '[', '{', '<', '"', '\u{201c}', '\u{2018}'];
const TRAILING_PUNCT: &[char] = &[
    '.', ',', ';', ':', '!', '?', ')', ']', '}', '>', '"', '\u{201d}',
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Nucleotide,
    Marker,
    Label,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Case {
    Upper,
    Lower,
    Mixed,
}

#[derive(Debug)]
struct Word {
    /// Bounds of the whole word including punctuation.
    outer: (usize, usize),
    /// Bounds after punctuation stripping.
    start: usize,
    end: usize,
    lead_punct: bool,
    trail_punct: bool,
    kind: Kind,
    letters: usize,
    case: Case,
}

fn classify(w: &str) -> (Kind, usize, Case) {
    let mut chars = w.chars();
    if let (Some(d), Some(p), None) = (chars.next(), chars.next(), chars.next()) {
        if (d == '5' || d == '3') && is_prime(p) {
            return (Kind::Marker, 0, Case::Mixed);
        }
    }
    if let Some(rest) = w.strip_prefix('^') {
        if !rest.is_empty() && rest.chars().all(|c| c.is_ascii_alphanumeric()) {
            return (Kind::Label, 0, Case::Mixed);
        }
        return (Kind::Other, 0, Case::Mixed);
    }
    let (mut upper, mut lower) = (0usize, 0usize);
    let mut i = 0;
    while i < w.len() {
        let c = w[i..].chars().next().unwrap();
        if is_nucleotide(c) {
            if c.is_ascii_uppercase() {
                upper += 1;
            } else {
                lower += 1;
            }
            i += 1;
        } else if let Some(n) = star_code_len(&w[i..]) {
            i += n;
        } else {
            return (Kind::Other, 0, Case::Mixed);
        }
    }
    let letters = upper + lower;
    if letters == 0 {
        return (Kind::Other, 0, Case::Mixed);
    }
    let case = match (upper, lower) {
        (_, 0) => Case::Upper,
        (0, _) => Case::Lower,
        _ => Case::Mixed,
    };
    (Kind::Nucleotide, letters, case)
}

fn words(text: &str) -> Vec<Word> {
    let mut out = Vec::new();
    let mut iter = text.char_indices().peekable();
    while let Some(&(start, c)) = iter.peek() {
        if is_separator(c) {
            iter.next();
            continue;
        }
        let mut end = start;
        while let Some(&(i, c)) = iter.peek() {
            if is_separator(c) {
                break;
            }
            end = i + c.len_utf8();
            iter.next();
        }
        let outer = &text[start..end];
        let stripped_lead = outer.trim_start_matches(LEADING_PUNCT);
        let mut stripped = stripped_lead.trim_end_matches(TRAILING_PUNCT);
        // a trailing quote is punctuation unless it is a prime marker like 5'
        if stripped.ends_with(is_prime) && classify(stripped).0 != Kind::Marker {
            stripped = stripped.trim_end_matches(is_prime).trim_end_matches(TRAILING_PUNCT);
        }
        let s = start + (outer.len() - stripped_lead.len());
        let e = s + stripped.len();
        let (kind, letters, case) = if stripped.is_empty() {
            (Kind::Other, 0, Case::Mixed)
        } else {
            classify(stripped)
        };
        out.push(Word {
            outer: (start, end),
            start: s,
            end: e,
            lead_punct: s > start,
            trail_punct: e < end,
            kind,
            letters,
            case,
        });
    }
    out
}

/// Whether the gap between two adjacent words is a plain wrap.
fn soft_gap(text: &str, a: &Word, b: &Word) -> bool {
    if a.trail_punct || b.lead_punct {
        return false;
    }
    let gap = &text[a.outer.1..b.outer.0];
    let newlines = gap.matches('\n').count();
    let hyphens = gap.chars().filter(|&c| c != '\n' && !c.is_whitespace()).count();
    newlines <= 1 && hyphens <= 1
}

fn gap_has_newline(text: &str, a: &Word, b: &Word) -> bool {
    text[a.outer.1..b.outer.0].contains('\n')
}

fn gap_has_hyphen(text: &str, a: &Word, b: &Word) -> bool {
    text[a.outer.1..b.outer.0].chars().any(|c| !c.is_whitespace())
}

/// Joining rule for two nucleotide words separated by a soft gap. Rejects
/// joins that would glue ordinary prose words (`a`, `at`, `cat`) onto a
/// sequence, and joins between an all-uppercase and an all-lowercase word.
/// A single uppercase base may close a run of grouped blocks (`... CTTC C`).
fn can_join(a: &Word, b: &Word) -> bool {
    let short_lower = |w: &Word| w.case == Case::Lower && w.letters < 4;
    let closing_base = b.letters == 1 && b.case == Case::Upper && a.case == Case::Upper && a.letters >= 3;
    if a.letters < 2 || (b.letters < 2 && !closing_base) || short_lower(a) || short_lower(b) {
        return false;
    }
    !matches!((a.case, b.case), (Case::Upper, Case::Lower) | (Case::Lower, Case::Upper))
}

/// Finds maximal nucleotide runs whose base count lies within `bounds`.
///
/// Runs mixing T and U are rejected. Candidates whose decorations cannot be
/// parsed are kept with `decoration_issue` set.
pub fn find_sequences(text: &str, bounds: SequenceBounds) -> Vec<SequenceCandidate> {
    let ws = words(text);
    let mut used = vec![false; ws.len()];
    let mut out = Vec::new();
    let mut i = 0;
    while i < ws.len() {
        if used[i] || ws[i].kind != Kind::Nucleotide {
            i += 1;
            continue;
        }
        let mut last = i;
        while last + 1 < ws.len()
            && ws[last + 1].kind == Kind::Nucleotide
            && soft_gap(text, &ws[last], &ws[last + 1])
            && can_join(&ws[last], &ws[last + 1])
        {
            last += 1;
        }
        let run_start = i;
        let was_joined = last > i;
        let letters: usize = ws[i..=last].iter().map(|w| w.letters).sum();

        let mut first = i;
        while first > 0 && ws[first].kind != Kind::Marker {
            let prev = &ws[first - 1];
            let attachable = !used[first - 1]
                && soft_gap(text, prev, &ws[first])
                && !gap_has_newline(text, prev, &ws[first])
                && match prev.kind {
                    Kind::Marker => true,
                    Kind::Label => gap_has_hyphen(text, prev, &ws[first]),
                    _ => false,
                };
            if !attachable {
                break;
            }
            first -= 1;
        }
        let mut end_word = last;
        while end_word + 1 < ws.len() && ws[end_word].kind != Kind::Marker {
            let next = &ws[end_word + 1];
            let attachable = soft_gap(text, &ws[end_word], next)
                && !gap_has_newline(text, &ws[end_word], next)
                && match next.kind {
                    Kind::Marker => true,
                    Kind::Label => gap_has_hyphen(text, &ws[end_word], next),
                    _ => false,
                };
            if !attachable {
                break;
            }
            end_word += 1;
        }
        for u in used.iter_mut().take(end_word + 1).skip(first) {
            *u = true;
        }
        i = end_word + 1;

        if !bounds.contains(letters) {
            continue;
        }
        let span = Span::new(ws[first].start, ws[end_word].end);
        let raw = &text[span.start..span.end];
        let (core, modifications, orientation, decoration_issue) = match parse_modifications(raw) {
            Ok(p) => (p.core, p.modifications, p.orientation, None),
            Err(e) => {
                let letters_only: String = ws[run_start..=last]
                    .iter()
                    .flat_map(|w| text[w.start..w.end].chars())
                    .filter(|c| is_nucleotide(*c))
                    .map(|c| c.to_ascii_uppercase())
                    .collect();
                (letters_only, Vec::new(), Orientation::Unmarked, Some(e.to_string()))
            }
        };
        if core.contains('T') && core.contains('U') {
            continue;
        }
        let (cs, ce) = context_window_range(text, span);
        out.push(SequenceCandidate {
            raw: raw.to_string(),
            core,
            modifications,
            orientation,
            orientation_normalized: false,
            span,
            context: text[cs..ce].to_string(),
            context_start: cs,
            was_joined,
            decoration_issue,
            source_doc: None,
        });
    }
    out
}
