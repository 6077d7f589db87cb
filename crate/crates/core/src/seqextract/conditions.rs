use std::sync::LazyLock;

use regex::Regex;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentalConditions {
    pub ph: Option<Decimal>,
    /// Degrees Celsius.
    pub temperature: Option<Decimal>,
    pub buffer: Option<String>,
    pub source_doc: Option<String>,
    /// Raw matches rejected by the range checks, e.g. `"pH 19"`.
    pub flagged: Vec<String>,
}

impl ExperimentalConditions {
    pub fn is_empty(&self) -> bool {
        self.ph.is_none() && self.temperature.is_none() && self.buffer.is_none()
    }
}

static PH_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\bpH\s*(?:of|=|:|~|≈)?\s*(\d+(?:\.\d+)?)").expect("pH pattern"));

static TEMP_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"([-−]?)(\d+(?:\.\d+)?)\s*(?:°\s*C\b|º\s*C\b|℃|degrees?\s+C(?:elsius)?\b)").expect("temperature pattern")
});

static BUFFER_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)\b(?:PBS|Tris|HEPES|phosphate|selection\s+buffer)\b").expect("buffer pattern")
});

const FRAGMENT_CAP: usize = 300;

fn sentence_around(text: &str, at: usize, end: usize) -> &str {
    let bytes = text.as_bytes();
    let is_break = |i: usize| {
        let b = bytes[i];
        b == b'\n' || b == b';' || ((b == b'.' || b == b'!' || b == b'?') && bytes.get(i + 1).is_none_or(|n| n.is_ascii_whitespace()))
    };
    let start = (0..at).rev().find(|&i| is_break(i)).map(|i| i + 1).unwrap_or(0);
    let stop = (end..bytes.len()).find(|&i| is_break(i)).unwrap_or(bytes.len());
    let mut frag = (start, stop);
    if stop - start > FRAGMENT_CAP {
        let s = text[start..at].rfind(',').map(|i| start + i + 1).unwrap_or(start);
        let e = text[end..stop].find(',').map(|i| end + i).unwrap_or(stop);
        frag = (s, e);
    }
    text[frag.0..frag.1].trim()
}

/// Picks the first in-range pH and temperature and the first buffer clause.
pub fn extract_conditions(text: &str) -> ExperimentalConditions {
    let mut out = ExperimentalConditions::default();

    for caps in PH_RE.captures_iter(text) {
        let Ok(v) = caps[1].parse::<Decimal>() else { continue };
        if (Decimal::ZERO..=Decimal::from(14)).contains(&v) {
            out.ph = Some(v);
            break;
        }
        out.flagged.push(caps[0].to_string());
    }

    for caps in TEMP_RE.captures_iter(text) {
        let whole = caps.get(0).expect("match");
        let negative = !caps[1].is_empty();
        // "4-25 °C" is a range, not minus 25.
        if negative && text[..whole.start()].chars().next_back().is_some_and(|c| c.is_ascii_digit()) {
            continue;
        }
        let Ok(mut v) = caps[2].parse::<Decimal>() else { continue };
        if negative {
            v = -v;
        }
        if (Decimal::from(-20)..=Decimal::from(120)).contains(&v) {
            out.temperature = Some(v);
            break;
        }
        out.flagged.push(whole.as_str().to_string());
    }

    if let Some(m) = BUFFER_RE.find(text) {
        out.buffer = Some(sentence_around(text, m.start(), m.end()).to_string());
    }
    out
}
