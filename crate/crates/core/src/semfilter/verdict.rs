use std::sync::LazyLock;

use regex::Regex;
use rust_decimal::Decimal;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("model output does not follow the verdict grammar: {0}")]
pub struct ParseFailure(pub String);

/// Fields of one `is_aptamer=..; matches_target=..; confidence=..;
/// rationale=..` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedVerdict {
    pub is_aptamer: bool,
    pub matches_target: bool,
    pub confidence: Decimal,
    pub rationale: String,
    /// The written confidence lay outside [0, 1] and was clamped.
    pub clamped: bool,
}

static VERDICT_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"^is_aptamer=(yes|no);\s*matches_target=(yes|no);\s*confidence=(-?(?:\d+(?:\.\d+)?|\.\d+));\s*rationale=(.*)$",
    )
    .expect("verdict pattern")
});

static SEQUENCE_RUN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)[ACGTU](?:-?[ACGTU]){9,}").expect("run pattern"));

/// Replaces nucleotide runs of ten or more bases so verdicts never carry
/// sequence text.
pub fn redact_sequences(text: &str) -> String {
    SEQUENCE_RUN.replace_all(text, "[sequence]").into_owned()
}

pub fn parse_verdict(model_output: &str) -> Result<ParsedVerdict, ParseFailure> {
    let line = model_output.trim();
    if line.contains('\n') {
        return Err(ParseFailure("more than one line".into()));
    }
    let caps = VERDICT_RE
        .captures(line)
        .ok_or_else(|| ParseFailure(crate::curate::truncate_chars(line, 80).to_string()))?;
    let raw: Decimal = caps[3]
        .parse()
        .map_err(|_| ParseFailure(format!("confidence {:?}", &caps[3])))?;
    let confidence = raw.clamp(Decimal::ZERO, Decimal::ONE);
    let clamped = confidence != raw;
    if clamped {
        tracing::warn!(written = %raw, "model confidence outside [0, 1], clamped");
    }
    Ok(ParsedVerdict {
        is_aptamer: &caps[1] == "yes",
        matches_target: &caps[2] == "yes",
        confidence,
        rationale: redact_sequences(caps[4].trim()),
        clamped,
    })
}
