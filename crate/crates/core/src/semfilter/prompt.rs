use std::path::Path;

use thiserror::Error;

use super::ClassificationRequest;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("unknown prompt template {0:?}")]
    UnknownTemplate(String),
    #[error("template {template:?} lacks placeholder {placeholder}")]
    MissingPlaceholder { template: String, placeholder: &'static str },
    #[error("template {0:?} could not be read: {1}")]
    Unreadable(String, String),
}

pub const PLACEHOLDERS: [&str; 4] = ["{sequence}", "{context}", "{abstract}", "{target}"];

pub const TEMPLATE_NAMES: [&str; 2] = ["classify_candidate", "verify_target"];

const CLASSIFY_CANDIDATE: &str = "\
You review nucleotide sequences found in scientific articles.
Decide whether the sequence below is a functional aptamer (a binding \
sequence selected against a target) or an unrelated reagent such as a PCR \
primer, probe or adapter. Judge only from the text provided.

Sequence: {sequence}
Queried target: {target}

Context:
{context}

Abstract:
{abstract}

Answer with exactly one line and nothing else:
is_aptamer=<yes|no>; matches_target=<yes|no>; confidence=<0.00-1.00>; rationale=<short reason without sequences>
";

const VERIFY_TARGET: &str = "\
You check target assignments for aptamer sequences found in scientific \
articles. Decide whether the text states that the sequence below binds the \
queried target, rather than a different molecule discussed nearby.

Sequence: {sequence}
Queried target: {target}

Context:
{context}

Abstract:
{abstract}

Answer with exactly one line and nothing else:
is_aptamer=<yes|no>; matches_target=<yes|no>; confidence=<0.00-1.00>; rationale=<short reason without sequences>
";

fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "classify_candidate" => Some(CLASSIFY_CANDIDATE),
        "verify_target" => Some(VERIFY_TARGET),
        _ => None,
    }
}

/// Template text: `{dir}/{name}.txt` when present, else the built-in.
pub fn load_template(name: &str, dir: Option<&Path>) -> Result<String, PromptError> {
    let Some(fallback) = builtin(name) else {
        return Err(PromptError::UnknownTemplate(name.to_string()));
    };
    let text = match dir.map(|d| d.join(format!("{name}.txt"))) {
        Some(p) if p.is_file() => {
            std::fs::read_to_string(&p).map_err(|e| PromptError::Unreadable(name.to_string(), e.to_string()))?
        }
        _ => fallback.to_string(),
    };
    for placeholder in PLACEHOLDERS {
        if !text.contains(placeholder) {
            return Err(PromptError::MissingPlaceholder {
                template: name.to_string(),
                placeholder,
            });
        }
    }
    Ok(text)
}

/// Single-pass substitution, so placeholder-like text inside the request is
/// never expanded again.
pub fn substitute(template: &str, req: &ClassificationRequest) -> String {
    let mut out = String::with_capacity(template.len() + req.context.len() + 256);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let tail = &rest[open..];
        let value = PLACEHOLDERS.iter().find(|p| tail.starts_with(**p)).map(|p| {
            let v = match *p {
                "{sequence}" => req.core_sequence.as_str(),
                "{context}" => req.context.as_str(),
                "{abstract}" => req.abstract_text.as_deref().unwrap_or("(none)"),
                _ => req.target_name.as_str(),
            };
            (p.len(), v)
        });
        match value {
            Some((len, v)) => {
                out.push_str(v);
                rest = &tail[len..];
            }
            None => {
                out.push('{');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

pub fn render_prompt(template_name: &str, req: &ClassificationRequest, dir: Option<&Path>) -> Result<String, PromptError> {
    Ok(substitute(&load_template(template_name, dir)?, req))
}
