//! Escalating literature query plans.
//!
//! A plan runs sequence-specific queries (papers likely to print a sequence)
//! before broad fallback queries (exhaustive coverage). Query construction is
//! a pure function of the target name and [`QueryConfig`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fielded terms that signal a paper is likely to print a sequence.
pub const DEFAULT_SIGNAL_TERMS: [&str; 3] = [
    "sequence[Title/Abstract]",
    "5'-[Title/Abstract]",
    "oligonucleotide[Title/Abstract]",
];

/// Terms appended to the target for broad fallback queries.
pub const DEFAULT_FALLBACK_TERMS: [&str; 3] = ["aptamer", "SELEX", "nucleic acid"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("target name is empty")]
    EmptyTarget,
    #[error("invalid query configuration: {0}")]
    InvalidConfig(String),
}

/// Query templates, overridable from the `[queries]` config section.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct QueryConfig {
    pub signal_terms: Vec<String>,
    pub fallback_terms: Vec<String>,
}

impl Default for QueryConfig {
    fn default() -> Self {
        Self {
            signal_terms: DEFAULT_SIGNAL_TERMS.iter().map(|s| s.to_string()).collect(),
            fallback_terms: DEFAULT_FALLBACK_TERMS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl QueryConfig {
    pub fn validate(&self) -> Result<(), QueryError> {
        if self.signal_terms.iter().all(|t| t.trim().is_empty()) {
            return Err(QueryError::InvalidConfig("no sequence signal terms".into()));
        }
        if self.fallback_terms.iter().all(|t| t.trim().is_empty()) {
            return Err(QueryError::InvalidConfig("no fallback terms".into()));
        }
        for fallback in &self.fallback_terms {
            if let Some(signal) = self.signal_terms.iter().find(|s| fallback.contains(s.as_str())) {
                return Err(QueryError::InvalidConfig(format!(
                    "fallback term {fallback:?} contains signal term {signal:?}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StageLabel {
    SequenceSpecific,
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuerySource {
    PubMed,
    Pmc,
    BioRxiv,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryStage {
    pub label: StageLabel,
    pub source: QuerySource,
    pub queries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryPlan {
    pub target_name: String,
    pub stages: Vec<QueryStage>,
}

/// Removes E-utilities metacharacters (quotes, brackets) and collapses
/// whitespace.
pub fn sanitize_target(target_name: &str) -> Result<String, QueryError> {
    let cleaned: String = target_name
        .chars()
        .filter(|c| !matches!(c, '"' | '[' | ']'))
        .collect();
    let collapsed = cleaned.split_whitespace().collect::<Vec<_>>().join(" ");
    if collapsed.is_empty() {
        Err(QueryError::EmptyTarget)
    } else {
        Ok(collapsed)
    }
}

fn is_bare_term(name: &str) -> bool {
    name.chars().all(|c| c.is_alphanumeric() || c == '-')
}

/// `"target" AND aptamer AND <signal>` for every signal term, in config order.
pub fn build_sequence_queries(
    target_name: &str,
    config: &QueryConfig,
) -> Result<Vec<String>, QueryError> {
    let name = sanitize_target(target_name)?;
    Ok(config
        .signal_terms
        .iter()
        .filter(|t| !t.trim().is_empty())
        .map(|term| format!("\"{name}\" AND aptamer AND {}", term.trim()))
        .collect())
}

/// `target <term>` for every fallback term. Multi-word or punctuated names are
/// quoted so they stay a single phrase.
pub fn build_fallback_queries(
    target_name: &str,
    config: &QueryConfig,
) -> Result<Vec<String>, QueryError> {
    let name = sanitize_target(target_name)?;
    let name = if is_bare_term(&name) { name } else { format!("\"{name}\"") };
    Ok(config
        .fallback_terms
        .iter()
        .filter(|t| !t.trim().is_empty())
        .map(|term| format!("{name} {}", term.trim()))
        .collect())
}

/// Five stages: sequence-specific PubMed and PMC, then fallback PubMed, PMC
/// and bioRxiv.
pub fn make_plan(target_name: &str, config: &QueryConfig) -> Result<QueryPlan, QueryError> {
    let specific = build_sequence_queries(target_name, config)?;
    let fallback = build_fallback_queries(target_name, config)?;
    let stage = |label, source, queries: &Vec<String>| QueryStage {
        label,
        source,
        queries: queries.clone(),
    };
    Ok(QueryPlan {
        target_name: target_name.trim().to_string(),
        stages: vec![
            stage(StageLabel::SequenceSpecific, QuerySource::PubMed, &specific),
            stage(StageLabel::SequenceSpecific, QuerySource::Pmc, &specific),
            stage(StageLabel::Fallback, QuerySource::PubMed, &fallback),
            stage(StageLabel::Fallback, QuerySource::Pmc, &fallback),
            stage(StageLabel::Fallback, QuerySource::BioRxiv, &fallback),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg() -> QueryConfig {
        QueryConfig::default()
    }

    #[test]
    fn thrombin_has_oligonucleotide_query() {
        let qs = build_sequence_queries("thrombin", &cfg()).unwrap();
        assert!(qs.iter().any(|q| q.contains("thrombin")
            && q.contains("aptamer")
            && q.contains("oligonucleotide[Title/Abstract]")));
    }

    #[test]
    fn blank_target_rejected() {
        assert_eq!(build_sequence_queries("  ", &cfg()), Err(QueryError::EmptyTarget));
        assert_eq!(build_fallback_queries("", &cfg()), Err(QueryError::EmptyTarget));
        assert_eq!(make_plan("\t", &cfg()), Err(QueryError::EmptyTarget));
        assert_eq!(make_plan("\"[]\"", &cfg()), Err(QueryError::EmptyTarget));
    }

    #[test]
    fn atp_has_three_queries() {
        let qs = build_sequence_queries("ATP", &cfg()).unwrap();
        assert_eq!(qs.len(), 3);
        assert!(qs.iter().all(|q| q.contains("ATP")));
        assert_eq!(qs[0], "\"ATP\" AND aptamer AND sequence[Title/Abstract]");
    }

    #[test]
    fn fallback_templates() {
        let qs = build_fallback_queries("lysozyme", &cfg()).unwrap();
        assert!(qs.contains(&"lysozyme aptamer".to_string()));
        let qs = build_fallback_queries("thrombin", &cfg()).unwrap();
        assert!(qs.iter().all(|q| !q.contains("[Title/Abstract]")));
        let qs = build_fallback_queries("IgE", &cfg()).unwrap();
        assert_eq!(qs, vec!["IgE aptamer", "IgE SELEX", "IgE nucleic acid"]);
    }

    #[test]
    fn metacharacters_are_neutralized() {
        let qs = build_sequence_queries("anti-[MUC1] \"v2\"", &cfg()).unwrap();
        assert!(qs[0].starts_with("\"anti-MUC1 v2\" AND"));
        let qs = build_fallback_queries("anti-MUC1 (v2)", &cfg()).unwrap();
        assert_eq!(qs[0], "\"anti-MUC1 (v2)\" aptamer");
    }

    #[test]
    fn plan_shape() {
        let plan = make_plan("thrombin", &cfg()).unwrap();
        assert_eq!(plan.stages.len(), 5);
        assert_eq!(plan.stages[0].label, StageLabel::SequenceSpecific);
        let last = plan.stages.last().unwrap();
        assert_eq!(last.source, QuerySource::BioRxiv);
        assert_eq!(last.label, StageLabel::Fallback);
    }

    #[test]
    fn config_rejects_signal_terms_in_fallback() {
        let mut c = cfg();
        c.fallback_terms.push("aptamer sequence[Title/Abstract]".into());
        assert!(matches!(c.validate(), Err(QueryError::InvalidConfig(_))));
        assert!(cfg().validate().is_ok());
    }

    proptest! {
        #[test]
        fn plan_invariants(target in "[A-Za-z0-9 ()\\-\\[\\]\"]{1,30}") {
            let c = cfg();
            match make_plan(&target, &c) {
                Err(QueryError::EmptyTarget) => prop_assert!(sanitize_target(&target).is_err()),
                Err(e) => prop_assert!(false, "unexpected {e}"),
                Ok(plan) => {
                    prop_assert_eq!(&plan, &make_plan(&target, &c).unwrap());
                    let name = sanitize_target(&target).unwrap();
                    let first_fallback = plan.stages.iter().position(|s| s.label == StageLabel::Fallback).unwrap();
                    prop_assert!(plan.stages[..first_fallback].iter().all(|s| s.label == StageLabel::SequenceSpecific));
                    prop_assert!(plan.stages[first_fallback..].iter().all(|s| s.label == StageLabel::Fallback));
                    for stage in &plan.stages {
                        prop_assert!(!stage.queries.is_empty());
                        for q in &stage.queries {
                            prop_assert!(!q.is_empty());
                            let has_signal = c.signal_terms.iter().any(|t| q.contains(t.as_str()));
                            match stage.label {
                                StageLabel::SequenceSpecific => {
                                    let quoted = format!("\"{}\"", name);
                                    prop_assert!(q.contains(&quoted));
                                    prop_assert!(has_signal);
                                }
                                StageLabel::Fallback => prop_assert!(!has_signal),
                            }
                        }
                    }
                }
            }
        }
    }
}
