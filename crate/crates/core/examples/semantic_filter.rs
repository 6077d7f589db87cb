//! Judges candidates with the keyword heuristic, then with an in-process
//! model that answers in the verdict grammar. The model only decides; it
//! never sees its answers written back into sequence text.

use std::sync::Arc;

use aptamine::seqextract::{find_sequences, SequenceBounds};
use aptamine::semfilter::{ClassificationRequest, ModelBackend, ModelError, SemanticFilter, SemfilterConfig};

const TEXT: &str = "\
SELEX yielded the aptamer ATP-7 (ACCTGGGGGAGTATTGCGGAGGAAGGT) which bound ATP with Kd = 6 µM. \
Binding was confirmed by isothermal titration calorimetry and by a fluorescence displacement assay, \
and the folded structure was stable across the magnesium range tested in the selection buffer.

In a separate experiment, for amplification the reverse primer GCATGCATGCATGCATGCATGC was used.";

fn main() {
    let candidates = find_sequences(TEXT, SequenceBounds::default());

    let heuristic = SemanticFilter::heuristic(SemfilterConfig::default());
    let stub = |prompt: &str| -> Result<String, ModelError> {
        // Looks only at the words just before the sequence in the context.
        let field = |name: &str| prompt.split(name).nth(1).and_then(|r| r.lines().next()).unwrap_or_default().trim().to_string();
        let sequence = field("Sequence:");
        let context = prompt.split("Context:").nth(1).unwrap_or_default();
        let at = context.find(&sequence).unwrap_or(0);
        let primer = context[context.floor_char_boundary(at.saturating_sub(40))..at].contains("primer");
        Ok(format!(
            "is_aptamer={}; matches_target=yes; confidence=0.85; rationale=stub model",
            if primer { "no" } else { "yes" }
        ))
    };
    let model: Arc<dyn ModelBackend> = Arc::new(stub);
    let with_model = SemanticFilter::with_model(SemfilterConfig::default(), model);

    for c in &candidates {
        let req = ClassificationRequest::for_candidate(c, None, "ATP");
        for (name, filter) in [("heuristic", &heuristic), ("model", &with_model)] {
            let j = filter.judge(&req);
            println!(
                "{:<10} {} keep={} confidence={} backend={} ({})",
                name, c.core, j.keep, j.confidence, j.verdict_backend, j.rationale
            );
        }
    }
    let m = with_model.metrics();
    println!("model metrics: {m:?}");
}
