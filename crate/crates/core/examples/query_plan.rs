//! Prints the escalating query plan for a few targets.
//!
//! ```sh
//! cargo run --example query_plan -- "human IgE"
//! ```

use aptamine::querygen::{make_plan, QueryConfig};

fn main() {
    let mut targets: Vec<String> = std::env::args().skip(1).collect();
    if targets.is_empty() {
        targets = vec!["thrombin".into(), "human IgE".into(), "PDGF-BB".into()];
    }
    let config = QueryConfig::default();
    for target in &targets {
        let plan = match make_plan(target, &config) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("{target}: {e}");
                continue;
            }
        };
        println!("{}", plan.target_name);
        for stage in &plan.stages {
            println!("  {:?} / {:?}", stage.label, stage.source);
            for q in &stage.queries {
                println!("    {q}");
            }
        }
    }
}
