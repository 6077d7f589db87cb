//! Full `ingest` then `search` on a temporary directory with no network:
//! documents are ingested, targets are resolved against the store and the
//! keyword index, and reports are written.

use aptamine::config::RunConfig;
use aptamine::pipeline::Pipeline;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let docs = dir.path().join("docs");
    std::fs::create_dir(&docs)?;
    std::fs::write(
        docs.join("thrombin.txt"),
        "Thrombin aptamers\n\nResults\nThe aptamer TBA (GGTTGGTGTGGTTGGAAAACCCCTTTT) bound thrombin with Kd = 25 nM at pH 7.4.\n",
    )?;
    std::fs::write(
        docs.join("review.md"),
        "Aptamer review\n\nIntroduction\nSeveral aptamers for VEGF have been reported but none are listed here.\n",
    )?;

    let mut config = RunConfig::default();
    config.run.targets = vec!["thrombin".into(), "VEGF".into(), "nucleolin".into()];
    config.run.pdf_dir = Some(docs);
    config.run.store_path = dir.path().join("aptamine.db");
    config.run.out_dir = dir.path().join("out");
    config.run.offline = true;

    let outcome = Pipeline::new(config)?.search()?;
    for r in &outcome.reports {
        println!(
            "{:<10} Tier{} sequences={} leads={} sources={}",
            r.target_name,
            r.tier.number(),
            r.curated.len(),
            r.leads.len(),
            r.all_sources.len()
        );
    }
    println!("hit rates {:?}", outcome.summary.hit_rates);
    for f in &outcome.files {
        println!("wrote {}", f.strip_prefix(dir.path())?.display());
    }
    Ok(())
}
