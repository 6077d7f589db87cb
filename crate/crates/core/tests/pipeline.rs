mod common;

use std::sync::Arc;

use aptamine::pipeline::Pipeline;
use aptamine::{FixedClock, Store};
use common::{mocked_config, Literature, TEN_TARGET_TIERS};

fn run(dir: &std::path::Path, workers: usize) -> (aptamine::pipeline::SearchOutcome, Arc<Literature>) {
    let lit = Arc::new(Literature::ten_targets());
    let config = mocked_config(dir, &lit.target_names(), workers);
    let outcome = Pipeline::new(config)
        .unwrap()
        .with_clock(Arc::new(FixedClock::at_unix(1_750_000_000)))
        .with_transport(lit.transport())
        .search()
        .unwrap();
    (outcome, lit)
}

#[test]
fn ten_targets_land_in_expected_tiers() {
    let dir = tempfile::tempdir().unwrap();
    let (o, lit) = run(dir.path(), 4);
    assert!(lit.requests() > 0);
    let got: Vec<(String, u8)> = o.reports.iter().map(|r| (r.target_name.clone(), r.tier.number())).collect();
    let want: Vec<(String, u8)> = TEN_TARGET_TIERS.iter().map(|(t, n)| (t.to_string(), *n)).collect();
    assert_eq!(got, want);
    assert_eq!(o.summary.tier_counts.tier1, 5);
    assert_eq!(o.summary.total_targets, 10);
    for r in &o.reports {
        r.check().unwrap();
    }
    // 10 targets x 3 formats + summary.json.
    assert_eq!(o.files.len(), 31);
    assert!(o.run_dir.join("summary.json").is_file());
    assert!(o.run_dir.join("prostate-specific-antigen.json").is_file());
}

#[test]
fn primers_are_never_curated_and_supplements_are_mined() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = run(dir.path(), 2);
    let atp = o.reports.iter().find(|r| r.target_name == "ATP").unwrap();
    assert_eq!(atp.curated.len(), 1, "{:#?}", atp.curated);
    let vegf = o.reports.iter().find(|r| r.target_name == "VEGF").unwrap();
    assert_eq!(vegf.curated.len(), 2);
    assert!(vegf.curated.iter().any(|c| c.modifications.iter().any(|m| m.code == "FAM")));
    assert!(vegf.curated.iter().any(|c| c.context_snippet.contains("0.8 µM")));
    let thrombin = o.reports.iter().find(|r| r.target_name == "thrombin").unwrap();
    assert_eq!(thrombin.curated.len(), 2);
    // TB-1 is printed in two articles and merged into one row.
    assert!(thrombin.curated.iter().any(|c| c.articles.len() == 2));
}

#[test]
fn leads_and_sources() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = run(dir.path(), 1);
    let cocaine = o.reports.iter().find(|r| r.target_name == "cocaine").unwrap();
    assert_eq!(cocaine.leads.len(), 1);
    assert_eq!(cocaine.all_sources.len(), 2);
    let strep = o.reports.iter().find(|r| r.target_name == "streptavidin").unwrap();
    assert!(strep.leads.is_empty());
    assert_eq!(strep.all_sources.len(), 1);
    let nucleolin = o.reports.iter().find(|r| r.target_name == "nucleolin").unwrap();
    assert!(nucleolin.all_sources.is_empty());
}

#[test]
fn second_run_hits_the_store_and_skips_fallbacks() {
    let dir = tempfile::tempdir().unwrap();
    let (first, lit1) = run(dir.path(), 4);
    let (second, lit2) = run(dir.path(), 4);
    assert_ne!(first.run_dir, second.run_dir);
    assert_eq!(lit1.requests(), lit2.requests());
    let tiers = |o: &aptamine::pipeline::SearchOutcome| o.reports.iter().map(|r| r.tier).collect::<Vec<_>>();
    assert_eq!(tiers(&first), tiers(&second));
    let store = Store::open(dir.path().join("store.db")).unwrap();
    assert_eq!(store.runs().unwrap().len(), 2);
    let total: usize = first.reports.iter().map(|r| r.curated.len()).sum();
    assert_eq!(store.count_sequences().unwrap(), total);
}

#[test]
fn offline_run_uses_only_the_store() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), 4);
    let mut config = mocked_config(dir.path(), &["thrombin".into(), "nucleolin".into()], 2);
    config.run.offline = true;
    let lit = Arc::new(Literature::ten_targets());
    let o = Pipeline::new(config).unwrap().with_transport(lit.transport()).search().unwrap();
    assert_eq!(lit.requests(), 0);
    assert_eq!(o.reports[0].tier.number(), 1);
    assert_eq!(o.reports[0].curated.len(), 2);
    assert_eq!(o.reports[1].tier.number(), 3);
}

#[test]
fn export_lists_every_stored_row() {
    let dir = tempfile::tempdir().unwrap();
    let (o, _) = run(dir.path(), 3);
    let config = mocked_config(dir.path(), &[], 1);
    let mut out = Vec::new();
    let rows = Pipeline::new(config).unwrap().export(&mut out).unwrap();
    let total: usize = o.reports.iter().map(|r| r.curated.len()).sum();
    assert_eq!(rows, total);
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), total + 1);
    assert!(text.starts_with("target,sequence,length,gc,"));
}

#[test]
fn ingested_documents_feed_search() {
    let dir = tempfile::tempdir().unwrap();
    let docs = dir.path().join("docs");
    std::fs::create_dir(&docs).unwrap();
    std::fs::write(
        docs.join("lab-notes.txt"),
        "Nucleolin aptamers\n\nResults\nThe aptamer AS-9 (GGTGGTGGTGGTTGTGGTGGTGGTGG) bound nucleolin with Kd = 5 nM.\n",
    )
    .unwrap();
    let mut config = mocked_config(dir.path(), &["nucleolin".into()], 1);
    config.run.pdf_dir = Some(docs);
    config.run.offline = true;
    let o = Pipeline::new(config).unwrap().search().unwrap();
    let r = &o.reports[0];
    assert_eq!(r.tier.number(), 1);
    assert_eq!(r.curated[0].target_name, "nucleolin");
    assert_eq!(r.curated[0].affinities.len(), 1);
}
