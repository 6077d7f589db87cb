//! Builds reports for three targets, one per tier, renders them and prints
//! the run summary.

use std::time::Duration;

use aptamine::curate::{CurateConfig, CuratedSequence};
use aptamine::metadataxml::{ArticleMetadata, Source};
use aptamine::seqextract::{find_sequences, SequenceBounds};
use aptamine::tierreport::{render_csv, render_json, render_txt, summarize_run, RunStats, TargetReport};
use chrono::Utc;

fn article(pmid: &str, title: &str) -> ArticleMetadata {
    ArticleMetadata {
        pmid: Some(pmid.into()),
        pmcid: None,
        doi: None,
        title: title.into(),
        authors: Vec::new(),
        journal: "J Test".into(),
        year: Some(2021),
        source: Source::PubMed,
        url: None,
    }
}

fn main() {
    let text = "The aptamer GGTTGGTGTGGTTGGAAAACCCCTTTT bound thrombin.";
    let c = &find_sequences(text, SequenceBounds::default())[0];
    let paper = article("111", "Thrombin aptamers");
    let curated = CuratedSequence::from_candidate(c, "thrombin", paper.clone(), Utc::now(), &CurateConfig::default());

    let stats = RunStats {
        queries_issued: 4,
        fetches: 6,
        ..RunStats::default()
    };
    let reports = vec![
        TargetReport::new("thrombin", vec![curated], Vec::new(), vec![paper], stats),
        TargetReport::new("lysozyme", Vec::new(), vec![article("222", "Aptamer sensors for lysozyme")], Vec::new(), stats),
        TargetReport::new("nucleolin", Vec::new(), Vec::new(), vec![article("333", "Nucleolin in the nucleolus")], stats),
    ];
    for r in &reports {
        println!("==== {} ({:?})", r.target_name, r.tier);
        print!("{}", render_txt(r));
    }
    println!("==== CSV for thrombin");
    print!("{}", render_csv(&reports[0]));
    println!("==== JSON for lysozyme");
    print!("{}", render_json(&reports[1]));

    let summary = summarize_run(&reports, Duration::from_secs(3), Utc::now(), "demo").expect("non-empty run");
    println!("==== summary");
    println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
}
