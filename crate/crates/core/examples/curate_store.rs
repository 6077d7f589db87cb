//! Validates, deduplicates and stores records, then exports them as CSV.

use aptamine::curate::{dedup, export_csv, validate, CurateConfig, CuratedSequence, Store};
use aptamine::metadataxml::{ArticleMetadata, Source};
use aptamine::seqextract::{find_sequences, SequenceBounds};
use chrono::DateTime;
use rust_decimal::Decimal;

fn article(pmid: &str, title: &str) -> ArticleMetadata {
    ArticleMetadata {
        pmid: Some(pmid.into()),
        pmcid: None,
        doi: None,
        title: title.into(),
        authors: vec!["Garcia ML".into()],
        journal: "Nucleic Acids Res".into(),
        year: Some(2018),
        source: Source::PubMed,
        url: None,
    }
}

fn main() {
    let config = CurateConfig::default();
    for core in ["GGTTGGTGTGGTTGG", "GGGGGGGGGGCCCCCCCCCCGGGG", "ACGUACGTACGTACGTACGTA", "GGTTGGTGTGGTTGGAAAACCCCTTTT"] {
        let v = validate(core, &config);
        println!("{core:<30} {:?} {}", v.status, v.notes);
    }

    let papers = [
        ("111", "The thrombin aptamer GGTTGGTGTGGTTGGAAAACCCCTTTT binds thrombin.", 1_600_000_000),
        ("222", "We reused aptamer 5'-ggttggtgtggttggaaaacccctttt-3' for thrombin.", 1_600_000_100),
        ("333", "A variant GGTTGGTGTGGTTGGAAAACCCCTTTA also binds thrombin.", 1_600_000_200),
        ("444", "Again GGTTGGTGTGGTTGGAAAACCCCTTTT was the best aptamer.", 1_600_000_300),
    ];
    let mut records = Vec::new();
    for (pmid, text, secs) in papers {
        for c in find_sequences(text, SequenceBounds::default()) {
            let created = DateTime::from_timestamp(secs, 0).expect("timestamp");
            let mut r = CuratedSequence::from_candidate(&c, "thrombin", article(pmid, text), created, &config);
            r.confidence = Decimal::new(8, 1);
            r.verdict_backend = "heuristic".into();
            records.push(r);
        }
    }
    let unique = dedup(records);
    println!("{} unique sequences", unique.len());
    for r in &unique {
        let pmids: Vec<_> = r.articles.iter().filter_map(|a| a.pmid.as_deref()).collect();
        println!("  {} from {:?}", r.core, pmids);
    }

    let mut store = Store::open_in_memory().expect("in-memory store");
    for r in &unique {
        store.upsert(r).expect("upsert");
    }
    export_csv(&store, std::io::stdout().lock()).expect("csv");
}
