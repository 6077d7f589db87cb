use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{slug, ReportError, TargetReport};
use crate::curate::{sequence_csv_row, CSV_COLUMNS};
use crate::metadataxml::ArticleMetadata;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Txt,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Txt];

    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Txt => "txt",
        }
    }
}

/// Header of the second CSV section, one row per source.
pub const SOURCE_COLUMNS: [&str; 9] = ["role", "pmid", "pmcid", "doi", "title", "journal", "year", "source", "url"];

/// Pretty-printed JSON with a trailing newline.
pub fn render_json(report: &TargetReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn source_row(role: &str, a: &ArticleMetadata) -> Vec<String> {
    let opt = |o: &Option<String>| o.clone().unwrap_or_default();
    vec![
        role.to_string(),
        opt(&a.pmid),
        opt(&a.pmcid),
        opt(&a.doi),
        a.title.clone(),
        a.journal.clone(),
        a.year.map(|y| y.to_string()).unwrap_or_default(),
        serde_json::to_value(a.source)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default(),
        a.link().unwrap_or_default(),
    ]
}

/// Sequence rows under the curated-export header, then a source header and
/// one row per source with role `lead` or `source`.
pub fn render_csv(report: &TargetReport) -> String {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    let write = |w: &mut csv::Writer<Vec<u8>>, row: &[String]| w.write_record(row).expect("in-memory csv");
    write(&mut w, &CSV_COLUMNS.map(String::from));
    for r in &report.curated {
        write(&mut w, &sequence_csv_row(r));
    }
    write(&mut w, &SOURCE_COLUMNS.map(String::from));
    for a in &report.all_sources {
        let lead = report.leads.iter().any(|l| l.same_article(a));
        write(&mut w, &source_row(if lead { "lead" } else { "source" }, a));
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv of strings is UTF-8")
}

fn cite(a: &ArticleMetadata) -> String {
    let mut s = a.title.clone();
    if !a.journal.is_empty() {
        let _ = write!(s, ". {}", a.journal);
    }
    if let Some(y) = a.year {
        let _ = write!(s, " ({y})");
    }
    if let Some(link) = a.link() {
        let _ = write!(s, ". {link}");
    }
    s
}

/// Human-readable digest.
pub fn render_txt(report: &TargetReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Target: {}", report.target_name);
    let _ = writeln!(s, "Tier {}: {}", report.tier.number(), report.tier.description());
    let _ = writeln!(s, "\nSequences: {}", report.curated.len());
    for (i, r) in report.curated.iter().enumerate() {
        let _ = writeln!(
            s,
            "  {}. {} ({} nt, GC {}, {}, confidence {})",
            i + 1,
            r.raw,
            r.length,
            r.gc_fraction.round_dp(2).normalize(),
            r.validation.status.as_str(),
            r.confidence.round_dp(2).normalize()
        );
        for a in &r.affinities {
            let _ = writeln!(s, "     {} = {} {} ({} nM)", a.kind.as_str(), a.value, a.unit, a.value_nm.normalize());
        }
        if let Some(a) = r.primary_article() {
            let _ = writeln!(s, "     Source: {}", cite(a));
        }
    }
    let _ = writeln!(s, "\nLeads: {}", report.leads.len());
    for a in &report.leads {
        let _ = writeln!(s, "  - {}", cite(a));
    }
    let _ = writeln!(s, "\nAll sources: {}", report.all_sources.len());
    for a in &report.all_sources {
        let _ = writeln!(s, "  - {}", cite(a));
    }
    let st = &report.run_stats;
    let _ = writeln!(
        s,
        "\nQueries {}, fetches {}, model calls {}, fallbacks {}, {} ms",
        st.queries_issued, st.fetches, st.model_calls, st.fallbacks, st.wall_time_ms
    );
    s
}

/// Slugs for `targets`, with `-2`, `-3`, ... appended on collisions in
/// input order.
pub fn unique_slugs(targets: &[String]) -> Vec<String> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut taken: std::collections::HashSet<String> = std::collections::HashSet::new();
    targets
        .iter()
        .map(|t| {
            let base = slug(t);
            let mut candidate = base.clone();
            while taken.contains(&candidate) {
                let n = seen.entry(base.clone()).or_insert(1);
                *n += 1;
                candidate = format!("{base}-{n}");
            }
            taken.insert(candidate.clone());
            candidate
        })
        .collect()
}

/// Writes `{file_stem}.{ext}` for each format into `out_dir`. The stem
/// defaults to the target's slug.
pub fn emit_report(
    report: &TargetReport,
    formats: &[ReportFormat],
    out_dir: &Path,
    file_stem: Option<&str>,
) -> Result<Vec<PathBuf>, ReportError> {
    let io = |p: &Path, e: std::io::Error| ReportError::Io(p.display().to_string(), e.to_string());
    std::fs::create_dir_all(out_dir).map_err(|e| io(out_dir, e))?;
    let stem = file_stem.map(String::from).unwrap_or_else(|| slug(&report.target_name));
    let mut formats = formats.to_vec();
    formats.sort();
    formats.dedup();
    formats
        .into_iter()
        .map(|f| {
            let path = out_dir.join(format!("{stem}.{}", f.extension()));
            let body = match f {
                ReportFormat::Csv => render_csv(report),
                ReportFormat::Json => render_json(report),
                ReportFormat::Txt => render_txt(report),
            };
            std::fs::write(&path, body).map_err(|e| io(&path, e))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::testing::report;
    use super::*;

    #[test]
    fn json_round_trip() {
        let r = report("thrombin", 2, 1, 3);
        let json = render_json(&r);
        let back: TargetReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(render_json(&back), json);
        assert!(json.contains("\"format_version\": 1"));
    }

    #[test]
    fn tier3_csv_has_only_source_rows() {
        let csv = render_csv(&report("x", 0, 0, 4));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(lines[1], SOURCE_COLUMNS.join(","));
        assert_eq!(lines.len(), 2 + 4);
        assert!(lines[2..].iter().all(|l| l.starts_with("source,")));
    }

    #[test]
    fn csv_sections() {
        let csv = render_csv(&report("x", 2, 1, 0));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 2 + 1 + 3);
        assert_eq!(lines[3], SOURCE_COLUMNS.join(","));
        assert_eq!(lines.iter().filter(|l| l.starts_with("lead,")).count(), 1);
    }

    #[test]
    fn txt_digest() {
        let txt = render_txt(&report("thrombin", 1, 1, 0));
        assert!(txt.starts_with("Target: thrombin\nTier 1: curated sequences found\n"));
        assert!(txt.contains("Sequences: 1\n  1. GGTTGGTGTGGTTGGAAAAACCCCC (25 nt"));
        assert!(txt.contains("https://pubmed.ncbi.nlm.nih.gov/50/"));
    }

    #[test]
    fn files_use_slug() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_report(&report("anti-MUC1 (v2)", 0, 1, 0), &ReportFormat::ALL, dir.path(), None).unwrap();
        let names: Vec<_> = paths.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names, vec!["anti-muc1-v2.csv", "anti-muc1-v2.json", "anti-muc1-v2.txt"]);
    }

    #[test]
    fn colliding_slugs_get_suffixes() {
        let t: Vec<String> = ["A B", "a-b", "a b", "a-b-2"].iter().map(|s| s.to_string()).collect();
        assert_eq!(unique_slugs(&t), vec!["a-b", "a-b-2", "a-b-3", "a-b-2-2"]);
    }
}
