use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{ReportError, TargetReport, Tier, FORMAT_VERSION};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierCounts {
    pub tier1: usize,
    pub tier2: usize,
    pub tier3: usize,
}

/// Percent of all targets reaching at least each tier's evidence level:
/// sequences for tier 1, sequences or leads for tier 2, any source at all
/// for tier 3.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HitRates {
    pub tier1_pct: f64,
    pub tier2_pct: f64,
    pub tier3_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub format_version: u32,
    pub timestamp: DateTime<Utc>,
    pub config_fingerprint: String,
    pub total_targets: usize,
    /// Exclusive classification: every target counted once.
    pub tier_counts: TierCounts,
    /// Nested hit counts behind `hit_rates`.
    pub hit_counts: TierCounts,
    pub hit_rates: HitRates,
    pub wall_time_ms: u64,
    /// `None` when the measured wall time is zero.
    pub targets_per_hour: Option<f64>,
}

fn pct(n: usize, total: usize) -> f64 {
    n as f64 * 100.0 / total as f64
}

pub fn summarize_run(
    reports: &[TargetReport],
    wall_time: Duration,
    timestamp: DateTime<Utc>,
    config_fingerprint: &str,
) -> Result<RunSummary, ReportError> {
    if reports.is_empty() {
        return Err(ReportError::EmptyRun);
    }
    let total = reports.len();
    let count = |f: &dyn Fn(&TargetReport) -> bool| reports.iter().filter(|r| f(r)).count();
    let tier_counts = TierCounts {
        tier1: count(&|r| r.tier == Tier::Tier1),
        tier2: count(&|r| r.tier == Tier::Tier2),
        tier3: count(&|r| r.tier == Tier::Tier3),
    };
    let hit_counts = TierCounts {
        tier1: count(&|r| !r.curated.is_empty()),
        tier2: count(&|r| !r.curated.is_empty() || !r.leads.is_empty()),
        tier3: count(&|r| !r.curated.is_empty() || !r.leads.is_empty() || !r.all_sources.is_empty()),
    };
    let secs = wall_time.as_secs_f64();
    Ok(RunSummary {
        format_version: FORMAT_VERSION,
        timestamp,
        config_fingerprint: config_fingerprint.to_string(),
        total_targets: total,
        tier_counts,
        hit_counts,
        hit_rates: HitRates {
            tier1_pct: pct(hit_counts.tier1, total),
            tier2_pct: pct(hit_counts.tier2, total),
            tier3_pct: pct(hit_counts.tier3, total),
        },
        wall_time_ms: wall_time.as_millis() as u64,
        targets_per_hour: (secs > 0.0).then(|| total as f64 * 3600.0 / secs),
    })
}

/// Writes `summary.json` into `out_dir`.
pub fn write_summary(summary: &RunSummary, out_dir: &Path) -> Result<PathBuf, ReportError> {
    let path = out_dir.join("summary.json");
    let mut body = serde_json::to_string_pretty(summary).expect("summary serializes");
    body.push('\n');
    std::fs::create_dir_all(out_dir)
        .and_then(|_| std::fs::write(&path, body))
        .map_err(|e| ReportError::Io(path.display().to_string(), e.to_string()))?;
    Ok(path)
}
