use chrono::{DateTime, Utc};

/// Source of wall-clock timestamps for records and reports.
///
/// Tests and reproducible runs use [`FixedClock`] so that `created_at`,
/// report timestamps and measured wall time are stable across runs.
pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FixedClock(pub DateTime<Utc>);

impl FixedClock {
    pub fn at_unix(secs: i64) -> Self {
        FixedClock(DateTime::from_timestamp(secs, 0).expect("valid unix timestamp"))
    }
}

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        self.0
    }
}
