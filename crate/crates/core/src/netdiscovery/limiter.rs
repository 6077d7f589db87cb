use std::sync::Mutex;
use std::time::{Duration, Instant};

use super::HostClass;

/// Extra spacing added to every admission so that scheduler jitter cannot
/// squeeze one more request into a window.
const ADMISSION_MARGIN: Duration = Duration::from_millis(2);

/// Per-host-class admission control with a burst of one: request `k` of a
/// class is admitted no earlier than `1 / rps` after request `k - 1`.
/// Safe to share between threads; sleeping happens outside the lock.
#[derive(Debug)]
pub struct RateLimiter {
    intervals: [Duration; 3],
    next: [Mutex<Option<Instant>>; 3],
}

fn slot(class: HostClass) -> usize {
    match class {
        HostClass::Ncbi => 0,
        HostClass::Publisher => 1,
        HostClass::BioRxiv => 2,
    }
}

fn interval(rps: f64) -> Duration {
    Duration::from_secs_f64(1.0 / rps) + ADMISSION_MARGIN
}

impl RateLimiter {
    /// Rates in requests per second; each must be positive and finite.
    pub fn new(ncbi_rps: f64, publisher_rps: f64, biorxiv_rps: f64) -> Self {
        RateLimiter {
            intervals: [interval(ncbi_rps), interval(publisher_rps), interval(biorxiv_rps)],
            next: Default::default(),
        }
    }

    pub fn interval(&self, class: HostClass) -> Duration {
        self.intervals[slot(class)]
    }

    /// Blocks until a request of `class` may be sent.
    pub fn admit(&self, class: HostClass) {
        let i = slot(class);
        let wait = {
            let mut next = self.next[i].lock().expect("limiter lock");
            let now = Instant::now();
            let at = next.map_or(now, |n| n.max(now));
            *next = Some(at + self.intervals[i]);
            at - now
        };
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
        // An oversleep pushes later admissions back by the same amount.
        let actual = Instant::now();
        let mut next = self.next[i].lock().expect("limiter lock");
        let floor = actual + self.intervals[i];
        if next.is_none_or(|n| n < floor) {
            *next = Some(floor);
        }
    }
}
