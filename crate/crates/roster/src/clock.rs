use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use roster_core::clock::Clock;

/// Wall-clock time since construction.
#[derive(Debug, Clone, Copy)]
pub struct StdClock {
    start: Instant,
}

impl StdClock {
    pub fn new() -> Self {
        Self { start: Instant::now() }
    }
}

impl Default for StdClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for StdClock {
    fn elapsed_secs(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// Jump applied once cancelled. Large enough to expire any deadline, small
/// enough that differences of two readings stay finite.
const CANCEL_JUMP_SECS: f64 = 1e12;

/// A wall clock that leaps far ahead once its flag is raised, so every
/// deadline derived from it expires and the search returns what it has.
#[derive(Debug, Clone)]
pub struct CancellableClock {
    inner: StdClock,
    cancelled: Arc<AtomicBool>,
}

impl CancellableClock {
    pub fn new(cancelled: Arc<AtomicBool>) -> Self {
        Self {
            inner: StdClock::new(),
            cancelled,
        }
    }
}

impl Clock for CancellableClock {
    fn elapsed_secs(&self) -> f64 {
        let t = self.inner.elapsed_secs();
        if self.cancelled.load(Ordering::Relaxed) {
            t + CANCEL_JUMP_SECS
        } else {
            t
        }
    }
}
