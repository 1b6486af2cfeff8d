//! Time sources for time-limited search.
//!
//! The core never reads the system clock itself. Callers hand in a [`Clock`];
//! the std companion crate provides one backed by `std::time::Instant`.

use core::cell::Cell;

pub trait Clock {
    /// Seconds elapsed since the clock's origin.
    fn elapsed_secs(&self) -> f64;
}

impl<C: Clock + ?Sized> Clock for &C {
    fn elapsed_secs(&self) -> f64 {
        (**self).elapsed_secs()
    }
}

/// A clock that never advances. Time limits never fire; useful when the
/// search should be bounded only by node or stall limits.
#[derive(Debug, Default, Clone, Copy)]
pub struct FrozenClock;

impl Clock for FrozenClock {
    fn elapsed_secs(&self) -> f64 {
        0.0
    }
}

/// A clock that advances by a fixed step each time it is read. Gives
/// reproducible "time" in tests.
#[derive(Debug, Default)]
pub struct TickClock {
    step: f64,
    now: Cell<f64>,
}

impl TickClock {
    pub fn new(step: f64) -> Self {
        Self {
            step,
            now: Cell::new(0.0),
        }
    }
}

impl Clock for TickClock {
    fn elapsed_secs(&self) -> f64 {
        let t = self.now.get();
        self.now.set(t + self.step);
        t
    }
}

/// A deadline relative to a clock, measured from the moment it was created.
#[derive(Clone, Copy)]
pub struct Deadline<'a> {
    clock: &'a dyn Clock,
    start: f64,
    limit: f64,
}

impl<'a> Deadline<'a> {
    pub fn new(clock: &'a dyn Clock, limit_secs: f64) -> Self {
        Self {
            clock,
            start: clock.elapsed_secs(),
            limit: limit_secs,
        }
    }

    pub fn elapsed(&self) -> f64 {
        self.clock.elapsed_secs() - self.start
    }

    pub fn expired(&self) -> bool {
        self.elapsed() >= self.limit
    }

    pub fn remaining(&self) -> f64 {
        (self.limit - self.elapsed()).max(0.0)
    }

    pub fn clock(&self) -> &'a dyn Clock {
        self.clock
    }

    /// A nested deadline that expires no later than this one.
    pub fn sub(&self, limit_secs: f64) -> Deadline<'a> {
        Deadline::new(self.clock, limit_secs.min(self.remaining()))
    }
}
