//! Employee rostering engine.
//!
//! The crate is `no_std` (with `alloc`) and covers the whole optimization
//! pipeline: the domain model and its independent feasibility checker, the
//! MILP formulation, a bounded-variable simplex solver, branch-and-bound with
//! a diverse solution pool, scatter search, the two-phase hybrid orchestrator,
//! and the event-driven, rolling-horizon and work-pattern extensions.
//!
//! Wall-clock time is injected through [`clock::Clock`], so everything here
//! stays deterministic under a fixed seed and a fixed clock.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bnb;
pub mod clock;
pub mod error;
pub mod extensions;
pub mod hybrid;
pub mod lp;
pub mod milp;
pub mod model;
pub mod scatter;

mod num;

pub use error::{Error, Result};
pub use model::{
    DayCell, FeasibilityReport, ObjectiveBreakdown, ObjectiveContext, ObjectiveWeights, Roster,
    RosterInstance, ShiftKind, ShiftType,
};
