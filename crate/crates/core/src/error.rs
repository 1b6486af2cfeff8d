use alloc::string::String;
use alloc::vec::Vec;

use crate::model::Coordinate;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("roster is {found:?} (employees, blocks, shift types) but the instance needs {expected:?}")]
    DimensionMismatch {
        expected: (usize, usize, usize),
        found: (usize, usize, usize),
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shift type {0} has demand but no licensed employee")]
    NoLicensedEmployee(usize),

    #[error("weight {name} = {value} is outside its allowed range")]
    WeightOutOfRange { name: &'static str, value: f64 },

    #[error("assignment variable (employee {employee}, block {block}, shift {shift}) is fractional: {value}")]
    FractionalAssignment {
        employee: usize,
        block: usize,
        shift: usize,
        value: f64,
    },

    #[error("locked roster prefix conflicts with the updated parameters at {0:?}")]
    LockedPrefixConflict(Vec<Coordinate>),

    #[error("change requests contradict each other at (employee, block) {0:?}")]
    ConflictingChanges(Vec<(usize, usize)>),

    #[error("invalid change request: {0}")]
    InvalidChange(String),

    #[error("unknown shift label {0:?}")]
    UnknownShiftLabel(String),

    #[error("the model is infeasible")]
    Infeasible,

    #[error("the LP relaxation is unbounded")]
    Unbounded,

    #[error("no feasible roster was found within the time limit; relax the labor rules or extend the phase-1 budget")]
    NoSolution,

    #[error("lower bound {lb} exceeds incumbent {ub}")]
    BoundInconsistency { lb: f64, ub: f64 },

    #[error("the solution pool is empty")]
    EmptyPool,

    #[error("internal error: {0}")]
    Internal(String),

    #[error("planning period {period} failed: {reason}")]
    PeriodFailed { period: usize, reason: String },
}
