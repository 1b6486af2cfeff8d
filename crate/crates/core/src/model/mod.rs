//! Domain types, the feasibility checker, the objective and instance generation.

pub mod feasibility;
pub mod generator;
pub mod instance;
pub mod objective;
pub mod rest;
pub mod roster;
pub mod stats;
pub mod targets;
pub mod validate;

pub use feasibility::{
    check_feasibility, cover_satisfied, employee_feasible, employee_violations, is_feasible, ConstraintId, Coordinate, FeasibilityReport,
    Violation,
};
pub use generator::{generate_instance, GeneratorConfig, ShiftSet};
pub use instance::{
    calendar_sets, ForbiddenSequence, InstanceView, RosterInstance, ShiftKind, ShiftType, BLOCKS_PER_DAY,
    BLOCKS_PER_WEEK, DAYS_PER_WEEK,
};
pub use objective::{employee_quality, evaluate_objective, ObjectiveBreakdown, ObjectiveContext, ObjectiveWeights};
pub use rest::{count_rest_days, rest_days_in};
pub use roster::{DayCell, Roster};
pub use stats::{roster_stats, EmployeeStats, RosterStats};
pub use targets::{default_targets, TargetMatrix};
pub use validate::{validate_instance, ValidationIssue, ValidationReport};
