//! MILP formulation of the rostering problem.

mod build;
mod model;
mod pattern;
mod vars;

pub use build::{build_event_driven_milp, build_milp, build_pattern_stage2, encode_point, ModelStats, RosterModel};
pub use model::{MilpModel, Row};
pub use pattern::{
    build_pattern_stage1, company_preference, decode_pattern_choice, variant_conflicts, PatternCell, WorkPattern,
    BALANCE_COST, REST_LABEL,
};
pub use vars::{extract_roster, names, VarRange, VariableMap};
