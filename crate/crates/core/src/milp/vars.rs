use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Roster;

/// A named, contiguous block of model variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarRange {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl VarRange {
    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn contains(&self, v: usize) -> bool {
        v >= self.start && v < self.end()
    }
}

pub mod names {
    pub const ASSIGNMENT: &str = "assignment";
    pub const FREE: &str = "free";
    pub const REST_WINDOW: &str = "rest_window";
    pub const WORKLOAD_OVER: &str = "workload_over";
    pub const WORKLOAD_UNDER: &str = "workload_under";
    pub const WORKLOAD_MAX: &str = "workload_max";
    pub const WEEKEND_OVER: &str = "weekend_over";
    pub const WEEKEND_UNDER: &str = "weekend_under";
    pub const WEEKEND_MAX: &str = "weekend_max";
    pub const PATTERN_CHOICE: &str = "pattern_choice";
    pub const AVAILABILITY_SLACK: &str = "availability_slack";
    pub const VACATION_SLACK: &str = "vacation_slack";
    pub const LICENSE_SLACK: &str = "license_slack";
    pub const PREFERENCE_SLACK: &str = "preference_slack";
    pub const PREFERENCE_SURPLUS: &str = "preference_surplus";
    pub const VARIANT_LOAD: &str = "variant_load";
}

/// Maps model variables back to roster semantics. The assignment block, when
/// present, uses the same `(e * m + j) * s + k` layout as [`Roster`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableMap {
    pub employees: usize,
    pub blocks: usize,
    pub shift_types: usize,
    pub ranges: Vec<VarRange>,
}

impl VariableMap {
    pub(crate) fn new(employees: usize, blocks: usize, shift_types: usize) -> Self {
        Self {
            employees,
            blocks,
            shift_types,
            ranges: Vec::new(),
        }
    }

    pub(crate) fn push(&mut self, name: &'static str, start: usize, len: usize) -> usize {
        debug_assert_eq!(start, self.num_vars());
        self.ranges.push(VarRange {
            name: name.to_string(),
            start,
            len,
        });
        start
    }

    pub fn num_vars(&self) -> usize {
        self.ranges.last().map_or(0, VarRange::end)
    }

    pub fn range(&self, name: &str) -> Option<&VarRange> {
        self.ranges.iter().find(|r| r.name == name)
    }

    /// Which range a variable belongs to.
    pub fn range_of(&self, v: usize) -> Option<&VarRange> {
        self.ranges.iter().find(|r| r.contains(v))
    }

    /// Index of `X[e][j][k]`.
    pub fn x(&self, e: usize, j: usize, k: usize) -> usize {
        let start = self.range(names::ASSIGNMENT).map_or(0, |r| r.start);
        start + (e * self.blocks + j) * self.shift_types + k
    }

    pub fn has_assignment(&self) -> bool {
        self.range(names::ASSIGNMENT).is_some()
    }
}

/// Rounds the assignment block of a solution vector into a roster.
pub fn extract_roster(map: &VariableMap, solution: &[f64]) -> Result<Roster> {
    let (n, m, s) = (map.employees, map.blocks, map.shift_types);
    let r = map
        .range(names::ASSIGNMENT)
        .ok_or_else(|| Error::InvalidConfig("model has no assignment variables".into()))?;
    if solution.len() < r.end() {
        return Err(Error::InvalidConfig("solution vector is shorter than the model".into()));
    }
    let mut roster = Roster::zeros(n, m, s);
    for e in 0..n {
        for j in 0..m {
            for k in 0..s {
                let v = solution[map.x(e, j, k)];
                let rounded = crate::num::round(v);
                if (v - rounded).abs() > 1e-6 || !(rounded == 0.0 || rounded == 1.0) {
                    return Err(Error::FractionalAssignment {
                        employee: e,
                        block: j,
                        shift: k,
                        value: v,
                    });
                }
                roster.set(e, j, k, rounded == 1.0);
            }
        }
    }
    Ok(roster)
}
