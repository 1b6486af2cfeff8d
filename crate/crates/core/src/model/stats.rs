use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::feasibility::worked_sundays;
use super::instance::{InstanceView, RosterInstance};
use super::objective::Workloads;
use super::rest::count_rest_days;
use super::roster::Roster;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmployeeStats {
    pub employee: usize,
    /// Duties per shift type; an all-day shift counts once per day.
    pub shifts: Vec<f64>,
    pub weekend_shifts: Vec<f64>,
    pub worked_sundays: usize,
    pub rest_days: u32,
    /// Blocks with a stated preference.
    pub preferences: usize,
    pub preferences_violated: usize,
    /// `1 - violated / preferences`, or 1 without preferences.
    pub preference_satisfaction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterStats {
    pub shift_labels: Vec<alloc::string::String>,
    pub employees: Vec<EmployeeStats>,
    pub preference_satisfaction: f64,
}

fn rate(violated: usize, total: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        1.0 - violated as f64 / total as f64
    }
}

pub fn roster_stats(inst: &RosterInstance, x: &Roster) -> Result<RosterStats> {
    if x.dims() != inst.dims() {
        return Err(Error::DimensionMismatch {
            expected: inst.dims(),
            found: x.dims(),
        });
    }
    let view = InstanceView::new(inst);
    let loads = Workloads::new(&view, x);
    let s = view.s;
    let employees: Vec<EmployeeStats> = (0..view.n)
        .map(|e| {
            let preferences = inst.preferences[e].iter().filter(|p| p.is_some()).count();
            let violated = loads.pref_violations[e] as usize;
            EmployeeStats {
                employee: e,
                shifts: loads.total[e * s..(e + 1) * s].to_vec(),
                weekend_shifts: loads.weekend[e * s..(e + 1) * s].to_vec(),
                worked_sundays: worked_sundays(&view, x, e),
                rest_days: count_rest_days(inst, x, e),
                preferences,
                preferences_violated: violated,
                preference_satisfaction: rate(violated, preferences),
            }
        })
        .collect();
    let total: usize = employees.iter().map(|e| e.preferences).sum();
    let violated: usize = employees.iter().map(|e| e.preferences_violated).sum();
    Ok(RosterStats {
        shift_labels: inst.shift_types.iter().map(|t| t.label.clone()).collect(),
        employees,
        preference_satisfaction: rate(violated, total),
    })
}
