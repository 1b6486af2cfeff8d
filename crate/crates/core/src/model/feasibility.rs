//! Direct evaluation of every hard rostering rule on an assignment tensor.
//!
//! This checker works on the roster itself, never on the MILP encoding, and
//! is the reference every other component is tested against.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::instance::{InstanceView, RosterInstance, BLOCKS_PER_DAY, BLOCKS_PER_WEEK};
use super::rest::rest_days_in;
use super::roster::Roster;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintId {
    OneShiftPerBlock,
    License,
    AllDayShift,
    Availability,
    Vacation,
    MinRestHours,
    MaxShiftsPerWeek,
    MinShiftsPerWeek,
    RestSundays,
    Cover,
    RestDays,
    ForbiddenSequence,
}

/// Employee / block / shift coordinates of a violation; `None` where the
/// constraint does not refer to that axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Coordinate {
    pub employee: Option<usize>,
    pub block: Option<usize>,
    pub shift: Option<usize>,
}

impl Coordinate {
    pub fn ejk(e: usize, j: usize, k: usize) -> Self {
        Self {
            employee: Some(e),
            block: Some(j),
            shift: Some(k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: ConstraintId,
    pub at: Coordinate,
    pub description: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn count(&self, id: ConstraintId) -> usize {
        self.violations.iter().filter(|v| v.constraint == id).count()
    }
}

pub(crate) fn check_dims(inst: &RosterInstance, roster: &Roster) -> Result<()> {
    if inst.dims() != roster.dims() {
        return Err(Error::DimensionMismatch {
            expected: inst.dims(),
            found: roster.dims(),
        });
    }
    Ok(())
}

/// Checks all hard constraints and reports every violation found.
pub fn check_feasibility(inst: &RosterInstance, roster: &Roster) -> Result<FeasibilityReport> {
    check_dims(inst, roster)?;
    let view = InstanceView::new(inst);
    let mut violations = Vec::new();
    for e in 0..view.n {
        scan_employee(&view, roster, e, &mut |v| {
            violations.push(v);
            true
        });
    }
    scan_cover(&view, roster, &mut |v| {
        violations.push(v);
        true
    });
    Ok(FeasibilityReport {
        feasible: violations.is_empty(),
        violations,
    })
}

/// Whether every per-employee rule (everything except cover) holds for `e`.
pub fn employee_feasible(view: &InstanceView<'_>, roster: &Roster, e: usize) -> bool {
    let mut ok = true;
    scan_employee(view, roster, e, &mut |_| {
        ok = false;
        false
    });
    ok
}

/// Number of per-employee rule violations for `e`.
pub fn employee_violations(view: &InstanceView<'_>, roster: &Roster, e: usize) -> usize {
    let mut count = 0;
    scan_employee(view, roster, e, &mut |_| {
        count += 1;
        true
    });
    count
}

/// Whether the cover requirement holds exactly for every block and shift type.
pub fn cover_satisfied(view: &InstanceView<'_>, roster: &Roster) -> bool {
    let mut ok = true;
    scan_cover(view, roster, &mut |_| {
        ok = false;
        false
    });
    ok
}

pub fn is_feasible(view: &InstanceView<'_>, roster: &Roster) -> bool {
    (0..view.n).all(|e| employee_feasible(view, roster, e)) && cover_satisfied(view, roster)
}

/// Sundays on which employee `e` works at least one block.
pub fn worked_sundays(view: &InstanceView<'_>, roster: &Roster, e: usize) -> usize {
    (0..view.days)
        .filter(|&d| view.sunday_day[d])
        .filter(|&d| (0..BLOCKS_PER_DAY).any(|b| roster.occupied(e, d * BLOCKS_PER_DAY + b)))
        .count()
}

/// Eight-hour shifts worked by `e` in week `week`.
pub fn weekly_eight_hour_shifts(view: &InstanceView<'_>, roster: &Roster, e: usize, week: usize) -> u32 {
    let mut count = 0;
    for j in week * BLOCKS_PER_WEEK..(week + 1) * BLOCKS_PER_WEEK {
        for k in view.eight_hour_types() {
            count += roster.get(e, j, k) as u32;
        }
    }
    count
}

// The sink returns false to stop scanning.
type Sink<'s> = dyn FnMut(Violation) -> bool + 's;

macro_rules! emit {
    ($sink:expr, $id:expr, $at:expr, $($fmt:tt)*) => {
        if !$sink(Violation { constraint: $id, at: $at, description: format!($($fmt)*) }) {
            return;
        }
    };
}

fn scan_employee(view: &InstanceView<'_>, x: &Roster, e: usize, sink: &mut Sink<'_>) {
    let inst = view.inst;
    let (m, s) = (view.m, view.s);
    let at_e = |j: Option<usize>, k: Option<usize>| Coordinate {
        employee: Some(e),
        block: j,
        shift: k,
    };

    for j in 0..m {
        let load = x.load(e, j);
        if load > 1 {
            emit!(sink, ConstraintId::OneShiftPerBlock, at_e(Some(j), None), "employee {e} works {load} shift types in block {j}");
        }
        for k in 0..s {
            if !x.get(e, j, k) {
                continue;
            }
            if !view.licensed(e, k) {
                emit!(sink, ConstraintId::License, Coordinate::ejk(e, j, k), "employee {e} lacks the license for shift {k}");
            }
            if inst.availability[e][j] == 0 {
                emit!(sink, ConstraintId::Availability, Coordinate::ejk(e, j, k), "employee {e} is unavailable in block {j}");
            }
            if inst.vacation[e][j] == 1 {
                emit!(sink, ConstraintId::Vacation, Coordinate::ejk(e, j, k), "employee {e} is on vacation in block {j}");
            }
        }
    }

    for k in (0..s).filter(|&k| view.all_day[k]) {
        for d in 0..view.days {
            let first = x.get(e, d * BLOCKS_PER_DAY, k);
            if (1..BLOCKS_PER_DAY).any(|b| x.get(e, d * BLOCKS_PER_DAY + b, k) != first) {
                emit!(sink, ConstraintId::AllDayShift, at_e(Some(d * BLOCKS_PER_DAY), Some(k)), "all-day shift {k} of employee {e} does not cover day {d}");
            }
        }
    }

    let eight: Vec<usize> = view.eight_hour_types().collect();
    let eight_at = |j: usize| eight.iter().filter(|&&k| x.get(e, j, k)).count();
    if m >= 3 {
        let mut window = eight_at(0) + eight_at(1);
        for t in 0..m - 2 {
            window += eight_at(t + 2);
            if window > 1 {
                emit!(sink, ConstraintId::MinRestHours, at_e(Some(t), None), "employee {e} has less than 16 hours of rest after block {t}");
            }
            window -= eight_at(t);
        }
    }

    if view.eight_hour_licensed[e] {
        for week in 0..inst.weeks {
            let count = weekly_eight_hour_shifts(view, x, e, week);
            if count > inst.max_shifts_per_week {
                emit!(sink, ConstraintId::MaxShiftsPerWeek, at_e(Some(week * BLOCKS_PER_WEEK), None), "employee {e} works {count} shifts in week {week}");
            }
            if count < inst.min_shifts_per_week {
                emit!(sink, ConstraintId::MinShiftsPerWeek, at_e(Some(week * BLOCKS_PER_WEEK), None), "employee {e} works {count} shifts in week {week}");
            }
        }
    }

    let sundays = worked_sundays(view, x, e);
    if inst.weeks < sundays + inst.min_rest_sundays as usize {
        emit!(sink, ConstraintId::RestSundays, at_e(None, None), "employee {e} works {sundays} Sundays, leaving fewer than {} rest Sundays", inst.min_rest_sundays);
    }

    let rest = rest_days_in((0..m).map(|j| x.occupied(e, j)));
    if rest < inst.min_rest_days {
        emit!(sink, ConstraintId::RestDays, at_e(None, None), "employee {e} has {rest} rest days, fewer than {}", inst.min_rest_days);
    }

    for f in &inst.forbidden_sequences {
        for d in 0..view.days.saturating_sub(1) {
            let prev = (0..BLOCKS_PER_DAY).any(|b| x.get(e, d * BLOCKS_PER_DAY + b, f.prev));
            let next = (d + 1) * BLOCKS_PER_DAY;
            if prev && x.get(e, next, f.next_morning) {
                emit!(sink, ConstraintId::ForbiddenSequence, at_e(Some(next), Some(f.next_morning)), "employee {e} works shift {} on day {d} and shift {} the next morning", f.prev, f.next_morning);
            }
        }
    }
}

fn scan_cover(view: &InstanceView<'_>, x: &Roster, sink: &mut Sink<'_>) {
    for j in 0..view.m {
        for k in 0..view.s {
            let staffed = (0..view.n).filter(|&e| x.get(e, j, k)).count() as u32;
            let demand = view.inst.cover[j][k];
            if staffed != demand {
                let at = Coordinate {
                    employee: None,
                    block: Some(j),
                    shift: Some(k),
                };
                emit!(sink, ConstraintId::Cover, at, "block {j} shift {k} staffed by {staffed}, demand {demand}");
            }
        }
    }
}
