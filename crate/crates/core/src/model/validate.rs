use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::instance::{RosterInstance, ShiftKind, BLOCKS_PER_DAY, BLOCKS_PER_WEEK, MAX_SHIFT_TYPES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationIssue {
    BlockCountMismatch { weeks: usize, blocks: usize },
    ShiftTypeCount { count: usize },
    Dimension { field: String, expected: String, found: String },
    NonBinary { field: String, employee: usize, block: usize, value: u8 },
    IndexOutOfRange { field: String, index: usize },
    SundayNotWeekend { block: usize },
    UnsatisfiableCover { block: usize, shift: usize, demand: u32, eligible: usize },
    AllDayCoverVaries { day: usize, shift: usize },
    WeeklyBounds { min: u32, max: u32 },
    NonFiniteTarget { field: String, employee: usize, shift: usize },
}

impl ValidationIssue {
    pub fn describe(&self) -> String {
        match self {
            Self::BlockCountMismatch { weeks, blocks } => {
                format!("{blocks} time blocks for {weeks} weeks; expected {}", weeks * BLOCKS_PER_WEEK)
            }
            Self::ShiftTypeCount { count } => {
                format!("{count} shift types; need between 1 and {MAX_SHIFT_TYPES}")
            }
            Self::Dimension { field, expected, found } => {
                format!("{field} has shape {found}, expected {expected}")
            }
            Self::NonBinary { field, employee, block, value } => {
                format!("{field}[{employee}][{block}] = {value} is not 0/1")
            }
            Self::IndexOutOfRange { field, index } => format!("{field} contains out-of-range index {index}"),
            Self::SundayNotWeekend { block } => format!("Sunday block {block} is not a weekend block"),
            Self::UnsatisfiableCover { block, shift, demand, eligible } => format!(
                "cover of {demand} for shift {shift} in block {block} exceeds the {eligible} licensed, available employees"
            ),
            Self::AllDayCoverVaries { day, shift } => {
                format!("all-day shift {shift} has different cover across the blocks of day {day}")
            }
            Self::WeeklyBounds { min, max } => format!("minimum {min} shifts per week exceeds maximum {max}"),
            Self::NonFiniteTarget { field, employee, shift } => {
                format!("{field}[{employee}][{shift}] is not finite")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

fn shape<T>(rows: &[Vec<T>]) -> String {
    let widths: Vec<usize> = rows.iter().map(|r| r.len()).collect();
    match widths.first() {
        Some(&w) if widths.iter().all(|&x| x == w) => format!("{}x{}", rows.len(), w),
        Some(_) => format!("{}x(ragged)", rows.len()),
        None => String::from("0x0"),
    }
}

fn check_shape<T>(issues: &mut Vec<ValidationIssue>, field: &str, rows: &[Vec<T>], r: usize, c: usize) -> bool {
    let ok = rows.len() == r && rows.iter().all(|row| row.len() == c);
    if !ok {
        issues.push(ValidationIssue::Dimension {
            field: field.into(),
            expected: format!("{r}x{c}"),
            found: shape(rows),
        });
    }
    ok
}

/// Lists every violated structural invariant; an empty report means the
/// instance is well formed.
pub fn validate_instance(inst: &RosterInstance) -> ValidationReport {
    let mut issues = Vec::new();
    let (n, m, s) = inst.dims();

    if m != inst.weeks * BLOCKS_PER_WEEK {
        issues.push(ValidationIssue::BlockCountMismatch {
            weeks: inst.weeks,
            blocks: m,
        });
    }
    if s == 0 || s > MAX_SHIFT_TYPES {
        issues.push(ValidationIssue::ShiftTypeCount { count: s });
    }
    if inst.min_shifts_per_week > inst.max_shifts_per_week {
        issues.push(ValidationIssue::WeeklyBounds {
            min: inst.min_shifts_per_week,
            max: inst.max_shifts_per_week,
        });
    }

    let a_ok = check_shape(&mut issues, "availability", &inst.availability, n, m);
    let v_ok = check_shape(&mut issues, "vacation", &inst.vacation, n, m);
    check_shape(&mut issues, "preferences", &inst.preferences, n, m);
    let d_ok = check_shape(&mut issues, "cover", &inst.cover, m, s);
    check_shape(&mut issues, "workload_targets", &inst.workload_targets, n, s);
    check_shape(&mut issues, "weekend_targets", &inst.weekend_targets, n, s);
    let l_ok = inst.no_license.len() == s;
    if !l_ok {
        issues.push(ValidationIssue::Dimension {
            field: "no_license".into(),
            expected: format!("{s} sets"),
            found: format!("{} sets", inst.no_license.len()),
        });
    }

    for (field, mat) in [("availability", &inst.availability), ("vacation", &inst.vacation)] {
        for (e, row) in mat.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > 1 {
                    issues.push(ValidationIssue::NonBinary {
                        field: field.into(),
                        employee: e,
                        block: j,
                        value: v,
                    });
                }
            }
        }
    }
    for (e, row) in inst.preferences.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if let Some(v) = p {
                if v > 1 {
                    issues.push(ValidationIssue::NonBinary {
                        field: "preferences".into(),
                        employee: e,
                        block: j,
                        value: v,
                    });
                }
            }
        }
    }
    for (field, mat) in [("workload_targets", &inst.workload_targets), ("weekend_targets", &inst.weekend_targets)] {
        for (e, row) in mat.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    issues.push(ValidationIssue::NonFiniteTarget {
                        field: field.into(),
                        employee: e,
                        shift: k,
                    });
                }
            }
        }
    }

    for set in &inst.no_license {
        for &e in set {
            if e >= n {
                issues.push(ValidationIssue::IndexOutOfRange {
                    field: "no_license".into(),
                    index: e,
                });
            }
        }
    }
    let mut weekend = vec![false; m];
    for &j in &inst.weekend_blocks {
        if j >= m {
            issues.push(ValidationIssue::IndexOutOfRange {
                field: "weekend_blocks".into(),
                index: j,
            });
        } else {
            weekend[j] = true;
        }
    }
    for &j in &inst.sunday_blocks {
        if j >= m {
            issues.push(ValidationIssue::IndexOutOfRange {
                field: "sunday_blocks".into(),
                index: j,
            });
        } else if !weekend[j] {
            issues.push(ValidationIssue::SundayNotWeekend { block: j });
        }
    }
    for f in &inst.forbidden_sequences {
        for k in [f.prev, f.next_morning] {
            if k >= s {
                issues.push(ValidationIssue::IndexOutOfRange {
                    field: "forbidden_sequences".into(),
                    index: k,
                });
            }
        }
    }

    if d_ok && a_ok && v_ok && l_ok {
        let mut unlicensed = vec![false; n * s];
        for (k, set) in inst.no_license.iter().enumerate() {
            for &e in set.iter().filter(|&&e| e < n) {
                unlicensed[e * s + k] = true;
            }
        }
        for j in 0..m {
            for k in 0..s {
                let demand = inst.cover[j][k];
                if demand == 0 {
                    continue;
                }
                let eligible = (0..n)
                    .filter(|&e| !unlicensed[e * s + k] && inst.availability[e][j] == 1 && inst.vacation[e][j] == 0)
                    .count();
                if (eligible as u32) < demand {
                    issues.push(ValidationIssue::UnsatisfiableCover {
                        block: j,
                        shift: k,
                        demand,
                        eligible,
                    });
                }
            }
        }
    }
    if d_ok {
        for (k, st) in inst.shift_types.iter().enumerate() {
            if st.kind != ShiftKind::AllDay {
                continue;
            }
            for day in 0..m / BLOCKS_PER_DAY {
                let base = inst.cover[day * BLOCKS_PER_DAY][k];
                if (1..BLOCKS_PER_DAY).any(|b| inst.cover[day * BLOCKS_PER_DAY + b][k] != base) {
                    issues.push(ValidationIssue::AllDayCoverVaries { day, shift: k });
                }
            }
        }
    }
    ValidationReport { issues }
}
