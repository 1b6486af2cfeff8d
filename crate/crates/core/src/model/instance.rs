use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Time blocks per day (morning, afternoon, night).
pub const BLOCKS_PER_DAY: usize = 3;
pub const DAYS_PER_WEEK: usize = 7;
pub const BLOCKS_PER_WEEK: usize = BLOCKS_PER_DAY * DAYS_PER_WEEK;

/// Upper limit on shift types, so a day's assignment fits a 64-bit mask.
pub const MAX_SHIFT_TYPES: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftKind {
    /// Occupies a single 8-hour block.
    EightHour,
    /// Occupies all three blocks of a day.
    AllDay,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftType {
    pub label: String,
    pub kind: ShiftKind,
}

impl ShiftType {
    pub fn new(label: &str, kind: ShiftKind) -> Self {
        Self {
            label: label.into(),
            kind,
        }
    }
}

/// Working `next` in the morning block of day d+1 is forbidden after working
/// `prev` on day d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForbiddenSequence {
    pub prev: usize,
    pub next_morning: usize,
}

/// One rostering problem. Matrices are stored row-major as nested vectors;
/// all indices are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterInstance {
    pub weeks: usize,
    pub employees: usize,
    /// Time blocks in the horizon; always `21 * weeks` for a valid instance.
    pub blocks: usize,
    pub shift_types: Vec<ShiftType>,
    pub max_shifts_per_week: u32,
    pub min_shifts_per_week: u32,
    pub min_rest_days: u32,
    pub min_rest_sundays: u32,
    /// `employees x blocks`, 1 = available.
    pub availability: Vec<Vec<u8>>,
    /// `employees x blocks`, 1 = on vacation.
    pub vacation: Vec<Vec<u8>>,
    /// `employees x blocks`, `Some(1)` wants a shift, `Some(0)` wants none.
    pub preferences: Vec<Vec<Option<u8>>>,
    /// `blocks x shift_types`, exact number of employees required.
    pub cover: Vec<Vec<u32>>,
    /// `employees x shift_types`, horizon workload target in duties.
    pub workload_targets: Vec<Vec<f64>>,
    /// `employees x shift_types`, horizon weekend workload target in duties.
    pub weekend_targets: Vec<Vec<f64>>,
    /// Per shift type, the employees lacking the license for it.
    pub no_license: Vec<Vec<usize>>,
    pub sunday_blocks: Vec<usize>,
    pub weekend_blocks: Vec<usize>,
    pub forbidden_sequences: Vec<ForbiddenSequence>,
}

impl RosterInstance {
    pub fn days(&self) -> usize {
        self.blocks / BLOCKS_PER_DAY
    }

    pub fn shift_count(&self) -> usize {
        self.shift_types.len()
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.employees, self.blocks, self.shift_types.len())
    }

    pub fn shift_index(&self, label: &str) -> Option<usize> {
        self.shift_types.iter().position(|s| s.label == label)
    }

    /// An instance with no demand, no preferences, everyone available and
    /// licensed, and all labor rules switched off.
    pub fn empty(employees: usize, weeks: usize, shift_types: Vec<ShiftType>) -> Self {
        let blocks = weeks * BLOCKS_PER_WEEK;
        let s = shift_types.len();
        let (sunday_blocks, weekend_blocks) = calendar_sets(weeks);
        Self {
            weeks,
            employees,
            blocks,
            max_shifts_per_week: BLOCKS_PER_WEEK as u32,
            min_shifts_per_week: 0,
            min_rest_days: 0,
            min_rest_sundays: 0,
            availability: vec![vec![1; blocks]; employees],
            vacation: vec![vec![0; blocks]; employees],
            preferences: vec![vec![None; blocks]; employees],
            cover: vec![vec![0; s]; blocks],
            workload_targets: vec![vec![0.0; s]; employees],
            weekend_targets: vec![vec![0.0; s]; employees],
            no_license: vec![Vec::new(); s],
            sunday_blocks,
            weekend_blocks,
            forbidden_sequences: Vec::new(),
            shift_types,
        }
    }

    /// Copy of the instance restricted to weeks `[first_week, first_week + weeks)`.
    /// Targets are zeroed; callers set them for the slice. Horizon-wide
    /// minimums (rest days, rest Sundays) are prorated and rounded down.
    pub fn slice_weeks(&self, first_week: usize, weeks: usize) -> Self {
        let start = first_week * BLOCKS_PER_WEEK;
        let end = start + weeks * BLOCKS_PER_WEEK;
        let rows = |m: &Vec<Vec<u8>>| m.iter().map(|r| r[start..end].to_vec()).collect();
        let s = self.shift_count();
        let prorate = |v: u32| (v as u64 * weeks as u64 / self.weeks.max(1) as u64) as u32;
        let shift = |set: &Vec<usize>| {
            set.iter()
                .filter(|&&j| j >= start && j < end)
                .map(|&j| j - start)
                .collect()
        };
        Self {
            weeks,
            employees: self.employees,
            blocks: end - start,
            shift_types: self.shift_types.clone(),
            max_shifts_per_week: self.max_shifts_per_week,
            min_shifts_per_week: self.min_shifts_per_week,
            min_rest_days: prorate(self.min_rest_days),
            min_rest_sundays: prorate(self.min_rest_sundays),
            availability: rows(&self.availability),
            vacation: rows(&self.vacation),
            preferences: self
                .preferences
                .iter()
                .map(|r| r[start..end].to_vec())
                .collect(),
            cover: self.cover[start..end].to_vec(),
            workload_targets: vec![vec![0.0; s]; self.employees],
            weekend_targets: vec![vec![0.0; s]; self.employees],
            no_license: self.no_license.clone(),
            sunday_blocks: shift(&self.sunday_blocks),
            weekend_blocks: shift(&self.weekend_blocks),
            forbidden_sequences: self.forbidden_sequences.clone(),
        }
    }
}

/// Sunday and weekend block sets for a horizon starting on a Monday.
pub fn calendar_sets(weeks: usize) -> (Vec<usize>, Vec<usize>) {
    let mut sundays = Vec::new();
    let mut weekend = Vec::new();
    for week in 0..weeks {
        for day in 5..DAYS_PER_WEEK {
            for b in 0..BLOCKS_PER_DAY {
                let j = week * BLOCKS_PER_WEEK + day * BLOCKS_PER_DAY + b;
                weekend.push(j);
                if day == 6 {
                    sundays.push(j);
                }
            }
        }
    }
    (sundays, weekend)
}

/// Dense lookup tables derived from a [`RosterInstance`], built once and
/// shared by the checker, the evaluator and the search.
///
/// Assumes the instance passed validation.
#[derive(Debug, Clone)]
pub struct InstanceView<'a> {
    pub inst: &'a RosterInstance,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub days: usize,
    licensed: Vec<bool>,
    pub all_day: Vec<bool>,
    pub weekend_block: Vec<bool>,
    pub sunday_day: Vec<bool>,
    /// Employees licensed for at least one eight-hour shift type.
    pub eight_hour_licensed: Vec<bool>,
    /// Divisor turning block counts into duty counts (3 for all-day types).
    pub duty_divisor: Vec<f64>,
}

impl<'a> InstanceView<'a> {
    pub fn new(inst: &'a RosterInstance) -> Self {
        let (n, m, s) = inst.dims();
        let mut licensed = vec![true; n * s];
        for (k, set) in inst.no_license.iter().enumerate().take(s) {
            for &e in set {
                if e < n {
                    licensed[e * s + k] = false;
                }
            }
        }
        let all_day: Vec<bool> = inst
            .shift_types
            .iter()
            .map(|t| t.kind == ShiftKind::AllDay)
            .collect();
        let mut weekend_block = vec![false; m];
        for &j in &inst.weekend_blocks {
            if j < m {
                weekend_block[j] = true;
            }
        }
        let days = m / BLOCKS_PER_DAY;
        let mut sunday_day = vec![false; days];
        for &j in &inst.sunday_blocks {
            if j / BLOCKS_PER_DAY < days {
                sunday_day[j / BLOCKS_PER_DAY] = true;
            }
        }
        let eight_hour_licensed = (0..n)
            .map(|e| (0..s).any(|k| !all_day[k] && licensed[e * s + k]))
            .collect();
        let duty_divisor = all_day
            .iter()
            .map(|&a| if a { BLOCKS_PER_DAY as f64 } else { 1.0 })
            .collect();
        Self {
            inst,
            n,
            m,
            s,
            days,
            licensed,
            all_day,
            weekend_block,
            sunday_day,
            eight_hour_licensed,
            duty_divisor,
        }
    }

    #[inline]
    pub fn licensed(&self, e: usize, k: usize) -> bool {
        self.licensed[e * self.s + k]
    }

    /// Whether employee `e` may work at all during block `j`.
    #[inline]
    pub fn can_work(&self, e: usize, j: usize) -> bool {
        self.inst.availability[e][j] == 1 && self.inst.vacation[e][j] == 0
    }

    #[inline]
    pub fn eight_hour(&self, k: usize) -> bool {
        !self.all_day[k]
    }

    pub fn eight_hour_types(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.s).filter(move |&k| !self.all_day[k])
    }
}
