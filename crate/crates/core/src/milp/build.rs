use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::model::MilpModel;
use super::vars::{names, VariableMap};
use crate::error::{Error, Result};
use crate::model::feasibility::check_dims;
use crate::model::{
    validate_instance, Coordinate, InstanceView, ObjectiveWeights, Roster, RosterInstance, BLOCKS_PER_DAY,
    BLOCKS_PER_WEEK,
};

const INF: f64 = f64::INFINITY;

/// A built model together with the map back to roster semantics.
#[derive(Debug, Clone)]
pub struct RosterModel {
    pub model: MilpModel,
    pub map: VariableMap,
    /// Scalar constraints (license, availability, vacation) that were folded
    /// into variable bounds instead of becoming rows.
    pub folded_bound_constraints: usize,
}

/// Size of a model. `constraints` counts a ranged row as two inequalities;
/// `total_constraints` adds the folded bound constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelStats {
    pub continuous: usize,
    pub integer: usize,
    pub rows: usize,
    pub constraints: usize,
    pub folded_bound_constraints: usize,
    pub nonzeros: usize,
}

impl ModelStats {
    pub fn total_constraints(&self) -> usize {
        self.constraints + self.folded_bound_constraints
    }
}

impl RosterModel {
    pub fn stats(&self) -> ModelStats {
        let m = &self.model;
        let integer = m.num_integer();
        let constraints = m
            .rows
            .iter()
            .map(|r| {
                if r.lb.is_finite() && r.ub.is_finite() && r.lb < r.ub {
                    2
                } else {
                    1
                }
            })
            .sum();
        ModelStats {
            continuous: m.num_vars() - integer,
            integer,
            rows: m.num_rows(),
            constraints,
            folded_bound_constraints: self.folded_bound_constraints,
            nonzeros: m.nonzeros(),
        }
    }

    pub fn into_parts(self) -> (MilpModel, VariableMap) {
        (self.model, self.map)
    }
}

pub(crate) fn ensure_valid(inst: &RosterInstance) -> Result<()> {
    let report = validate_instance(inst);
    match report.issues.first() {
        None => Ok(()),
        Some(issue) => Err(Error::InvalidInstance(issue.describe())),
    }
}

struct Builder<'a> {
    inst: &'a RosterInstance,
    view: InstanceView<'a>,
    model: MilpModel,
    map: VariableMap,
    folded: usize,
    free_start: usize,
}

impl<'a> Builder<'a> {
    fn new(inst: &'a RosterInstance) -> Self {
        let view = InstanceView::new(inst);
        let map = VariableMap::new(view.n, view.m, view.s);
        Self {
            inst,
            view,
            model: MilpModel::new(),
            map,
            folded: 0,
            free_start: 0,
        }
    }

    fn x(&self, e: usize, j: usize, k: usize) -> usize {
        self.map.x(e, j, k)
    }

    fn add_range(&mut self, name: &'static str, len: usize, cost: f64, lb: f64, ub: f64, integer: bool) -> usize {
        let start = self.model.num_vars();
        for _ in 0..len {
            self.model.add_var(cost, lb, ub, integer);
        }
        self.map.push(name, start, len)
    }

    /// Assignment variables, with license, availability and vacation folded
    /// into their upper bounds.
    fn assignment(&mut self) {
        let (n, m, s) = (self.view.n, self.view.m, self.view.s);
        self.add_range(names::ASSIGNMENT, n * m * s, 0.0, 0.0, 1.0, true);
        for e in 0..n {
            for j in 0..m {
                for k in 0..s {
                    if !self.view.licensed(e, k) || !self.view.can_work(e, j) {
                        let v = self.x(e, j, k);
                        self.model.var_ub[v] = 0.0;
                    }
                }
            }
        }
        let unlicensed: usize = self.inst.no_license.iter().map(Vec::len).sum();
        self.folded = unlicensed * m + 2 * n * m * s;
    }

    fn hard_constraints(&mut self) {
        let (n, m, s) = (self.view.n, self.view.m, self.view.s);
        let inst = self.inst;

        // One shift type per block; `free` is the slack and marks an idle block.
        self.free_start = self.add_range(names::FREE, n * m, 0.0, 0.0, 1.0, false);
        for e in 0..n {
            for j in 0..m {
                let mut row: Vec<(usize, f64)> = (0..s).map(|k| (self.x(e, j, k), 1.0)).collect();
                row.push((self.free_start + e * m + j, 1.0));
                self.model.add_row(row, 1.0, 1.0);
            }
        }

        // All-day shift types cover the whole day.
        for k in (0..s).filter(|&k| self.view.all_day[k]) {
            for e in (0..n).filter(|&e| self.view.licensed(e, k)) {
                for d in 0..self.view.days {
                    let first = self.x(e, d * BLOCKS_PER_DAY, k);
                    for b in 1..BLOCKS_PER_DAY {
                        let other = self.x(e, d * BLOCKS_PER_DAY + b, k);
                        self.model.add_row(vec![(other, 1.0), (first, -1.0)], 0.0, 0.0);
                    }
                }
            }
        }

        let eight: Vec<usize> = self.view.eight_hour_types().collect();
        for e in (0..n).filter(|&e| self.view.eight_hour_licensed[e]) {
            // At least 16 hours between eight-hour shifts.
            for t in 0..m.saturating_sub(2) {
                let row = (t..t + 3)
                    .flat_map(|j| eight.iter().map(move |&k| (j, k)))
                    .map(|(j, k)| (self.x(e, j, k), 1.0))
                    .collect();
                self.model.add_row(row, -INF, 1.0);
            }
            for week in 0..inst.weeks {
                let row = (week * BLOCKS_PER_WEEK..(week + 1) * BLOCKS_PER_WEEK)
                    .flat_map(|j| eight.iter().map(move |&k| (j, k)))
                    .map(|(j, k)| (self.x(e, j, k), 1.0))
                    .collect();
                self.model.add_row(
                    row,
                    inst.min_shifts_per_week as f64,
                    inst.max_shifts_per_week as f64,
                );
            }
        }

        // Worked Sundays: at most one eight-hour block fits in a day, and an
        // all-day shift is counted through its first block.
        let sundays: Vec<usize> = (0..self.view.days).filter(|&d| self.view.sunday_day[d]).collect();
        for e in 0..n {
            let mut row = Vec::new();
            for &d in &sundays {
                for k in 0..s {
                    if self.view.all_day[k] {
                        row.push((self.x(e, d * BLOCKS_PER_DAY, k), 1.0));
                    } else {
                        for b in 0..BLOCKS_PER_DAY {
                            row.push((self.x(e, d * BLOCKS_PER_DAY + b, k), 1.0));
                        }
                    }
                }
            }
            let cap = inst.weeks as f64 - inst.min_rest_sundays as f64;
            self.model.add_row(row, -INF, cap);
        }

        for j in 0..m {
            for k in 0..s {
                let row = (0..n).map(|e| (self.x(e, j, k), 1.0)).collect();
                let d = inst.cover[j][k] as f64;
                self.model.add_row(row, d, d);
            }
        }

        // Rest days: y_t = 1 claims the 24-hour window of blocks t..t+2;
        // windows may not overlap.
        if inst.min_rest_days > 0 && m >= 3 {
            let windows = m - 2;
            let y0 = self.add_range(names::REST_WINDOW, n * windows, 0.0, 0.0, 1.0, false);
            for e in 0..n {
                let y = |t: usize| y0 + e * windows + t;
                for t in 0..windows {
                    for i in 0..3 {
                        let free = self.free_start + e * m + t + i;
                        self.model.add_row(vec![(y(t), 1.0), (free, -1.0)], -INF, 0.0);
                    }
                }
                for t in 0..windows.saturating_sub(2) {
                    self.model
                        .add_row((t..t + 3).map(|t| (y(t), 1.0)).collect(), -INF, 1.0);
                }
                self.model
                    .add_row((0..windows).map(|t| (y(t), 1.0)).collect(), inst.min_rest_days as f64, INF);
            }
        }

        for f in &inst.forbidden_sequences {
            for e in (0..n).filter(|&e| self.view.licensed(e, f.prev) && self.view.licensed(e, f.next_morning)) {
                for d in 0..self.view.days.saturating_sub(1) {
                    let mut row: Vec<(usize, f64)> = if self.view.all_day[f.prev] {
                        vec![(self.x(e, d * BLOCKS_PER_DAY, f.prev), 1.0)]
                    } else {
                        (0..BLOCKS_PER_DAY)
                            .map(|b| (self.x(e, d * BLOCKS_PER_DAY + b, f.prev), 1.0))
                            .collect()
                    };
                    let next = self.x(e, (d + 1) * BLOCKS_PER_DAY, f.next_morning);
                    if let Some(c) = row.iter_mut().find(|c| c.0 == next) {
                        c.1 += 1.0;
                    } else {
                        row.push((next, 1.0));
                    }
                    self.model.add_row(row, -INF, 1.0);
                }
            }
        }
    }

    /// Duty-count expression of employee `e` for type `k` over `blocks`
    /// (all-day types count their first block of each day).
    fn duty_terms(&self, e: usize, k: usize, blocks: impl Iterator<Item = usize>) -> Vec<(usize, f64)> {
        blocks
            .filter(|&j| !self.view.all_day[k] || j % BLOCKS_PER_DAY == 0)
            .map(|j| (self.x(e, j, k), 1.0))
            .collect()
    }

    /// `c_sum * sum_e |target - duty| + c_max * max_e |target - duty|` per type.
    fn deviation_terms(
        &mut self,
        names3: [&'static str; 3],
        targets: &[Vec<f64>],
        weekend_only: bool,
        c_sum: f64,
        c_max: f64,
    ) {
        let (n, m, s) = (self.view.n, self.view.m, self.view.s);
        let over = self.add_range(names3[0], n * s, c_sum, 0.0, INF, false);
        let under = self.add_range(names3[1], n * s, c_sum, 0.0, INF, false);
        let max = self.add_range(names3[2], s, c_max, 0.0, INF, false);
        for e in 0..n {
            for k in 0..s {
                let blocks = (0..m).filter(|&j| !weekend_only || self.view.weekend_block[j]);
                let mut row = self.duty_terms(e, k, blocks);
                let i = e * s + k;
                row.push((over + i, -1.0));
                row.push((under + i, 1.0));
                let t = targets[e][k];
                self.model.add_row(row, t, t);
                self.model
                    .add_row(vec![(max + k, 1.0), (over + i, -1.0), (under + i, -1.0)], 0.0, INF);
            }
        }
    }

    fn workload_objective(&mut self, w: &ObjectiveWeights) {
        let inst = self.inst;
        self.deviation_terms(
            [names::WORKLOAD_OVER, names::WORKLOAD_UNDER, names::WORKLOAD_MAX],
            &inst.workload_targets,
            false,
            w.c_f1(),
            w.c_f1_max(),
        );
        self.deviation_terms(
            [names::WEEKEND_OVER, names::WEEKEND_UNDER, names::WEEKEND_MAX],
            &inst.weekend_targets,
            true,
            w.c_f2(),
            w.c_f2_max(),
        );
    }

    /// `coef * sum |load - P|` over stated preferences; linear because the
    /// load of a block is 0 or 1.
    fn preference_objective(&mut self, coef: f64) {
        if coef == 0.0 {
            return;
        }
        let (n, m, s) = (self.view.n, self.view.m, self.view.s);
        for e in 0..n {
            for j in 0..m {
                let Some(p) = self.inst.preferences[e][j] else {
                    continue;
                };
                let sign = if p == 1 {
                    self.model.objective_offset += coef;
                    -1.0
                } else {
                    1.0
                };
                for k in 0..s {
                    let v = self.x(e, j, k);
                    self.model.objective[v] += sign * coef;
                }
            }
        }
    }

    /// `coef * sum |X - target|` over the whole tensor.
    fn hamming_objective(&mut self, target: &Roster, coef: f64) {
        if coef == 0.0 {
            return;
        }
        let (n, m, s) = (self.view.n, self.view.m, self.view.s);
        for e in 0..n {
            for j in 0..m {
                for k in 0..s {
                    let v = self.x(e, j, k);
                    if target.get(e, j, k) {
                        self.model.objective_offset += coef;
                        self.model.objective[v] -= coef;
                    } else {
                        self.model.objective[v] += coef;
                    }
                }
            }
        }
    }

    fn finish(self) -> RosterModel {
        debug_assert_eq!(self.map.num_vars(), self.model.num_vars());
        RosterModel {
            model: self.model,
            map: self.map,
            folded_bound_constraints: self.folded,
        }
    }
}

fn base_builder<'a>(inst: &'a RosterInstance, weights: &ObjectiveWeights, pref_scale: f64) -> Result<Builder<'a>> {
    ensure_valid(inst)?;
    weights.validate()?;
    let mut b = Builder::new(inst);
    b.assignment();
    b.hard_constraints();
    b.workload_objective(weights);
    b.preference_objective(weights.c_pref() * pref_scale);
    Ok(b)
}

/// The base rostering model.
pub fn build_milp(inst: &RosterInstance, weights: &ObjectiveWeights) -> Result<RosterModel> {
    Ok(base_builder(inst, weights, 1.0)?.finish())
}

/// Re-optimization model: the base model plus `mu` times the Hamming
/// distance to `original`, with blocks `0..lock_blocks` fixed to it.
pub fn build_event_driven_milp(
    inst: &RosterInstance,
    original: &Roster,
    weights: &ObjectiveWeights,
    lock_blocks: usize,
) -> Result<RosterModel> {
    check_dims(inst, original)?;
    if lock_blocks > inst.blocks {
        return Err(Error::InvalidConfig(format!(
            "lock horizon {lock_blocks} exceeds {} blocks",
            inst.blocks
        )));
    }
    let mut b = base_builder(inst, weights, 1.0)?;
    let mut conflicts = Vec::new();
    for e in 0..b.view.n {
        for j in 0..lock_blocks {
            for k in 0..b.view.s {
                let v = b.x(e, j, k);
                let on = original.get(e, j, k);
                if on && b.model.var_ub[v] == 0.0 {
                    conflicts.push(Coordinate::ejk(e, j, k));
                }
                let val = on as u8 as f64;
                b.model.var_lb[v] = val;
                b.model.var_ub[v] = val;
            }
        }
    }
    if !conflicts.is_empty() {
        return Err(Error::LockedPrefixConflict(conflicts));
    }
    b.hamming_objective(original, weights.mu);
    Ok(b.finish())
}

/// Second-stage pattern model: preferences weighted by `gamma`, deviation
/// from the company preference tensor by `1 - gamma`.
pub fn build_pattern_stage2(
    inst: &RosterInstance,
    company: &Roster,
    weights: &ObjectiveWeights,
) -> Result<RosterModel> {
    check_dims(inst, company)?;
    let mut b = base_builder(inst, weights, weights.gamma)?;
    b.hamming_objective(company, weights.c_pref() * (1.0 - weights.gamma));
    Ok(b.finish())
}

/// Extends a roster to a full model point, choosing the auxiliary variables
/// optimally for that roster. Works for every model except the stage-1
/// pattern model.
pub fn encode_point(inst: &RosterInstance, rm: &RosterModel, roster: &Roster) -> Result<Vec<f64>> {
    check_dims(inst, roster)?;
    let map = &rm.map;
    let view = InstanceView::new(inst);
    let (n, m, s) = (view.n, view.m, view.s);
    let mut x = vec![0.0; rm.model.num_vars()];
    for e in 0..n {
        for j in 0..m {
            for k in 0..s {
                x[map.x(e, j, k)] = roster.get(e, j, k) as u8 as f64;
            }
        }
    }
    if let Some(r) = map.range(names::FREE) {
        for e in 0..n {
            for j in 0..m {
                x[r.start + e * m + j] = (!roster.occupied(e, j)) as u8 as f64;
            }
        }
    }
    if let Some(r) = map.range(names::REST_WINDOW) {
        let windows = m - 2;
        for e in 0..n {
            let mut run = 0;
            for j in 0..m {
                if roster.occupied(e, j) {
                    run = 0;
                    continue;
                }
                run += 1;
                if run == 3 {
                    x[r.start + e * windows + j - 2] = 1.0;
                    run = 0;
                }
            }
        }
    }
    let groups = [
        (names::WORKLOAD_OVER, names::WORKLOAD_UNDER, names::WORKLOAD_MAX, &inst.workload_targets, false),
        (names::WEEKEND_OVER, names::WEEKEND_UNDER, names::WEEKEND_MAX, &inst.weekend_targets, true),
    ];
    for (over, under, max, targets, weekend_only) in groups {
        let (Some(ro), Some(ru), Some(rmx)) = (map.range(over), map.range(under), map.range(max)) else {
            continue;
        };
        for k in 0..s {
            let mut worst: f64 = 0.0;
            for e in 0..n {
                let duty = (0..m)
                    .filter(|&j| !weekend_only || view.weekend_block[j])
                    .filter(|&j| !view.all_day[k] || j % BLOCKS_PER_DAY == 0)
                    .filter(|&j| roster.get(e, j, k))
                    .count() as f64;
                let dev = targets[e][k] - duty;
                // duty - over + under = target
                x[ro.start + e * s + k] = (-dev).max(0.0);
                x[ru.start + e * s + k] = dev.max(0.0);
                worst = worst.max(dev.abs());
            }
            x[rmx.start + k] = worst;
        }
    }
    Ok(x)
}
