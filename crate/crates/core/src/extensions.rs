//! Event-driven re-optimization, adaptive rolling-horizon planning and
//! company work patterns.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bnb::{solve_bnb, BnbConfig, BnbStatus};
use crate::clock::{Clock, Deadline};
use crate::error::{Error, Result};
use crate::hybrid::{optimize_model, HybridConfig, OptimizationResult, ProgressEvent};
use crate::milp::{
    build_event_driven_milp, build_milp, build_pattern_stage1, build_pattern_stage2, company_preference,
    decode_pattern_choice, WorkPattern,
};
use crate::model::objective::Workloads;
use crate::model::{
    check_feasibility, default_targets, InstanceView, ObjectiveContext, ObjectiveWeights, Roster, RosterInstance,
    TargetMatrix, BLOCKS_PER_WEEK,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeKind {
    Availability,
    Vacation,
    Preference,
}

/// A request to change one employee's parameters on some blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeRequest {
    pub employee: usize,
    pub kind: ChangeKind,
    pub blocks: Vec<usize>,
    /// One value per block. `None` clears a preference and is not allowed
    /// for the other kinds.
    pub values: Vec<Option<u8>>,
    pub effective_from: usize,
}

impl ChangeRequest {
    pub fn validate(&self, inst: &RosterInstance) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidChange(msg.to_string()));
        if self.employee >= inst.employees {
            return bad("employee index out of range");
        }
        if self.blocks.len() != self.values.len() {
            return bad("blocks and values differ in length");
        }
        if self.effective_from > inst.blocks {
            return bad("effective_from lies beyond the horizon");
        }
        for (&j, &v) in self.blocks.iter().zip(&self.values) {
            if j >= inst.blocks {
                return bad("block index out of range");
            }
            if j < self.effective_from {
                return bad("a changed block precedes effective_from");
            }
            match (self.kind, v) {
                (ChangeKind::Preference, None) => {}
                (_, Some(0 | 1)) => {}
                (ChangeKind::Preference, Some(_)) => return bad("preferences take 0, 1 or null"),
                (_, _) => return bad("availability and vacation take 0 or 1"),
            }
        }
        Ok(())
    }
}

/// Applies change requests to a copy of the instance. Two requests that set
/// the same parameter to different values are rejected with their
/// `(employee, block)` coordinates.
pub fn apply_changes(inst: &RosterInstance, changes: &[ChangeRequest]) -> Result<RosterInstance> {
    let mut seen: BTreeMap<(usize, u8, usize), Option<u8>> = BTreeMap::new();
    let mut conflicts = Vec::new();
    for c in changes {
        c.validate(inst)?;
        for (&j, &v) in c.blocks.iter().zip(&c.values) {
            let key = (c.employee, c.kind as u8, j);
            match seen.get(&key) {
                Some(&prev) if prev != v => conflicts.push((c.employee, j)),
                _ => {
                    seen.insert(key, v);
                }
            }
        }
    }
    if !conflicts.is_empty() {
        conflicts.sort_unstable();
        conflicts.dedup();
        return Err(Error::ConflictingChanges(conflicts));
    }
    let mut out = inst.clone();
    for (&(e, kind, j), &v) in &seen {
        match kind {
            k if k == ChangeKind::Availability as u8 => out.availability[e][j] = v.unwrap_or(0),
            k if k == ChangeKind::Vacation as u8 => out.vacation[e][j] = v.unwrap_or(0),
            _ => out.preferences[e][j] = v,
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventResult {
    pub instance: RosterInstance,
    pub result: OptimizationResult,
    /// Hamming distance between the original and the new roster.
    pub deviation: usize,
    /// Blocks `[0, lock_blocks)` were kept as in the original.
    pub lock_blocks: usize,
}

/// Re-optimizes `original` after `changes`, keeping everything before the
/// earliest `effective_from` fixed and charging `weights.mu` per changed
/// assignment. The original roster, if still feasible, seeds the search.
#[allow(clippy::too_many_arguments)]
pub fn reoptimize_event(
    inst: &RosterInstance,
    original: &Roster,
    changes: &[ChangeRequest],
    weights: &ObjectiveWeights,
    config: &HybridConfig,
    clock: &dyn Clock,
    sink: &mut dyn FnMut(&ProgressEvent),
) -> Result<EventResult> {
    let report = check_feasibility(inst, original)?;
    if !report.feasible {
        return Err(Error::InvalidConfig(
            "the original roster is infeasible for the original instance".into(),
        ));
    }
    let updated = apply_changes(inst, changes)?;
    let lock_blocks = changes.iter().map(|c| c.effective_from).min().unwrap_or(inst.blocks);
    let rm = build_event_driven_milp(&updated, original, weights, lock_blocks)?;
    let ctx = ObjectiveContext {
        original: Some(original),
        company: None,
    };
    let result = optimize_model(
        &updated,
        weights,
        ctx,
        &rm,
        core::slice::from_ref(original),
        config,
        clock,
        sink,
    )?;
    let deviation = result.roster.hamming(original);
    Ok(EventResult {
        instance: updated,
        result,
        deviation,
        lock_blocks,
    })
}

/// Running sums of per-employee, per-shift-type duties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cumulative {
    pub total: TargetMatrix,
    pub weekend: TargetMatrix,
}

impl Cumulative {
    pub fn zeros(employees: usize, shift_types: usize) -> Self {
        Self {
            total: alloc::vec![alloc::vec![0.0; shift_types]; employees],
            weekend: alloc::vec![alloc::vec![0.0; shift_types]; employees],
        }
    }

    pub fn add(&mut self, total: &TargetMatrix, weekend: &TargetMatrix) {
        for (acc, add) in [(&mut self.total, total), (&mut self.weekend, weekend)] {
            for (a, b) in acc.iter_mut().zip(add) {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
        }
    }
}

/// Shifts each base target by the cumulative target-minus-actual
/// difference, separately for total and weekend duties.
pub fn adjust_targets(
    base_t: &TargetMatrix,
    base_g: &TargetMatrix,
    targets: &Cumulative,
    actuals: &Cumulative,
) -> Result<(TargetMatrix, TargetMatrix)> {
    let shape = |m: &TargetMatrix| (m.len(), m.first().map_or(0, |r| r.len()));
    let want = shape(base_t);
    let all = [base_g, &targets.total, &targets.weekend, &actuals.total, &actuals.weekend];
    if all.iter().any(|m| shape(m) != want) || all.iter().chain([&base_t]).any(|m| m.iter().any(|r| r.len() != want.1))
    {
        return Err(Error::InvalidConfig("target matrices differ in shape".into()));
    }
    let adjust = |base: &TargetMatrix, t: &TargetMatrix, a: &TargetMatrix| -> TargetMatrix {
        base.iter()
            .zip(t.iter().zip(a))
            .map(|(b, (t, a))| b.iter().zip(t.iter().zip(a)).map(|(b, (t, a))| b + (t - a)).collect())
            .collect()
    };
    Ok((
        adjust(base_t, &targets.total, &actuals.total),
        adjust(base_g, &targets.weekend, &actuals.weekend),
    ))
}

/// Per-employee, per-shift-type duties worked in `x`: `(total, weekend)`.
pub fn realized_workloads(inst: &RosterInstance, x: &Roster) -> Result<(TargetMatrix, TargetMatrix)> {
    if x.dims() != inst.dims() {
        return Err(Error::DimensionMismatch {
            expected: inst.dims(),
            found: x.dims(),
        });
    }
    let view = InstanceView::new(inst);
    let loads = Workloads::new(&view, x);
    let s = view.s;
    let rows = |v: &[f64]| (0..view.n).map(|e| v[e * s..(e + 1) * s].to_vec()).collect();
    Ok((rows(&loads.total), rows(&loads.weekend)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodPlan {
    pub period: usize,
    /// The period's instance with the targets it was solved with.
    pub instance: RosterInstance,
    pub result: OptimizationResult,
    pub realized_total: TargetMatrix,
    pub realized_weekend: TargetMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingPlan {
    pub periods: Vec<PeriodPlan>,
    /// Set when a period could not be solved; later periods were skipped.
    pub failure: Option<PeriodFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodFailure {
    pub period: usize,
    pub reason: alloc::string::String,
}

impl From<PeriodFailure> for Error {
    fn from(f: PeriodFailure) -> Self {
        Error::PeriodFailed {
            period: f.period,
            reason: f.reason,
        }
    }
}

impl RollingPlan {
    /// Cross-employee population standard deviation of the weekend duties
    /// summed over all periods and shift types.
    pub fn weekend_spread(&self) -> f64 {
        let Some(first) = self.periods.first() else {
            return 0.0;
        };
        let n = first.realized_weekend.len();
        let per: Vec<f64> = (0..n)
            .map(|e| self.periods.iter().map(|p| p.realized_weekend[e].iter().sum::<f64>()).sum())
            .collect();
        population_std(&per)
    }
}

pub(crate) fn population_std(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64;
    libm::sqrt(var)
}

/// Splits `annual` into consecutive periods of `period_weeks` weeks and
/// solves them in order. With `adaptive`, each period's targets are
/// corrected by the cumulative deviation of earlier periods.
#[allow(clippy::too_many_arguments)]
pub fn plan_rolling_horizon(
    annual: &RosterInstance,
    period_weeks: usize,
    weights: &ObjectiveWeights,
    config: &HybridConfig,
    adaptive: bool,
    clock: &dyn Clock,
    sink: &mut dyn FnMut(usize, &ProgressEvent),
) -> Result<RollingPlan> {
    if period_weeks == 0 || annual.weeks % period_weeks != 0 || annual.blocks != annual.weeks * BLOCKS_PER_WEEK {
        return Err(Error::InvalidConfig(format!(
            "{} weeks do not split into periods of {period_weeks} weeks",
            annual.weeks
        )));
    }
    let count = annual.weeks / period_weeks;
    let (n, _, s) = annual.dims();
    let mut targets = Cumulative::zeros(n, s);
    let mut actuals = Cumulative::zeros(n, s);
    let mut plan = RollingPlan {
        periods: Vec::new(),
        failure: None,
    };
    for p in 0..count {
        let mut inst = annual.slice_weeks(p * period_weeks, period_weeks);
        let (base_t, base_g) = default_targets(&inst)?;
        let (t, g) = if adaptive {
            adjust_targets(&base_t, &base_g, &targets, &actuals)?
        } else {
            (base_t.clone(), base_g.clone())
        };
        inst.workload_targets = t;
        inst.weekend_targets = g;
        let solved = build_milp(&inst, weights).and_then(|rm| {
            optimize_model(
                &inst,
                weights,
                ObjectiveContext::plain(),
                &rm,
                &[],
                config,
                clock,
                &mut |ev| sink(p, ev),
            )
        });
        let result = match solved {
            Ok(r) => r,
            Err(e) => {
                plan.failure = Some(PeriodFailure {
                    period: p,
                    reason: e.to_string(),
                });
                break;
            }
        };
        let (rt, rg) = realized_workloads(&inst, &result.roster)?;
        targets.add(&base_t, &base_g);
        actuals.add(&rt, &rg);
        plan.periods.push(PeriodPlan {
            period: p,
            instance: inst,
            result,
            realized_total: rt,
            realized_weekend: rg,
        });
    }
    Ok(plan)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternResult {
    /// Chosen variant (starting week) per employee.
    pub variants: Vec<usize>,
    /// Conflict slack of the stage-1 optimum.
    pub stage1_objective: f64,
    /// The company preference tensor implied by `variants`.
    pub company: Roster,
    pub result: OptimizationResult,
    /// Hamming distance between the roster and `company`.
    pub f4: usize,
}

/// Two-stage pattern optimization: stage 1 picks each employee's variant
/// by branch-and-bound to optimality, stage 2 runs the configured pipeline
/// on the objective that trades workload terms against pattern deviation
/// through `weights.gamma`.
pub fn optimize_with_patterns(
    inst: &RosterInstance,
    pattern: &WorkPattern,
    weights: &ObjectiveWeights,
    config: &HybridConfig,
    clock: &dyn Clock,
    sink: &mut dyn FnMut(&ProgressEvent),
) -> Result<PatternResult> {
    weights.validate()?;
    config.validate()?;
    let deadline = Deadline::new(clock, config.total_time_limit);
    let stage1 = build_pattern_stage1(inst, pattern)?;
    let cfg = BnbConfig {
        pool_size: 2,
        time_limit: Some(config.total_time_limit),
        ..BnbConfig::default()
    };
    let res = solve_bnb(&stage1.model, &cfg, clock, &mut |_| {})?;
    if res.status == BnbStatus::Infeasible {
        return Err(Error::Infeasible);
    }
    let best = res.incumbent().ok_or(Error::NoSolution)?;
    let variants = decode_pattern_choice(&stage1.map, &best.x)?;
    let company = company_preference(inst, pattern, &variants)?;
    let rm = build_pattern_stage2(inst, &company, weights)?;
    let ctx = ObjectiveContext {
        original: None,
        company: Some(&company),
    };
    let stage2 = HybridConfig {
        total_time_limit: deadline.remaining().max(f64::MIN_POSITIVE),
        ..config.clone()
    };
    let result = optimize_model(inst, weights, ctx, &rm, &[], &stage2, clock, sink)?;
    let f4 = result.roster.hamming(&company);
    Ok(PatternResult {
        variants,
        stage1_objective: best.objective,
        company,
        result,
        f4,
    })
}
