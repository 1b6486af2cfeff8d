//! Two-phase optimization: branch-and-bound for a diverse start and a lower
//! bound, then scatter search on the pool. A pure MILP mode runs
//! branch-and-bound alone for comparisons.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bnb::{compute_gap, relax_and_fix, solve_bnb, BnbConfig, BnbProgress, BnbResult, BnbStatus, FixingReport};
use crate::clock::{Clock, Deadline};
use crate::error::{Error, Result};
use crate::milp::{build_milp, extract_roster, RosterModel};
use crate::model::{
    check_feasibility, evaluate_objective, ObjectiveBreakdown, ObjectiveContext, ObjectiveWeights, Roster,
    RosterInstance,
};
use crate::scatter::{diversify, run_scatter_search, LocalSearchConfig, ScatterConfig, ScatterTermination};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Hybrid,
    MilpAlone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    RelaxFix,
    Bnb,
    Scatter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HybridConfig {
    pub gap_target: f64,
    /// Seconds allowed for branch-and-bound before scatter search takes over.
    pub phase1_time_budget: f64,
    pub total_time_limit: f64,
    pub use_relax_and_fix: bool,
    pub mode: Mode,
    pub seed: u64,
    pub pool_size: usize,
    pub refset_capacity: usize,
    /// Consecutive rejected swaps before local search stops; `None` is 50
    /// per employee.
    pub stall_threshold: Option<usize>,
    pub escalation_factor: f64,
    /// After scatter search stalls above the gap target, spend the remaining
    /// time in branch-and-bound cut off at the incumbent to raise the bound.
    pub tighten_bound: bool,
}

impl Default for HybridConfig {
    fn default() -> Self {
        Self {
            gap_target: 0.05,
            phase1_time_budget: 30.0,
            total_time_limit: 300.0,
            use_relax_and_fix: false,
            mode: Mode::Hybrid,
            seed: 0,
            pool_size: 6,
            refset_capacity: crate::scatter::DEFAULT_CAPACITY,
            stall_threshold: None,
            escalation_factor: 2.0,
            tighten_bound: true,
        }
    }
}

impl HybridConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gap_target) {
            return Err(Error::InvalidConfig("gap_target must lie in [0, 1]".into()));
        }
        if !(self.phase1_time_budget > 0.0) || !(self.total_time_limit > 0.0) {
            return Err(Error::InvalidConfig("time budgets must be positive".into()));
        }
        if self.pool_size < 2 || self.refset_capacity < 2 {
            return Err(Error::InvalidConfig("pool and reference set need room for two rosters".into()));
        }
        if self.stall_threshold == Some(0) || !(self.escalation_factor >= 1.0) {
            return Err(Error::InvalidConfig("invalid local search settings".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressEvent {
    pub elapsed_s: f64,
    pub phase: Phase,
    pub incumbent: Option<f64>,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizationStatus {
    Optimal,
    GapReached,
    TimeLimit,
    /// Search ran out of new solutions above the gap target.
    Stagnation,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub relax_fix: f64,
    pub bnb: f64,
    pub scatter: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub roster: Roster,
    pub objective: ObjectiveBreakdown,
    pub gap: f64,
    pub lower_bound: f64,
    pub status: OptimizationStatus,
    pub timings: PhaseTimings,
    pub trace: Vec<ProgressEvent>,
    pub bnb_status: BnbStatus,
    pub bnb_nodes: usize,
    pub fixing: Option<FixingReport>,
    pub scatter_termination: Option<ScatterTermination>,
}

/// Gap between an upper and a lower bound. A lower bound above the upper
/// one by more than numerical noise means something upstream is wrong.
pub fn checked_gap(ub: f64, lb: f64) -> Result<f64> {
    if lb > ub + 1e-6 * ub.abs().max(1.0) {
        return Err(Error::BoundInconsistency { lb, ub });
    }
    Ok(compute_gap(ub, lb.min(ub)))
}

/// Merges events from every phase into one stream with a nonincreasing
/// incumbent and a nondecreasing bound.
struct Stream<'a> {
    clock: &'a dyn Clock,
    start: f64,
    incumbent: Option<f64>,
    bound: Option<f64>,
    events: Vec<ProgressEvent>,
    sink: &'a mut dyn FnMut(&ProgressEvent),
}

impl Stream<'_> {
    fn emit(&mut self, phase: Phase, incumbent: Option<f64>, bound: Option<f64>, detail: String) {
        if let Some(v) = incumbent.filter(|v| v.is_finite()) {
            self.incumbent = Some(self.incumbent.map_or(v, |c| c.min(v)));
        }
        if let Some(v) = bound.filter(|v| v.is_finite()) {
            let v = match self.incumbent {
                Some(c) => v.min(c),
                None => v,
            };
            self.bound = Some(self.bound.map_or(v, |c| c.max(v)));
        }
        let gap = match (self.incumbent, self.bound) {
            (Some(u), Some(l)) => Some(compute_gap(u, l)),
            _ => None,
        };
        let ev = ProgressEvent {
            elapsed_s: self.clock.elapsed_secs() - self.start,
            phase,
            incumbent: self.incumbent,
            bound: self.bound,
            gap,
            detail,
        };
        (self.sink)(&ev);
        self.events.push(ev);
    }
}

/// Runs the configured pipeline on the base model of `inst`.
pub fn optimize(
    inst: &RosterInstance,
    weights: &ObjectiveWeights,
    config: &HybridConfig,
    clock: &dyn Clock,
    sink: &mut dyn FnMut(&ProgressEvent),
) -> Result<OptimizationResult> {
    let rm = build_milp(inst, weights)?;
    optimize_model(inst, weights, ObjectiveContext::plain(), &rm, &[], config, clock, sink)
}

/// Runs the pipeline on a prebuilt model whose objective matches
/// `evaluate_objective` under `ctx`. Feasible rosters in `starts` seed
/// the search: the best one cuts off branch-and-bound and all of them join
/// the scatter search population.
#[allow(clippy::too_many_arguments)]
pub fn optimize_model(
    inst: &RosterInstance,
    weights: &ObjectiveWeights,
    ctx: ObjectiveContext<'_>,
    rm: &RosterModel,
    starts: &[Roster],
    config: &HybridConfig,
    clock: &dyn Clock,
    sink: &mut dyn FnMut(&ProgressEvent),
) -> Result<OptimizationResult> {
    config.validate()?;
    weights.validate()?;
    let total = Deadline::new(clock, config.total_time_limit);
    let mut stream = Stream {
        clock,
        start: clock.elapsed_secs(),
        incumbent: None,
        bound: None,
        events: Vec::new(),
        sink,
    };
    let mut timings = PhaseTimings::default();
    let hybrid = config.mode == Mode::Hybrid;

    let mut seeds: Vec<(Roster, f64)> = Vec::new();
    for x in starts {
        if check_feasibility(inst, x)?.feasible {
            seeds.push((x.clone(), evaluate_objective(inst, x, weights, ctx).total));
        }
    }
    let cutoff = seeds.iter().map(|s| s.1).min_by(f64::total_cmp);
    if let Some(c) = cutoff {
        stream.emit(Phase::Bnb, Some(c), None, format!("{} starting rosters", seeds.len()));
    }

    // Relax-and-fix: the root LP of the full model gives the global bound.
    let mut fixing = None;
    let mut reduced = None;
    if config.use_relax_and_fix {
        let t0 = total.elapsed();
        let (model, report) = relax_and_fix(&rm.model, 1e-6)?;
        stream.emit(
            Phase::RelaxFix,
            None,
            Some(report.lp_objective),
            format!("fixed {} of {} integer variables", report.fixed, report.fixed + report.free),
        );
        timings.relax_fix = total.elapsed() - t0;
        fixing = Some(report);
        reduced = Some(model);
    }

    let phase1_limit = if hybrid {
        config.phase1_time_budget.min(total.remaining())
    } else {
        total.remaining()
    };
    let bnb_cfg = BnbConfig {
        pool_size: config.pool_size,
        time_limit: Some(phase1_limit),
        gap_target: config.gap_target,
        stop_when_pool_full: hybrid,
        cutoff,
        ..BnbConfig::default()
    };
    let t0 = total.elapsed();
    let global_bound = fixing.map(|f| f.lp_objective);
    let run_bnb = |model, stream: &mut Stream<'_>, detail: &str| -> Result<BnbResult> {
        let mut on_progress = |p: &BnbProgress| {
            let bound = global_bound.unwrap_or(p.best_bound);
            stream.emit(Phase::Bnb, p.incumbent, Some(bound), format!("{detail}: {} nodes", p.node_count));
        };
        solve_bnb(model, &bnb_cfg, clock, &mut on_progress)
    };
    let mut used_reduced = reduced.is_some();
    let mut phase1 = match &reduced {
        Some(model) => match run_bnb(model, &mut stream, "reduced model") {
            Ok(r) if r.status != BnbStatus::Infeasible => Some(r),
            Ok(_) | Err(Error::Infeasible) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    if phase1.is_none() {
        if used_reduced {
            stream.emit(
                Phase::Bnb,
                None,
                None,
                "reduced model infeasible; solving the full model".into(),
            );
            used_reduced = false;
        }
        phase1 = Some(run_bnb(&rm.model, &mut stream, "full model")?);
    }
    let phase1 = phase1.ok_or(Error::NoSolution)?;
    timings.bnb = total.elapsed() - t0;
    if phase1.status == BnbStatus::Infeasible {
        return Err(Error::Infeasible);
    }
    let mut lower = match (used_reduced, global_bound) {
        (true, Some(b)) => b,
        _ => phase1.best_bound,
    };
    for e in &phase1.pool {
        let x = extract_roster(&rm.map, &e.x)?;
        let f = evaluate_objective(inst, &x, weights, ctx).total;
        seeds.push((x, f));
    }
    seeds.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (mut best, mut best_obj) = seeds.first().cloned().ok_or(Error::NoSolution)?;
    stream.emit(Phase::Bnb, Some(best_obj), Some(lower), format!("phase 1 ended: {:?}", phase1.status));
    let mut tree_exhausted = phase1.status == BnbStatus::Optimal && !used_reduced;
    let mut bnb_status = phase1.status;
    let mut bnb_nodes = phase1.node_count;
    let mut scatter_termination = None;

    let gap_met = |obj: f64, lb: f64| compute_gap(obj, lb) <= config.gap_target;
    if hybrid && !gap_met(best_obj, lower) && !tree_exhausted && !total.expired() {
        let t0 = total.elapsed();
        let refset = diversify(seeds, config.refset_capacity)?;
        let scfg = ScatterConfig {
            gap_target: config.gap_target,
            time_limit: Some(total.remaining()),
            max_generations: None,
            local_search: LocalSearchConfig {
                initial_stall_threshold: config.stall_threshold,
                escalation_factor: config.escalation_factor,
                rng_seed: config.seed,
                ..LocalSearchConfig::default()
            },
        };
        let mut on_generation = |g: &crate::scatter::GenerationRecord| {
            stream.emit(
                Phase::Scatter,
                Some(g.best_objective),
                Some(lower),
                format!(
                    "generation {}: {} subsets, {} accepted, {} rejected",
                    g.generation, g.subsets, g.accepted, g.rejected
                ),
            );
        };
        let out = run_scatter_search(inst, weights, ctx, &refset, lower, &scfg, clock, &mut on_generation)?;
        if out.objective < best_obj {
            best = out.best;
            best_obj = out.objective;
        }
        scatter_termination = Some(out.termination);
        timings.scatter = total.elapsed() - t0;

        if config.tighten_bound && !gap_met(best_obj, lower) && !total.expired() {
            let t0 = total.elapsed();
            let cfg = BnbConfig {
                pool_size: config.pool_size,
                time_limit: Some(total.remaining()),
                gap_target: config.gap_target,
                cutoff: Some(best_obj),
                ..BnbConfig::default()
            };
            let mut on_progress = |p: &BnbProgress| {
                stream.emit(
                    Phase::Bnb,
                    p.incumbent,
                    Some(p.best_bound),
                    format!("bound tightening: {} nodes", p.node_count),
                );
            };
            let res = solve_bnb(&rm.model, &cfg, clock, &mut on_progress)?;
            if let Some(e) = res.incumbent().filter(|e| e.objective < best_obj) {
                best = extract_roster(&rm.map, &e.x)?;
                best_obj = evaluate_objective(inst, &best, weights, ctx).total;
            }
            lower = lower.max(res.best_bound.min(best_obj));
            tree_exhausted = res.status == BnbStatus::Optimal;
            bnb_status = res.status;
            bnb_nodes += res.node_count;
            timings.bnb += total.elapsed() - t0;
        }
    }

    if !check_feasibility(inst, &best)?.feasible {
        return Err(Error::Internal("model solution fails the roster checker".into()));
    }
    let objective = evaluate_objective(inst, &best, weights, ctx);
    let lower_bound = lower.min(objective.total);
    let gap = checked_gap(objective.total, lower)?;
    stream.emit(
        if scatter_termination.is_some() { Phase::Scatter } else { Phase::Bnb },
        Some(objective.total),
        Some(lower_bound),
        "finished".into(),
    );
    let status = if gap <= 1e-9 || tree_exhausted {
        OptimizationStatus::Optimal
    } else if gap <= config.gap_target {
        OptimizationStatus::GapReached
    } else if total.expired() {
        OptimizationStatus::TimeLimit
    } else {
        OptimizationStatus::Stagnation
    };
    timings.total = total.elapsed();
    Ok(OptimizationResult {
        roster: best,
        objective,
        gap,
        lower_bound,
        status,
        timings,
        trace: stream.events,
        bnb_status,
        bnb_nodes,
        fixing,
        scatter_termination,
    })
}
