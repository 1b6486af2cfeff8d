//! Branch-and-bound over the LP relaxation, collecting a pool of diverse
//! integer solutions and a global lower bound, plus the relax-and-fix
//! reduction.

use alloc::collections::BinaryHeap;
use alloc::rc::Rc;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::clock::{Clock, Deadline};
use crate::error::{Error, Result};
use crate::lp::{Basis, LpOptions, LpStatus, LpWorkspace};
use crate::milp::MilpModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BnbConfig {
    /// Solutions kept in the pool.
    pub pool_size: usize,
    /// Wall-clock budget in seconds; `None` runs until the gap target.
    pub time_limit: Option<f64>,
    /// Stop once `(incumbent - bound) / incumbent` is at most this.
    pub gap_target: f64,
    pub node_limit: Option<usize>,
    pub integrality_tol: f64,
    /// A candidate no better than the worst pool member may still enter if
    /// it is within this fraction of it and adds diversity.
    pub replace_window: f64,
    /// Dive depth-first from each branched node while the pool is not full.
    pub plunge: bool,
    /// Stop as soon as the pool is full and the bound is finite.
    pub stop_when_pool_full: bool,
    /// Objective of a known feasible solution found elsewhere. Nodes that
    /// cannot beat it are pruned and the gap is measured against it.
    pub cutoff: Option<f64>,
}

impl Default for BnbConfig {
    fn default() -> Self {
        Self {
            pool_size: 6,
            time_limit: None,
            gap_target: 0.0,
            node_limit: None,
            integrality_tol: 1e-6,
            replace_window: 0.10,
            plunge: true,
            stop_when_pool_full: false,
            cutoff: None,
        }
    }
}

impl BnbConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pool_size < 2 {
            return Err(Error::InvalidConfig("pool_size must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.gap_target) {
            return Err(Error::InvalidConfig("gap_target must lie in [0, 1]".into()));
        }
        if !(self.integrality_tol > 0.0 && self.integrality_tol < 0.5) {
            return Err(Error::InvalidConfig("integrality_tol must lie in (0, 0.5)".into()));
        }
        if self.time_limit.is_some_and(|t| !(t >= 0.0)) {
            return Err(Error::InvalidConfig("time_limit must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BnbStatus {
    Optimal,
    GapReached,
    TimeLimit,
    NodeLimit,
    PoolFilled,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BnbResult {
    /// Sorted by objective, best first.
    pub pool: Vec<PoolEntry>,
    pub best_bound: f64,
    pub status: BnbStatus,
    pub node_count: usize,
    pub lp_iterations: usize,
    /// Objective of the root relaxation.
    pub root_bound: f64,
}

impl BnbResult {
    pub fn incumbent(&self) -> Option<&PoolEntry> {
        self.pool.first()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BnbProgress {
    pub node_count: usize,
    pub incumbent: Option<f64>,
    pub best_bound: f64,
    pub elapsed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixingReport {
    pub fixed: usize,
    pub free: usize,
    pub lp_objective: f64,
}

/// Solves the LP relaxation and fixes every integer variable that comes out
/// integral. The reduced model's feasible set is contained in the original's.
pub fn relax_and_fix(model: &MilpModel, tol: f64) -> Result<(MilpModel, FixingReport)> {
    model.validate()?;
    let sol = LpWorkspace::new(model, LpOptions::default()).solve(None, None, None);
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible),
        LpStatus::Unbounded => return Err(Error::Unbounded),
        LpStatus::IterationLimit => return Err(Error::NoSolution),
    }
    let mut reduced = model.clone();
    let (mut fixed, mut free) = (0, 0);
    for j in 0..model.num_vars() {
        if !model.integrality[j] {
            continue;
        }
        let r = crate::num::round(sol.x[j]);
        if (sol.x[j] - r).abs() <= tol {
            reduced.var_lb[j] = r;
            reduced.var_ub[j] = r;
            fixed += 1;
        } else {
            free += 1;
        }
    }
    Ok((
        reduced,
        FixingReport {
            fixed,
            free,
            lp_objective: sol.objective,
        },
    ))
}

/// Relative gap `(incumbent - bound) / max(incumbent, 1e-9)`, 0 when the
/// two meet and infinite without an incumbent.
pub fn compute_gap(incumbent: f64, bound: f64) -> f64 {
    if !incumbent.is_finite() {
        return f64::INFINITY;
    }
    let diff = (incumbent - bound).max(0.0);
    if diff <= 1e-9 * incumbent.abs().max(1.0) {
        return 0.0;
    }
    diff / incumbent.max(1e-9)
}

struct Node {
    bound: f64,
    seq: usize,
    depth: usize,
    changes: Vec<(usize, f64, f64)>,
    basis: Option<Rc<Basis>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap order: lowest bound first, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

/// The pool with its replacement policy.
struct Pool {
    size: usize,
    window: f64,
    ints: Vec<usize>,
    entries: Vec<PoolEntry>,
}

impl Pool {
    fn distance(&self, a: &[f64], b: &[f64]) -> usize {
        self.ints.iter().filter(|&&j| a[j] != b[j]).count()
    }

    fn min_pairwise(&self, entries: &[&[f64]]) -> usize {
        let mut best = usize::MAX;
        for i in 0..entries.len() {
            for k in i + 1..entries.len() {
                best = best.min(self.distance(entries[i], entries[k]));
            }
        }
        best
    }

    /// Offers a candidate; returns whether it entered.
    fn offer(&mut self, x: Vec<f64>, objective: f64) -> bool {
        if self.entries.iter().any(|e| self.distance(&e.x, &x) == 0) {
            return false;
        }
        if self.entries.len() < self.size {
            self.insert(PoolEntry { x, objective });
            return true;
        }
        let worst = self.entries.len() - 1;
        let worst_obj = self.entries[worst].objective;
        if objective < worst_obj {
            self.entries.pop();
            self.insert(PoolEntry { x, objective });
            return true;
        }
        if objective > worst_obj + self.window * worst_obj.abs() {
            return false;
        }
        // Swap out the most similar member (never the incumbent) if that
        // spreads the pool.
        let Some((closest, _)) = self
            .entries
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, e)| (i, self.distance(&e.x, &x)))
            .min_by_key(|&(i, d)| (d, i))
        else {
            return false;
        };
        let before: Vec<&[f64]> = self.entries.iter().map(|e| e.x.as_slice()).collect();
        let mut after = before.clone();
        after[closest] = &x;
        if self.min_pairwise(&after) > self.min_pairwise(&before) {
            self.entries.remove(closest);
            self.insert(PoolEntry { x, objective });
            return true;
        }
        false
    }

    fn insert(&mut self, e: PoolEntry) {
        let at = self.entries.partition_point(|p| p.objective <= e.objective);
        self.entries.insert(at, e);
    }

    fn best(&self) -> Option<f64> {
        self.entries.first().map(|e| e.objective)
    }
}

fn most_fractional(model: &MilpModel, x: &[f64], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for j in 0..model.num_vars() {
        if !model.integrality[j] {
            continue;
        }
        let f = crate::num::frac_dist(x[j]);
        if f > tol && best.is_none_or(|(_, bf)| f > bf) {
            best = Some((j, f));
        }
    }
    best.map(|(j, _)| j)
}

/// Branch-and-bound with best-bound node selection and most-fractional
/// branching (ties to the lowest index). While the pool is not full, each
/// branched node is followed by a depth-first plunge into the child on the
/// rounding side.
pub fn solve_bnb(
    model: &MilpModel,
    config: &BnbConfig,
    clock: &dyn Clock,
    progress: &mut dyn FnMut(&BnbProgress),
) -> Result<BnbResult> {
    config.validate()?;
    model.validate()?;
    let deadline = Deadline::new(clock, config.time_limit.unwrap_or(f64::INFINITY));
    let tol = config.integrality_tol;
    let mut ws = LpWorkspace::new(model, LpOptions::default());
    let mut pool = Pool {
        size: config.pool_size,
        window: config.replace_window,
        ints: (0..model.num_vars()).filter(|&j| model.integrality[j]).collect(),
        entries: Vec::new(),
    };
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let mut nodes = 0usize;
    let mut iterations = 0usize;
    let mut reported_bound = f64::NEG_INFINITY;
    let mut root_bound = f64::NAN;
    let mut lb = model.var_lb.clone();
    let mut ub = model.var_ub.clone();

    let mut next: Option<Node> = Some(Node {
        bound: f64::NEG_INFINITY,
        seq: 0,
        depth: 0,
        changes: Vec::new(),
        basis: None,
    });
    let mut last_report: Option<BnbProgress> = None;
    let cutoff = config.cutoff.unwrap_or(f64::INFINITY);
    let known = |pool: &Pool| -> Option<f64> {
        let b = pool.best().unwrap_or(f64::INFINITY).min(cutoff);
        b.is_finite().then_some(b)
    };

    let status = loop {
        let node = match next.take() {
            Some(n) => n,
            None => match heap.pop() {
                Some(n) => n,
                None => {
                    let Some(best) = known(&pool) else {
                        break BnbStatus::Infeasible;
                    };
                    reported_bound = reported_bound.max(best);
                    break BnbStatus::Optimal;
                }
            },
        };

        // Global bound over everything still open, this node included.
        let open_min = heap.peek().map_or(f64::INFINITY, |n: &Node| n.bound).min(node.bound);
        let bound = match known(&pool) {
            Some(b) => open_min.min(b),
            None => open_min,
        };
        if bound > reported_bound {
            reported_bound = bound;
        }
        let report = BnbProgress {
            node_count: nodes,
            incumbent: pool.best(),
            best_bound: reported_bound,
            elapsed: deadline.elapsed(),
        };
        if reported_bound.is_finite()
            && last_report.is_none_or(|r| r.incumbent != report.incumbent || r.best_bound != report.best_bound)
        {
            progress(&report);
            last_report = Some(report);
        }
        if let Some(best) = known(&pool) {
            if compute_gap(best, reported_bound) <= config.gap_target {
                heap.push(node);
                break if reported_bound >= best - 1e-9 * best.abs().max(1.0) {
                    BnbStatus::Optimal
                } else {
                    BnbStatus::GapReached
                };
            }
            if node.bound >= best - 1e-9 * best.abs().max(1.0) {
                continue;
            }
        }
        if config.stop_when_pool_full && pool.entries.len() >= pool.size && reported_bound.is_finite() {
            heap.push(node);
            break BnbStatus::PoolFilled;
        }
        if deadline.expired() {
            heap.push(node);
            break BnbStatus::TimeLimit;
        }
        if config.node_limit.is_some_and(|l| nodes >= l) {
            heap.push(node);
            break BnbStatus::NodeLimit;
        }

        lb.copy_from_slice(&model.var_lb);
        ub.copy_from_slice(&model.var_ub);
        for &(j, l, u) in &node.changes {
            lb[j] = l;
            ub[j] = u;
        }
        let sol = ws.solve(Some((&lb, &ub)), node.basis.as_deref(), Some(&deadline));
        nodes += 1;
        iterations += sol.iterations;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                if nodes == 1 {
                    return Err(Error::Unbounded);
                }
                continue;
            }
            LpStatus::IterationLimit => {
                heap.push(node);
                break BnbStatus::TimeLimit;
            }
        }
        let obj = sol.objective.max(node.bound);
        if nodes == 1 {
            root_bound = sol.objective;
        }
        if obj >= cutoff - 1e-9 * cutoff.abs().max(1.0)
            || pool.best().is_some_and(|b| obj >= b - 1e-9 * b.abs().max(1.0)) && pool.entries.len() >= pool.size
        {
            continue;
        }

        match most_fractional(model, &sol.x, tol) {
            None => {
                let mut x = sol.x;
                for &j in &pool.ints {
                    x[j] = crate::num::round(x[j]);
                }
                let value = model.objective_value(&x);
                pool.offer(x, value);
            }
            Some(j) => {
                if known(&pool).is_some_and(|b| obj >= b - 1e-9 * b.abs().max(1.0)) {
                    continue;
                }
                let basis = sol.basis.map(Rc::new);
                let v = sol.x[j];
                let down_ub = crate::num::floor(v);
                let up_lb = down_ub + 1.0;
                let mut children = [(lb[j], down_ub), (up_lb, ub[j])].map(|(l, u)| {
                    let mut changes = node.changes.clone();
                    changes.push((j, l, u));
                    seq += 1;
                    Node {
                        bound: obj,
                        seq,
                        depth: node.depth + 1,
                        changes,
                        basis: basis.clone(),
                    }
                });
                let up_first = v - down_ub >= 0.5;
                if up_first {
                    children.swap(0, 1);
                }
                let [first, second] = children;
                heap.push(second);
                if config.plunge && pool.entries.len() < pool.size {
                    next = Some(first);
                } else {
                    heap.push(first);
                }
            }
        }
    };

    let open_min = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let final_bound = match (status, known(&pool)) {
        (BnbStatus::Infeasible, _) => f64::INFINITY,
        (_, Some(b)) => b.min(reported_bound.max(open_min)),
        (_, None) => reported_bound.max(open_min),
    };
    if known(&pool).is_none() && matches!(status, BnbStatus::TimeLimit | BnbStatus::NodeLimit) {
        return Err(Error::NoSolution);
    }
    let result = BnbResult {
        pool: pool.entries,
        best_bound: final_bound,
        status,
        node_count: nodes,
        lp_iterations: iterations,
        root_bound,
    };
    let report = BnbProgress {
        node_count: nodes,
        incumbent: result.incumbent().map(|e| e.objective),
        best_bound: result.best_bound,
        elapsed: deadline.elapsed(),
    };
    if report.best_bound.is_finite()
        && last_report.is_none_or(|r| r.incumbent != report.incumbent || r.best_bound != report.best_bound)
    {
        progress(&report);
    }
    Ok(result)
}
