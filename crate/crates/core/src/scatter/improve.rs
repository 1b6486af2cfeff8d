use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::clock::Deadline;
use crate::error::{Error, Result};
use crate::model::feasibility::employee_feasible;
use crate::model::objective::{breakdown_from, employee_hamming, Workloads};
use crate::model::{InstanceView, ObjectiveContext, ObjectiveWeights, Roster, RosterInstance};

/// Added to every employee's quality so perfect schedules stay selectable.
pub const QUALITY_EPS: f64 = 0.05;

/// Objective evaluation that refreshes one employee at a time. Totals are
/// bit-identical to a full evaluation of the same roster.
pub(crate) struct Scorer<'a> {
    pub view: InstanceView<'a>,
    weights: &'a ObjectiveWeights,
    ctx: ObjectiveContext<'a>,
    loads: Workloads,
    f4: Vec<usize>,
    dev: Vec<usize>,
}

impl<'a> Scorer<'a> {
    pub fn new(
        inst: &'a RosterInstance,
        weights: &'a ObjectiveWeights,
        ctx: ObjectiveContext<'a>,
        x: &Roster,
    ) -> Result<Self> {
        check_dims(inst, x)?;
        for r in [ctx.original, ctx.company].into_iter().flatten() {
            check_dims(inst, r)?;
        }
        let view = InstanceView::new(inst);
        let loads = Workloads::new(&view, x);
        let n = view.n;
        let mut s = Self {
            view,
            weights,
            ctx,
            loads,
            f4: vec![0; n],
            dev: vec![0; n],
        };
        for e in 0..n {
            s.refresh_context(x, e);
        }
        Ok(s)
    }

    fn refresh_context(&mut self, x: &Roster, e: usize) {
        if let Some(c) = self.ctx.company {
            self.f4[e] = employee_hamming(c, x, e);
        }
        if let Some(o) = self.ctx.original {
            self.dev[e] = employee_hamming(o, x, e);
        }
    }

    pub fn refresh(&mut self, x: &Roster, e: usize) {
        self.loads.refresh(&self.view, x, e);
        self.refresh_context(x, e);
    }

    pub fn total(&self) -> f64 {
        let f4 = self.ctx.company.map(|_| self.f4.iter().sum::<usize>() as f64);
        let dev = self.ctx.original.map(|_| self.dev.iter().sum::<usize>() as f64);
        breakdown_from(self.weights, self.loads.terms(self.view.inst), f4, dev).total
    }

    pub fn quality(&self, e: usize) -> f64 {
        self.loads.employee_quality(self.view.inst, e)
    }
}

pub(crate) fn check_dims(inst: &RosterInstance, x: &Roster) -> Result<()> {
    if x.dims() != inst.dims() {
        return Err(Error::DimensionMismatch {
            expected: inst.dims(),
            found: x.dims(),
        });
    }
    Ok(())
}

fn pick_weighted<R: Rng + ?Sized>(rng: &mut R, weights: &[f64], skip: Option<usize>) -> usize {
    let total: f64 = weights
        .iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != skip)
        .map(|(_, w)| w)
        .sum();
    let mut t = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        last = i;
        if t < w {
            return i;
        }
        t -= w;
    }
    last
}

/// Day-swap local search.
///
/// Two employees are drawn with probability proportional to their share
/// of the objective (plus [`QUALITY_EPS`]) and swap their whole assignment
/// on a uniformly drawn day. A swap is kept only if both employees stay
/// feasible and the objective strictly drops. The search stops after
/// `stall_threshold` consecutive rejected swaps or when the deadline
/// expires. Returns the improved roster and its objective.
pub fn improve<R: Rng + ?Sized>(
    inst: &RosterInstance,
    roster: &Roster,
    weights: &ObjectiveWeights,
    ctx: ObjectiveContext<'_>,
    stall_threshold: usize,
    rng: &mut R,
    deadline: Option<&Deadline<'_>>,
) -> Result<(Roster, f64)> {
    let mut x = roster.clone();
    let mut scorer = Scorer::new(inst, weights, ctx, &x)?;
    let mut current = scorer.total();
    let (n, days) = (scorer.view.n, scorer.view.days);
    if n < 2 || days == 0 {
        return Ok((x, current));
    }
    let mut q: Vec<f64> = (0..n).map(|e| scorer.quality(e) + QUALITY_EPS).collect();
    let mut stall = 0;
    let mut iter = 0u64;
    while stall < stall_threshold {
        iter += 1;
        if iter % 64 == 0 && deadline.is_some_and(|d| d.expired()) {
            break;
        }
        stall += 1;
        let e1 = pick_weighted(rng, &q, None);
        let e2 = pick_weighted(rng, &q, Some(e1));
        let d = rng.random_range(0..days);
        if x.day_cell(e1, d) == x.day_cell(e2, d) {
            continue;
        }
        x.swap_days(e1, e2, d);
        if !employee_feasible(&scorer.view, &x, e1) || !employee_feasible(&scorer.view, &x, e2) {
            x.swap_days(e1, e2, d);
            continue;
        }
        scorer.refresh(&x, e1);
        scorer.refresh(&x, e2);
        let candidate = scorer.total();
        if candidate < current - 1e-12 * current.abs().max(1.0) {
            current = candidate;
            stall = 0;
            q[e1] = scorer.quality(e1) + QUALITY_EPS;
            q[e2] = scorer.quality(e2) + QUALITY_EPS;
        } else {
            x.swap_days(e1, e2, d);
            scorer.refresh(&x, e1);
            scorer.refresh(&x, e2);
        }
    }
    Ok((x, current))
}
