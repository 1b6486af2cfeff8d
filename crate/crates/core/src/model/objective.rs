use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::instance::{InstanceView, RosterInstance};
use super::roster::Roster;
use crate::error::{Error, Result};

/// Weights of the objective. `lambda[i]` scales term family `i` (workload,
/// weekend workload, preferences) and `theta[i]` splits it between the sum
/// (L1) and the worst-employee (L-infinity) deviation. `gamma` trades
/// individual preferences against company work patterns, `mu` prices the
/// deviation from an original roster during re-optimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub lambda: [f64; 3],
    pub theta: [f64; 3],
    pub gamma: f64,
    pub mu: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self {
            lambda: [1.0, 1.0, 1.0],
            theta: [0.5, 0.5, 1.0],
            gamma: 1.0,
            mu: 1.0,
        }
    }
}

impl ObjectiveWeights {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::WeightOutOfRange { name, value: v })
            }
        };
        for (name, v) in ["lambda1", "lambda2", "lambda3"].into_iter().zip(self.lambda) {
            unit(name, v)?;
        }
        for (name, v) in ["theta1", "theta2", "theta3"].into_iter().zip(self.theta) {
            unit(name, v)?;
        }
        unit("gamma", self.gamma)?;
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::WeightOutOfRange {
                name: "mu",
                value: self.mu,
            });
        }
        Ok(())
    }

    /// Coefficient on the summed workload deviation.
    pub fn c_f1(&self) -> f64 {
        self.lambda[0] * self.theta[0]
    }
    pub fn c_f1_max(&self) -> f64 {
        self.lambda[0] * (1.0 - self.theta[0])
    }
    pub fn c_f2(&self) -> f64 {
        self.lambda[1] * self.theta[1]
    }
    pub fn c_f2_max(&self) -> f64 {
        self.lambda[1] * (1.0 - self.theta[1])
    }
    /// Coefficient on the whole preference block (f3, or the f3/f4 blend).
    pub fn c_pref(&self) -> f64 {
        self.lambda[2] * self.theta[2]
    }
}

/// Optional extras that change the objective: an original roster to stay
/// close to (event-driven mode) and a company preference tensor to follow
/// (work-pattern mode).
#[derive(Debug, Clone, Copy, Default)]
pub struct ObjectiveContext<'a> {
    pub original: Option<&'a Roster>,
    pub company: Option<&'a Roster>,
}

impl<'a> ObjectiveContext<'a> {
    pub fn plain() -> Self {
        Self::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub total: f64,
    pub f1: f64,
    pub f1_max: f64,
    pub f2: f64,
    pub f2_max: f64,
    pub f3: f64,
    pub f4: Option<f64>,
    pub deviation: Option<f64>,
}

impl ObjectiveBreakdown {
    /// Recombines the individual terms into the weighted total.
    pub fn recombine(&self, w: &ObjectiveWeights) -> f64 {
        let fc = w.c_f1() * self.f1 + w.c_f1_max() * self.f1_max + w.c_f2() * self.f2 + w.c_f2_max() * self.f2_max;
        let pref = match self.f4 {
            Some(f4) => w.c_pref() * (w.gamma * self.f3 + (1.0 - w.gamma) * f4),
            None => w.c_pref() * self.f3,
        };
        let dev = self.deviation.map_or(0.0, |d| w.mu * d);
        fc + pref + dev
    }

    /// The part of the objective that splits additively over employees.
    pub fn separable(&self) -> f64 {
        self.f1 + self.f2 + self.f3
    }
}

/// Per-employee workloads in duty units (all-day shifts count once per day).
#[derive(Debug, Clone)]
pub(crate) struct Workloads {
    pub s: usize,
    pub total: Vec<f64>,
    pub weekend: Vec<f64>,
    pub pref_violations: Vec<f64>,
}

impl Workloads {
    pub fn empty(view: &InstanceView<'_>) -> Self {
        let (n, s) = (view.n, view.s);
        Self {
            s,
            total: vec![0.0; n * s],
            weekend: vec![0.0; n * s],
            pref_violations: vec![0.0; n],
        }
    }

    pub fn new(view: &InstanceView<'_>, x: &Roster) -> Self {
        let mut w = Self::empty(view);
        for e in 0..view.n {
            w.refresh(view, x, e);
        }
        w
    }

    pub fn refresh(&mut self, view: &InstanceView<'_>, x: &Roster, e: usize) {
        let s = self.s;
        let mut tot = [0u32; crate::model::instance::MAX_SHIFT_TYPES];
        let mut wkd = [0u32; crate::model::instance::MAX_SHIFT_TYPES];
        let mut pref = 0.0;
        let prefs = &view.inst.preferences[e];
        for j in 0..view.m {
            let mut load = 0u32;
            for (k, (t, wk)) in tot.iter_mut().zip(wkd.iter_mut()).enumerate().take(s) {
                if x.get(e, j, k) {
                    *t += 1;
                    load += 1;
                    if view.weekend_block[j] {
                        *wk += 1;
                    }
                }
            }
            if let Some(p) = prefs[j] {
                pref += (load as f64 - p as f64).abs();
            }
        }
        for k in 0..s {
            self.total[e * s + k] = tot[k] as f64 / view.duty_divisor[k];
            self.weekend[e * s + k] = wkd[k] as f64 / view.duty_divisor[k];
        }
        self.pref_violations[e] = pref;
    }

    pub fn employee_quality(&self, inst: &RosterInstance, e: usize) -> f64 {
        let s = self.s;
        let mut q = self.pref_violations[e];
        for k in 0..s {
            q += (inst.workload_targets[e][k] - self.total[e * s + k]).abs();
            q += (inst.weekend_targets[e][k] - self.weekend[e * s + k]).abs();
        }
        q
    }

    /// Workload terms `(f1, f1_max, f2, f2_max, f3)`.
    pub fn terms(&self, inst: &RosterInstance) -> (f64, f64, f64, f64, f64) {
        let s = self.s;
        let n = self.pref_violations.len();
        let (mut f1, mut f1m, mut f2, mut f2m) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..s {
            let mut max1: f64 = 0.0;
            let mut max2: f64 = 0.0;
            for e in 0..n {
                let d1 = (inst.workload_targets[e][k] - self.total[e * s + k]).abs();
                let d2 = (inst.weekend_targets[e][k] - self.weekend[e * s + k]).abs();
                f1 += d1;
                f2 += d2;
                max1 = max1.max(d1);
                max2 = max2.max(d2);
            }
            f1m += max1;
            f2m += max2;
        }
        let f3 = self.pref_violations.iter().sum();
        (f1, f1m, f2, f2m, f3)
    }
}

/// Number of `(e, j, k)` entries where the two rosters differ, restricted to
/// employee `e`.
pub(crate) fn employee_hamming(a: &Roster, b: &Roster, e: usize) -> usize {
    let (_, m, s) = a.dims();
    let mut d = 0;
    for j in 0..m {
        for k in 0..s {
            d += (a.get(e, j, k) != b.get(e, j, k)) as usize;
        }
    }
    d
}

pub(crate) fn breakdown_from(
    w: &ObjectiveWeights,
    terms: (f64, f64, f64, f64, f64),
    f4: Option<f64>,
    deviation: Option<f64>,
) -> ObjectiveBreakdown {
    let (f1, f1_max, f2, f2_max, f3) = terms;
    let mut b = ObjectiveBreakdown {
        total: 0.0,
        f1,
        f1_max,
        f2,
        f2_max,
        f3,
        f4,
        deviation,
    };
    b.total = b.recombine(w);
    b
}

/// Evaluates the objective of `x`. Feasibility is not required.
pub fn evaluate_objective(
    inst: &RosterInstance,
    x: &Roster,
    weights: &ObjectiveWeights,
    ctx: ObjectiveContext<'_>,
) -> ObjectiveBreakdown {
    let view = InstanceView::new(inst);
    let loads = Workloads::new(&view, x);
    let f4 = ctx.company.map(|c| c.hamming(x) as f64);
    let dev = ctx.original.map(|o| o.hamming(x) as f64);
    breakdown_from(weights, loads.terms(inst), f4, dev)
}

/// Employee `e`'s share of `f1 + f2 + f3`; these shares sum to exactly
/// that total over all employees.
pub fn employee_quality(inst: &RosterInstance, x: &Roster, e: usize) -> f64 {
    let view = InstanceView::new(inst);
    let mut loads = Workloads::empty(&view);
    loads.refresh(&view, x, e);
    loads.employee_quality(inst, e)
}
