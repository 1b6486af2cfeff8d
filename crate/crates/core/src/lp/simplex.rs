//! Bounded-variable revised simplex.
//!
//! Every row `i` gets a logical variable `r_i = a_i x` carrying the row
//! bounds, so the working system is `[A | -I] (x, r) = 0` and the all-logical
//! basis is always available. The dual simplex is the workhorse (the
//! all-logical basis of a model with boxed or cost-nonnegative variables is
//! dual feasible, and bound changes in branch-and-bound keep a basis dual
//! feasible); a composite primal simplex handles everything else.

use alloc::vec;
use alloc::vec::Vec;

use super::lu::{BasisFactor, LuFactors};
use super::{Basis, LpOptions, LpSolution, LpStatus};
use crate::clock::Deadline;
use crate::milp::MilpModel;

const NEG_ONE: [f64; 1] = [-1.0];
const PIVOT_TOL: f64 = 1e-9;
const STALL_LIMIT: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic(usize),
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Zero,
}

enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    Limit,
    /// Numerical trouble; refactor and try again.
    Retry,
}

/// Reusable solver for one model. Bounds can be overridden per solve, which
/// is how branch-and-bound explores nodes.
pub struct LpWorkspace<'a> {
    model: &'a MilpModel,
    n: usize,
    m: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    row_start: Vec<usize>,
    row_col: Vec<usize>,
    row_val: Vec<f64>,
    logical_idx: Vec<usize>,

    cost: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    x: Vec<f64>,
    d: Vec<f64>,
    state: Vec<State>,
    basic: Vec<usize>,
    factor: BasisFactor,

    opts: LpOptions,
    iterations: usize,
    // Scratch.
    rho: Vec<f64>,
    alpha_row: Vec<f64>,
    alpha_col: Vec<f64>,
    work_m: Vec<f64>,
    tau: Vec<f64>,
    // Dual steepest-edge weights, one per basis position.
    dse: Vec<f64>,
}

impl<'a> LpWorkspace<'a> {
    pub fn new(model: &'a MilpModel, opts: LpOptions) -> Self {
        let n = model.num_vars();
        let m = model.num_rows();
        let mut counts = vec![0usize; n + 1];
        for row in &model.rows {
            for &(j, _) in &row.coeffs {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let nnz = counts[n];
        let col_start = counts.clone();
        let mut fill = counts;
        let mut col_row = vec![0; nnz];
        let mut col_val = vec![0.0; nnz];
        let mut row_start = Vec::with_capacity(m + 1);
        let mut row_col = Vec::with_capacity(nnz);
        let mut row_val = Vec::with_capacity(nnz);
        row_start.push(0);
        for (i, row) in model.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                if a == 0.0 {
                    continue;
                }
                col_row[fill[j]] = i;
                col_val[fill[j]] = a;
                fill[j] += 1;
                row_col.push(j);
                row_val.push(a);
            }
            row_start.push(row_col.len());
        }
        // Zero coefficients were skipped above; compact the column arrays.
        let mut cs = vec![0usize; n + 1];
        let mut cr = Vec::with_capacity(nnz);
        let mut cv = Vec::with_capacity(nnz);
        for j in 0..n {
            cr.extend_from_slice(&col_row[col_start[j]..fill[j]]);
            cv.extend_from_slice(&col_val[col_start[j]..fill[j]]);
            cs[j + 1] = cr.len();
        }

        let mut cost = model.objective.clone();
        cost.resize(n + m, 0.0);
        let mut lb = model.var_lb.clone();
        let mut ub = model.var_ub.clone();
        for row in &model.rows {
            lb.push(row.lb);
            ub.push(row.ub);
        }
        Self {
            model,
            n,
            m,
            col_start: cs,
            col_row: cr,
            col_val: cv,
            row_start,
            row_col,
            row_val,
            logical_idx: (0..m).collect(),
            cost,
            lb,
            ub,
            x: vec![0.0; n + m],
            d: vec![0.0; n + m],
            state: vec![State::Lower; n + m],
            basic: Vec::new(),
            factor: BasisFactor::default(),
            opts,
            iterations: 0,
            rho: vec![0.0; m],
            alpha_row: vec![0.0; n + m],
            alpha_col: vec![0.0; m],
            work_m: vec![0.0; m],
            tau: vec![0.0; m],
            dse: vec![1.0; m],
        }
    }

    pub fn model(&self) -> &MilpModel {
        self.model
    }

    /// Solves the relaxation with structural bounds `lb`/`ub` (the model's
    /// own bounds when `None`), starting from `warm` when given.
    pub fn solve(
        &mut self,
        bounds: Option<(&[f64], &[f64])>,
        warm: Option<&Basis>,
        deadline: Option<&Deadline<'_>>,
    ) -> LpSolution {
        let n = self.n;
        match bounds {
            Some((l, u)) => {
                self.lb[..n].copy_from_slice(l);
                self.ub[..n].copy_from_slice(u);
            }
            None => {
                self.lb[..n].copy_from_slice(&self.model.var_lb);
                self.ub[..n].copy_from_slice(&self.model.var_ub);
            }
        }
        self.iterations = 0;
        if (0..n + self.m).any(|j| self.lb[j] > self.ub[j] + self.opts.primal_tol) {
            return self.finish(LpStatus::Infeasible);
        }
        self.install_basis(warm);
        let status = self.run(deadline);
        self.finish(status)
    }

    fn finish(&self, status: LpStatus) -> LpSolution {
        let x: Vec<f64> = self.x[..self.n].to_vec();
        let objective = if status == LpStatus::Optimal {
            self.model.objective_value(&x)
        } else {
            f64::NAN
        };
        let basis = (status == LpStatus::Optimal).then(|| self.basis());
        LpSolution {
            status,
            x,
            objective,
            iterations: self.iterations,
            basis,
        }
    }

    fn basis(&self) -> Basis {
        Basis {
            basic: self.basic.clone(),
            at_upper: self.state.iter().map(|&s| s == State::Upper).collect(),
        }
    }

    fn place_nonbasic(&mut self, j: usize, prefer_upper: bool) {
        let (l, u) = (self.lb[j], self.ub[j]);
        let st = match (l.is_finite(), u.is_finite()) {
            (true, true) => {
                if prefer_upper && l != u {
                    State::Upper
                } else {
                    State::Lower
                }
            }
            (true, false) => State::Lower,
            (false, true) => State::Upper,
            (false, false) => State::Zero,
        };
        self.state[j] = st;
        self.x[j] = match st {
            State::Lower => l,
            State::Upper => u,
            _ => 0.0,
        };
    }

    fn install_basis(&mut self, warm: Option<&Basis>) {
        let (n, m) = (self.n, self.m);
        let usable = warm.filter(|b| {
            b.basic.len() == m && b.at_upper.len() == n + m && b.basic.iter().all(|&j| j < n + m)
        });
        let mut is_basic = vec![false; n + m];
        self.basic = match usable {
            Some(b) => b.basic.clone(),
            None => (n..n + m).collect(),
        };
        for &j in &self.basic {
            is_basic[j] = true;
        }
        for j in 0..n + m {
            if is_basic[j] {
                continue;
            }
            let prefer_upper = match usable {
                Some(b) => b.at_upper[j],
                None => self.cost[j] < 0.0,
            };
            self.place_nonbasic(j, prefer_upper);
        }
        for (p, &j) in self.basic.iter().enumerate() {
            self.state[j] = State::Basic(p);
        }
        self.dse.iter_mut().for_each(|w| *w = 1.0);
    }

    fn column(&self, j: usize) -> (&[usize], &[f64]) {
        if j < self.n {
            let r = self.col_start[j]..self.col_start[j + 1];
            (&self.col_row[r.clone()], &self.col_val[r])
        } else {
            let i = j - self.n;
            (&self.logical_idx[i..i + 1], &NEG_ONE[..])
        }
    }

    /// Factorizes the current basis, swapping in logicals for columns that
    /// make it singular.
    fn refactor(&mut self) {
        loop {
            let result = LuFactors::factorize(self.m, |p| self.column(self.basic[p]));
            match result {
                Ok(lu) => {
                    self.factor = BasisFactor::new(lu);
                    return;
                }
                Err(sing) => {
                    self.dse.iter_mut().for_each(|w| *w = 1.0);
                    for (&p, &i) in sing.positions.iter().zip(&sing.rows) {
                        let old = self.basic[p];
                        let logical = self.n + i;
                        self.basic[p] = logical;
                        self.state[logical] = State::Basic(p);
                        let v = self.x[old];
                        let prefer_upper = (self.ub[old] - v).abs() < (v - self.lb[old]).abs();
                        self.place_nonbasic(old, prefer_upper);
                    }
                }
            }
        }
    }

    fn compute_primal(&mut self) {
        let m = self.m;
        let mut rhs = vec![0.0; m];
        for j in 0..self.n {
            if matches!(self.state[j], State::Basic(_)) || self.x[j] == 0.0 {
                continue;
            }
            let v = self.x[j];
            for t in self.col_start[j]..self.col_start[j + 1] {
                rhs[self.col_row[t]] -= self.col_val[t] * v;
            }
        }
        for i in 0..m {
            let j = self.n + i;
            if !matches!(self.state[j], State::Basic(_)) {
                rhs[i] += self.x[j];
            }
        }
        let mut out = vec![0.0; m];
        self.factor.ftran(&mut rhs, &mut out);
        for (p, &j) in self.basic.iter().enumerate() {
            self.x[j] = out[p];
        }
    }

    fn compute_duals_with(&mut self, costs: &[f64]) {
        let m = self.m;
        let mut cb: Vec<f64> = self.basic.iter().map(|&j| costs[j]).collect();
        let mut y = vec![0.0; m];
        self.factor.btran(&mut cb, &mut y);
        for j in 0..self.n {
            if matches!(self.state[j], State::Basic(_)) {
                self.d[j] = 0.0;
                continue;
            }
            let mut dj = costs[j];
            for t in self.col_start[j]..self.col_start[j + 1] {
                dj -= self.col_val[t] * y[self.col_row[t]];
            }
            self.d[j] = dj;
        }
        for i in 0..m {
            let j = self.n + i;
            self.d[j] = if matches!(self.state[j], State::Basic(_)) {
                0.0
            } else {
                costs[j] + y[i]
            };
        }
    }

    fn compute_duals(&mut self) {
        let costs = core::mem::take(&mut self.cost);
        self.compute_duals_with(&costs);
        self.cost = costs;
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        if v < self.lb[j] {
            self.lb[j] - v
        } else if v > self.ub[j] {
            v - self.ub[j]
        } else {
            0.0
        }
    }

    fn primal_feasible(&self) -> bool {
        let tol = self.opts.primal_tol;
        self.basic.iter().all(|&j| self.infeasibility(j) <= tol)
    }

    /// Whether nonbasic `j`'s reduced cost has the wrong sign for its bound.
    fn dual_infeasible(&self, j: usize) -> bool {
        let tol = self.opts.dual_tol;
        let fixed = self.lb[j] == self.ub[j];
        match self.state[j] {
            State::Basic(_) => false,
            _ if fixed => false,
            State::Lower => self.d[j] < -tol,
            State::Upper => self.d[j] > tol,
            State::Zero => self.d[j].abs() > tol,
        }
    }

    /// Moves boxed variables with wrong-signed reduced costs to their other
    /// bound. Returns false if some dual infeasibility cannot be fixed that way.
    fn flip_to_dual_feasible(&mut self) -> bool {
        let mut ok = true;
        let mut flipped = false;
        for j in 0..self.n + self.m {
            if !self.dual_infeasible(j) {
                continue;
            }
            let boxed = self.lb[j].is_finite() && self.ub[j].is_finite();
            if !boxed {
                ok = false;
                continue;
            }
            if self.d[j] < 0.0 {
                self.state[j] = State::Upper;
                self.x[j] = self.ub[j];
            } else {
                self.state[j] = State::Lower;
                self.x[j] = self.lb[j];
            }
            flipped = true;
        }
        if flipped {
            self.compute_primal();
        }
        ok
    }

    fn run(&mut self, deadline: Option<&Deadline<'_>>) -> LpStatus {
        let mut retries = 0;
        loop {
            self.refactor();
            self.compute_primal();
            self.compute_duals();
            let outcome = if self.flip_to_dual_feasible() {
                self.dual_simplex(deadline)
            } else {
                self.primal_simplex(deadline)
            };
            match outcome {
                Outcome::Optimal => {
                    // Confirm on a fresh factorization.
                    self.refactor();
                    self.compute_primal();
                    self.compute_duals();
                    let dual_ok = (0..self.n + self.m).all(|j| !self.dual_infeasible(j));
                    if self.primal_feasible() && dual_ok {
                        return LpStatus::Optimal;
                    }
                }
                Outcome::Infeasible => return LpStatus::Infeasible,
                Outcome::Unbounded => return LpStatus::Unbounded,
                Outcome::Limit => return LpStatus::IterationLimit,
                Outcome::Retry => {}
            }
            retries += 1;
            if retries > 20 {
                return LpStatus::IterationLimit;
            }
        }
    }

    fn out_of_budget(&self, deadline: Option<&Deadline<'_>>) -> bool {
        self.iterations >= self.opts.max_iterations
            || (self.iterations % 64 == 0 && deadline.is_some_and(|d| d.expired()))
    }

    fn maybe_refactor(&mut self) {
        if self.factor.updates() >= self.opts.refactor_interval {
            self.refactor();
            self.compute_primal();
            self.compute_duals();
        }
    }

    /// Row `p` of `B^-1 [A | -I]` for all nonbasic columns.
    fn compute_alpha_row(&mut self, p: usize) {
        let m = self.m;
        let mut e = core::mem::take(&mut self.work_m);
        e.iter_mut().for_each(|v| *v = 0.0);
        e[p] = 1.0;
        let mut rho = core::mem::take(&mut self.rho);
        self.factor.btran(&mut e, &mut rho);
        self.alpha_row.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            let r = rho[i];
            if r == 0.0 {
                continue;
            }
            for t in self.row_start[i]..self.row_start[i + 1] {
                self.alpha_row[self.row_col[t]] += r * self.row_val[t];
            }
            self.alpha_row[self.n + i] = -r;
        }
        self.rho = rho;
        self.work_m = e;
    }

    fn compute_alpha_col(&mut self, q: usize) {
        let mut rhs = core::mem::take(&mut self.work_m);
        rhs.iter_mut().for_each(|v| *v = 0.0);
        if q < self.n {
            for t in self.col_start[q]..self.col_start[q + 1] {
                rhs[self.col_row[t]] = self.col_val[t];
            }
        } else {
            rhs[q - self.n] = -1.0;
        }
        let mut out = core::mem::take(&mut self.alpha_col);
        self.factor.ftran(&mut rhs, &mut out);
        self.alpha_col = out;
        self.work_m = rhs;
    }

    /// Replaces basis position `p` by `q`, moving `q` by `step`; the leaving
    /// variable ends at `leave_value`.
    fn pivot(&mut self, p: usize, q: usize, step: f64, leave_state: State, leave_value: f64) {
        let leaving = self.basic[p];
        if step != 0.0 {
            for (pp, &j) in self.basic.iter().enumerate() {
                self.x[j] -= step * self.alpha_col[pp];
            }
        }
        self.x[q] += step;
        self.x[leaving] = leave_value;
        self.state[leaving] = leave_state;
        self.basic[p] = q;
        self.state[q] = State::Basic(p);
        self.d[q] = 0.0;
        let alpha = core::mem::take(&mut self.alpha_col);
        self.factor.update(p, &alpha);
        self.alpha_col = alpha;
        self.iterations += 1;
    }

    fn dual_simplex(&mut self, deadline: Option<&Deadline<'_>>) -> Outcome {
        let ptol = self.opts.primal_tol;
        let dtol = self.opts.dual_tol;
        let mut degenerate = 0usize;
        loop {
            if self.out_of_budget(deadline) {
                return Outcome::Limit;
            }
            self.maybe_refactor();
            let bland = degenerate > STALL_LIMIT;

            // Leaving row: steepest edge, or the lowest variable index under
            // the anti-cycling rule.
            let mut leave: Option<(usize, f64)> = None;
            for (p, &j) in self.basic.iter().enumerate() {
                let inf = self.infeasibility(j);
                if inf <= ptol {
                    continue;
                }
                let inf = inf * inf / self.dse[p];
                let better = match leave {
                    None => true,
                    Some((bp, bi)) => {
                        if bland {
                            j < self.basic[bp]
                        } else {
                            inf > bi
                        }
                    }
                };
                if better {
                    leave = Some((p, inf));
                }
            }
            let Some((p, _)) = leave else {
                return Outcome::Optimal;
            };
            let lj = self.basic[p];
            let below = self.x[lj] < self.lb[lj];
            self.compute_alpha_row(p);

            // Ratio test on d_j / alpha_hat_j with alpha_hat = -alpha when the
            // leaving variable must increase.
            let sign = if below { -1.0 } else { 1.0 };
            let mut t_max = f64::INFINITY;
            for j in 0..self.n + self.m {
                let st = self.state[j];
                if matches!(st, State::Basic(_)) || self.lb[j] == self.ub[j] {
                    continue;
                }
                let a = sign * self.alpha_row[j];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let bound = match st {
                    State::Lower if a > 0.0 => (self.d[j] + dtol) / a,
                    State::Upper if a < 0.0 => (self.d[j] - dtol) / a,
                    State::Zero => (self.d[j].abs() + dtol) / a.abs(),
                    _ => continue,
                };
                t_max = t_max.min(bound);
            }
            if !t_max.is_finite() {
                return Outcome::Infeasible;
            }
            let mut enter: Option<(usize, f64)> = None;
            let mut best_ratio = f64::INFINITY;
            for j in 0..self.n + self.m {
                let st = self.state[j];
                if matches!(st, State::Basic(_)) || self.lb[j] == self.ub[j] {
                    continue;
                }
                let a = sign * self.alpha_row[j];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let ratio = match st {
                    State::Lower if a > 0.0 => self.d[j] / a,
                    State::Upper if a < 0.0 => self.d[j] / a,
                    State::Zero => self.d[j].abs() / a.abs(),
                    _ => continue,
                };
                if ratio > t_max {
                    continue;
                }
                let better = match enter {
                    None => true,
                    Some((bq, ba)) => {
                        if bland {
                            ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && j < bq)
                        } else {
                            a.abs() > ba
                        }
                    }
                };
                if better {
                    enter = Some((j, a.abs()));
                    best_ratio = ratio;
                }
            }
            let Some((q, _)) = enter else {
                return Outcome::Infeasible;
            };
            let a_q = sign * self.alpha_row[q];
            let t = (self.d[q] / a_q).max(0.0);

            self.compute_alpha_col(q);
            let a_pq = self.alpha_col[p];
            if (a_pq - self.alpha_row[q]).abs() > 1e-7 * (1.0 + a_pq.abs()) || a_pq.abs() <= PIVOT_TOL {
                return Outcome::Retry;
            }

            self.update_dse(p, a_pq);

            // Dual update.
            if t != 0.0 {
                for j in 0..self.n + self.m {
                    if !matches!(self.state[j], State::Basic(_)) {
                        self.d[j] -= t * sign * self.alpha_row[j];
                    }
                }
                degenerate = 0;
            } else {
                degenerate += 1;
            }
            let (leave_state, leave_value) = if below {
                (State::Lower, self.lb[lj])
            } else {
                (State::Upper, self.ub[lj])
            };
            let step = (self.x[lj] - leave_value) / a_pq;
            self.pivot(p, q, step, leave_state, leave_value);
            self.d[lj] = if below { t } else { -t };
        }
    }

    /// Updates the steepest-edge weights for a pivot in position `p`; needs
    /// `rho` and `alpha_col` of the current basis.
    fn update_dse(&mut self, p: usize, a_pq: f64) {
        let w_p: f64 = self.rho.iter().map(|r| r * r).sum();
        let mut y = core::mem::take(&mut self.work_m);
        y.copy_from_slice(&self.rho);
        let mut tau = core::mem::take(&mut self.tau);
        self.factor.ftran(&mut y, &mut tau);
        for i in 0..self.m {
            let a = self.alpha_col[i];
            if i == p || a == 0.0 {
                continue;
            }
            let r = a / a_pq;
            self.dse[i] = (self.dse[i] + r * (r * w_p - 2.0 * tau[i])).max(1e-8);
        }
        self.dse[p] = (w_p / (a_pq * a_pq)).max(1e-8);
        self.tau = tau;
        self.work_m = y;
    }

    fn primal_simplex(&mut self, deadline: Option<&Deadline<'_>>) -> Outcome {
        let ptol = self.opts.primal_tol;
        let dtol = self.opts.dual_tol;
        let total = self.n + self.m;
        let mut degenerate = 0usize;
        let mut phase_costs = vec![0.0; total];
        loop {
            if self.out_of_budget(deadline) {
                return Outcome::Limit;
            }
            if self.factor.updates() >= self.opts.refactor_interval {
                self.refactor();
                self.compute_primal();
            }
            let phase1 = !self.primal_feasible();
            if phase1 {
                phase_costs.iter_mut().for_each(|c| *c = 0.0);
                for &j in &self.basic {
                    let v = self.x[j];
                    if v < self.lb[j] - ptol {
                        phase_costs[j] = -1.0;
                    } else if v > self.ub[j] + ptol {
                        phase_costs[j] = 1.0;
                    }
                }
                self.compute_duals_with(&phase_costs);
            } else {
                self.compute_duals();
            }
            let bland = degenerate > STALL_LIMIT;

            // Entering: most negative directional reduced cost.
            let mut enter: Option<(usize, f64, f64)> = None;
            for j in 0..total {
                let st = self.state[j];
                if matches!(st, State::Basic(_)) || self.lb[j] == self.ub[j] {
                    continue;
                }
                let dj = self.d[j];
                let dir = match st {
                    State::Lower if dj < -dtol => 1.0,
                    State::Upper if dj > dtol => -1.0,
                    State::Zero if dj.abs() > dtol => -dj.signum(),
                    _ => continue,
                };
                let score = dj.abs();
                let better = match enter {
                    None => true,
                    Some((_, _, bs)) => !bland && score > bs,
                };
                if better {
                    enter = Some((j, dir, score));
                }
                if bland {
                    break;
                }
            }
            let Some((q, dir, _)) = enter else {
                return if phase1 { Outcome::Infeasible } else { Outcome::Optimal };
            };

            self.compute_alpha_col(q);
            // x_B moves by -dir * s * alpha.
            let mut step = self.ub[q] - self.lb[q];
            let mut leave: Option<(usize, State, f64, f64)> = None;
            for p in 0..self.m {
                let a = self.alpha_col[p];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let j = self.basic[p];
                let rate = -dir * a;
                let v = self.x[j];
                let (l, u) = (self.lb[j], self.ub[j]);
                let limit = if rate < 0.0 {
                    if v > u + ptol {
                        Some(((v - u) / -rate, State::Upper, u))
                    } else if v >= l - ptol && l.is_finite() {
                        Some((((v - l).max(0.0)) / -rate, State::Lower, l))
                    } else {
                        None
                    }
                } else if v < l - ptol {
                    Some(((l - v) / rate, State::Lower, l))
                } else if v <= u + ptol && u.is_finite() {
                    Some((((u - v).max(0.0)) / rate, State::Upper, u))
                } else {
                    None
                };
                if let Some((s, st, val)) = limit {
                    let better = match leave {
                        None => s < step,
                        Some((bp, _, _, _)) => {
                            s < step - 1e-12
                                || (s <= step + 1e-12
                                    && if bland {
                                        j < self.basic[bp]
                                    } else {
                                        a.abs() > self.alpha_col[bp].abs()
                                    })
                        }
                    };
                    if better {
                        step = step.min(s);
                        leave = Some((p, st, val, s));
                    }
                }
            }
            if !step.is_finite() {
                return if phase1 { Outcome::Retry } else { Outcome::Unbounded };
            }
            if step <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            match leave {
                Some((p, st, val, s)) if s <= step + 1e-12 => {
                    self.pivot(p, q, dir * s, st, val);
                }
                _ => {
                    // Bound flip of the entering variable.
                    let s = step;
                    for (p, &j) in self.basic.iter().enumerate() {
                        self.x[j] -= dir * s * self.alpha_col[p];
                    }
                    if dir > 0.0 {
                        self.state[q] = State::Upper;
                        self.x[q] = self.ub[q];
                    } else {
                        self.state[q] = State::Lower;
                        self.x[q] = self.lb[q];
                    }
                    self.iterations += 1;
                }
            }
        }
    }
}
