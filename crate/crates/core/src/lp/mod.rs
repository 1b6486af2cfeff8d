//! LP relaxations: a sparse bounded-variable revised simplex.

mod lu;
mod simplex;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::milp::MilpModel;

pub use simplex::LpWorkspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The iteration budget or the deadline ran out.
    IterationLimit,
}

/// A simplex basis: the basic variable of every row position plus, for the
/// nonbasic ones, which bound they sit at. Variables `n..n+m` are the row
/// logicals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    pub basic: Vec<usize>,
    pub at_upper: Vec<bool>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Structural variable values (meaningful when optimal).
    pub x: Vec<f64>,
    /// `c x + offset`; NaN unless optimal.
    pub objective: f64,
    pub iterations: usize,
    /// Final basis when optimal, for warm starts.
    pub basis: Option<Basis>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub max_iterations: usize,
    pub refactor_interval: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            primal_tol: 1e-6,
            dual_tol: 1e-7,
            max_iterations: 1_000_000,
            refactor_interval: 100,
        }
    }
}

/// Solves the LP relaxation of `model` (integrality ignored).
pub fn solve_lp(model: &MilpModel, warm_start: Option<&Basis>) -> LpSolution {
    LpWorkspace::new(model, LpOptions::default()).solve(None, warm_start, None)
}
