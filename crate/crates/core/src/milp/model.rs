use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A sparse constraint `lb <= sum coeffs[i].1 * x[coeffs[i].0] <= ub`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub lb: f64,
    pub ub: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    pub fn is_equality(&self) -> bool {
        self.lb == self.ub
    }
}

/// Minimization model `min c x + offset` over row and variable bounds, with
/// an integrality mask. Infinite bounds are `f64::INFINITY` / `NEG_INFINITY`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub var_lb: Vec<f64>,
    pub var_ub: Vec<f64>,
    pub integrality: Vec<bool>,
    pub rows: Vec<Row>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_var(&mut self, cost: f64, lb: f64, ub: f64, integer: bool) -> usize {
        self.objective.push(cost);
        self.var_lb.push(lb);
        self.var_ub.push(ub);
        self.integrality.push(integer);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, lb: f64, ub: f64) -> usize {
        self.rows.push(Row { coeffs, lb, ub });
        self.rows.len() - 1
    }

    pub fn num_integer(&self) -> usize {
        self.integrality.iter().filter(|&&b| b).count()
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.coeffs.len()).sum()
    }

    /// Checks the structural invariants of the container.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.var_lb.len() != n || self.var_ub.len() != n || self.integrality.len() != n {
            return Err(Error::InvalidInstance("model vectors have inconsistent lengths".into()));
        }
        for j in 0..n {
            let (lb, ub) = (self.var_lb[j], self.var_ub[j]);
            if lb.is_nan() || ub.is_nan() || lb > ub || !self.objective[j].is_finite() {
                return Err(Error::InvalidInstance(format!("variable {j} has bounds [{lb}, {ub}]")));
            }
            if self.integrality[j] && !(lb.is_finite() && ub.is_finite()) {
                return Err(Error::InvalidInstance(format!("integer variable {j} is unbounded")));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            if row.lb.is_nan() || row.ub.is_nan() || row.lb > row.ub {
                return Err(Error::InvalidInstance(format!("row {r} has bounds [{}, {}]", row.lb, row.ub)));
            }
            if let Some(&(j, a)) = row.coeffs.iter().find(|&&(j, a)| j >= n || !a.is_finite()) {
                return Err(Error::InvalidInstance(format!("row {r} has coefficient {a} on variable {j}")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.objective_offset
    }

    /// Largest violation of any row or variable bound by `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.num_vars() {
            worst = worst.max(self.var_lb[j] - x[j]).max(x[j] - self.var_ub[j]);
        }
        for row in &self.rows {
            let a = row.activity(x);
            worst = worst.max(row.lb - a).max(a - row.ub);
        }
        worst
    }

    /// Largest distance of an integer-flagged variable from an integer.
    pub fn max_fractionality(&self, x: &[f64]) -> f64 {
        self.integrality
            .iter()
            .zip(x)
            .filter(|(&int, _)| int)
            .map(|(_, &v)| crate::num::frac_dist(v))
            .fold(0.0, f64::max)
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.num_vars() && self.max_violation(x) <= tol && self.max_fractionality(x) <= tol
    }
}
