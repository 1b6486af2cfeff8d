use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::build::{ensure_valid, RosterModel};
use super::model::MilpModel;
use super::vars::{names, VariableMap};
use crate::error::{Error, Result};
use crate::model::{InstanceView, Roster, RosterInstance, BLOCKS_PER_DAY, DAYS_PER_WEEK};

/// Cost of the variant-balancing variable, small enough never to outweigh
/// a single unit of slack.
pub const BALANCE_COST: f64 = 1e-3;

/// Rest-day label in a pattern grid.
pub const REST_LABEL: &str = "-";

/// What a pattern day asks for: an eight-hour shift in one block of the
/// day, an all-day shift, or rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternCell {
    Rest,
    Block { block: usize, shift: usize },
    AllDay { shift: usize },
}

/// A company-defined schedule of whole weeks. Every employee follows the
/// same grid, starting at a different week (the variant).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkPattern {
    /// `weeks x 7` day labels: `M`, `A`, `N` (eight-hour shift in the
    /// morning, afternoon or night block), a shift-type label for all-day
    /// types, or `-`.
    pub grid: Vec<[String; DAYS_PER_WEEK]>,
}

impl WorkPattern {
    pub fn new(grid: Vec<[String; DAYS_PER_WEEK]>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::InvalidConfig("work pattern has no weeks".into()));
        }
        Ok(Self { grid })
    }

    /// Builds a pattern from rows of day labels.
    pub fn from_rows<S: AsRef<str>>(rows: &[[S; DAYS_PER_WEEK]]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| core::array::from_fn(|d| r[d].as_ref().to_string()))
                .collect(),
        )
    }

    /// Number of variants, one per starting week.
    pub fn variants(&self) -> usize {
        self.grid.len()
    }

    /// Label of horizon day `d` under variant `v`.
    pub fn label(&self, v: usize, d: usize) -> &str {
        let week = (d / DAYS_PER_WEEK + v) % self.grid.len();
        &self.grid[week][d % DAYS_PER_WEEK]
    }

    /// Resolves every label against the instance's shift types.
    pub fn resolve(&self, inst: &RosterInstance) -> Result<Vec<[PatternCell; DAYS_PER_WEEK]>> {
        let eight = inst.shift_types.iter().position(|t| t.kind == crate::model::ShiftKind::EightHour);
        let cell = |label: &str| -> Result<PatternCell> {
            let block = match label {
                REST_LABEL | "\u{2212}" | "" => return Ok(PatternCell::Rest),
                "M" => Some(0),
                "A" => Some(1),
                "N" => Some(2),
                _ => None,
            };
            if let Some(block) = block {
                let shift = eight.ok_or_else(|| Error::UnknownShiftLabel(label.to_string()))?;
                return Ok(PatternCell::Block { block, shift });
            }
            match inst.shift_index(label) {
                Some(k) if inst.shift_types[k].kind == crate::model::ShiftKind::AllDay => {
                    Ok(PatternCell::AllDay { shift: k })
                }
                _ => Err(Error::UnknownShiftLabel(label.to_string())),
            }
        };
        self.grid
            .iter()
            .map(|week| {
                let mut out = [PatternCell::Rest; DAYS_PER_WEEK];
                for (o, l) in out.iter_mut().zip(week) {
                    *o = cell(l.trim())?;
                }
                Ok(out)
            })
            .collect()
    }
}

/// The `(block, shift)` cells worked under variant `v` over `days` days.
fn variant_cells(resolved: &[[PatternCell; DAYS_PER_WEEK]], v: usize, days: usize) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    for d in 0..days {
        let week = (d / DAYS_PER_WEEK + v) % resolved.len();
        match resolved[week][d % DAYS_PER_WEEK] {
            PatternCell::Rest => {}
            PatternCell::Block { block, shift } => cells.push((d * BLOCKS_PER_DAY + block, shift)),
            PatternCell::AllDay { shift } => {
                for b in 0..BLOCKS_PER_DAY {
                    cells.push((d * BLOCKS_PER_DAY + b, shift));
                }
            }
        }
    }
    cells
}

/// Company preference tensor for the given variant of each employee.
pub fn company_preference(inst: &RosterInstance, pattern: &WorkPattern, variants: &[usize]) -> Result<Roster> {
    let resolved = pattern.resolve(inst)?;
    let (n, m, s) = inst.dims();
    if variants.len() != n {
        return Err(Error::InvalidConfig(alloc::format!(
            "{} variants given for {n} employees",
            variants.len()
        )));
    }
    let mut x = Roster::zeros(n, m, s);
    for (e, &v) in variants.iter().enumerate() {
        if v >= pattern.variants() {
            return Err(Error::InvalidConfig("variant index out of range".into()));
        }
        for (j, k) in variant_cells(&resolved, v, m / BLOCKS_PER_DAY) {
            x.set(e, j, k, true);
        }
    }
    Ok(x)
}

/// Conflicts of employee `e` following variant `v`: blocks worked while
/// unavailable, on vacation or unlicensed, plus violated preferences.
pub fn variant_conflicts(inst: &RosterInstance, pattern: &WorkPattern, e: usize, v: usize) -> Result<usize> {
    let resolved = pattern.resolve(inst)?;
    let view = InstanceView::new(inst);
    let cells = variant_cells(&resolved, v, view.days);
    let mut load = vec![0u8; view.m];
    let mut total = 0;
    for &(j, k) in &cells {
        load[j] = 1;
        total += !view.licensed(e, k) as usize;
    }
    for j in 0..view.m {
        if load[j] == 1 {
            total += (inst.availability[e][j] == 0) as usize;
            total += (inst.vacation[e][j] == 1) as usize;
        }
        if let Some(p) = inst.preferences[e][j] {
            total += (load[j] != p) as usize;
        }
    }
    Ok(total)
}

/// First-stage pattern model: one variant per employee, minimizing the
/// slack needed to reconcile the pattern with availability, vacation,
/// licenses and preferences, plus a small term spreading employees across
/// variants.
pub fn build_pattern_stage1(inst: &RosterInstance, pattern: &WorkPattern) -> Result<RosterModel> {
    ensure_valid(inst)?;
    let resolved = pattern.resolve(inst)?;
    let view = InstanceView::new(inst);
    let (n, m, s, nv) = (view.n, view.m, view.s, pattern.variants());

    // load[v][j] and the shift used, per variant.
    let mut load = vec![vec![None::<usize>; m]; nv];
    for (v, row) in load.iter_mut().enumerate() {
        for (j, k) in variant_cells(&resolved, v, view.days) {
            row[j] = Some(k);
        }
    }
    let works = |v: usize, j: usize| load[v][j].is_some();

    let mut model = MilpModel::new();
    let mut map = VariableMap::new(n, m, s);
    let z0 = model.num_vars();
    for _ in 0..n * nv {
        model.add_var(0.0, 0.0, 1.0, true);
    }
    map.push(names::PATTERN_CHOICE, z0, n * nv);
    let z = |e: usize, v: usize| z0 + e * nv + v;

    let load_terms = |e: usize, j: usize| -> Vec<(usize, f64)> {
        (0..nv).filter(|&v| works(v, j)).map(|v| (z(e, v), 1.0)).collect()
    };

    // Rows whose right-hand side makes a pattern shift a conflict.
    let mut avail = Vec::new();
    let mut vac = Vec::new();
    let mut lic = Vec::new();
    let mut pref = Vec::new();
    for e in 0..n {
        for j in 0..m {
            let any = (0..nv).any(|v| works(v, j));
            if any && inst.availability[e][j] == 0 {
                avail.push((e, j));
            }
            if any && inst.vacation[e][j] == 1 {
                vac.push((e, j));
            }
            if (0..nv).any(|v| load[v][j].is_some_and(|k| !view.licensed(e, k))) {
                lic.push((e, j));
            }
            if let Some(p) = inst.preferences[e][j] {
                pref.push((e, j, p));
            }
        }
    }

    let slack_block = |model: &mut MilpModel, map: &mut VariableMap, name, len| {
        let start = model.num_vars();
        for _ in 0..len {
            model.add_var(1.0, 0.0, f64::INFINITY, false);
        }
        map.push(name, start, len)
    };
    let sa = slack_block(&mut model, &mut map, names::AVAILABILITY_SLACK, avail.len());
    let sv = slack_block(&mut model, &mut map, names::VACATION_SLACK, vac.len());
    let sl = slack_block(&mut model, &mut map, names::LICENSE_SLACK, lic.len());
    let su = slack_block(&mut model, &mut map, names::PREFERENCE_SLACK, pref.len());
    let so = slack_block(&mut model, &mut map, names::PREFERENCE_SURPLUS, pref.len());
    let u = model.add_var(BALANCE_COST, 0.0, f64::INFINITY, false);
    map.push(names::VARIANT_LOAD, u, 1);

    for e in 0..n {
        model.add_row((0..nv).map(|v| (z(e, v), 1.0)).collect(), 1.0, 1.0);
    }
    for (i, &(e, j)) in avail.iter().enumerate() {
        let mut row = load_terms(e, j);
        row.push((sa + i, -1.0));
        model.add_row(row, f64::NEG_INFINITY, 0.0);
    }
    for (i, &(e, j)) in vac.iter().enumerate() {
        let mut row = load_terms(e, j);
        row.push((sv + i, -1.0));
        model.add_row(row, f64::NEG_INFINITY, 0.0);
    }
    for (i, &(e, j)) in lic.iter().enumerate() {
        let mut row: Vec<(usize, f64)> = (0..nv)
            .filter(|&v| load[v][j].is_some_and(|k| !view.licensed(e, k)))
            .map(|v| (z(e, v), 1.0))
            .collect();
        row.push((sl + i, -1.0));
        model.add_row(row, f64::NEG_INFINITY, 0.0);
    }
    for (i, &(e, j, p)) in pref.iter().enumerate() {
        let mut row = load_terms(e, j);
        row.push((su + i, 1.0));
        row.push((so + i, -1.0));
        model.add_row(row, p as f64, p as f64);
    }
    for v in 0..nv {
        let mut row: Vec<(usize, f64)> = (0..n).map(|e| (z(e, v), 1.0)).collect();
        row.push((u, -1.0));
        model.add_row(row, f64::NEG_INFINITY, 0.0);
    }

    Ok(RosterModel {
        model,
        map,
        folded_bound_constraints: 0,
    })
}

/// Reads the chosen variant of every employee from a stage-1 solution.
pub fn decode_pattern_choice(map: &VariableMap, solution: &[f64]) -> Result<Vec<usize>> {
    let r = map
        .range(names::PATTERN_CHOICE)
        .ok_or_else(|| Error::InvalidConfig("model has no pattern choice variables".into()))?;
    let n = map.employees;
    if n == 0 || solution.len() < r.end() {
        return Err(Error::InvalidConfig("solution vector is shorter than the model".into()));
    }
    let nv = r.len / n;
    (0..n)
        .map(|e| {
            (0..nv)
                .find(|&v| solution[r.start + e * nv + v] > 0.5)
                .ok_or(Error::NoSolution)
        })
        .collect()
}
