//! Sparse LU factorization of a simplex basis with product-form updates.
//!
//! Pivots are chosen by a Markowitz search restricted to the sparsest
//! columns and rows, with threshold partial pivoting. Columns are addressed
//! by their position in the basis, rows by constraint index.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

const THRESHOLD: f64 = 0.1;
const SEARCH_WIDTH: usize = 4;
const SINGULAR_TOL: f64 = 1e-11;
const DROP_TOL: f64 = 1e-14;

/// Positions that could not be pivoted and the rows left without a pivot.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Singular {
    pub positions: Vec<usize>,
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct LuFactors {
    m: usize,
    prow: Vec<usize>,
    pcol: Vec<usize>,
    pivot: Vec<f64>,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_start: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
}

struct Active {
    cols: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<usize>>,
    row_done: Vec<bool>,
    col_done: Vec<bool>,
    // Active columns and rows ordered by nonzero count, with the count each
    // is currently filed under.
    col_set: BTreeSet<(usize, usize)>,
    row_set: BTreeSet<(usize, usize)>,
    col_key: Vec<usize>,
    row_key: Vec<usize>,
}

impl Active {
    fn refile_col(&mut self, j: usize) {
        if self.col_set.remove(&(self.col_key[j], j)) {
            self.col_key[j] = self.cols[j].len();
            self.col_set.insert((self.col_key[j], j));
        }
    }

    fn refile_row(&mut self, i: usize) {
        if self.row_set.remove(&(self.row_key[i], i)) {
            self.row_key[i] = self.rows[i].len();
            self.row_set.insert((self.row_key[i], i));
        }
    }

    fn lookup(&self, i: usize, j: usize) -> f64 {
        self.cols[j].iter().find(|e| e.0 == i).map_or(0.0, |e| e.1)
    }

    fn col_max(&self, j: usize) -> f64 {
        self.cols[j].iter().fold(0.0, |a, e| a.max(e.1.abs()))
    }
}

impl LuFactors {
    /// Factorizes the `m x m` matrix whose column `p` is returned by `col(p)`
    /// as `(row indices, values)`.
    pub fn factorize<'c>(m: usize, col: impl Fn(usize) -> (&'c [usize], &'c [f64])) -> Result<Self, Singular> {
        let mut act = Active {
            cols: Vec::with_capacity(m),
            rows: vec![Vec::new(); m],
            row_done: vec![false; m],
            col_done: vec![false; m],
            col_set: BTreeSet::new(),
            row_set: BTreeSet::new(),
            col_key: vec![0; m],
            row_key: vec![0; m],
        };
        for p in 0..m {
            let (idx, val) = col(p);
            let mut c = Vec::with_capacity(idx.len());
            for (&i, &v) in idx.iter().zip(val) {
                if v.abs() > DROP_TOL {
                    c.push((i, v));
                    act.rows[i].push(p);
                }
            }
            act.cols.push(c);
        }
        for p in 0..m {
            act.col_key[p] = act.cols[p].len();
            act.col_set.insert((act.col_key[p], p));
            act.row_key[p] = act.rows[p].len();
            act.row_set.insert((act.row_key[p], p));
        }

        let mut f = LuFactors {
            m,
            l_start: vec![0],
            u_start: vec![0],
            ..Default::default()
        };
        let mut bad_cols = Vec::new();
        let mut pos = vec![usize::MAX; m];
        let mut urow: Vec<(usize, f64)> = Vec::new();

        let mut remaining = m;
        while remaining > bad_cols.len() {
            let Some((r, c)) = Self::choose_pivot(&mut act, &mut bad_cols) else {
                break;
            };
            remaining -= 1;
            let a_rc = act.lookup(r, c);

            urow.clear();
            for &j in &act.rows[r] {
                if j == c || act.col_done[j] {
                    continue;
                }
                let colj = &mut act.cols[j];
                if let Some(at) = colj.iter().position(|e| e.0 == r) {
                    urow.push((j, colj[at].1));
                    colj.swap_remove(at);
                }
            }
            act.rows[r].clear();
            act.row_done[r] = true;
            act.col_done[c] = true;
            act.row_set.remove(&(act.row_key[r], r));
            act.col_set.remove(&(act.col_key[c], c));

            let lcol: Vec<(usize, f64)> = core::mem::take(&mut act.cols[c])
                .into_iter()
                .filter(|e| e.0 != r)
                .map(|(i, v)| (i, v / a_rc))
                .collect();
            for &(i, _) in &lcol {
                act.rows[i].retain(|&x| x != c);
            }

            for &(j, a_rj) in &urow {
                let colj = &mut act.cols[j];
                for (at, e) in colj.iter().enumerate() {
                    pos[e.0] = at;
                }
                for &(i, l) in &lcol {
                    let delta = -l * a_rj;
                    if pos[i] != usize::MAX {
                        colj[pos[i]].1 += delta;
                    } else {
                        pos[i] = colj.len();
                        colj.push((i, delta));
                        act.rows[i].push(j);
                    }
                }
                for e in colj.iter() {
                    pos[e.0] = usize::MAX;
                }
                act.refile_col(j);
            }
            for &(i, _) in &lcol {
                act.refile_row(i);
            }

            f.prow.push(r);
            f.pcol.push(c);
            f.pivot.push(a_rc);
            for &(i, l) in &lcol {
                if l.abs() > DROP_TOL {
                    f.l_idx.push(i);
                    f.l_val.push(l);
                }
            }
            f.l_start.push(f.l_idx.len());
            for &(j, v) in &urow {
                if v.abs() > DROP_TOL {
                    f.u_idx.push(j);
                    f.u_val.push(v);
                }
            }
            f.u_start.push(f.u_idx.len());
        }

        if f.prow.len() < m {
            let positions: Vec<usize> = (0..m).filter(|&j| !act.col_done[j]).collect();
            let rows = (0..m).filter(|&i| !act.row_done[i]).collect();
            return Err(Singular { positions, rows });
        }
        Ok(f)
    }

    fn choose_pivot(act: &mut Active, bad_cols: &mut Vec<usize>) -> Option<(usize, usize)> {
        loop {
            let ccand: Vec<usize> = act.col_set.iter().take(SEARCH_WIDTH).map(|&(_, j)| j).collect();
            let Some(&first) = ccand.first() else {
                return None;
            };
            let cmin = act.cols[first].len();
            // Numerically empty columns cannot be pivoted.
            let mut dropped = false;
            for &j in &ccand {
                if act.col_max(j) < SINGULAR_TOL {
                    bad_cols.push(j);
                    act.col_set.remove(&(act.col_key[j], j));
                    dropped = true;
                }
            }
            if dropped {
                continue;
            }

            let mut best: Option<(usize, f64, usize, usize)> = None;
            let mut consider = |cost: usize, mag: f64, i: usize, j: usize| {
                let better = match best {
                    None => true,
                    Some((bc, bm, _, _)) => cost < bc || (cost == bc && mag > bm),
                };
                if better {
                    best = Some((cost, mag, i, j));
                }
            };
            for &j in &ccand {
                let cmax = act.col_max(j);
                let cc = act.cols[j].len() - 1;
                for &(i, v) in &act.cols[j] {
                    if v.abs() >= THRESHOLD * cmax {
                        consider((act.rows[i].len() - 1) * cc, v.abs(), i, j);
                    }
                }
            }

            let rcand: Vec<usize> = act
                .row_set
                .iter()
                .filter(|&&(cnt, _)| cnt > 0)
                .take(SEARCH_WIDTH)
                .map(|&(_, i)| i)
                .collect();
            let rmin = rcand.first().map_or(usize::MAX, |&i| act.rows[i].len());
            if rmin < cmin {
                for &i in &rcand {
                    for &j in &act.rows[i] {
                        if bad_cols.contains(&j) {
                            continue;
                        }
                        let v = act.lookup(i, j);
                        let cmax = act.col_max(j);
                        if cmax >= SINGULAR_TOL && v.abs() >= THRESHOLD * cmax {
                            consider((act.rows[i].len() - 1) * (act.cols[j].len() - 1), v.abs(), i, j);
                        }
                    }
                }
            }
            return best.map(|(_, _, i, j)| (i, j));
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// Solves `B x = b`. `rhs` is indexed by row and is destroyed; `out` is
    /// indexed by basis position.
    pub fn ftran(&self, rhs: &mut [f64], out: &mut [f64]) {
        for k in 0..self.prow.len() {
            let v = rhs[self.prow[k]];
            if v != 0.0 {
                for t in self.l_start[k]..self.l_start[k + 1] {
                    rhs[self.l_idx[t]] -= self.l_val[t] * v;
                }
            }
        }
        for k in (0..self.prow.len()).rev() {
            let mut v = rhs[self.prow[k]];
            for t in self.u_start[k]..self.u_start[k + 1] {
                v -= self.u_val[t] * out[self.u_idx[t]];
            }
            out[self.pcol[k]] = v / self.pivot[k];
        }
    }

    /// Solves `B^T y = d`. `d` is indexed by basis position and is destroyed;
    /// `out` is indexed by row.
    pub fn btran(&self, d: &mut [f64], out: &mut [f64]) {
        for k in 0..self.prow.len() {
            let w = d[self.pcol[k]] / self.pivot[k];
            out[self.prow[k]] = w;
            if w != 0.0 {
                for t in self.u_start[k]..self.u_start[k + 1] {
                    d[self.u_idx[t]] -= self.u_val[t] * w;
                }
            }
        }
        for k in (0..self.prow.len()).rev() {
            let mut acc = 0.0;
            for t in self.l_start[k]..self.l_start[k + 1] {
                acc += self.l_val[t] * out[self.l_idx[t]];
            }
            out[self.prow[k]] -= acc;
        }
    }
}

/// One product-form update: basis position `p` was replaced by a column
/// whose representation in the previous basis is `alpha`.
#[derive(Debug, Clone)]
struct Eta {
    p: usize,
    alpha_p: f64,
    idx: Vec<usize>,
    val: Vec<f64>,
}

/// LU factors plus the eta file accumulated since the last refactorization.
#[derive(Debug, Clone, Default)]
pub(crate) struct BasisFactor {
    lu: LuFactors,
    etas: Vec<Eta>,
    work: Vec<f64>,
}

impl BasisFactor {
    pub fn new(lu: LuFactors) -> Self {
        let m = lu.dim();
        Self {
            lu,
            etas: Vec::new(),
            work: vec![0.0; m],
        }
    }

    pub fn updates(&self) -> usize {
        self.etas.len()
    }

    /// `out = B^-1 rhs`; `rhs` (row-indexed) is destroyed.
    pub fn ftran(&mut self, rhs: &mut [f64], out: &mut [f64]) {
        self.lu.ftran(rhs, out);
        for eta in &self.etas {
            let xp = out[eta.p] / eta.alpha_p;
            out[eta.p] = xp;
            if xp != 0.0 {
                for (&i, &a) in eta.idx.iter().zip(&eta.val) {
                    out[i] -= a * xp;
                }
            }
        }
    }

    /// `out = B^-T d`; `d` (position-indexed) is destroyed.
    pub fn btran(&mut self, d: &mut [f64], out: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut v = d[eta.p];
            for (&i, &a) in eta.idx.iter().zip(&eta.val) {
                v -= a * d[i];
            }
            d[eta.p] = v / eta.alpha_p;
        }
        let work = &mut self.work;
        work.copy_from_slice(d);
        self.lu.btran(work, out);
    }

    /// Records that position `p` now holds the column with `B^-1 a = alpha`.
    pub fn update(&mut self, p: usize, alpha: &[f64]) {
        let mut idx = Vec::new();
        let mut val = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            if i != p && a.abs() > DROP_TOL {
                idx.push(i);
                val.push(a);
            }
        }
        self.etas.push(Eta {
            p,
            alpha_p: alpha[p],
            idx,
            val,
        });
    }
}
