#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roster_core::model::{generate_instance, GeneratorConfig, InstanceView, Roster, RosterInstance, BLOCKS_PER_DAY};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn toy(employees: usize, weeks: usize, seed: u64) -> RosterInstance {
    generate_instance(&GeneratorConfig::toy(employees, weeks), seed).unwrap()
}

/// Random day-level roster that respects licenses, availability, vacation
/// and whole-day all-day shifts, but none of the sequencing rules.
pub fn random_roster(inst: &RosterInstance, rng: &mut ChaCha8Rng, work_rate: f64) -> Roster {
    let view = InstanceView::new(inst);
    let mut x = Roster::for_instance(inst);
    for e in 0..view.n {
        for d in 0..view.days {
            if !rng.random_bool(work_rate) {
                continue;
            }
            let k = rng.random_range(0..view.s);
            if !view.licensed(e, k) {
                continue;
            }
            let blocks: Vec<usize> = if view.all_day[k] {
                (0..BLOCKS_PER_DAY).map(|b| d * BLOCKS_PER_DAY + b).collect()
            } else {
                vec![d * BLOCKS_PER_DAY + rng.random_range(0..BLOCKS_PER_DAY)]
            };
            if blocks.iter().all(|&j| view.can_work(e, j)) {
                for j in blocks {
                    x.set(e, j, k, true);
                }
            }
        }
    }
    x
}

/// Sets the cover to exactly what `x` staffs.
pub fn cover_from(inst: &mut RosterInstance, x: &Roster) {
    let (n, m, s) = x.dims();
    for j in 0..m {
        for k in 0..s {
            inst.cover[j][k] = (0..n).filter(|&e| x.get(e, j, k)).count() as u32;
        }
    }
}

/// The ways employee `e` can spend day `d`: rest, one eight-hour block or a
/// whole all-day shift.
fn day_options(view: &InstanceView<'_>, e: usize, d: usize) -> Vec<Vec<(usize, usize)>> {
    let mut out = vec![Vec::new()];
    for k in 0..view.s {
        if !view.licensed(e, k) {
            continue;
        }
        if view.all_day[k] {
            let cells: Vec<(usize, usize)> = (0..BLOCKS_PER_DAY).map(|b| (d * BLOCKS_PER_DAY + b, k)).collect();
            if cells.iter().all(|&(j, _)| view.can_work(e, j)) {
                out.push(cells);
            }
        } else {
            for b in 0..BLOCKS_PER_DAY {
                let j = d * BLOCKS_PER_DAY + b;
                if view.can_work(e, j) {
                    out.push(vec![(j, k)]);
                }
            }
        }
    }
    out
}

/// Every schedule of employee `e` that passes the per-employee rules, as
/// lists of `(block, shift)` cells.
pub fn employee_schedules(inst: &RosterInstance, e: usize) -> Vec<Vec<(usize, usize)>> {
    use roster_core::model::employee_feasible;
    let view = InstanceView::new(inst);
    let options: Vec<_> = (0..view.days).map(|d| day_options(&view, e, d)).collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; view.days];
    let mut x = Roster::for_instance(inst);
    loop {
        for (d, &p) in pick.iter().enumerate() {
            for &(j, k) in &options[d][p] {
                x.set(e, j, k, true);
            }
        }
        if employee_feasible(&view, &x, e) {
            out.push(pick.iter().enumerate().flat_map(|(d, &p)| options[d][p].clone()).collect());
        }
        for (d, &p) in pick.iter().enumerate() {
            for &(j, k) in &options[d][p] {
                x.set(e, j, k, false);
            }
        }
        let mut d = 0;
        loop {
            if d == view.days {
                return out;
            }
            pick[d] += 1;
            if pick[d] < options[d].len() {
                break;
            }
            pick[d] = 0;
            d += 1;
        }
    }
}

/// Calls `visit` on every feasible roster, by enumerating employee
/// schedules against the remaining cover.
pub fn for_each_feasible(inst: &RosterInstance, visit: &mut dyn FnMut(&Roster)) {
    let (n, m, s) = inst.dims();
    let schedules: Vec<_> = (0..n).map(|e| employee_schedules(inst, e)).collect();
    let mut remaining: Vec<i64> = (0..m * s).map(|i| inst.cover[i / s][i % s] as i64).collect();
    let mut x = Roster::for_instance(inst);
    fn rec(
        e: usize,
        schedules: &[Vec<Vec<(usize, usize)>>],
        remaining: &mut Vec<i64>,
        x: &mut Roster,
        s: usize,
        visit: &mut dyn FnMut(&Roster),
    ) {
        if e == schedules.len() {
            if remaining.iter().all(|&r| r == 0) {
                visit(x);
            }
            return;
        }
        // Work still needed must fit in the employees left.
        let left = (schedules.len() - e) as i64;
        if remaining.iter().any(|&r| r > left) {
            return;
        }
        for sched in &schedules[e] {
            if sched.iter().any(|&(j, k)| remaining[j * s + k] == 0) {
                continue;
            }
            for &(j, k) in sched {
                remaining[j * s + k] -= 1;
                x.set(e, j, k, true);
            }
            rec(e + 1, schedules, remaining, x, s, visit);
            for &(j, k) in sched {
                remaining[j * s + k] += 1;
                x.set(e, j, k, false);
            }
        }
    }
    rec(0, &schedules, &mut remaining, &mut x, s, visit);
}

/// Exhaustive optimum over all feasible rosters. Returns the optimal
/// objective and one optimal roster, or `None` when no roster is feasible.
pub fn brute_force_optimum(inst: &RosterInstance, score: &dyn Fn(&Roster) -> f64) -> Option<(f64, Roster)> {
    let mut best: Option<(f64, Roster)> = None;
    for_each_feasible(inst, &mut |x| {
        let v = score(x);
        if best.as_ref().is_none_or(|(b, _)| v < *b - 1e-12) {
            best = Some((v, x.clone()));
        }
    });
    best
}

/// `count` feasible rosters drawn uniformly without replacement.
pub fn sample_feasible(inst: &RosterInstance, count: usize, r: &mut ChaCha8Rng) -> Vec<Roster> {
    let mut seen = 0usize;
    let mut out: Vec<Roster> = Vec::new();
    for_each_feasible(inst, &mut |x| {
        seen += 1;
        if out.len() < count {
            out.push(x.clone());
        } else {
            let i = r.random_range(0..seen);
            if i < count {
                out[i] = x.clone();
            }
        }
    });
    out
}

/// A toy instance whose cover is staffed exactly by a random roster that
/// passes every rule, plus that roster.
pub fn feasible_pair(employees: usize, weeks: usize, seed: u64) -> (RosterInstance, Roster) {
    use roster_core::model::is_feasible;
    let mut r = rng(seed);
    for attempt in 0.. {
        let mut inst = toy(employees, weeks, seed.wrapping_mul(1000).wrapping_add(attempt));
        let x = random_roster(&inst, &mut r, 0.35);
        cover_from(&mut inst, &x);
        if is_feasible(&InstanceView::new(&inst), &x) {
            return (inst, x);
        }
    }
    unreachable!()
}

/// Applies up to `swaps` random day swaps that keep every employee feasible.
pub fn perturb(inst: &RosterInstance, x: &Roster, r: &mut ChaCha8Rng, swaps: usize) -> Roster {
    use roster_core::model::employee_feasible;
    let view = InstanceView::new(inst);
    let mut y = x.clone();
    if view.n < 2 {
        return y;
    }
    for _ in 0..swaps {
        let e1 = r.random_range(0..view.n);
        let e2 = (e1 + r.random_range(1..view.n)) % view.n;
        let d = r.random_range(0..view.days);
        y.swap_days(e1, e2, d);
        if !employee_feasible(&view, &y, e1) || !employee_feasible(&view, &y, e2) {
            y.swap_days(e1, e2, d);
        }
    }
    y
}

/// Per `(block, shift)` staffing counts.
pub fn column_sums(x: &Roster) -> Vec<usize> {
    let (n, m, s) = x.dims();
    (0..m * s)
        .map(|i| (0..n).filter(|&e| x.get(e, i / s, i % s)).count())
        .collect()
}
