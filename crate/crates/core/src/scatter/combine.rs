use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::improve::check_dims;
use crate::error::{Error, Result};
use crate::model::feasibility::{employee_violations, is_feasible};
use crate::model::{DayCell, InstanceView, Roster, RosterInstance, BLOCKS_PER_DAY};

/// Randomized fill-and-repair attempts before an offspring is rejected.
pub const REPAIR_PASSES: usize = 3;

/// Votes for each `(employee, day)`: distinct day cells and how many
/// parents use them.
pub fn day_votes(parents: &[&Roster], e: usize, d: usize) -> Vec<(DayCell, usize)> {
    let mut votes: Vec<(DayCell, usize)> = Vec::new();
    for p in parents {
        let c = p.day_cell(e, d);
        match votes.iter_mut().find(|(v, _)| *v == c) {
            Some(v) => v.1 += 1,
            None => votes.push((c, 1)),
        }
    }
    votes
}

fn cells_of(cell: DayCell, d: usize, s: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..BLOCKS_PER_DAY).flat_map(move |b| {
        (0..s)
            .filter(move |&k| cell.has(b, k, s))
            .map(move |k| (d * BLOCKS_PER_DAY + b, k))
    })
}

/// Combines parents by voting over `(employee, day, day cell)` triplets.
///
/// Cells are placed from the highest vote count down; unanimous cells are
/// always placed, other cells only while their blocks still have uncovered
/// demand. Equal-vote candidates for one `(employee, day)` are chosen at
/// random. Remaining demand goes to resting, licensed, available employees
/// with the lowest workload first. Returns `None` if no feasible offspring
/// comes out of [`REPAIR_PASSES`] attempts.
pub fn combine<R: Rng + ?Sized>(inst: &RosterInstance, parents: &[&Roster], rng: &mut R) -> Result<Option<Roster>> {
    if parents.len() < 2 {
        return Err(Error::InvalidConfig("combination needs at least two parents".into()));
    }
    for p in parents {
        check_dims(inst, p)?;
    }
    let view = InstanceView::new(inst);
    let (n, s, days) = (view.n, view.s, view.days);
    let votes: Vec<Vec<(DayCell, usize)>> = (0..n)
        .flat_map(|e| (0..days).map(move |d| (e, d)))
        .map(|(e, d)| day_votes(parents, e, d))
        .collect();
    let unanimous = |e: usize, d: usize| votes[e * days + d].len() == 1;

    for _ in 0..REPAIR_PASSES {
        let mut x = Roster::for_instance(inst);
        let mut rem: Vec<Vec<i64>> = inst.cover.iter().map(|r| r.iter().map(|&c| c as i64).collect()).collect();
        let mut placed = vec![false; n * days];
        for level in (1..=parents.len()).rev() {
            for e in 0..n {
                for d in 0..days {
                    if placed[e * days + d] {
                        continue;
                    }
                    let fits = |c: DayCell| cells_of(c, d, s).all(|(j, k)| rem[j][k] > 0);
                    let mut options: Vec<DayCell> = votes[e * days + d]
                        .iter()
                        .filter(|&&(c, v)| v == level && (unanimous(e, d) || fits(c)))
                        .map(|&(c, _)| c)
                        .collect();
                    if options.is_empty() {
                        continue;
                    }
                    options.sort();
                    let c = options[rng.random_range(0..options.len())];
                    for (j, k) in cells_of(c, d, s) {
                        rem[j][k] -= 1;
                    }
                    x.set_day_cell(e, d, c);
                    placed[e * days + d] = true;
                }
            }
        }
        repair(&view, &mut x, &mut rem, &unanimous, rng);
        if is_feasible(&view, &x) {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

fn repair<R: Rng + ?Sized>(
    view: &InstanceView<'_>,
    x: &mut Roster,
    rem: &mut [Vec<i64>],
    unanimous: &dyn Fn(usize, usize) -> bool,
    rng: &mut R,
) {
    let (n, s) = (view.n, view.s);
    let mut worked: Vec<usize> = (0..n)
        .map(|e| (0..view.days).filter(|&d| !x.day_cell(e, d).is_rest()).count())
        .collect();
    for d in 0..view.days {
        let j0 = d * BLOCKS_PER_DAY;
        for k in 0..s {
            let blocks: Vec<usize> = if view.all_day[k] {
                vec![j0]
            } else {
                (j0..j0 + BLOCKS_PER_DAY).collect()
            };
            for j in blocks {
                while rem[j][k] > 0 {
                    let span = if view.all_day[k] { j0..j0 + BLOCKS_PER_DAY } else { j..j + 1 };
                    let mut cand: Vec<usize> = (0..n)
                        .filter(|&e| {
                            x.day_cell(e, d).is_rest()
                                && !unanimous(e, d)
                                && view.licensed(e, k)
                                && span.clone().all(|b| view.can_work(e, b))
                        })
                        .collect();
                    if cand.is_empty() {
                        return;
                    }
                    cand.shuffle(rng);
                    cand.sort_by_key(|&e| worked[e]);
                    let mut chosen = cand[0];
                    for &e in &cand {
                        let before = employee_violations(view, x, e);
                        for b in span.clone() {
                            x.set(e, b, k, true);
                        }
                        let after = employee_violations(view, x, e);
                        for b in span.clone() {
                            x.set(e, b, k, false);
                        }
                        if after <= before {
                            chosen = e;
                            break;
                        }
                    }
                    for b in span.clone() {
                        x.set(chosen, b, k, true);
                        rem[b][k] -= 1;
                    }
                    worked[chosen] += 1;
                }
            }
        }
    }
}
