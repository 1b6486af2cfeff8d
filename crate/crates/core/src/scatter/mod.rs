//! Scatter search over feasible rosters: reference set upkeep, day-swap
//! improvement, vote-based combination and the generation loop.

mod combine;
mod improve;
mod refset;

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use combine::{combine, day_votes, REPAIR_PASSES};
pub use improve::{improve, QUALITY_EPS};
pub use refset::{diversify, diversify_pool, generate_subsets, Member, RefSet, DEFAULT_CAPACITY};

use crate::bnb::compute_gap;
use crate::clock::{Clock, Deadline};
use crate::error::{Error, Result};
use crate::model::feasibility::is_feasible;
use crate::model::{InstanceView, ObjectiveContext, ObjectiveWeights, Roster, RosterInstance};

/// Stall threshold per employee when none is given.
pub const STALL_PER_EMPLOYEE: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSearchConfig {
    /// Consecutive rejected swaps before improvement stops; `None` means
    /// 50 per employee.
    pub initial_stall_threshold: Option<usize>,
    /// Applied when a generation improves the best objective by less than 10%.
    pub escalation_factor: f64,
    /// Ceiling for the escalated threshold, as a multiple of the initial one.
    pub max_escalation: f64,
    pub rng_seed: u64,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        Self {
            initial_stall_threshold: None,
            escalation_factor: 2.0,
            max_escalation: 64.0,
            rng_seed: 0,
        }
    }
}

impl LocalSearchConfig {
    pub fn stall_threshold(&self, employees: usize) -> usize {
        self.initial_stall_threshold
            .unwrap_or(STALL_PER_EMPLOYEE * employees)
            .max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_stall_threshold == Some(0) {
            return Err(Error::InvalidConfig("stall threshold must be at least 1".into()));
        }
        if !(self.escalation_factor >= 1.0) || !(self.max_escalation >= 1.0) {
            return Err(Error::InvalidConfig("escalation factors must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterConfig {
    pub gap_target: f64,
    pub time_limit: Option<f64>,
    pub max_generations: Option<usize>,
    pub local_search: LocalSearchConfig,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        Self {
            gap_target: 0.0,
            time_limit: None,
            max_generations: None,
            local_search: LocalSearchConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatterTermination {
    GapReached,
    /// No subset contained a new member.
    Stagnation,
    TimeLimit,
    GenerationLimit,
}

/// One generation of the search. Generation 0 is the improved initial set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub elapsed: f64,
    pub best_objective: f64,
    pub gap: f64,
    pub refset_objectives: Vec<f64>,
    pub subsets: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub stall_threshold: usize,
    /// Seed of each combination, in subset order.
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterOutcome {
    pub best: Roster,
    pub objective: f64,
    pub refset: RefSet,
    pub trace: Vec<GenerationRecord>,
    pub termination: ScatterTermination,
}

/// Seed for combination `index` of generation `generation`.
pub fn combination_seed(base: u64, generation: usize, index: usize) -> u64 {
    // splitmix64 over the packed coordinates
    let mut z = base
        .wrapping_add((generation as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((index as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs the generation loop: subsets, combination, improvement, reference
/// set update. Stops when the gap to `lower_bound` reaches the target, when
/// no subset holds a new member, or on a time or generation limit.
///
/// Initial members are re-scored under `ctx`, improved, and dropped if
/// infeasible.
#[allow(clippy::too_many_arguments)]
pub fn run_scatter_search(
    inst: &RosterInstance,
    weights: &ObjectiveWeights,
    ctx: ObjectiveContext<'_>,
    init: &RefSet,
    lower_bound: f64,
    config: &ScatterConfig,
    clock: &dyn Clock,
    progress: &mut dyn FnMut(&GenerationRecord),
) -> Result<ScatterOutcome> {
    config.local_search.validate()?;
    weights.validate()?;
    if init.is_empty() {
        return Err(Error::EmptyPool);
    }
    let deadline = Deadline::new(clock, config.time_limit.unwrap_or(f64::INFINITY));
    let view = InstanceView::new(inst);
    let base_stall = config.local_search.stall_threshold(view.n);
    let max_stall = (base_stall as f64 * config.local_search.max_escalation) as usize;
    let mut stall = base_stall;
    let seed = config.local_search.rng_seed;

    let mut refset = RefSet::new(init.capacity())?;
    let mut seeds = Vec::new();
    for (i, m) in init.members().iter().enumerate() {
        if !is_feasible(&view, &m.roster) {
            continue;
        }
        let s = combination_seed(seed, 0, i);
        seeds.push(s);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let (x, f) = improve(inst, &m.roster, weights, ctx, stall, &mut rng, Some(&deadline))?;
        refset.update(x, f);
    }
    if refset.is_empty() {
        return Err(Error::EmptyPool);
    }

    let mut trace = Vec::new();
    let record = |generation, refset: &RefSet, subsets, accepted, rejected, stall, seeds| {
        let best = refset.best().map_or(f64::INFINITY, |m| m.objective);
        GenerationRecord {
            generation,
            elapsed: deadline.elapsed(),
            best_objective: best,
            gap: compute_gap(best, lower_bound),
            refset_objectives: refset.objectives(),
            subsets,
            accepted,
            rejected,
            stall_threshold: stall,
            seeds,
        }
    };
    let first = record(0, &refset, 0, refset.len(), 0, stall, seeds);
    progress(&first);
    trace.push(first);

    let mut generation = 0;
    let termination = loop {
        let best = refset.best().map_or(f64::INFINITY, |m| m.objective);
        if compute_gap(best, lower_bound) <= config.gap_target {
            break ScatterTermination::GapReached;
        }
        if deadline.expired() {
            break ScatterTermination::TimeLimit;
        }
        if config.max_generations.is_some_and(|g| generation >= g) {
            break ScatterTermination::GenerationLimit;
        }
        let subsets = generate_subsets(&mut refset);
        if subsets.is_empty() {
            break ScatterTermination::Stagnation;
        }
        generation += 1;
        let snapshot: Vec<Roster> = refset.members().iter().map(|m| m.roster.clone()).collect();
        let (mut accepted, mut rejected, mut processed) = (0, 0, 0);
        let mut seeds = Vec::with_capacity(subsets.len());
        for (i, subset) in subsets.iter().enumerate() {
            if deadline.expired() {
                break;
            }
            processed += 1;
            let s = combination_seed(seed, generation, i);
            seeds.push(s);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let parents: Vec<&Roster> = subset.iter().map(|&k| &snapshot[k]).collect();
            match combine(inst, &parents, &mut rng)? {
                Some(child) => {
                    let (x, f) = improve(inst, &child, weights, ctx, stall, &mut rng, Some(&deadline))?;
                    if refset.update(x, f) {
                        accepted += 1;
                    }
                }
                None => rejected += 1,
            }
        }
        let new_best = refset.best().map_or(f64::INFINITY, |m| m.objective);
        if best - new_best <= 0.10 * best.abs() {
            stall = ((stall as f64 * config.local_search.escalation_factor) as usize).min(max_stall.max(stall));
        }
        let rec = record(generation, &refset, processed, accepted, rejected, stall, seeds);
        progress(&rec);
        trace.push(rec);
    };

    let best = refset.best().ok_or(Error::EmptyPool)?;
    Ok(ScatterOutcome {
        best: best.roster.clone(),
        objective: best.objective,
        trace,
        termination,
        refset,
    })
}
