//! Randomized instances for the experimental harness.
//!
//! The base team has 12 employees on an 8-week horizon with switching
//! operations (8-hour M/A/N), on-call duty `P` and outage planning `OM`
//! (both all-day). Everybody performs switching operations; half of the team
//! holds the `P` license and the other half the `OM` license. Cover is one
//! employee per block for switching and `P`, no switching afternoon on
//! weekends, and `OM` on business days only. Other team sizes scale the
//! cover by `employees / 12`; fractional scales keep each demand slot with
//! the fractional probability.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::instance::{
    calendar_sets, ForbiddenSequence, RosterInstance, ShiftKind, ShiftType, BLOCKS_PER_DAY, BLOCKS_PER_WEEK,
    DAYS_PER_WEEK,
};
use super::targets::default_targets;
use crate::error::{Error, Result};
use crate::num::floor;

/// Which shift types the generated team uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftSet {
    /// Switching operations, on-call duty P and outage planning OM.
    Full,
    /// Switching operations and on-call duty P only.
    SwitchingAndOnCall,
}

pub const SWITCHING: &str = "S";
pub const ON_CALL: &str = "P";
pub const OUTAGE_PLANNING: &str = "OM";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub employees: usize,
    pub weeks: usize,
    pub shift_set: ShiftSet,
    /// Share of days an employee is available (outside vacation).
    pub availability_rate: f64,
    /// Vacation days inside the horizon; `None` prorates 25 days per year.
    pub vacation_days: Option<u32>,
    /// Share of time blocks carrying a preference (for/against at 50-50).
    pub preference_density: f64,
    /// Cover multiplier relative to the 12-employee base; `None` uses
    /// `employees / 12`.
    pub demand_scale: Option<f64>,
    pub max_shifts_per_week: u32,
    pub min_shifts_per_week: u32,
    /// `None` requires one rest day per week.
    pub min_rest_days: Option<u32>,
    /// `None` requires one rest Sunday in four weeks.
    pub min_rest_sundays: Option<u32>,
    /// Days (zero-based) without outage planning.
    pub holidays: Vec<usize>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            employees: 12,
            weeks: 8,
            shift_set: ShiftSet::Full,
            availability_rate: 0.95,
            vacation_days: None,
            preference_density: 0.2,
            demand_scale: None,
            max_shifts_per_week: 5,
            min_shifts_per_week: 1,
            min_rest_days: None,
            min_rest_sundays: None,
            holidays: Vec::new(),
        }
    }
}

impl GeneratorConfig {
    pub fn new(employees: usize, weeks: usize) -> Self {
        Self {
            employees,
            weeks,
            ..Self::default()
        }
    }

    /// Small instances for exhaustive cross-checks: two shift types, sparse
    /// cover and no minimum weekly shifts.
    pub fn toy(employees: usize, weeks: usize) -> Self {
        Self {
            employees,
            weeks,
            shift_set: ShiftSet::SwitchingAndOnCall,
            min_shifts_per_week: 0,
            min_rest_sundays: Some(0),
            ..Self::default()
        }
    }

    pub fn horizon_days(&self) -> usize {
        self.weeks * DAYS_PER_WEEK
    }

    pub fn effective_vacation_days(&self) -> u32 {
        self.vacation_days
            .unwrap_or_else(|| crate::num::round(25.0 * self.horizon_days() as f64 / 365.0) as u32)
    }

    fn validate(&self) -> Result<()> {
        if self.employees == 0 || self.weeks == 0 {
            return Err(Error::InvalidConfig("employees and weeks must be positive".into()));
        }
        if self.effective_vacation_days() as usize > self.horizon_days() {
            return Err(Error::InvalidConfig(alloc::format!(
                "{} vacation days exceed the {}-day horizon",
                self.effective_vacation_days(),
                self.horizon_days()
            )));
        }
        for (name, v) in [
            ("availability_rate", self.availability_rate),
            ("preference_density", self.preference_density),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(alloc::format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if let Some(scale) = self.demand_scale {
            if !(scale >= 0.0 && scale.is_finite()) {
                return Err(Error::InvalidConfig("demand_scale must be nonnegative".into()));
            }
        }
        if self.min_shifts_per_week > self.max_shifts_per_week {
            return Err(Error::InvalidConfig("min_shifts_per_week exceeds max_shifts_per_week".into()));
        }
        Ok(())
    }
}

/// Draws a demand of `scale` employees: the integer part always, one more
/// with probability equal to the fractional part.
fn scaled_demand(rng: &mut ChaCha8Rng, scale: f64) -> u32 {
    let base = floor(scale);
    let extra = rng.random::<f64>() < scale - base;
    base as u32 + extra as u32
}

/// Generates a seeded instance; the same config and seed always give the
/// same instance.
pub fn generate_instance(cfg: &GeneratorConfig, seed: u64) -> Result<RosterInstance> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, w) = (cfg.employees, cfg.weeks);
    let m = w * BLOCKS_PER_WEEK;
    let days = w * DAYS_PER_WEEK;

    let mut shift_types = vec![
        ShiftType::new(SWITCHING, ShiftKind::EightHour),
        ShiftType::new(ON_CALL, ShiftKind::AllDay),
    ];
    if cfg.shift_set == ShiftSet::Full {
        shift_types.push(ShiftType::new(OUTAGE_PLANNING, ShiftKind::AllDay));
    }
    let s = shift_types.len();
    let (sw, pk) = (0usize, 1usize);

    // License split: the first half holds P; with OM present the second half
    // holds OM instead of P.
    let mut no_license = vec![Vec::new(); s];
    let p_holders = if cfg.shift_set == ShiftSet::Full { n / 2 } else { n.div_ceil(2) }.max(1);
    for e in 0..n {
        if e >= p_holders {
            no_license[pk].push(e);
        } else if cfg.shift_set == ShiftSet::Full {
            no_license[2].push(e);
        }
    }
    if cfg.shift_set == ShiftSet::Full && p_holders >= n {
        // A single employee cannot hold both; nobody does OM.
        no_license[2] = (0..n).collect();
    }

    let scale = cfg.demand_scale.unwrap_or(n as f64 / 12.0);
    let mut cover = vec![vec![0u32; s]; m];
    for d in 0..days {
        let weekday = d % DAYS_PER_WEEK;
        let weekend = weekday >= 5;
        for b in 0..BLOCKS_PER_DAY {
            if weekend && b == 1 {
                continue;
            }
            cover[d * BLOCKS_PER_DAY + b][sw] = scaled_demand(&mut rng, scale);
        }
        let p = scaled_demand(&mut rng, scale);
        let om = if s > 2 && !weekend && !cfg.holidays.contains(&d) {
            scaled_demand(&mut rng, scale)
        } else {
            0
        };
        for b in 0..BLOCKS_PER_DAY {
            cover[d * BLOCKS_PER_DAY + b][pk] = p;
            if s > 2 {
                cover[d * BLOCKS_PER_DAY + b][2] = om;
            }
        }
    }

    let mut availability = vec![vec![1u8; m]; n];
    let mut vacation = vec![vec![0u8; m]; n];
    let vac_days = cfg.effective_vacation_days() as usize;
    for e in 0..n {
        for d in 0..days {
            if rng.random::<f64>() >= cfg.availability_rate {
                for b in 0..BLOCKS_PER_DAY {
                    availability[e][d * BLOCKS_PER_DAY + b] = 0;
                }
            }
        }
        if vac_days > 0 {
            let start = rng.random_range(0..=days - vac_days);
            for d in start..start + vac_days {
                for b in 0..BLOCKS_PER_DAY {
                    vacation[e][d * BLOCKS_PER_DAY + b] = 1;
                }
            }
        }
    }

    let mut preferences = vec![vec![None; m]; n];
    for row in preferences.iter_mut() {
        for p in row.iter_mut() {
            if rng.random::<f64>() < cfg.preference_density {
                *p = Some(rng.random_bool(0.5) as u8);
            }
        }
    }

    // Restore availability where a demand would otherwise be unstaffable; drop
    // demand that vacation alone makes impossible.
    let unlicensed = |e: usize, k: usize| no_license[k].contains(&e);
    for d in 0..days {
        for k in 0..s {
            for b in 0..BLOCKS_PER_DAY {
                let j = d * BLOCKS_PER_DAY + b;
                let demand = cover[j][k] as usize;
                if demand == 0 {
                    continue;
                }
                let eligible = |a: &Vec<Vec<u8>>| {
                    (0..n)
                        .filter(|&e| !unlicensed(e, k) && a[e][j] == 1 && vacation[e][j] == 0)
                        .count()
                };
                if eligible(&availability) < demand {
                    let mut pool: Vec<usize> = (0..n)
                        .filter(|&e| !unlicensed(e, k) && vacation[e][j] == 0 && availability[e][j] == 0)
                        .collect();
                    pool.shuffle(&mut rng);
                    for e in pool {
                        if eligible(&availability) >= demand {
                            break;
                        }
                        for bb in 0..BLOCKS_PER_DAY {
                            availability[e][d * BLOCKS_PER_DAY + bb] = 1;
                        }
                    }
                }
                let now = eligible(&availability) as u32;
                if now < cover[j][k] {
                    let keep = now;
                    if shift_types[k].kind == ShiftKind::AllDay {
                        for bb in 0..BLOCKS_PER_DAY {
                            cover[d * BLOCKS_PER_DAY + bb][k] = keep;
                        }
                    } else {
                        cover[j][k] = keep;
                    }
                }
            }
        }
    }

    let (sunday_blocks, weekend_blocks) = calendar_sets(w);
    let mut inst = RosterInstance {
        weeks: w,
        employees: n,
        blocks: m,
        max_shifts_per_week: cfg.max_shifts_per_week,
        min_shifts_per_week: cfg.min_shifts_per_week,
        min_rest_days: cfg.min_rest_days.unwrap_or(w as u32),
        min_rest_sundays: cfg.min_rest_sundays.unwrap_or((w / 4) as u32),
        availability,
        vacation,
        preferences,
        cover,
        workload_targets: vec![vec![0.0; s]; n],
        weekend_targets: vec![vec![0.0; s]; n],
        no_license,
        sunday_blocks,
        weekend_blocks,
        forbidden_sequences: vec![ForbiddenSequence {
            prev: pk,
            next_morning: sw,
        }],
        shift_types,
    };
    let (t, g) = default_targets(&inst)?;
    inst.workload_targets = t;
    inst.weekend_targets = g;
    Ok(inst)
}
