use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bnb::PoolEntry;
use crate::error::{Error, Result};
use crate::milp::{extract_roster, VariableMap};
use crate::model::Roster;

pub const DEFAULT_CAPACITY: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub roster: Roster,
    pub objective: f64,
    pub is_new: bool,
}

/// Fixed-capacity elite population, kept sorted by objective with no
/// duplicate rosters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefSet {
    capacity: usize,
    members: Vec<Member>,
}

impl RefSet {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig("reference set capacity must be positive".into()));
        }
        Ok(Self {
            capacity,
            members: Vec::new(),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn best(&self) -> Option<&Member> {
        self.members.first()
    }

    pub fn worst(&self) -> Option<&Member> {
        self.members.last()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.objective).collect()
    }

    pub fn contains(&self, roster: &Roster) -> bool {
        self.members.iter().any(|m| &m.roster == roster)
    }

    pub fn any_new(&self) -> bool {
        self.members.iter().any(|m| m.is_new)
    }

    /// Offers a candidate. Returns whether the set changed.
    pub fn update(&mut self, roster: Roster, objective: f64) -> bool {
        if self.contains(&roster) {
            return false;
        }
        if self.members.len() >= self.capacity {
            match self.members.last() {
                Some(w) if objective < w.objective => {
                    self.members.pop();
                }
                _ => return false,
            }
        }
        // Ties keep the incumbent members ahead of the newcomer.
        let at = self.members.partition_point(|m| m.objective <= objective);
        self.members.insert(
            at,
            Member {
                roster,
                objective,
                is_new: true,
            },
        );
        true
    }

    pub(crate) fn mark_all_old(&mut self) {
        self.members.iter_mut().for_each(|m| m.is_new = false);
    }
}

/// Builds the initial reference set from `(roster, objective)` pairs:
/// duplicates collapse, then the worst are dropped down to `capacity`.
pub fn diversify(pool: Vec<(Roster, f64)>, capacity: usize) -> Result<RefSet> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    let mut set = RefSet::new(capacity)?;
    let mut pool = pool;
    pool.sort_by(|a, b| a.1.total_cmp(&b.1));
    for (roster, objective) in pool {
        set.update(roster, objective);
    }
    Ok(set)
}

/// [`diversify`] over a branch-and-bound pool, decoding each entry's
/// assignment variables.
pub fn diversify_pool(pool: &[PoolEntry], map: &VariableMap, capacity: usize) -> Result<RefSet> {
    let pairs = pool
        .iter()
        .map(|p| Ok((extract_roster(map, &p.x)?, p.objective)))
        .collect::<Result<Vec<_>>>()?;
    diversify(pairs, capacity)
}

/// Parent subsets for one generation, as member indices in ascending order.
///
/// All pairs first, then each subset of size `t - 1` extended by the best
/// member it lacks, for `t` up to the set size. Subsets with no new member
/// are dropped. Every member is marked old afterwards.
pub fn generate_subsets(refset: &mut RefSet) -> Vec<Vec<usize>> {
    let r = refset.len();
    let mut out: Vec<Vec<usize>> = Vec::new();
    if r < 2 {
        refset.mark_all_old();
        return out;
    }
    let mut level: Vec<Vec<usize>> = Vec::new();
    for a in 0..r {
        for b in a + 1..r {
            level.push(alloc::vec![a, b]);
        }
    }
    loop {
        for s in &level {
            if !out.contains(s) {
                out.push(s.clone());
            }
        }
        if level.first().is_none_or(|s| s.len() >= r) {
            break;
        }
        let mut next: Vec<Vec<usize>> = Vec::new();
        for s in &level {
            // Members are sorted, so the best non-member is the lowest index missing.
            let Some(add) = (0..r).find(|i| !s.contains(i)) else {
                continue;
            };
            let mut t = s.clone();
            let at = t.partition_point(|&i| i < add);
            t.insert(at, add);
            if !next.contains(&t) {
                next.push(t);
            }
        }
        level = next;
    }
    let members = refset.members();
    out.retain(|s| s.iter().any(|&i| members[i].is_new));
    refset.mark_all_old();
    out
}
