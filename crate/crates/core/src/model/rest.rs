use super::instance::{RosterInstance, BLOCKS_PER_DAY};
use super::roster::Roster;

/// Rest days in a sequence of block occupancies: each maximal run of `L`
/// free blocks holds `floor(L / 3)` disjoint 24-hour windows.
pub fn rest_days_in(occupied: impl IntoIterator<Item = bool>) -> u32 {
    let mut total = 0u32;
    let mut run = 0usize;
    for busy in occupied {
        if busy {
            total += (run / BLOCKS_PER_DAY) as u32;
            run = 0;
        } else {
            run += 1;
        }
    }
    total + (run / BLOCKS_PER_DAY) as u32
}

/// Counted rest days of employee `e` over the whole horizon.
pub fn count_rest_days(_inst: &RosterInstance, roster: &Roster, e: usize) -> u32 {
    rest_days_in((0..roster.blocks()).map(|j| roster.occupied(e, j)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn occ(free: &[usize], len: usize) -> alloc::vec::Vec<bool> {
        (0..len).map(|j| !free.contains(&j)).collect()
    }

    #[test]
    fn three_day_window_examples() {
        // Morning on day 1, afternoon on day 3: blocks 0 and 7 busy.
        let top = (0..9).map(|j| j == 0 || j == 7);
        assert_eq!(rest_days_in(top), 2);
        // Afternoon on day 1 and day 3: blocks 1 and 7 busy.
        let bottom = (0..9).map(|j| j == 1 || j == 7);
        assert_eq!(rest_days_in(bottom), 1);
    }

    #[test]
    fn free_horizon_counts_every_day() {
        assert_eq!(rest_days_in(vec![false; 21 * 4]), 28);
        assert_eq!(rest_days_in(vec![true; 21]), 0);
    }

    #[test]
    fn runs_shorter_than_a_day_do_not_count() {
        assert_eq!(rest_days_in(occ(&[0, 1, 3, 4], 6)), 0);
        assert_eq!(rest_days_in(occ(&[0, 1, 2, 3, 4], 6)), 1);
    }
}
