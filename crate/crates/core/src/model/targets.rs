use alloc::vec;
use alloc::vec::Vec;

use super::instance::{InstanceView, RosterInstance};
use crate::error::{Error, Result};

pub type TargetMatrix = Vec<Vec<f64>>;

/// Equal fair-share workload targets.
///
/// For every shift type, the horizon's duty count (blocks for eight-hour
/// types, days for all-day types) is split evenly among the employees that
/// hold the license and are not unavailable for the entire horizon. Weekend
/// targets are computed the same way over the weekend blocks. Targets are
/// real-valued and unlicensed employees get 0.
pub fn default_targets(inst: &RosterInstance) -> Result<(TargetMatrix, TargetMatrix)> {
    let view = InstanceView::new(inst);
    let (n, m, s) = (view.n, view.m, view.s);
    let mut t = vec![vec![0.0; s]; n];
    let mut g = vec![vec![0.0; s]; n];
    for k in 0..s {
        let mut total_blocks = 0u64;
        let mut weekend_blocks = 0u64;
        for j in 0..m {
            let d = inst.cover[j][k] as u64;
            total_blocks += d;
            if view.weekend_block[j] {
                weekend_blocks += d;
            }
        }
        let total = total_blocks as f64 / view.duty_divisor[k];
        let weekend = weekend_blocks as f64 / view.duty_divisor[k];
        let eligible: Vec<usize> = (0..n)
            .filter(|&e| view.licensed(e, k) && (0..m).any(|j| view.can_work(e, j)))
            .collect();
        if eligible.is_empty() {
            if total > 0.0 {
                return Err(Error::NoLicensedEmployee(k));
            }
            continue;
        }
        let share = total / eligible.len() as f64;
        let weekend_share = weekend / eligible.len() as f64;
        for &e in &eligible {
            t[e][k] = share;
            g[e][k] = weekend_share;
        }
    }
    Ok((t, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::instance::{ShiftKind, ShiftType};

    #[test]
    fn two_licensed_employees_split_on_call_duty() {
        let mut inst = RosterInstance::empty(3, 2, vec![ShiftType::new("P", ShiftKind::AllDay)]);
        for j in 0..inst.blocks {
            inst.cover[j][0] = 1;
        }
        inst.no_license[0] = vec![2];
        let (t, g) = default_targets(&inst).unwrap();
        assert_eq!(t[0][0], 7.0);
        assert_eq!(t[1][0], 7.0);
        assert_eq!(t[2][0], 0.0);
        // Four weekend days over two weeks.
        assert_eq!(g[0][0], 2.0);
    }

    #[test]
    fn demand_without_license_holder_is_an_error() {
        let mut inst = RosterInstance::empty(2, 1, vec![ShiftType::new("S", ShiftKind::EightHour)]);
        inst.cover[4][0] = 1;
        inst.no_license[0] = vec![0, 1];
        assert_eq!(default_targets(&inst), Err(Error::NoLicensedEmployee(0)));
    }

    #[test]
    fn fully_unavailable_employee_gets_no_share() {
        let mut inst = RosterInstance::empty(3, 1, vec![ShiftType::new("S", ShiftKind::EightHour)]);
        for j in 0..inst.blocks {
            inst.cover[j][0] = 1;
            inst.availability[2][j] = 0;
        }
        let (t, _) = default_targets(&inst).unwrap();
        assert_eq!(t[0][0], 10.5);
        assert_eq!(t[2][0], 0.0);
    }
}
