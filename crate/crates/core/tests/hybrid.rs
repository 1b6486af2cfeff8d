mod common;

use common::{brute_force_optimum, feasible_pair, toy};
use roster_core::bnb::compute_gap;
use roster_core::clock::FrozenClock;
use roster_core::hybrid::{checked_gap, optimize, HybridConfig, Mode, OptimizationResult, OptimizationStatus, ProgressEvent};
use roster_core::model::{check_feasibility, evaluate_objective, ObjectiveContext, ObjectiveWeights, RosterInstance};
use roster_core::Error;

fn objective(inst: &RosterInstance, x: &roster_core::Roster) -> f64 {
    evaluate_objective(inst, x, &ObjectiveWeights::default(), ObjectiveContext::plain()).total
}

fn run(inst: &RosterInstance, config: &HybridConfig) -> (roster_core::Result<OptimizationResult>, Vec<ProgressEvent>) {
    let mut events = Vec::new();
    let res = optimize(inst, &ObjectiveWeights::default(), config, &FrozenClock, &mut |e| events.push(e.clone()));
    (res, events)
}

fn assert_monotone(events: &[ProgressEvent]) {
    for w in events.windows(2) {
        if let (Some(a), Some(b)) = (w[0].incumbent, w[1].incumbent) {
            assert!(b <= a, "incumbent rose: {a} -> {b}");
        }
        if let (Some(a), Some(b)) = (w[0].bound, w[1].bound) {
            assert!(b >= a, "bound fell: {a} -> {b}");
        }
        assert!(w[0].incumbent.is_none() || w[1].incumbent.is_some());
    }
    for e in events {
        if let (Some(u), Some(l)) = (e.incumbent, e.bound) {
            assert!(l <= u + 1e-9);
        }
    }
}

#[test]
fn gap_examples() {
    assert_eq!(compute_gap(42.0, 42.0), 0.0);
    assert_eq!(compute_gap(100.0, 80.0), 0.20);
    assert_eq!(compute_gap(0.0, 0.0), 0.0);
    assert_eq!(checked_gap(100.0, 80.0), Ok(0.20));
    assert!(matches!(checked_gap(10.0, 11.0), Err(Error::BoundInconsistency { .. })));
}

#[test]
fn unique_roster_is_proven_optimal_in_phase_one() {
    let (inst, x) = feasible_pair(1, 1, 3);
    let (res, events) = run(&inst, &HybridConfig::default());
    let res = res.unwrap();
    assert_eq!(res.roster, x);
    assert_eq!(res.gap, 0.0);
    assert_eq!(res.status, OptimizationStatus::Optimal);
    assert_eq!(res.scatter_termination, None);
    assert_monotone(&events);
}

#[test]
fn four_employee_toys_meet_the_gap_target() {
    let target = 0.05;
    let mut checked = 0;
    for seed in 0..6 {
        let (inst, _) = feasible_pair(4, 1, 300 + seed);
        let Some((best, _)) = brute_force_optimum(&inst, &|x| objective(&inst, x)) else {
            continue;
        };
        for mode in [Mode::Hybrid, Mode::MilpAlone] {
            let config = HybridConfig {
                gap_target: target,
                mode,
                seed,
                ..HybridConfig::default()
            };
            let (res, events) = run(&inst, &config);
            let res = res.unwrap();
            assert!(check_feasibility(&inst, &res.roster).unwrap().feasible);
            assert!(res.gap <= target, "seed {seed} {mode:?}: gap {}", res.gap);
            assert!(res.objective.total <= best * (1.0 + target) + 1e-9, "seed {seed} {mode:?}");
            assert!(res.lower_bound <= best + 1e-6);
            assert_eq!(res.gap, checked_gap(res.objective.total, res.lower_bound).unwrap());
            assert_monotone(&events);
        }
        checked += 1;
    }
    assert!(checked >= 4, "{checked}");
}

#[test]
fn modes_agree_at_optimality() {
    for seed in 0..4 {
        let (inst, _) = feasible_pair(3, 1, 400 + seed);
        let results: Vec<f64> = [Mode::Hybrid, Mode::MilpAlone]
            .into_iter()
            .map(|mode| {
                let config = HybridConfig {
                    gap_target: 0.0,
                    mode,
                    ..HybridConfig::default()
                };
                let res = run(&inst, &config).0.unwrap();
                assert_eq!(res.status, OptimizationStatus::Optimal);
                res.objective.total
            })
            .collect();
        assert!((results[0] - results[1]).abs() < 1e-6, "seed {seed}: {results:?}");
    }
}

#[test]
fn relax_and_fix_results_are_feasible_for_the_full_instance() {
    for seed in 0..6 {
        let (inst, _) = feasible_pair(4, 1, 500 + seed);
        let config = HybridConfig {
            use_relax_and_fix: true,
            gap_target: 0.1,
            ..HybridConfig::default()
        };
        let (res, events) = run(&inst, &config);
        let res = res.unwrap();
        assert!(res.fixing.is_some());
        assert!(check_feasibility(&inst, &res.roster).unwrap().feasible, "seed {seed}");
        assert!(res.lower_bound <= res.objective.total + 1e-9);
        assert_monotone(&events);
    }
}

#[test]
fn infeasible_instances_are_reported() {
    let (mut inst, _) = feasible_pair(3, 1, 7);
    // Four people needed in two consecutive blocks; only three exist and
    // nobody may work both.
    let s = inst.shift_types.len();
    for j in 0..2 {
        inst.cover[j] = vec![0; s];
        inst.cover[j][0] = 2;
    }
    inst.no_license[0].clear();
    let res = run(&inst, &HybridConfig::default()).0;
    assert!(matches!(res, Err(Error::Infeasible)), "{res:?}");
}

#[test]
fn invalid_config_is_rejected() {
    let inst = toy(3, 1, 0);
    for config in [
        HybridConfig {
            gap_target: 1.5,
            ..HybridConfig::default()
        },
        HybridConfig {
            total_time_limit: 0.0,
            ..HybridConfig::default()
        },
    ] {
        assert!(matches!(run(&inst, &config).0, Err(Error::InvalidConfig(_))));
    }
}
