mod common;

use common::{cover_from, random_roster, rng, toy};
use rand::Rng;
use roster_core::lp::{solve_lp, LpStatus};
use roster_core::milp::{
    build_event_driven_milp, build_milp, build_pattern_stage2, encode_point, extract_roster, MilpModel,
};
use roster_core::model::{
    check_feasibility, count_rest_days, evaluate_objective, generate_instance, GeneratorConfig, ObjectiveContext,
    ObjectiveWeights, Roster,
};
use roster_core::Error;

fn fix_assignment(model: &mut MilpModel, map: &roster_core::milp::VariableMap, x: &Roster) {
    let (n, m, s) = x.dims();
    for e in 0..n {
        for j in 0..m {
            for k in 0..s {
                let v = map.x(e, j, k);
                let val = x.get(e, j, k) as u8 as f64;
                model.var_lb[v] = val;
                model.var_ub[v] = val;
            }
        }
    }
}

#[test]
fn model_rows_agree_with_the_checker() {
    let mut r = rng(3);
    let weights = ObjectiveWeights::default();
    let (mut feasible, mut infeasible) = (0, 0);
    for case in 0..60 {
        let mut inst = toy(4, 2, case);
        inst.min_rest_days = r.random_range(0..6);
        inst.min_rest_sundays = r.random_range(0..2);
        inst.max_shifts_per_week = r.random_range(2..6);
        let rate = r.random_range(0.05..0.5);
        let x = random_roster(&inst, &mut r, rate);
        cover_from(&mut inst, &x);
        if r.random_bool(0.1) {
            // Perturb one cover entry so the roster no longer meets it.
            let j = r.random_range(0..inst.blocks);
            if inst.cover[j][0] > 0 {
                inst.cover[j][0] -= 1;
            }
        }
        let Ok(rm) = build_milp(&inst, &weights) else {
            continue;
        };
        let point = encode_point(&inst, &rm, &x).unwrap();
        let verdict = check_feasibility(&inst, &x).unwrap().feasible;
        assert_eq!(rm.model.is_feasible(&point, 1e-9), verdict, "case {case}");
        if verdict {
            feasible += 1;
            let expected = evaluate_objective(&inst, &x, &weights, ObjectiveContext::plain()).total;
            let got = rm.model.objective_value(&point);
            assert!((got - expected).abs() <= 1e-9 * (1.0 + expected.abs()), "case {case}: {got} vs {expected}");
        } else {
            infeasible += 1;
        }
    }
    assert!(feasible >= 5 && infeasible >= 5, "{feasible} feasible, {infeasible} infeasible");
}

#[test]
fn rest_windows_are_exact_at_integral_assignments() {
    let mut r = rng(8);
    let mut checked = 0;
    for case in 0..40 {
        let mut inst = toy(3, 1, 100 + case);
        inst.min_rest_days = 0;
        inst.min_rest_sundays = 0;
        let x = random_roster(&inst, &mut r, 0.3);
        cover_from(&mut inst, &x);
        if !check_feasibility(&inst, &x).unwrap().feasible {
            continue;
        }
        let fewest = (0..inst.employees).map(|e| count_rest_days(&inst, &x, e)).min().unwrap();
        for (r_min, status) in [(fewest, LpStatus::Optimal), (fewest + 1, LpStatus::Infeasible)] {
            inst.min_rest_days = r_min;
            let mut rm = build_milp(&inst, &ObjectiveWeights::default()).unwrap();
            fix_assignment(&mut rm.model, &rm.map, &x);
            assert_eq!(solve_lp(&rm.model, None).status, status, "case {case}, r_min {r_min}");
        }
        checked += 1;
    }
    assert!(checked >= 10);
}

#[test]
fn extract_inverts_encode() {
    let mut r = rng(1);
    let inst = toy(3, 2, 4);
    let rm = build_milp(&inst, &ObjectiveWeights::default()).unwrap();
    for _ in 0..10 {
        let x = random_roster(&inst, &mut r, 0.4);
        let point = encode_point(&inst, &rm, &x).unwrap();
        assert_eq!(extract_roster(&rm.map, &point).unwrap(), x);
    }
}

#[test]
fn fractional_assignment_is_reported() {
    let inst = toy(2, 1, 0);
    let rm = build_milp(&inst, &ObjectiveWeights::default()).unwrap();
    let mut point = vec![0.0; rm.model.num_vars()];
    point[rm.map.x(1, 4, 0)] = 0.5;
    match extract_roster(&rm.map, &point) {
        Err(Error::FractionalAssignment { employee, block, shift, .. }) => {
            assert_eq!((employee, block, shift), (1, 4, 0))
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn variable_ranges_partition_the_model() {
    let inst = toy(3, 2, 9);
    let rm = build_milp(&inst, &ObjectiveWeights::default()).unwrap();
    let mut next = 0;
    for range in &rm.map.ranges {
        assert_eq!(range.start, next);
        next = range.end();
    }
    assert_eq!(next, rm.model.num_vars());
    assert!(rm.model.validate().is_ok());
}

#[test]
fn empty_demand_makes_the_zero_roster_feasible() {
    let mut inst = toy(3, 1, 2);
    for row in &mut inst.cover {
        row.iter_mut().for_each(|c| *c = 0);
    }
    inst.min_shifts_per_week = 0;
    inst.min_rest_days = 0;
    inst.min_rest_sundays = 0;
    let weights = ObjectiveWeights::default();
    let rm = build_milp(&inst, &weights).unwrap();
    let zero = Roster::for_instance(&inst);
    let point = encode_point(&inst, &rm, &zero).unwrap();
    assert!(rm.model.is_feasible(&point, 1e-9));
    let mut f = 0.0;
    let mut worst = vec![[0.0f64; 2]; inst.shift_types.len()];
    for e in 0..inst.employees {
        for k in 0..inst.shift_types.len() {
            let (t, g) = (inst.workload_targets[e][k], inst.weekend_targets[e][k]);
            f += weights.c_f1() * t.abs() + weights.c_f2() * g.abs();
            worst[k][0] = worst[k][0].max(t.abs());
            worst[k][1] = worst[k][1].max(g.abs());
        }
    }
    for w in &worst {
        f += weights.c_f1_max() * w[0] + weights.c_f2_max() * w[1];
    }
    for e in 0..inst.employees {
        for j in 0..inst.blocks {
            if inst.preferences[e][j] == Some(1) {
                f += weights.c_pref();
            }
        }
    }
    assert!((rm.model.objective_value(&point) - f).abs() < 1e-9);
}

#[test]
fn full_size_model_has_the_expected_order_of_magnitude() {
    let inst = generate_instance(&GeneratorConfig::new(12, 8), 1).unwrap();
    let stats = build_milp(&inst, &ObjectiveWeights::default()).unwrap().stats();
    assert_eq!(stats.integer, 12 * 168 * 3);
    assert!((3_250..=9_750).contains(&stats.continuous), "{stats:?}");
    assert!((4_000..=12_000).contains(&stats.integer), "{stats:?}");
    assert!((20_000..=60_000).contains(&stats.total_constraints()), "{stats:?}");
}

#[test]
fn gamma_one_reproduces_the_base_model() {
    let mut r = rng(2);
    let inst = toy(3, 2, 5);
    let company = random_roster(&inst, &mut r, 0.5);
    let weights = ObjectiveWeights {
        gamma: 1.0,
        ..ObjectiveWeights::default()
    };
    let base = build_milp(&inst, &weights).unwrap();
    let stage2 = build_pattern_stage2(&inst, &company, &weights).unwrap();
    assert_eq!(base.model, stage2.model);
    assert_eq!(base.map, stage2.map);
}

#[test]
fn stage2_objective_adds_weighted_pattern_deviation() {
    let mut r = rng(6);
    let mut inst = toy(3, 2, 7);
    let x = random_roster(&inst, &mut r, 0.3);
    cover_from(&mut inst, &x);
    let company = random_roster(&inst, &mut r, 0.5);
    for gamma in [0.0, 0.3, 1.0] {
        let weights = ObjectiveWeights {
            gamma,
            ..ObjectiveWeights::default()
        };
        let rm = build_pattern_stage2(&inst, &company, &weights).unwrap();
        let point = encode_point(&inst, &rm, &x).unwrap();
        let ctx = ObjectiveContext {
            company: Some(&company),
            ..ObjectiveContext::plain()
        };
        let expected = evaluate_objective(&inst, &x, &weights, ctx).total;
        assert!((rm.model.objective_value(&point) - expected).abs() < 1e-9);
    }
}

#[test]
fn event_model_prices_deviation_and_locks_the_prefix() {
    let mut r = rng(4);
    let mut inst = toy(3, 2, 11);
    let original = random_roster(&inst, &mut r, 0.3);
    cover_from(&mut inst, &original);
    let weights = ObjectiveWeights {
        mu: 2.5,
        ..ObjectiveWeights::default()
    };
    let rm = build_event_driven_milp(&inst, &original, &weights, 21).unwrap();
    for j in 0..21 {
        for k in 0..2 {
            let v = rm.map.x(0, j, k);
            assert_eq!(rm.model.var_lb[v], rm.model.var_ub[v]);
        }
    }
    let other = random_roster(&inst, &mut r, 0.3);
    let point = encode_point(&inst, &rm, &other).unwrap();
    let ctx = ObjectiveContext {
        original: Some(&original),
        ..ObjectiveContext::plain()
    };
    let expected = evaluate_objective(&inst, &other, &weights, ctx).total;
    assert!((rm.model.objective_value(&point) - expected).abs() < 1e-9);
}

#[test]
fn locked_shift_on_new_vacation_is_a_conflict() {
    let mut r = rng(5);
    let mut inst = toy(3, 2, 12);
    let mut original = random_roster(&inst, &mut r, 0.0);
    let (e, j, k) = (0..inst.blocks)
        .find_map(|j| (inst.availability[1][j] == 1 && inst.vacation[1][j] == 0).then_some((1, j, 0)))
        .unwrap();
    let j = j - j % 3;
    for b in 0..3 {
        original.set(e, j + b, k, inst.shift_types[k].kind == roster_core::model::ShiftKind::AllDay || b == 0);
    }
    cover_from(&mut inst, &original);
    inst.vacation[e][j] = 1;
    let weights = ObjectiveWeights::default();
    match build_event_driven_milp(&inst, &original, &weights, j + 1) {
        Err(Error::LockedPrefixConflict(at)) => {
            assert!(at.iter().any(|c| c.employee == Some(e) && c.block == Some(j)))
        }
        other => panic!("{:?}", other.map(|m| m.stats())),
    }
    // The same change after the lock horizon is fine.
    assert!(build_event_driven_milp(&inst, &original, &weights, j).is_ok());
}

#[test]
fn invalid_weights_are_rejected() {
    let inst = toy(2, 1, 0);
    let weights = ObjectiveWeights {
        gamma: 1.5,
        ..ObjectiveWeights::default()
    };
    assert!(matches!(
        build_pattern_stage2(&inst, &Roster::for_instance(&inst), &weights),
        Err(Error::WeightOutOfRange { name: "gamma", .. })
    ));
    assert!(build_milp(&inst, &weights).is_err());
}
