mod common;

use std::time::{Duration, Instant};

use rgvroute::milp::{build_model, reduce_arcs, CutGroups, ModelOptions};
use rgvroute::milpsolver::{solve_lp, solve_milp, LpStatus, MilpOptions, MilpStatus};
use rgvroute::seqsolver::{solve_exact, SeqError};
use rgvroute::{evaluate_route, Objective};

#[test]
fn milp_matches_exact_sequencing_on_small_instances() {
    let mut r = common::rng(41);
    let t = Instant::now();
    for case in 0..40 {
        let n = 2 + case % 3;
        let cap = 1 + (case % 3) as u32;
        let inst = if case % 4 == 3 {
            common::random_instance_tw(&mut r, n, 4, cap)
        } else {
            common::random_instance(&mut r, n, 4, cap)
        };
        let cuts = CutGroups::configurations()[case % 6];
        let m = build_model(&inst, &reduce_arcs(&inst), ModelOptions::with_cuts(cuts)).unwrap();
        let res = solve_milp(&m, &inst, &MilpOptions::default()).unwrap();
        match solve_exact(&inst, Objective::Energy) {
            Ok(seq) => {
                assert_eq!(res.status, MilpStatus::Optimal, "case {case}");
                let obj = res.objective.unwrap();
                assert!((obj - seq.cost).abs() < 1e-6, "case {case}: milp {obj} seq {}", seq.cost);
                let route = res.route.unwrap();
                let ev = evaluate_route(&inst, &route).unwrap();
                assert!(ev.feasible);
                assert!((ev.energy - seq.cost).abs() < 1e-6);
                assert!(res.root_bound.unwrap() <= obj + 1e-6);
            }
            Err(SeqError::Infeasible { .. } | SeqError::DeadlineUnreachable(_)) => {
                assert_eq!(res.status, MilpStatus::Infeasible, "case {case}");
                assert!(res.certificate.is_some());
            }
            Err(e) => panic!("{e}"),
        }
    }
    eprintln!("40 instances in {:?}", t.elapsed());
}

#[test]
fn warm_start_and_node_limit() {
    let mut r = common::rng(7);
    let inst = common::random_instance(&mut r, 5, 5, 2);
    let m = build_model(&inst, &reduce_arcs(&inst), ModelOptions::default()).unwrap();
    let seq = solve_exact(&inst, Objective::Energy).unwrap();
    let opts = MilpOptions { warm_start: Some(seq.eval.route.clone()), node_limit: Some(1), ..Default::default() };
    let res = solve_milp(&m, &inst, &opts).unwrap();
    assert!((res.objective.unwrap() - seq.cost).abs() < 1e-6);
    assert!(res.gap().unwrap() >= 0.0);
    let full = solve_milp(&m, &inst, &MilpOptions { time_limit: Some(Duration::from_secs(60)), ..Default::default() }).unwrap();
    assert_eq!(full.status, MilpStatus::Optimal);
    assert_eq!(full.gap(), Some(0.0));
}

#[test]
fn relaxation_bounds_the_optimum() {
    let mut r = common::rng(3);
    for _ in 0..10 {
        let inst = common::random_instance(&mut r, 3, 4, 2);
        let m = build_model(&inst, &reduce_arcs(&inst), ModelOptions::default()).unwrap();
        let lp = solve_lp(&m);
        assert_eq!(lp.status, LpStatus::Optimal);
        let seq = solve_exact(&inst, Objective::Energy).unwrap();
        assert!(lp.objective <= seq.cost + 1e-6);
    }
}
