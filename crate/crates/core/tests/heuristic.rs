mod common;

use proptest::prelude::*;
use rgvroute::heuristic::{rule_route, DispatchRule};
use rgvroute::instance::{Endpoint, Instance, Request, Side};
use rgvroute::seqsolver::solve_exact;
use rgvroute::tolerances::HORIZON_MAX;
use rgvroute::{evaluate_route, Objective, Violation};

fn req(id: usize, o: (u32, Side), d: (u32, Side), arrival: f64) -> Request {
    Request {
        id,
        origin: Endpoint::new(o.0, o.1),
        dest: Endpoint::new(d.0, d.1),
        q: 1,
        arrival,
        e: 0.0,
        l: HORIZON_MAX,
    }
}

#[test]
fn single_request_matches_the_optimum() {
    let mut inst = Instance::empty(6, 2, 1);
    inst.requests.push(req(1, (4, Side::South), (2, Side::North), 0.0));
    let rule = rule_route(&inst, DispatchRule::EarliestArrivalFirst);
    let opt = solve_exact(&inst, Objective::Energy).unwrap();
    assert_eq!(rule.route, opt.eval.route);
    assert_eq!(rule.route, vec![0, 1, 2, 3]);
}

#[test]
fn two_north_requests_at_one_station_are_delivered_lifo() {
    // Both enter from the north; the second one loaded sits at the north end
    // and must leave first.
    let mut inst = Instance::empty(6, 2, 1);
    inst.requests.push(req(1, (2, Side::North), (5, Side::North), 0.0));
    inst.requests.push(req(2, (2, Side::North), (4, Side::North), 1.0));
    let rule = rule_route(&inst, DispatchRule::EarliestArrivalFirst);
    assert_eq!(rule.route, vec![0, 1, 2, 4, 3, 5]);
    assert!(evaluate_route(&inst, &rule.route).unwrap().feasible);

    // With room for one container the rule alternates.
    inst.capacity = 1;
    let rule = rule_route(&inst, DispatchRule::EarliestArrivalFirst);
    assert_eq!(rule.route, vec![0, 1, 3, 2, 4, 5]);
}

#[test]
fn incompatible_container_waits_for_the_next_cycle() {
    // 1 goes north to south, 2 south to north: a deadlock pair never shares the deck.
    let mut inst = Instance::empty(6, 3, 1);
    inst.requests.push(req(1, (2, Side::North), (5, Side::South), 0.0));
    inst.requests.push(req(2, (3, Side::South), (4, Side::North), 1.0));
    let rule = rule_route(&inst, DispatchRule::EarliestArrivalFirst);
    assert_eq!(rule.route, vec![0, 1, 3, 2, 4, 5]);
}

#[test]
fn due_dates_select_edf() {
    let mut inst = Instance::empty(6, 1, 1);
    inst.requests.push(req(1, (2, Side::North), (3, Side::North), 0.0));
    inst.requests.push(req(2, (5, Side::North), (6, Side::North), 1.0));
    assert_eq!(DispatchRule::for_instance(&inst), DispatchRule::EarliestArrivalFirst);
    inst.requests[1].l = 20.0;
    assert_eq!(DispatchRule::for_instance(&inst), DispatchRule::EarliestDueFirst);
    let rule = rule_route(&inst, DispatchRule::EarliestDueFirst);
    assert_eq!(rule.route, vec![0, 2, 4, 1, 3, 5]);
}

#[test]
fn missed_deadlines_are_reported() {
    let mut inst = Instance::empty(9, 1, 1);
    inst.requests.push(req(1, (9, Side::North), (1, Side::North), 0.0));
    inst.requests[0].l = 1.0;
    let rule = rule_route(&inst, DispatchRule::EarliestDueFirst);
    assert!(!rule.feasible);
    assert_eq!(rule.tw_misses, 1);
    assert_eq!(rule.violation, Some(Violation::TimeWindowMissed { request: 1 }));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Every rule route is physically executable, keeps queue order, and never beats the optimum.
    #[test]
    fn rule_routes_are_feasible_and_deterministic(seed in any::<u64>(), n in 1usize..6, cap in 1u32..4) {
        let mut r = common::rng(seed);
        let inst = common::random_instance(&mut r, n, 5, cap);
        let a = rule_route(&inst, DispatchRule::EarliestArrivalFirst);
        prop_assert!(a.feasible, "{:?} on {:?}", a.violation, a.route);
        let b = rule_route(&inst, DispatchRule::EarliestArrivalFirst);
        prop_assert_eq!(&a.route, &b.route);
        let opt = solve_exact(&inst, Objective::Energy).unwrap();
        prop_assert!(opt.cost <= a.energy + 1e-9);
    }

    /// With windows the only violations the rule may commit are deadline misses.
    #[test]
    fn rule_only_misses_windows(seed in any::<u64>(), n in 1usize..7, cap in 1u32..4) {
        let mut r = common::rng(seed);
        let inst = common::random_instance_tw(&mut r, n, 5, cap);
        let ev = rule_route(&inst, DispatchRule::for_instance(&inst));
        let ok = matches!(ev.violation, None | Some(Violation::TimeWindowMissed { .. }));
        prop_assert!(ok, "{:?}", ev.violation);
    }
}
