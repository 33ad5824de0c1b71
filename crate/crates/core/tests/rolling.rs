mod common;

use proptest::prelude::*;
use rgvroute::deck::DeckState;
use rgvroute::instance::{Endpoint, Instance, Request, Side};
use rgvroute::rolling::{replan, select_horizon, RollingConfig, VehicleState};
use rgvroute::seqsolver::solve_exact;
use rgvroute::simulator::{replay_energy, run_experiment, ControllerKind, TraceEvent};
use rgvroute::tolerances::HORIZON_MAX;
use rgvroute::{evaluate_route, Objective};

fn req(id: usize, o: (u32, Side), d: (u32, Side), arrival: f64, l: f64) -> Request {
    Request {
        id,
        origin: Endpoint::new(o.0, o.1),
        dest: Endpoint::new(d.0, d.1),
        q: 1,
        arrival,
        e: 0.0,
        l,
    }
}

fn world(reqs: Vec<Request>, cap: u32) -> Instance {
    let mut inst = Instance::empty(8, cap, 1);
    inst.requests = reqs;
    inst.validate().unwrap();
    inst
}

#[test]
fn small_backlog_is_taken_whole() {
    let w = world(
        vec![
            req(1, (2, Side::North), (5, Side::North), 0.0, 50.0),
            req(2, (3, Side::South), (6, Side::South), 0.0, 20.0),
        ],
        2,
    );
    assert_eq!(select_horizon(&w, &[1, 2], 8), vec![1, 2]);
    assert_eq!(select_horizon(&w, &[], 8), Vec::<usize>::new());
}

#[test]
fn queue_predecessor_is_pulled_in_despite_a_later_deadline() {
    // 1 ◁ 2 at station 2 north; 3 elsewhere. Deadlines: 2 < 3 < 1.
    let w = world(
        vec![
            req(1, (2, Side::North), (5, Side::North), 0.0, 90.0),
            req(2, (2, Side::North), (6, Side::North), 1.0, 10.0),
            req(3, (4, Side::South), (7, Side::South), 2.0, 30.0),
        ],
        2,
    );
    let h2 = select_horizon(&w, &[1, 2, 3], 2);
    assert_eq!(h2, vec![1, 2]);
    // With room for one, 2 cannot enter alone, so the earliest admissible deadline wins.
    assert_eq!(select_horizon(&w, &[1, 2, 3], 1), vec![3]);
}

proptest! {
    #[test]
    fn horizon_is_bounded_and_prefix_closed(seed in any::<u64>(), n in 1usize..14, h in 1usize..10) {
        let mut r = common::rng(seed);
        let w = common::random_instance_tw(&mut r, n, 3, 2);
        let backlog: Vec<usize> = (1..=n).collect();
        let sel = select_horizon(&w, &backlog, h);
        prop_assert!(sel.len() <= h);
        if n <= h {
            prop_assert_eq!(sel.len(), n);
        }
        let qr = w.queue_relations();
        for &i in &sel {
            if let Some(p) = qr.pred(i) {
                prop_assert!(sel.contains(&p), "{} selected without {}", i, p);
            }
        }
    }
}

#[test]
fn nothing_to_do_gives_an_empty_plan() {
    let w = world(vec![req(1, (2, Side::North), (5, Side::North), 0.0, HORIZON_MAX)], 2);
    let mut state = VehicleState::new(&w);
    state.picked[1] = true;
    state.delivered[1] = true;
    let plan = replan(&w, &state, &[], &RollingConfig::default(), false).unwrap();
    assert!(plan.tasks.is_empty());
}

#[test]
fn onboard_containers_are_delivered_by_the_new_plan() {
    // Two containers aboard (north end: 1 bound north, south end: 2 bound south),
    // one more request waiting.
    let w = world(
        vec![
            req(1, (2, Side::North), (6, Side::North), 0.0, HORIZON_MAX),
            req(2, (2, Side::South), (3, Side::South), 0.0, HORIZON_MAX),
            req(3, (4, Side::North), (8, Side::North), 0.0, HORIZON_MAX),
        ],
        3,
    );
    let mut state = VehicleState::new(&w);
    state.pos = 2;
    state.last_vertex = 2;
    state.time = 1.0;
    state.deck = DeckState::from_containers(&w, &[1, 2]).unwrap();
    state.picked[1] = true;
    state.picked[2] = true;
    let plan = replan(&w, &state, &[3], &RollingConfig::default(), false).unwrap();
    let mut sorted = plan.tasks.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, vec![3, 4, 5, 6]);
    // Completing the executed prefix with the plan gives a feasible full route.
    let mut route = vec![0, 1, 2];
    route.extend(&plan.tasks);
    route.push(7);
    assert!(evaluate_route(&w, &route).unwrap().feasible);
}

#[test]
fn in_flight_task_is_never_preempted() {
    // Request 1 is known at t=0; request 2 shows up while the vehicle is
    // still travelling to pick up 1.
    let w = world(
        vec![
            req(1, (7, Side::North), (8, Side::North), 0.0, HORIZON_MAX),
            req(2, (2, Side::North), (3, Side::North), 0.5, HORIZON_MAX),
        ],
        1,
    );
    let (_, trace) = run_experiment(&w, ControllerKind::Rolling(RollingConfig::default()));
    let events = &trace.events;
    let arrival2 = events.iter().position(|e| matches!(e, TraceEvent::Arrival { request: 2, .. })).unwrap();
    let first_task = events.iter().position(|e| matches!(e, TraceEvent::Task { .. })).unwrap();
    // The arrival is processed only once the first task is done ...
    let TraceEvent::Task { vertex, done, .. } = &events[first_task] else { unreachable!() };
    assert_eq!(*vertex, 1);
    assert!(first_task < arrival2);
    // ... and the next decision starts from there.
    let TraceEvent::Decision { time, tasks, .. } = events[arrival2..].iter().find(|e| matches!(e, TraceEvent::Decision { .. })).unwrap() else {
        unreachable!()
    };
    assert!(*time >= *done);
    assert!(tasks.contains(&3), "onboard container 1 must be delivered by the new plan");
}

#[test]
fn static_arrivals_reproduce_the_static_optimum() {
    let mut r = common::rng(5);
    for _ in 0..10 {
        let mut w = common::random_instance(&mut r, 4, 5, 2);
        for q in &mut w.requests {
            q.arrival = 0.0;
        }
        let opt = solve_exact(&w, Objective::Energy).unwrap();
        let (m, trace) = run_experiment(&w, ControllerKind::Rolling(RollingConfig::default()));
        assert!((m.energy - opt.cost).abs() < 1e-6, "{} vs {}", m.energy, opt.cost);
        assert!((replay_energy(&w, &trace).unwrap() - m.energy).abs() < 1e-9);
    }
}

#[test]
fn history_stays_feasible_across_replans() {
    let mut r = common::rng(77);
    for _ in 0..20 {
        let w = common::random_instance(&mut r, 9, 5, 3);
        let cfg = RollingConfig { horizon: 3, ..RollingConfig::default() };
        let (_, trace) = run_experiment(&w, ControllerKind::Rolling(cfg));
        let ev = evaluate_route(&w, &trace.route).unwrap();
        assert!(ev.feasible, "{:?}", ev.violation);
    }
}
