mod common;

use std::collections::BTreeSet;

use rgvroute::instance::{Endpoint, Instance, Request, RequestType, Side};
use rgvroute::milp::{
    assignment_from_route, big_m_constants, build_model, complete_arcs, evaluate_assignment, export_lp, reduce_arcs,
    route_from_assignment, ArcSet, ConflictForm, CutGroups, MilpModel, ModelError, ModelOptions, RowFamily,
};
use rgvroute::seqsolver::enumerate_feasible;
use rgvroute::tolerances::HORIZON_MAX;
use rgvroute::{evaluate_route, QueueRelations};

use Side::{North as N, South as S};

fn req(id: usize, o: (u32, Side), d: (u32, Side)) -> Request {
    Request {
        id,
        origin: Endpoint::new(o.0, o.1),
        dest: Endpoint::new(d.0, d.1),
        q: 1,
        arrival: id as f64,
        e: 0.0,
        l: HORIZON_MAX,
    }
}

fn inst(reqs: Vec<Request>, cap: u32) -> Instance {
    let mut i = Instance::empty(10, cap, 1);
    i.requests = reqs;
    i.validate().unwrap();
    i
}

/// Every sequence the model's arc set can express that respects pickup-before-delivery
/// and queue order. Other sequences violate route-determined rows for any schedule.
fn expressible_routes(inst: &Instance, arcs: &ArcSet) -> Vec<Vec<usize>> {
    let n = inst.n();
    let end = inst.end_vertex();
    let qr = inst.queue_relations();
    let mut out = Vec::new();
    fn go(
        inst: &Instance,
        qr: &QueueRelations,
        arcs: &ArcSet,
        route: &mut Vec<usize>,
        seen: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let n = inst.n();
        let end = inst.end_vertex();
        let u = *route.last().unwrap();
        if route.len() == 2 * n + 1 {
            if arcs.contains(u, end) {
                let mut r = route.clone();
                r.push(end);
                out.push(r);
            }
            return;
        }
        for &v in arcs.successors(u) {
            if v == end || seen[v] {
                continue;
            }
            if v > n && !seen[v - n] {
                continue;
            }
            if v <= n {
                if let Some(p) = qr.pred(v) {
                    if !seen[p] {
                        continue;
                    }
                }
            }
            seen[v] = true;
            route.push(v);
            go(inst, qr, arcs, route, seen, out);
            route.pop();
            seen[v] = false;
        }
    }
    let mut seen = vec![false; end + 1];
    seen[0] = true;
    go(inst, &qr, arcs, &mut vec![0], &mut seen, &mut out);
    let _ = n;
    out
}

fn model_accepts(m: &MilpModel, inst: &Instance, route: &[usize]) -> (bool, Vec<String>) {
    let vals = assignment_from_route(m, inst, route).unwrap();
    let rep = evaluate_assignment(m, &vals).unwrap();
    let mut bad = rep.violated_rows.clone();
    bad.extend(rep.violated_bounds.iter().cloned());
    (rep.is_feasible(), bad)
}

#[test]
fn single_request_model_is_a_forced_chain() {
    let i = inst(vec![req(1, (3, N), (7, N))], 1);
    let arcs = reduce_arcs(&i);
    assert_eq!(arcs.arcs(), &[(0, 1), (1, 2), (2, 3)]);
    let m = build_model(&i, &arcs, ModelOptions::default()).unwrap();
    assert_eq!(m.x_vars().count(), 3);
    assert_eq!(m.vars.iter().filter(|v| matches!(v.kind, rgvroute::milp::VarKind::Y(..))).count(), 1);
    let vals = assignment_from_route(&m, &i, &[0, 1, 2, 3]).unwrap();
    let rep = evaluate_assignment(&m, &vals).unwrap();
    assert!(rep.is_feasible(), "{rep:?}");
    let ev = evaluate_route(&i, &[0, 1, 2, 3]).unwrap();
    assert!((rep.objective - ev.energy).abs() < 1e-9);
}

#[test]
fn big_m_pickup_to_pickup_example() {
    // l_i = 100, s = 0.5, t_{i,i+n} = 2, t_ij = 3 gives eta = 100.5 and rho = Q.
    // With a = 1, v_c = 1 a distance of 1 takes 2 time units and 2 takes 3.
    // The second request runs far down the track so the schedule horizon stays above l_i.
    let mut a = req(1, (2, N), (3, N));
    a.l = 100.0;
    let b = req(2, (4, N), (70, N));
    let mut i = Instance::empty(80, 3, 1);
    i.requests = vec![a, b];
    i.validate().unwrap();
    assert_eq!(i.travel_time(1, 3), 2.0);
    assert_eq!(i.travel_time(1, 2), 3.0);
    let (eta, rho) = big_m_constants(&i, 1, 2);
    assert!((eta - 100.5).abs() < 1e-12, "eta = {eta}");
    assert_eq!(rho, 3.0);
}

#[test]
fn lifo_clo_cut_example_row() {
    // i is a south-to-north request, j a north-to-north one.
    let i = inst(vec![req(1, (3, S), (6, N)), req(2, (4, N), (8, N))], 2);
    assert_eq!(i.request_type(1), RequestType::T4);
    assert_eq!(i.request_type(2), RequestType::T1);
    let arcs = complete_arcs(&i);
    let m = build_model(&i, &arcs, ModelOptions::with_cuts("g2".parse().unwrap())).unwrap();
    let row = m.rows.iter().find(|r| r.name == "g2e_1_2").expect("row present");
    let mut got: Vec<usize> = row.coeffs.iter().map(|&(v, _)| v).collect();
    got.sort_unstable();
    let mut want: Vec<usize> = [(1, 2), (2, 1), (1, 3), (3, 4)].iter().map(|&(a, b)| m.x(a, b).unwrap()).collect();
    want.sort_unstable();
    assert_eq!(got, want);
    assert_eq!(row.hi, 1.0);
}

#[test]
fn empty_cut_groups_leave_the_model_unchanged() {
    let mut r = common::rng(7);
    let i = common::random_instance(&mut r, 4, 6, 2);
    let arcs = reduce_arcs(&i);
    let a = build_model(&i, &arcs, ModelOptions::default()).unwrap();
    let b = build_model(&i, &arcs, ModelOptions::with_cuts(CutGroups::NONE)).unwrap();
    assert_eq!(a.rows, b.rows);
    assert!(RowFamily::ALL.iter().filter(|f| f.is_cut()).all(|&f| a.rows_in(f) == 0));
}

#[test]
fn deadlock_pair_loses_both_cross_arcs() {
    let i = inst(vec![req(1, (2, N), (8, S)), req(2, (5, S), (3, N))], 2);
    let arcs = reduce_arcs(&i);
    assert!(!arcs.contains(1, 2));
    assert!(!arcs.contains(2, 1));
    for r in enumerate_feasible(&i, 1000).unwrap().routes {
        for w in r.windows(2) {
            assert!(!(w == [1, 2] || w == [2, 1]));
        }
    }
}

#[test]
fn one_container_each_side_restricts_exit_arcs() {
    use rgvroute::milp::{augment_initial_load, Onboard};
    let base = inst(
        vec![req(1, (2, N), (8, S)), req(2, (5, S), (3, N)), req(3, (4, N), (6, N)), req(4, (7, S), (2, S))],
        4,
    );
    let onboard = [
        Onboard {
            id: 101,
            dest: Endpoint::new(6, N),
            q: 1,
            e: 0.0,
            l: HORIZON_MAX,
        },
        Onboard {
            id: 102,
            dest: Endpoint::new(9, S),
            q: 1,
            e: 0.0,
            l: HORIZON_MAX,
        },
    ];
    let aug = augment_initial_load(&base, 4, &onboard).unwrap();
    let i = &aug.instance;
    let arcs = reduce_arcs(i);
    assert!(arcs.contains(0, 1) && arcs.contains(1, 2));
    for &j in arcs.successors(2) {
        if j <= i.n() {
            let t = i.request_type(j);
            assert!(t != RequestType::T3 && t != RequestType::T4, "arc (2, {j}) of type {t:?}");
        }
    }
    let feasible = enumerate_feasible(i, 100_000).unwrap().routes;
    assert!(!feasible.is_empty());
    for r in &feasible {
        assert_eq!(r[1..3], [1, 2]);
        for w in r.windows(2) {
            assert!(arcs.contains(w[0], w[1]), "feasible route uses missing arc {w:?}");
        }
    }
}

#[test]
fn assignment_checker_basics() {
    let mut r = common::rng(3);
    let i = common::random_instance(&mut r, 3, 6, 2);
    let m = build_model(&i, &reduce_arcs(&i), ModelOptions::default()).unwrap();
    let zeros = vec![0.0; m.num_vars()];
    let rep = evaluate_assignment(&m, &zeros).unwrap();
    assert!(rep.violated_rows.iter().any(|n| n == "out_0"));
    assert_eq!(
        evaluate_assignment(&m, &zeros[1..]).unwrap_err(),
        ModelError::DimensionMismatch {
            expected: m.num_vars(),
            got: m.num_vars() - 1
        }
    );
    let route = enumerate_feasible(&i, 1).unwrap().routes.remove(0);
    let mut vals = assignment_from_route(&m, &i, &route).unwrap();
    assert!(evaluate_assignment(&m, &vals).unwrap().is_feasible());
    assert_eq!(route_from_assignment(&m, &vals).unwrap(), route);
    let x = m.x(route[0], route[1]).unwrap();
    vals[x] = 0.0;
    assert!(!evaluate_assignment(&m, &vals).unwrap().violated_rows.is_empty());
}

#[test]
fn lp_export_is_deterministic_and_declares_binaries() {
    let mut r = common::rng(11);
    let i = common::random_instance(&mut r, 3, 6, 2);
    let arcs = reduce_arcs(&i);
    let a = export_lp(&build_model(&i, &arcs, ModelOptions::with_cuts("g123".parse().unwrap())).unwrap());
    let b = export_lp(&build_model(&i, &arcs, ModelOptions::with_cuts("g123".parse().unwrap())).unwrap());
    assert_eq!(a, b);
    assert!(a.starts_with("\\"));
    let bin = a.split("Binaries\n").nth(1).unwrap();
    assert!(bin.contains("x_0_"));
    assert!(a.contains("Subject To\n out_0:"));
    assert!(a.trim_end().ends_with("End"));
}

/// Feasible routes, model-accepted routes and cut validity on one instance.
fn check_equivalence(i: &Instance, arcs: &ArcSet, opts: ModelOptions, label: &str) {
    let m = build_model(i, arcs, opts).unwrap();
    let feasible: BTreeSet<Vec<usize>> = enumerate_feasible(i, 1 << 22).unwrap().routes.into_iter().collect();
    for r in &feasible {
        for w in r.windows(2) {
            assert!(arcs.contains(w[0], w[1]), "{label}: feasible route {r:?} uses missing arc {w:?}\n{i:?}");
        }
    }
    for r in expressible_routes(i, arcs) {
        let (ok, bad) = model_accepts(&m, i, &r);
        let phys = feasible.contains(&r);
        assert_eq!(
            ok,
            phys,
            "{label}: route {r:?} model={ok} deck={phys} violated={bad:?} eval={:?}\n{}",
            evaluate_route(i, &r).unwrap().violation,
            serde_json::to_string(i).unwrap()
        );
    }
}

#[test]
fn model_and_deck_agree_on_random_instances() {
    let mut r = common::rng(2024);
    let count: usize = std::env::var("RGV_STRESS").ok().and_then(|v| v.parse().ok()).unwrap_or(60);
    for k in 0..count {
        let n = 1 + k % if count > 60 { 5 } else { 4 };
        let cap = 1 + (k % 3) as u32;
        let i = if k % 2 == 0 {
            common::random_instance(&mut r, n, 5, cap)
        } else {
            common::random_instance_tw(&mut r, n, 5, cap)
        };
        check_equivalence(&i, &reduce_arcs(&i), ModelOptions::default(), "reduced");
        check_equivalence(&i, &reduce_arcs(&i), ModelOptions::with_cuts("g123".parse().unwrap()), "reduced+g123");
        check_equivalence(&i, &complete_arcs(&i), ModelOptions::with_cuts("g123".parse().unwrap()), "complete+g123");
    }
}

#[test]
fn inequality_conflict_form_is_accepted_by_the_builder() {
    let mut r = common::rng(5);
    let i = common::random_instance(&mut r, 3, 5, 2);
    let opts = ModelOptions {
        conflict_form: ConflictForm::Inequality,
        ..ModelOptions::default()
    };
    let m = build_model(&i, &reduce_arcs(&i), opts).unwrap();
    for route in enumerate_feasible(&i, 1000).unwrap().routes {
        assert!(model_accepts(&m, &i, &route).0);
    }
}
