//! The vehicle deck as a deque, and step-by-step evaluation of visit sequences.
//!
//! Containers enter at the end facing the pickup side and leave through the
//! end facing the delivery side. Nothing can pass another container on the
//! deck, so a container is deliverable only when it sits at the right end.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, QueueRelations, RequestType, Side, VertexKind};
use crate::tolerances::TIME;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum DeckError {
    #[error("container {0} cannot reach its exit side")]
    Blocked(usize),
    #[error("loading container {0} exceeds capacity")]
    CapacityExceeded(usize),
    #[error("container {0} is already aboard or was loaded before")]
    DuplicatePickup(usize),
    #[error("container {0} is not aboard")]
    AbsentContainer(usize),
    #[error("vertex {0} is not a task")]
    NotATask(usize),
}

impl DeckError {
    /// Structural errors mean the sequence itself is malformed, as opposed to
    /// being physically impossible.
    pub fn is_structural(&self) -> bool {
        matches!(
            self,
            DeckError::DuplicatePickup(_) | DeckError::AbsentContainer(_) | DeckError::NotATask(_)
        )
    }
}

/// Containers aboard, index 0 at the north end.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeckState {
    containers: Vec<usize>,
    load: u32,
}

impl DeckState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a deck from north-to-south contents. Fails on repeated ids or overload.
    pub fn from_containers(inst: &Instance, north_to_south: &[usize]) -> Result<Self, DeckError> {
        let mut d = DeckState::new();
        for &c in north_to_south {
            if c == 0 || c > inst.n() {
                return Err(DeckError::NotATask(c));
            }
            if d.contains(c) {
                return Err(DeckError::DuplicatePickup(c));
            }
            d.load += inst.request(c).q;
            d.containers.push(c);
        }
        if d.load > inst.capacity {
            return Err(DeckError::CapacityExceeded(*north_to_south.last().unwrap()));
        }
        Ok(d)
    }

    pub fn containers(&self) -> &[usize] {
        &self.containers
    }

    pub fn load(&self) -> u32 {
        self.load
    }

    pub fn is_empty(&self) -> bool {
        self.containers.is_empty()
    }

    pub fn len(&self) -> usize {
        self.containers.len()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.containers.contains(&id)
    }

    pub fn apply(&self, inst: &Instance, v: usize) -> Result<DeckState, DeckError> {
        let mut next = self.clone();
        next.apply_in_place(inst, v)?;
        Ok(next)
    }

    /// Like [`DeckState::apply`]; on error the state is left unchanged.
    pub fn apply_in_place(&mut self, inst: &Instance, v: usize) -> Result<(), DeckError> {
        match inst.kind(v) {
            VertexKind::Pickup(i) => {
                if self.contains(i) {
                    return Err(DeckError::DuplicatePickup(i));
                }
                let r = inst.request(i);
                if self.load + r.q > inst.capacity {
                    return Err(DeckError::CapacityExceeded(i));
                }
                match r.origin.side {
                    Side::North => self.containers.insert(0, i),
                    Side::South => self.containers.push(i),
                }
                self.load += r.q;
                Ok(())
            }
            VertexKind::Delivery(i) => {
                if !self.contains(i) {
                    return Err(DeckError::AbsentContainer(i));
                }
                if !self.at_exit(inst, i) {
                    return Err(DeckError::Blocked(i));
                }
                match inst.request(i).dest.side {
                    Side::North => {
                        self.containers.remove(0);
                    }
                    Side::South => {
                        self.containers.pop();
                    }
                }
                self.load -= inst.request(i).q;
                Ok(())
            }
            _ => Err(DeckError::NotATask(v)),
        }
    }

    /// True when container `i` sits at the end facing its delivery side.
    pub fn at_exit(&self, inst: &Instance, i: usize) -> bool {
        let end = match inst.request(i).dest.side {
            Side::North => self.containers.first(),
            Side::South => self.containers.last(),
        };
        end == Some(&i)
    }

    /// Containers that could be delivered right now.
    pub fn deliverable(&self, inst: &Instance) -> Vec<usize> {
        let mut out = Vec::with_capacity(2);
        if let Some(&c) = self.containers.first() {
            if inst.request(c).dest.side == Side::North {
                out.push(c);
            }
        }
        if let Some(&c) = self.containers.last() {
            if inst.request(c).dest.side == Side::South && !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }

    /// True when every north-bound container lies north of every south-bound one,
    /// which is exactly when the deck can still be emptied. Later pickups only add
    /// containers at the ends, so a deck failing this test never recovers.
    pub fn is_clearable(&self, inst: &Instance) -> bool {
        let mut seen_south = false;
        for &c in &self.containers {
            match inst.request(c).dest.side {
                Side::South => seen_south = true,
                Side::North if seen_south => return false,
                Side::North => {}
            }
        }
        true
    }

    /// Searches for an order of end-pops that empties the deck.
    pub fn unload_order(&self, inst: &Instance) -> Option<Vec<usize>> {
        fn go(d: &DeckState, inst: &Instance, acc: &mut Vec<usize>) -> bool {
            if d.is_empty() {
                return true;
            }
            for c in d.deliverable(inst) {
                let next = d.apply(inst, c + inst.n()).expect("deliverable container");
                acc.push(c);
                if go(&next, inst, acc) {
                    return true;
                }
                acc.pop();
            }
            false
        }
        let mut acc = Vec::with_capacity(self.len());
        go(self, inst, &mut acc).then_some(acc)
    }
}

/// The six pairwise service patterns for two requests sharing the deck.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ServiceCase {
    Lifo,
    Fifo,
    /// Crossing first in: a T3 may host a T1 (T4 may host a T2), never the reverse.
    Cfi,
    /// Crossing last out: the crossing request leaves after the same-side one.
    Clo,
    Deadlock,
    Free,
}

/// Symmetric classification of a request-type pair.
pub fn pairwise_case(a: RequestType, b: RequestType) -> ServiceCase {
    use RequestType::*;
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    match (a, b) {
        (T1, T1) | (T2, T2) => ServiceCase::Lifo,
        (T3, T3) | (T4, T4) => ServiceCase::Fifo,
        (T1, T3) | (T2, T4) => ServiceCase::Cfi,
        (T1, T4) | (T2, T3) => ServiceCase::Clo,
        (T3, T4) => ServiceCase::Deadlock,
        (T1, T2) => ServiceCase::Free,
        _ => unreachable!("pair is sorted"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    DeckBlocked { vertex: usize },
    CapacityExceeded { vertex: usize },
    QueueOrderViolated { vertex: usize },
    PrecedenceViolated { vertex: usize },
    TimeWindowMissed { request: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RouteError {
    #[error("route must have {expected} vertices, got {actual}")]
    WrongLength { expected: usize, actual: usize },
    #[error("route must start at vertex 0 and finish at the end vertex")]
    BadEndpoints,
    #[error("vertex {0} is out of range or repeated")]
    BadVertex(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteEvaluation {
    pub route: Vec<usize>,
    pub feasible: bool,
    /// b_v, indexed by vertex.
    pub start_times: Vec<f64>,
    /// w_v, the load after serving vertex v, indexed by vertex.
    pub loads: Vec<i64>,
    pub energy: f64,
    pub distance: f64,
    pub completion_time: f64,
    /// Set when the vehicle idled to respect an early window.
    pub waited: bool,
    pub violation: Option<Violation>,
    pub tw_misses: usize,
}

/// What a route is scored by.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    #[default]
    Energy,
    Distance,
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "energy" => Ok(Objective::Energy),
            "distance" => Ok(Objective::Distance),
            _ => Err(format!("unknown objective `{s}` (expected energy or distance)")),
        }
    }
}

impl RouteEvaluation {
    pub fn cost(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Energy => self.energy,
            Objective::Distance => self.distance,
        }
    }

    /// Completion time b_{i+n} + s_{i+n} of request `i`.
    pub fn request_completion(&self, inst: &Instance, i: usize) -> f64 {
        let d = i + inst.n();
        self.start_times[d] + inst.service(d)
    }
}

pub(crate) fn check_route_shape(inst: &Instance, route: &[usize]) -> Result<(), RouteError> {
    let expected = inst.vertex_count();
    if route.len() != expected {
        return Err(RouteError::WrongLength {
            expected,
            actual: route.len(),
        });
    }
    if route[0] != 0 || route[expected - 1] != inst.end_vertex() {
        return Err(RouteError::BadEndpoints);
    }
    let mut seen = vec![false; expected];
    for &v in route {
        if v >= expected || seen[v] {
            return Err(RouteError::BadVertex(v));
        }
        seen[v] = true;
    }
    Ok(())
}

/// Executes a complete visit sequence on the deck, computing the earliest
/// schedule, loads, energy and the first physical or ordering violation.
pub fn evaluate_route(inst: &Instance, route: &[usize]) -> Result<RouteEvaluation, RouteError> {
    evaluate_route_with(inst, &inst.queue_relations(), route)
}

pub fn evaluate_route_with(
    inst: &Instance,
    queues: &QueueRelations,
    route: &[usize],
) -> Result<RouteEvaluation, RouteError> {
    check_route_shape(inst, route)?;
    let n = inst.n();
    let nv = inst.vertex_count();
    let mut start_times = vec![0.0; nv];
    let mut loads = vec![0i64; nv];
    let mut visited = vec![false; nv];
    let mut deck = DeckState::new();
    let mut violation = None;
    let mut energy = 0.0;
    let mut distance = 0.0;
    let mut waited = false;
    let mut completion = 0.0;
    let mut next_virtual = 1;
    visited[0] = true;

    for w in route.windows(2) {
        let (u, v) = (w[0], w[1]);
        let load = loads[u].max(0) as f64;
        energy += inst.arc_energy(u, v, load);
        distance += inst.distance(u, v);
        if v == inst.end_vertex() {
            loads[v] = loads[u];
            start_times[v] = completion;
            break;
        }
        let mut b = start_times[u] + inst.service(u) + inst.travel_time(u, v);
        if let VertexKind::Delivery(i) = inst.kind(v) {
            let early = inst.request(i).e - inst.service(v);
            if b < early {
                b = early;
                waited = true;
            }
        }
        start_times[v] = b;
        loads[v] = loads[u] + inst.load_delta(v);
        completion = b + inst.service(v);

        if violation.is_none() {
            violation = step_violation(inst, queues, &visited, &mut deck, &mut next_virtual, v);
        }
        visited[v] = true;
    }

    let mut tw_misses = 0;
    for i in 1..=n {
        let r = inst.request(i);
        let done = start_times[i + n] + inst.service(i + n);
        if done > r.l + TIME || done < r.e - TIME {
            tw_misses += 1;
            if violation.is_none() {
                violation = Some(Violation::TimeWindowMissed { request: i });
            }
        }
    }

    Ok(RouteEvaluation {
        route: route.to_vec(),
        feasible: violation.is_none(),
        start_times,
        loads,
        energy,
        distance,
        completion_time: completion,
        waited,
        violation,
        tw_misses,
    })
}

fn step_violation(
    inst: &Instance,
    queues: &QueueRelations,
    visited: &[bool],
    deck: &mut DeckState,
    next_virtual: &mut usize,
    v: usize,
) -> Option<Violation> {
    let n = inst.n();
    match inst.kind(v) {
        VertexKind::Pickup(i) => {
            if inst.is_virtual(i) {
                if i != *next_virtual {
                    return Some(Violation::QueueOrderViolated { vertex: v });
                }
                *next_virtual += 1;
            } else if *next_virtual <= inst.virtual_prefix {
                return Some(Violation::QueueOrderViolated { vertex: v });
            }
            if let Some(p) = queues.pred(i) {
                if !visited[p] {
                    return Some(Violation::QueueOrderViolated { vertex: v });
                }
            }
        }
        VertexKind::Delivery(i) => {
            if !visited[i] {
                return Some(Violation::PrecedenceViolated { vertex: v });
            }
            if *next_virtual <= inst.virtual_prefix {
                return Some(Violation::QueueOrderViolated { vertex: v });
            }
        }
        _ => {}
    }
    match deck.apply_in_place(inst, v) {
        Ok(()) => None,
        Err(DeckError::CapacityExceeded(_)) => Some(Violation::CapacityExceeded { vertex: v }),
        Err(DeckError::Blocked(_)) => Some(Violation::DeckBlocked { vertex: v }),
        Err(e) => unreachable!("shape and precedence checked before deck step: {e} at {v}, n = {n}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Endpoint, Request};
    use crate::tolerances::HORIZON_MAX;
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

    #[test]
    fn single_round_trip_empties_deck() {
        let i = inst(vec![req(1, (2, N), (6, N))], 1);
        let d = DeckState::new().apply(&i, 1).unwrap();
        assert_eq!(d.containers(), &[1]);
        let d = d.apply(&i, 2).unwrap();
        assert!(d.is_empty() && d.load() == 0);
    }

    #[test]
    fn structural_errors_differ_from_blocking() {
        let i = inst(vec![req(1, (2, N), (6, N)), req(2, (3, N), (7, N))], 2);
        let d = DeckState::new();
        let e = d.apply(&i, 3).unwrap_err();
        assert_eq!(e, DeckError::AbsentContainer(1));
        assert!(e.is_structural());
        let d = d.apply(&i, 1).unwrap();
        assert!(d.apply(&i, 1).unwrap_err().is_structural());
        let d = d.apply(&i, 2).unwrap();
        let e = d.apply(&i, 3).unwrap_err();
        assert_eq!(e, DeckError::Blocked(1));
        assert!(!e.is_structural());
    }

    #[test]
    fn capacity_enforced() {
        let i = inst(vec![req(1, (2, N), (6, N)), req(2, (3, S), (7, S))], 1);
        let d = DeckState::new().apply(&i, 1).unwrap();
        assert_eq!(d.apply(&i, 2), Err(DeckError::CapacityExceeded(2)));
    }

    #[test]
    fn crossing_pickup_under_same_side_host_deadlocks() {
        // T1 aboard, then a T3 loaded at the north end: neither can ever leave.
        let i = inst(vec![req(1, (2, N), (6, N)), req(2, (3, N), (7, S))], 2);
        let d = DeckState::new().apply(&i, 1).unwrap().apply(&i, 2).unwrap();
        assert!(d.deliverable(&i).is_empty());
        assert!(!d.is_clearable(&i));
        assert!(d.unload_order(&i).is_none());
    }

    #[test]
    fn t3_t4_never_coexist() {
        let i = inst(vec![req(1, (2, N), (6, S)), req(2, (3, S), (7, N))], 2);
        for first in [1, 2] {
            let d = DeckState::new().apply(&i, first).unwrap().apply(&i, 3 - first).unwrap();
            assert!(d.unload_order(&i).is_none());
        }
    }

    #[test]
    fn case_table() {
        use RequestType::*;
        assert_eq!(pairwise_case(T1, T2), ServiceCase::Free);
        assert_eq!(pairwise_case(T3, T4), ServiceCase::Deadlock);
        assert_eq!(pairwise_case(T1, T1), ServiceCase::Lifo);
        assert_eq!(pairwise_case(T4, T4), ServiceCase::Fifo);
        assert_eq!(pairwise_case(T3, T1), ServiceCase::Cfi);
        assert_eq!(pairwise_case(T2, T4), ServiceCase::Cfi);
        assert_eq!(pairwise_case(T4, T1), ServiceCase::Clo);
        assert_eq!(pairwise_case(T2, T3), ServiceCase::Clo);
    }

    #[test]
    fn single_request_route() {
        let mut i = inst(vec![req(1, (3, N), (7, N))], 1);
        i.start_pos = 3;
        let ev = evaluate_route(&i, &[0, 1, 2, 3]).unwrap();
        assert!(ev.feasible);
        assert_eq!(ev.distance, 4.0);
        let expected = i.rgv.arc_energy(4.0, 1.0).unwrap();
        assert!((ev.energy - expected).abs() < 1e-12);
        assert_eq!(ev.loads[3], 0);
        // service 0.5, travel time over 4 units is 2 + 3, service 0.5
        assert!((ev.completion_time - (0.5 + 5.0 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn queue_order_is_checked() {
        let i = inst(vec![req(1, (3, N), (7, N)), req(2, (3, N), (8, S))], 2);
        let ev = evaluate_route(&i, &[0, 2, 1, 3, 4, 5]).unwrap();
        assert_eq!(ev.violation, Some(Violation::QueueOrderViolated { vertex: 2 }));
    }

    #[test]
    fn crossed_lifo_pair_blocks() {
        let i = inst(vec![req(1, (3, N), (7, N)), req(2, (4, N), (8, N))], 2);
        let ev = evaluate_route(&i, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(ev.violation, Some(Violation::DeckBlocked { vertex: 3 }));
        assert!(evaluate_route(&i, &[0, 1, 2, 4, 3, 5]).unwrap().feasible);
    }

    #[test]
    fn delivery_before_pickup() {
        let i = inst(vec![req(1, (3, N), (7, N))], 1);
        let ev = evaluate_route(&i, &[0, 2, 1, 3]).unwrap();
        assert_eq!(ev.violation, Some(Violation::PrecedenceViolated { vertex: 2 }));
    }

    #[test]
    fn malformed_routes_rejected() {
        let i = inst(vec![req(1, (3, N), (7, N))], 1);
        assert!(evaluate_route(&i, &[0, 1, 3]).is_err());
        assert!(evaluate_route(&i, &[1, 0, 2, 3]).is_err());
        assert!(evaluate_route(&i, &[0, 1, 1, 3]).is_err());
    }

    #[test]
    fn early_window_waits_before_delivery() {
        let mut r = req(1, (1, N), (2, N));
        r.e = 10.0;
        let i = inst(vec![r], 1);
        let ev = evaluate_route(&i, &[0, 1, 2, 3]).unwrap();
        assert!(ev.feasible && ev.waited);
        assert!((ev.completion_time - 10.0).abs() < 1e-12);
    }

    #[test]
    fn deadline_miss_reported() {
        let mut r = req(1, (1, N), (9, N));
        r.l = 3.0;
        let i = inst(vec![r], 1);
        let ev = evaluate_route(&i, &[0, 1, 2, 3]).unwrap();
        assert_eq!(ev.violation, Some(Violation::TimeWindowMissed { request: 1 }));
        assert_eq!(ev.tw_misses, 1);
    }
}
