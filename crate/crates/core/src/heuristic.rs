//! Rule-based dispatching: fill the deck with compatible containers in order
//! of arrival (or deadline), then empty it completely before loading again.

use serde::{Deserialize, Serialize};

use crate::deck::{evaluate_route_with, DeckState, RouteEvaluation};
use crate::instance::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DispatchRule {
    EarliestArrivalFirst,
    EarliestDueFirst,
}

impl DispatchRule {
    /// EDF as soon as any request carries a deadline, EAF otherwise.
    pub fn for_instance(inst: &Instance) -> Self {
        if inst.has_deadlines() {
            DispatchRule::EarliestDueFirst
        } else {
            DispatchRule::EarliestArrivalFirst
        }
    }

    fn key(self, inst: &Instance, i: usize) -> (f64, f64) {
        let r = inst.request(i);
        match self {
            DispatchRule::EarliestArrivalFirst => (r.arrival, 0.0),
            DispatchRule::EarliestDueFirst => (r.l, r.arrival),
        }
    }
}

fn gap(a: u32, b: u32) -> u32 {
    a.abs_diff(b)
}

/// Best-key container among `available` pickups that fits and leaves the deck
/// emptiable. Equal keys go to the nearest station, then the lower id.
pub fn next_load(inst: &Instance, rule: DispatchRule, deck: &DeckState, pos: u32, available: &[usize]) -> Option<usize> {
    let mut order: Vec<usize> = available.to_vec();
    order.sort_by(|&a, &b| {
        let (ka, kb) = (rule.key(inst, a), rule.key(inst, b));
        ka.0.total_cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(gap(pos, inst.request(a).origin.pos).cmp(&gap(pos, inst.request(b).origin.pos)))
            .then(a.cmp(&b))
    });
    order.into_iter().find(|&c| {
        deck.load() + inst.request(c).q <= inst.capacity
            && deck.apply(inst, c).is_ok_and(|d| d.unload_order(inst).is_some())
    })
}

/// Nearest container that can leave the deck now.
pub fn next_delivery(inst: &Instance, deck: &DeckState, pos: u32) -> Option<usize> {
    deck.deliverable(inst)
        .into_iter()
        .min_by_key(|&c| (gap(pos, inst.request(c).dest.pos), c))
}

/// Which half of the load-then-unload cycle the vehicle is in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Loading,
    Delivering,
}

/// Advances the rule by one task. `available` holds the pickups that may be
/// served now (queue heads, and in a dynamic setting, already arrived).
/// Returns the vertex to serve, or `None` when the deck is empty and nothing
/// can be loaded.
pub fn next_task(
    inst: &Instance,
    rule: DispatchRule,
    phase: &mut Phase,
    deck: &DeckState,
    pos: u32,
    available: &[usize],
) -> Option<usize> {
    if *phase == Phase::Loading {
        if let Some(c) = next_load(inst, rule, deck, pos, available) {
            return Some(c);
        }
        *phase = Phase::Delivering;
    }
    match next_delivery(inst, deck, pos) {
        Some(c) => Some(c + inst.n()),
        None => {
            debug_assert!(deck.is_empty(), "the rule only loads emptiable decks");
            *phase = Phase::Loading;
            next_load(inst, rule, deck, pos, available)
        }
    }
}

/// Full route produced by the rule on a static instance. Deadline misses are
/// reported in the evaluation rather than avoided.
pub fn rule_route(inst: &Instance, rule: DispatchRule) -> RouteEvaluation {
    let n = inst.n();
    let qr = inst.queue_relations();
    let mut route = Vec::with_capacity(inst.vertex_count());
    route.push(0);
    let mut deck = DeckState::new();
    let mut picked = vec![false; n + 1];
    let mut pos = inst.start_pos;
    // Containers already aboard are loaded first, in their fixed order.
    for i in 1..=inst.virtual_prefix {
        deck.apply_in_place(inst, i).expect("virtual prefix fits on the deck");
        picked[i] = true;
        route.push(i);
        pos = inst.request(i).origin.pos;
    }
    let mut phase = Phase::Loading;
    loop {
        let available: Vec<usize> = (1..=n)
            .filter(|&i| !picked[i] && qr.pred(i).is_none_or(|p| picked[p]))
            .collect();
        let Some(v) = next_task(inst, rule, &mut phase, &deck, pos, &available) else {
            break;
        };
        deck.apply_in_place(inst, v).expect("rule keeps the deck consistent");
        if v <= n {
            picked[v] = true;
        }
        pos = inst.position(v).expect("task vertex");
        route.push(v);
    }
    route.push(inst.end_vertex());
    evaluate_route_with(inst, &qr, &route).expect("rule route visits every task once")
}
