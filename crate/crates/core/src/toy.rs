//! A seven-request layout on nine station pairs with the vehicle starting at
//! station 3. Request types are P1 = {1}, P2 = {3, 5}, P3 = {2, 6},
//! P4 = {4, 7}, with shared pickup queues 1, 2 and 4, 5. The station
//! coordinates are invented. Useful for demos and smoke tests only.

use crate::instance::{Endpoint, Instance, Request, Side};
use crate::milp::Onboard;
use crate::tolerances::HORIZON_MAX;

use Side::{North as N, South as S};

pub fn toy_reconstruction(capacity: u32) -> Instance {
    let spec = [
        ((2, N), (4, N)),
        ((2, N), (7, S)),
        ((5, S), (3, S)),
        ((8, S), (6, N)),
        ((8, S), (1, S)),
        ((4, N), (9, S)),
        ((6, S), (1, N)),
    ];
    let mut inst = Instance::empty(9, capacity, 3);
    for (k, (o, d)) in spec.into_iter().enumerate() {
        inst.requests.push(Request {
            id: k + 1,
            origin: Endpoint::new(o.0, o.1),
            dest: Endpoint::new(d.0, d.1),
            q: 1,
            arrival: k as f64,
            e: 0.0,
            l: HORIZON_MAX,
        });
    }
    inst
}

/// The second scenario's initial load: one container bound for the north
/// station at 6 and one for the south station at 9, listed north to south.
pub fn toy_onboard() -> Vec<Onboard> {
    let c = |id, pos, side| Onboard { id, dest: Endpoint::new(pos, side), q: 1, e: 0.0, l: HORIZON_MAX };
    vec![c(101, 6, N), c(102, 9, S)]
}
