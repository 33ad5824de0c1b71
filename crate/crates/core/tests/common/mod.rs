//! Shared random-instance builders for the integration suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rgvroute::instance::{Endpoint, Instance, Request, Side};
use rgvroute::tolerances::HORIZON_MAX;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn side(r: &mut ChaCha8Rng) -> Side {
    if r.random_bool(0.5) {
        Side::North
    } else {
        Side::South
    }
}

/// `n` requests on `m` stations. Few stations so queues form; arrivals are
/// small integers so ties occur; loads are 1 or 2 when capacity allows.
pub fn random_instance(r: &mut ChaCha8Rng, n: usize, m: u32, capacity: u32) -> Instance {
    let mut inst = Instance::empty(m, capacity, r.random_range(1..=m));
    for id in 1..=n {
        let o = r.random_range(1..=m);
        let mut d = r.random_range(1..=m);
        if d == o && m > 1 {
            d = if o == m { o - 1 } else { o + 1 };
        }
        let q = if capacity >= 2 && r.random_bool(0.25) { 2 } else { 1 };
        inst.requests.push(Request {
            id,
            origin: Endpoint::new(o, side(r)),
            dest: Endpoint::new(d, side(r)),
            q,
            arrival: r.random_range(0..3) as f64,
            e: 0.0,
            l: HORIZON_MAX,
        });
    }
    inst.validate().unwrap();
    inst
}

/// Like [`random_instance`], with some early and late windows.
pub fn random_instance_tw(r: &mut ChaCha8Rng, n: usize, m: u32, capacity: u32) -> Instance {
    let mut inst = random_instance(r, n, m, capacity);
    for req in &mut inst.requests {
        if r.random_bool(0.3) {
            req.l = r.random_range(8.0..40.0);
        }
        if r.random_bool(0.15) {
            req.e = r.random_range(0.0..10.0f64).min(req.l);
        }
    }
    inst.validate().unwrap();
    inst
}
