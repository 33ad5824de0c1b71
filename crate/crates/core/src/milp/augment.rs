//! Containers already aboard become virtual requests picked up at the current
//! vehicle position before anything else.

use thiserror::Error;

use crate::deck::DeckState;
use crate::instance::{Endpoint, Instance, InstanceError, Request, Side};

/// A container on the deck, listed north to south.
#[derive(Clone, Debug, PartialEq)]
pub struct Onboard {
    /// Identifier carried over into [`Augmented::original_ids`].
    pub id: usize,
    pub dest: Endpoint,
    pub q: u32,
    pub e: f64,
    pub l: f64,
}

#[derive(Clone, Debug)]
pub struct Augmented {
    pub instance: Instance,
    /// `original_ids[i - 1]` is the onboard id (virtual requests) or the base
    /// request id (the rest) behind augmented request `i`.
    pub original_ids: Vec<usize>,
    pub north_count: usize,
    pub south_count: usize,
}

impl Augmented {
    pub fn virtual_count(&self) -> usize {
        self.north_count + self.south_count
    }

    /// Maps a base request id to its augmented index.
    pub fn augmented_index(&self, base_id: usize) -> usize {
        base_id + self.virtual_count()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AugmentError {
    #[error("a north-bound container sits south of a south-bound one; the deck cannot be emptied")]
    NotClearable,
    #[error("onboard load {0} exceeds capacity {1}")]
    OverCapacity(u32, u32),
    #[error("base instance already has virtual requests")]
    AlreadyAugmented,
    #[error("vehicle position {0} outside the track")]
    BadPosition(u32),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Builds the instance whose first requests stand for `onboard`.
///
/// North-bound containers become same-side north requests numbered from the
/// deepest one outward, so that loading them in index order at the north end
/// rebuilds the deck. South-bound ones are numbered the same way from the
/// south end. The vehicle starts at `rgv_pos`.
pub fn augment_initial_load(base: &Instance, rgv_pos: u32, onboard: &[Onboard]) -> Result<Augmented, AugmentError> {
    if base.virtual_prefix != 0 {
        return Err(AugmentError::AlreadyAugmented);
    }
    if rgv_pos < 1 || rgv_pos > base.m {
        return Err(AugmentError::BadPosition(rgv_pos));
    }
    let load: u32 = onboard.iter().map(|c| c.q).sum();
    if load > base.capacity {
        return Err(AugmentError::OverCapacity(load, base.capacity));
    }
    let split = onboard.iter().take_while(|c| c.dest.side == Side::North).count();
    if onboard[split..].iter().any(|c| c.dest.side == Side::North) {
        return Err(AugmentError::NotClearable);
    }
    let (north, south) = onboard.split_at(split);

    let mut requests = Vec::with_capacity(onboard.len() + base.n());
    let mut original_ids = Vec::with_capacity(onboard.len() + base.n());
    let order = north.iter().rev().map(|c| (c, Side::North)).chain(south.iter().map(|c| (c, Side::South)));
    for (c, side) in order {
        requests.push(Request {
            id: requests.len() + 1,
            origin: Endpoint::new(rgv_pos, side),
            dest: c.dest,
            q: c.q,
            arrival: 0.0,
            e: c.e,
            l: c.l,
        });
        original_ids.push(c.id);
    }
    for r in &base.requests {
        let mut r = r.clone();
        original_ids.push(r.id);
        r.id = requests.len() + 1;
        requests.push(r);
    }
    let instance = Instance {
        start_pos: rgv_pos,
        requests,
        virtual_prefix: onboard.len(),
        ..base.clone()
    };
    instance.validate()?;
    debug_assert!(rebuilds_deck(&instance, onboard.len()));
    Ok(Augmented {
        instance,
        original_ids,
        north_count: north.len(),
        south_count: south.len(),
    })
}

fn rebuilds_deck(inst: &Instance, n0: usize) -> bool {
    let mut d = DeckState::new();
    (1..=n0).all(|i| d.apply_in_place(inst, i).is_ok()) && d.is_clearable(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deck::evaluate_route;
    use crate::instance::Side::*;

    fn base() -> Instance {
        let mut inst = Instance::empty(10, 3, 1);
        inst.requests.push(Request {
            id: 1,
            origin: Endpoint::new(2, North),
            dest: Endpoint::new(5, North),
            q: 1,
            arrival: 0.0,
            e: 0.0,
            l: crate::tolerances::HORIZON_MAX,
        });
        inst
    }

    fn onboard(id: usize, pos: u32, side: Side) -> Onboard {
        Onboard {
            id,
            dest: Endpoint::new(pos, side),
            q: 1,
            e: 0.0,
            l: crate::tolerances::HORIZON_MAX,
        }
    }

    #[test]
    fn empty_deck_is_identity() {
        let a = augment_initial_load(&base(), 1, &[]).unwrap();
        assert_eq!(a.instance, base());
        assert_eq!(a.original_ids, vec![1]);
    }

    #[test]
    fn one_each_side() {
        let a = augment_initial_load(&base(), 4, &[onboard(10, 6, North), onboard(11, 9, South)]).unwrap();
        let inst = &a.instance;
        assert_eq!(inst.virtual_prefix, 2);
        assert_eq!(inst.start_pos, 4);
        assert_eq!(a.original_ids, vec![10, 11, 1]);
        // Deliver both virtual containers, then serve request 3.
        let ev = evaluate_route(inst, &[0, 1, 2, 4, 5, 3, 6, 7]).unwrap();
        assert!(ev.feasible, "{:?}", ev.violation);
        assert_eq!(inst.distance(1, 4), 2.0);
    }

    #[test]
    fn north_group_numbered_from_the_inside() {
        let a = augment_initial_load(&base(), 4, &[onboard(7, 6, North), onboard(8, 2, North)]).unwrap();
        // Container 8 is deeper, so it is loaded first.
        assert_eq!(a.original_ids[..2], [8, 7]);
        let mut d = DeckState::new();
        d.apply_in_place(&a.instance, 1).unwrap();
        d.apply_in_place(&a.instance, 2).unwrap();
        assert_eq!(d.containers(), &[2, 1]);
    }

    #[test]
    fn rejects_unclearable_deck() {
        let e = augment_initial_load(&base(), 4, &[onboard(7, 6, South), onboard(8, 2, North)]).unwrap_err();
        assert_eq!(e, AugmentError::NotClearable);
    }

    #[test]
    fn rejects_overload() {
        let cs: Vec<_> = (0..4).map(|k| onboard(k, 3, North)).collect();
        assert!(matches!(augment_initial_load(&base(), 4, &cs), Err(AugmentError::OverCapacity(4, 3))));
    }
}
