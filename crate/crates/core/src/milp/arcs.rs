//! Arc sets: the complete graph and the structurally reduced one.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::instance::{Instance, QueueRelations, RequestType, VertexKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArcMode {
    Complete,
    Reduced,
}

#[derive(Clone, Debug)]
pub struct ArcSet {
    mode: ArcMode,
    vertex_count: usize,
    arcs: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl ArcSet {
    fn from_arcs(mode: ArcMode, vertex_count: usize, mut arcs: Vec<(usize, usize)>) -> Self {
        arcs.sort_unstable();
        arcs.dedup();
        let mut out = vec![Vec::new(); vertex_count];
        let mut inc = vec![Vec::new(); vertex_count];
        let mut index = HashMap::with_capacity(arcs.len());
        for (k, &(i, j)) in arcs.iter().enumerate() {
            out[i].push(j);
            inc[j].push(i);
            index.insert((i, j), k);
        }
        ArcSet {
            mode,
            vertex_count,
            arcs,
            index,
            out,
            inc,
        }
    }

    pub fn mode(&self) -> ArcMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Arcs in lexicographic order.
    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.index.contains_key(&(i, j))
    }

    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        self.index.get(&(i, j)).copied()
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    pub fn predecessors(&self, j: usize) -> &[usize] {
        &self.inc[j]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Arcs between task vertices only.
    pub fn inner_arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let end = self.vertex_count - 1;
        self.arcs.iter().copied().filter(move |&(i, j)| i != 0 && j != end)
    }

    pub fn is_subset_of(&self, other: &ArcSet) -> bool {
        self.arcs.iter().all(|&(i, j)| other.contains(i, j))
    }
}

/// Shape of the graph before any structural reasoning: every vertex except the
/// end may have successors, every vertex except the start may have
/// predecessors. Self-loops and delivery-to-own-pickup arcs are dropped. With
/// virtual requests, the fixed pickup chain is enforced here as well.
pub fn complete_arcs(inst: &Instance) -> ArcSet {
    let n = inst.n();
    let end = inst.end_vertex();
    let mut arcs = Vec::new();
    for i in 0..end {
        for j in 1..=end {
            if i == j || (j >= 1 && j <= n && i == j + n) {
                continue;
            }
            if !respects_virtual_chain(inst, i, j) {
                continue;
            }
            arcs.push((i, j));
        }
    }
    ArcSet::from_arcs(ArcMode::Complete, inst.vertex_count(), arcs)
}

fn respects_virtual_chain(inst: &Instance, i: usize, j: usize) -> bool {
    let n0 = inst.virtual_prefix;
    if n0 == 0 {
        return true;
    }
    if i < n0 || inst.is_virtual(j) {
        // 0 -> 1 -> ... -> n0 is fixed.
        return j == i + 1 && i < n0;
    }
    true
}

/// Number of virtual requests heading north. They are numbered first.
pub fn virtual_north_count(inst: &Instance) -> usize {
    (1..=inst.virtual_prefix)
        .filter(|&i| inst.request_type(i) == RequestType::T1)
        .count()
}

/// The structurally reduced arc set. Every arc used by some feasible route survives.
pub fn reduce_arcs(inst: &Instance) -> ArcSet {
    let qr = inst.queue_relations();
    let n = inst.n();
    let end = inst.end_vertex();
    let n0 = inst.virtual_prefix;
    let mut arcs = Vec::new();

    if n0 == 0 {
        for j in 1..=n {
            if qr.is_head(j) {
                arcs.push((0, j));
            }
        }
    } else {
        for i in 0..n0 {
            arcs.push((i, i + 1));
        }
        arcs.extend(virtual_exit_arcs(inst, &qr));
    }

    for i in 1..=n {
        if i == n0 && n0 > 0 {
            continue;
        }
        if inst.is_virtual(i) {
            continue;
        }
        for j in 1..=2 * n {
            if j == i || inst.is_virtual(j) {
                continue;
            }
            if pickup_successor_allowed(inst, &qr, i, j) {
                arcs.push((i, j));
            }
        }
    }

    for d in n + 1..=2 * n {
        for j in 1..=2 * n {
            if j == d || j + n == d || inst.is_virtual(j) {
                continue;
            }
            if delivery_successor_allowed(inst, &qr, d, j) {
                arcs.push((d, j));
            }
        }
        if may_finish_with(inst, &qr, d - n) {
            arcs.push((d, end));
        }
    }
    ArcSet::from_arcs(ArcMode::Reduced, inst.vertex_count(), arcs)
}

/// Arcs leaving the last virtual pickup: toward queue heads whose loading does
/// not deadlock with the containers already aboard, and toward the two virtual
/// containers sitting at the deck ends.
fn virtual_exit_arcs(inst: &Instance, qr: &QueueRelations) -> Vec<(usize, usize)> {
    let n = inst.n();
    let n0 = inst.virtual_prefix;
    let north = virtual_north_count(inst);
    let south = n0 - north;
    let mut arcs = Vec::new();
    for j in n0 + 1..=n {
        if !qr.is_head(j) {
            continue;
        }
        let ok = match inst.request_type(j) {
            RequestType::T1 | RequestType::T2 => true,
            RequestType::T3 => north == 0,
            RequestType::T4 => south == 0,
        };
        if ok {
            arcs.push((n0, j));
        }
    }
    if north > 0 {
        arcs.push((n0, north + n));
    }
    if south > 0 {
        arcs.push((n0, n0 + n));
    }
    arcs
}

fn pickup_successor_allowed(inst: &Instance, qr: &QueueRelations, i: usize, j: usize) -> bool {
    use RequestType::*;
    let n = inst.n();
    let ti = inst.request_type(i);
    match inst.kind(j) {
        VertexKind::Pickup(j) => {
            if qr.precedes(j, i) {
                return false;
            }
            if let Some(next) = qr.succ(i) {
                if qr.precedes(next, j) {
                    return false;
                }
            }
            let tj = inst.request_type(j);
            if matches!(ti, T1 | T4) && tj == T3 {
                return false;
            }
            if matches!(ti, T2 | T3) && tj == T4 {
                return false;
            }
            true
        }
        VertexKind::Delivery(k) => {
            debug_assert_eq!(k + n, j);
            if qr.precedes(i, k) {
                return false;
            }
            if k == i {
                return true;
            }
            let tk = inst.request_type(k);
            // i was just loaded at its origin end and now covers that end.
            if matches!(ti, T1 | T3) && matches!(tk, T1 | T4) {
                return false;
            }
            if matches!(ti, T2 | T4) && matches!(tk, T2 | T3) {
                return false;
            }
            true
        }
        _ => false,
    }
}

/// Requests queued strictly between `a` and `b` having type `t`.
fn count_between(inst: &Instance, qr: &QueueRelations, a: usize, b: usize, t: RequestType) -> usize {
    let mut count = 0;
    let mut cur = qr.succ(a);
    while let Some(k) = cur {
        if k == b {
            return count;
        }
        if inst.request_type(k) == t {
            count += 1;
        }
        cur = qr.succ(k);
    }
    0
}

/// Pickups that cannot follow the delivery of request `r` because loading them
/// would exceed capacity or break a crossing rule with containers loaded while
/// `r` was aboard.
fn blocked_after_delivery(inst: &Instance, qr: &QueueRelations, r: usize, j: usize) -> bool {
    use RequestType::*;
    if qr.precedes(j, r) {
        return true;
    }
    if !qr.precedes(r, j) {
        return false;
    }
    let q = inst.capacity as usize;
    match inst.request_type(r) {
        T1 => count_between(inst, qr, r, j, T3) > 0,
        T2 => count_between(inst, qr, r, j, T4) > 0,
        T3 => count_between(inst, qr, r, j, T3) >= q,
        T4 => count_between(inst, qr, r, j, T4) >= q,
    }
}

fn delivery_successor_allowed(inst: &Instance, qr: &QueueRelations, d: usize, j: usize) -> bool {
    use RequestType::*;
    let n = inst.n();
    let r = d - n;
    match inst.kind(j) {
        VertexKind::Pickup(j) => !blocked_after_delivery(inst, qr, r, j),
        VertexKind::Delivery(k) => {
            let tr = inst.request_type(r);
            let tk = inst.request_type(k);
            if matches!(tr, T1 | T2) && qr.precedes(r, k) {
                return false;
            }
            if matches!(tr, T3 | T4) && qr.precedes(k, r) {
                return false;
            }
            if qr.precedes(r, k) && blocked_after_delivery(inst, qr, r, k) {
                return false;
            }
            if tr == T3 && matches!(tk, T2 | T4) {
                return false;
            }
            if tr == T4 && matches!(tk, T1 | T3) {
                return false;
            }
            true
        }
        _ => false,
    }
}

/// Whether the delivery of request `r` can be the last task. It cannot when a
/// request queued behind `r` is always delivered after it: a FIFO partner of
/// the same type, or a crossing request that may not be loaded while `r` is aboard.
fn may_finish_with(inst: &Instance, qr: &QueueRelations, r: usize) -> bool {
    use RequestType::*;
    let tr = inst.request_type(r);
    let mut cur = qr.succ(r);
    while let Some(k) = cur {
        let tk = inst.request_type(k);
        let forced = matches!(
            (tr, tk),
            (T3, T3) | (T4, T4) | (T1, T3) | (T2, T4)
        );
        if forced {
            return false;
        }
        cur = qr.succ(k);
    }
    true
}
