//! Static valid inequalities.
//!
//! Group 1 comes from the generic pickup-and-delivery polytope (two-vertex
//! subtours, lifted precedence, three-vertex D inequalities). Groups 2 and 3
//! encode which predecessors and successors remain possible around a pair of
//! requests that share the deck under LIFO/CLO and FIFO/CLO service.

use std::collections::{BTreeMap, HashSet};

use super::{MilpModel, RowFamily};
use crate::instance::{Instance, RequestType, VertexKind};
use super::CutGroups;

use RequestType::*;

pub(super) fn add_valid_inequalities(m: &mut MilpModel, inst: &Instance, groups: CutGroups) {
    let mut seen: HashSet<Vec<(usize, u64)>> = HashSet::new();
    let mut b = CutBuilder { m, seen: &mut seen };
    if groups.g1 {
        group1(&mut b, inst);
    }
    if groups.g2 {
        group2(&mut b, inst);
    }
    if groups.g3 {
        group3(&mut b, inst);
    }
}

struct CutBuilder<'a> {
    m: &'a mut MilpModel,
    seen: &'a mut HashSet<Vec<(usize, u64)>>,
}

impl CutBuilder<'_> {
    /// Adds `sum coeff * x_arc <= rhs`. Missing arcs count as zero; a row that
    /// is implied by variable bounds alone, or repeats an earlier row, is skipped.
    fn add(&mut self, family: RowFamily, name: String, terms: &[((usize, usize), f64)], rhs: f64) {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for &((i, j), c) in terms {
            if let Some(v) = self.m.x(i, j) {
                *acc.entry(v).or_insert(0.0) += c;
            }
        }
        let max_activity: f64 = acc.values().filter(|c| **c > 0.0).sum();
        if max_activity <= rhs {
            return;
        }
        let mut key: Vec<(usize, u64)> = acc.iter().map(|(&v, &c)| (v, c.to_bits())).collect();
        key.push((usize::MAX, rhs.to_bits()));
        if !self.seen.insert(key) {
            return;
        }
        let coeffs = acc.into_iter().collect();
        self.m.push_row(family, name, coeffs, f64::NEG_INFINITY, rhs);
    }
}

fn ty(inst: &Instance, p: usize) -> RequestType {
    inst.request_type(p)
}

fn group1(b: &mut CutBuilder, inst: &Instance) {
    let n = inst.n();
    for u in 1..=2 * n {
        for v in u + 1..=2 * n {
            b.add(
                RowFamily::Subtour,
                format!("sec_{u}_{v}"),
                &[((u, v), 1.0), ((v, u), 1.0)],
                1.0,
            );
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            if i == j {
                continue;
            }
            for s in [vec![i, j], vec![i, j + n], vec![i, i + n, j]] {
                let terms = lifted_pi(inst, &s);
                let name = format!("lprec_pi_{}", join(&s));
                b.add(RowFamily::LiftedPrecedence, name, &terms, (s.len() - 1) as f64);
            }
            for s in [vec![i + n, j + n], vec![i, j + n], vec![i, i + n, j + n]] {
                let terms = lifted_sigma(inst, &s);
                let name = format!("lprec_sigma_{}", join(&s));
                b.add(RowFamily::LiftedPrecedence, name, &terms, (s.len() - 1) as f64);
            }
            let (ip, jp) = (i + n, j + n);
            b.add(
                RowFamily::LiftedD3,
                format!("d3plus_{i}_{j}"),
                &[((ip, j), 1.0), ((j, i), 1.0), ((i, ip), 1.0), ((jp, ip), 1.0), ((j, ip), 2.0)],
                2.0,
            );
            b.add(
                RowFamily::LiftedD3,
                format!("d3minus_{i}_{j}"),
                &[((i, ip), 1.0), ((ip, jp), 1.0), ((jp, i), 1.0), ((i, j), 1.0), ((i, jp), 2.0)],
                2.0,
            );
        }
    }
}

fn join(s: &[usize]) -> String {
    s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("_")
}

fn x_inside(s: &[usize]) -> Vec<((usize, usize), f64)> {
    let mut t = Vec::new();
    for &u in s {
        for &v in s {
            if u != v {
                t.push(((u, v), 1.0));
            }
        }
    }
    t
}

/// Lifted subtour row using pickups whose deliveries lie in S.
fn lifted_pi(inst: &Instance, s: &[usize]) -> Vec<((usize, usize), f64)> {
    let n = inst.n();
    let all: Vec<usize> = (0..inst.vertex_count()).collect();
    let in_s = |v: usize| s.contains(&v);
    let in_pi = |v: usize| v >= 1 && v <= n && in_s(v + n);
    let mut t = x_inside(s);
    for &u in s {
        for &v in &all {
            if !in_s(v) && in_pi(v) {
                t.push(((u, v), 1.0));
            }
        }
    }
    for &u in s.iter().filter(|&&u| in_pi(u)) {
        for &v in &all {
            if !in_s(v) && !in_pi(v) {
                t.push(((u, v), 1.0));
            }
        }
    }
    t
}

/// Lifted subtour row using deliveries whose pickups lie in S.
fn lifted_sigma(inst: &Instance, s: &[usize]) -> Vec<((usize, usize), f64)> {
    let n = inst.n();
    let all: Vec<usize> = (0..inst.vertex_count()).collect();
    let in_s = |v: usize| s.contains(&v);
    let in_sigma = |v: usize| v > n && v <= 2 * n && in_s(v - n);
    let mut t = x_inside(s);
    for &u in &all {
        if !in_s(u) && in_sigma(u) {
            for &v in s {
                t.push(((u, v), 1.0));
            }
        }
    }
    for &u in &all {
        if !in_s(u) && !in_sigma(u) {
            for &v in s.iter().filter(|&&v| in_sigma(v)) {
                t.push(((u, v), 1.0));
            }
        }
    }
    t
}

/// Membership test for a set of vertices described by its start-vertex flag
/// and predicates on the request behind a pickup or delivery vertex.
struct Members<P: Fn(usize) -> bool, D: Fn(usize) -> bool> {
    zero: bool,
    pick: P,
    deliv: D,
}

impl<P: Fn(usize) -> bool, D: Fn(usize) -> bool> Members<P, D> {
    fn contains(&self, inst: &Instance, v: usize) -> bool {
        match inst.kind(v) {
            VertexKind::Start => self.zero,
            VertexKind::Pickup(p) => (self.pick)(p),
            VertexKind::Delivery(p) => (self.deliv)(p),
            VertexKind::End => false,
        }
    }
}

/// `lead + sum over predecessors l of `target` outside the set of x_{l,target} <= 1`.
fn pred_row<P: Fn(usize) -> bool, D: Fn(usize) -> bool>(
    b: &mut CutBuilder,
    inst: &Instance,
    family: RowFamily,
    name: String,
    lead: (usize, usize),
    target: usize,
    set: &Members<P, D>,
) {
    let mut terms = vec![(lead, 1.0)];
    for &l in b.m.arcs.predecessors(target) {
        if !set.contains(inst, l) {
            terms.push(((l, target), 1.0));
        }
    }
    b.add(family, name, &terms, 1.0);
}

fn succ_row<P: Fn(usize) -> bool, D: Fn(usize) -> bool>(
    b: &mut CutBuilder,
    inst: &Instance,
    family: RowFamily,
    name: String,
    lead: (usize, usize),
    source: usize,
    set: &Members<P, D>,
) {
    let mut terms = vec![(lead, 1.0)];
    for &l in b.m.arcs.successors(source) {
        if !set.contains(inst, l) {
            terms.push(((source, l), 1.0));
        }
    }
    b.add(family, name, &terms, 1.0);
}

fn group2(b: &mut CutBuilder, inst: &Instance) {
    let n = inst.n();
    for i in 1..=n {
        for j in 1..=n {
            if i == j {
                continue;
            }
            let (ti, tj) = (ty(inst, i), ty(inst, j));
            // Cases: same-side pair (LIFO), or crossing host with same-side guest (CLO).
            let case = match (ti, tj) {
                (T1, T1) => 0,
                (T4, T1) => 1,
                (T2, T2) => 2,
                (T3, T2) => 3,
                _ => continue,
            };
            let (ip, jp) = (i + n, j + n);
            let t = |p: usize| ty(inst, p);
            let north_case = case < 2;
            // Same-side type of the opposite end, and the crossing types entering and leaving this end.
            let (other_same, cross_in, cross_out) = if north_case { (T2, T4, T3) } else { (T1, T3, T4) };

            // Possible predecessors of i+n when x_ij = 1.
            let pred_ip = Members {
                zero: false,
                pick: |p: usize| {
                    let ok = t(p) == other_same || t(p) == cross_in;
                    if case % 2 == 1 {
                        ok && p != i
                    } else {
                        ok
                    }
                },
                deliv: |p: usize| {
                    let banned = if case % 2 == 0 { cross_in } else { cross_out };
                    t(p) != banned && p != i
                },
            };
            pred_row(b, inst, RowFamily::Group2, format!("g2a_{i}_{j}"), (i, j), ip, &pred_ip);

            // Possible successors of j+n when x_ij = 1.
            let succ_jp = Members {
                zero: false,
                pick: |p: usize| t(p) != cross_out && p != i && p != j,
                deliv: |p: usize| {
                    if case % 2 == 0 {
                        t(p) == other_same || t(p) == cross_out || p == i
                    } else {
                        t(p) != cross_out && p != j
                    }
                },
            };
            succ_row(b, inst, RowFamily::Group2, format!("g2b_{i}_{j}"), (i, j), jp, &succ_jp);

            // Possible predecessors of j when x_{j+n,i+n} = 1. With a crossing host,
            // i need not be aboard when j is loaded, and then any pickup or any
            // earlier delivery can come right before j; only i+n is excluded.
            let pred_j = Members {
                zero: case % 2 == 1,
                pick: |p: usize| {
                    if case % 2 == 1 {
                        p != j
                    } else {
                        p == i || t(p) == other_same || t(p) == cross_in
                    }
                },
                deliv: |p: usize| {
                    if case % 2 == 1 {
                        p != i && p != j
                    } else {
                        t(p) != cross_in && p != i && p != j
                    }
                },
            };
            pred_row(b, inst, RowFamily::Group2, format!("g2c_{i}_{j}"), (jp, ip), j, &pred_j);

            // Possible successors of i when x_{j+n,i+n} = 1.
            let succ_i = Members {
                zero: false,
                pick: |p: usize| t(p) != cross_out && p != i,
                deliv: |p: usize| {
                    if case % 2 == 0 {
                        t(p) == other_same || t(p) == cross_out
                    } else {
                        let host = if north_case { T1 } else { T2 };
                        t(p) == host || (t(p) == cross_in && p != i)
                    }
                },
            };
            succ_row(b, inst, RowFamily::Group2, format!("g2d_{i}_{j}"), (jp, ip), i, &succ_i);

            if case % 2 == 1 {
                b.add(
                    RowFamily::Group2,
                    format!("g2e_{i}_{j}"),
                    &[((i, j), 1.0), ((j, i), 1.0), ((i, ip), 1.0), ((ip, jp), 1.0)],
                    1.0,
                );
            }
            b.add(
                RowFamily::Group2,
                format!("g2f_{i}_{j}"),
                &[((i, j), 1.0), ((ip, jp), 1.0), ((jp, i), 1.0), ((ip, j), 1.0)],
                1.0,
            );
        }
    }
}

fn group3(b: &mut CutBuilder, inst: &Instance) {
    let n = inst.n();
    for i in 1..=n {
        for j in 1..=n {
            if i == j {
                continue;
            }
            let (ti, tj) = (ty(inst, i), ty(inst, j));
            // Cases: same-side host with crossing guest (CLO), or crossing pair (FIFO).
            let case = match (ti, tj) {
                (T1, T4) => 0,
                (T4, T4) => 1,
                (T2, T3) => 2,
                (T3, T3) => 3,
                _ => continue,
            };
            let (ip, jp) = (i + n, j + n);
            let t = |p: usize| ty(inst, p);
            let north_case = case < 2;
            // host: same-side type; guest: crossing type of j; opposite: the other crossing type;
            // other_same: the same-side type of the opposite side.
            let (host, guest, opposite, other_same) = if north_case { (T1, T4, T3, T2) } else { (T2, T3, T4, T1) };
            let fifo = case % 2 == 1;

            let succ_ip = Members {
                zero: false,
                pick: |p: usize| t(p) != opposite && p != i && p != j,
                deliv: |p: usize| {
                    if fifo {
                        t(p) == other_same || p == j
                    } else {
                        t(p) != opposite && p != i
                    }
                },
            };
            succ_row(b, inst, RowFamily::Group3, format!("g3a_{i}_{j}"), (i, j), ip, &succ_ip);

            let pred_jp = Members {
                zero: false,
                pick: |p: usize| {
                    if fifo {
                        t(p) == other_same || (t(p) == guest && p != i && p != j)
                    } else {
                        t(p) == other_same || (t(p) == guest && p != j)
                    }
                },
                deliv: |p: usize| {
                    if fifo {
                        t(p) == host || t(p) == other_same || p == i
                    } else {
                        t(p) != opposite && p != j
                    }
                },
            };
            pred_row(b, inst, RowFamily::Group3, format!("g3b_{i}_{j}"), (i, j), jp, &pred_jp);

            let succ_i = Members {
                zero: false,
                // With a same-side host, j may already be aboard when i is loaded,
                // so a further guest-type pickup can follow i as well.
                pick: |p: usize| {
                    if fifo {
                        p == j || t(p) == host || t(p) == other_same
                    } else {
                        t(p) != opposite && p != i
                    }
                },
                deliv: |p: usize| {
                    if fifo {
                        t(p) == host || (t(p) == guest && p != j)
                    } else {
                        t(p) == other_same || t(p) == opposite || p == i
                    }
                },
            };
            succ_row(b, inst, RowFamily::Group3, format!("g3c_{i}_{j}"), (ip, jp), i, &succ_i);

            let pred_j = Members {
                zero: !fifo,
                pick: |p: usize| {
                    if fifo {
                        p == i || t(p) == host
                    } else {
                        t(p) == host || (t(p) == guest && p != j)
                    }
                },
                deliv: |p: usize| {
                    if fifo {
                        t(p) != opposite && p != i && p != j
                    } else {
                        p != i && p != j
                    }
                },
            };
            pred_row(b, inst, RowFamily::Group3, format!("g3d_{i}_{j}"), (ip, jp), j, &pred_j);

            if fifo {
                b.add(
                    RowFamily::Group3,
                    format!("g3e_{i}_{j}"),
                    &[((j, i), 1.0), ((i, ip), 1.0), ((ip, jp), 1.0)],
                    1.0,
                );
            }
            b.add(
                RowFamily::Group3,
                format!("g3f_{i}_{j}"),
                &[((i, j), 1.0), ((jp, ip), 1.0), ((jp, i), 1.0), ((ip, j), 1.0)],
                1.0,
            );
        }
    }
}
