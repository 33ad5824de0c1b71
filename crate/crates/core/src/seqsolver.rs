//! Exact depth-first branch and bound over visit sequences.
//!
//! Every node is a deck-feasible prefix. Children are the pickups at queue
//! heads that keep the deck clearable and the deliveries of containers sitting
//! at their exit end, tried nearest first. Among routes of equal cost (within
//! 1e-9) the lexicographically smallest sequence wins, so results do not
//! depend on the number of worker threads.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::deck::{evaluate_route, DeckState, Objective, RouteEvaluation};
use crate::instance::{Instance, QueueRelations, VertexKind};
use crate::tolerances::TIME;

/// Two route costs closer than this count as equal.
pub const COST_TIE: f64 = 1e-9;

/// Largest request count the search supports (visited sets are bit masks).
pub const MAX_REQUESTS: usize = 31;

/// Default size guard for [`enumerate_feasible`].
pub const ENUMERATE_MAX_N: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct SeqOptions {
    pub objective: Objective,
    pub threads: usize,
    /// Stop after this many nodes; the best route so far is returned unproven.
    pub node_limit: Option<u64>,
    /// A known route whose cost seeds the incumbent.
    pub incumbent: Option<Vec<usize>>,
}

impl Default for SeqOptions {
    fn default() -> Self {
        SeqOptions {
            objective: Objective::Energy,
            threads: 1,
            node_limit: None,
            incumbent: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeqSolution {
    pub eval: RouteEvaluation,
    pub cost: f64,
    pub nodes: u64,
    pub proven_optimal: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeqError {
    #[error("request {0} misses its deadline even when served first and alone")]
    DeadlineUnreachable(usize),
    #[error("no feasible route exists ({nodes} search nodes)")]
    Infeasible { nodes: u64 },
    #[error("node limit hit after {nodes} nodes without a feasible route")]
    LimitReached { nodes: u64 },
    #[error("{0} requests exceed the supported maximum of {MAX_REQUESTS}")]
    TooLarge(usize),
}

pub fn solve_exact(inst: &Instance, objective: Objective) -> Result<SeqSolution, SeqError> {
    solve_exact_with(
        inst,
        &SeqOptions {
            objective,
            ..SeqOptions::default()
        },
    )
}

pub fn solve_exact_with(inst: &Instance, opts: &SeqOptions) -> Result<SeqSolution, SeqError> {
    let n = inst.n();
    if n > MAX_REQUESTS {
        return Err(SeqError::TooLarge(n));
    }
    if let Some(i) = unreachable_deadline(inst) {
        return Err(SeqError::DeadlineUnreachable(i));
    }
    let ctx = Context::new(inst, opts.objective);
    let shared = Shared {
        best: AtomicU64::new(f64::INFINITY.to_bits()),
        nodes: AtomicU64::new(0),
        limit: opts.node_limit.unwrap_or(u64::MAX),
        aborted: AtomicBool::new(false),
    };
    let mut seed: Option<(f64, Vec<usize>)> = None;
    if let Some(route) = &opts.incumbent {
        if let Ok(ev) = evaluate_route(inst, route) {
            if ev.feasible {
                let c = ev.cost(opts.objective);
                shared.best.store(c.to_bits(), Ordering::Relaxed);
                seed = Some((c, route.clone()));
            }
        }
    }

    let threads = opts.threads.max(1);
    let mut results: Vec<Option<(f64, Vec<usize>)>> = vec![seed];
    if threads == 1 {
        let mut w = Worker::new(&ctx, &shared);
        let mut st = ctx.root();
        w.dfs(&mut st);
        results.push(w.best);
    } else {
        let frontier = ctx.frontier(threads * 8);
        let next = AtomicUsize::new(0);
        let out = Mutex::new(Vec::new());
        std::thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(|| {
                    let mut w = Worker::new(&ctx, &shared);
                    loop {
                        let k = next.fetch_add(1, Ordering::Relaxed);
                        let Some(node) = frontier.get(k) else { break };
                        let mut st = node.clone();
                        w.dfs(&mut st);
                    }
                    out.lock().unwrap().push(w.best);
                });
            }
        });
        results.extend(out.into_inner().unwrap());
    }

    let nodes = shared.nodes.load(Ordering::Relaxed);
    let aborted = shared.aborted.load(Ordering::Relaxed);
    let best = results.into_iter().flatten().fold(None, |acc: Option<(f64, Vec<usize>)>, cand| match acc {
        None => Some(cand),
        Some(cur) => Some(if better(cand.0, &cand.1, cur.0, &cur.1) { cand } else { cur }),
    });
    match best {
        Some((_, route)) => {
            let eval = evaluate_route(inst, &route).expect("search emits well-formed routes");
            debug_assert!(eval.feasible);
            Ok(SeqSolution {
                cost: eval.cost(opts.objective),
                eval,
                nodes,
                proven_optimal: !aborted,
            })
        }
        None if aborted => Err(SeqError::LimitReached { nodes }),
        None => Err(SeqError::Infeasible { nodes }),
    }
}

fn better(c: f64, r: &[usize], best_c: f64, best_r: &[usize]) -> bool {
    c < best_c - COST_TIE || (c <= best_c + COST_TIE && r < best_r)
}

/// A request whose deadline is missed even when the vehicle serves it first.
fn unreachable_deadline(inst: &Instance) -> Option<usize> {
    let n = inst.n();
    (1..=n).find(|&i| {
        let r = inst.request(i);
        let done = inst.travel_time(0, i) + inst.service(i) + inst.travel_time(i, i + n) + inst.service(i + n);
        done > r.l + TIME
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Enumeration {
    pub routes: Vec<Vec<usize>>,
    /// Set when `limit` routes were collected and the search stopped early.
    pub truncated: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnumerateError {
    #[error("{0} requests exceed the enumeration guard of {1}")]
    TooLarge(usize, usize),
}

/// Every feasible complete route, in lexicographic order, up to `limit`.
pub fn enumerate_feasible(inst: &Instance, limit: usize) -> Result<Enumeration, EnumerateError> {
    enumerate_feasible_guarded(inst, limit, ENUMERATE_MAX_N)
}

pub fn enumerate_feasible_guarded(inst: &Instance, limit: usize, max_n: usize) -> Result<Enumeration, EnumerateError> {
    let n = inst.n();
    if n > max_n || n > MAX_REQUESTS {
        return Err(EnumerateError::TooLarge(n, max_n.min(MAX_REQUESTS)));
    }
    let ctx = Context::new(inst, Objective::Energy);
    let mut out = Enumeration {
        routes: Vec::new(),
        truncated: false,
    };
    fn go(ctx: &Context, st: &mut State, out: &mut Enumeration, limit: usize) {
        if out.truncated {
            return;
        }
        if st.route.len() == 2 * ctx.n + 1 {
            if out.routes.len() >= limit {
                out.truncated = true;
                return;
            }
            let mut r = st.route.clone();
            r.push(ctx.end);
            out.routes.push(r);
            return;
        }
        let mut kids = ctx.children(st);
        kids.sort_unstable();
        for v in kids {
            if let Some(undo) = ctx.step(st, v) {
                go(ctx, st, out, limit);
                ctx.unstep(st, undo);
            }
        }
    }
    let mut st = ctx.root();
    go(&ctx, &mut st, &mut out, limit);
    Ok(out)
}

struct Context<'a> {
    inst: &'a Instance,
    qr: QueueRelations,
    objective: Objective,
    n: usize,
    end: usize,
    pos: Vec<f64>,
}

#[derive(Clone, Debug)]
struct State {
    route: Vec<usize>,
    deck: DeckState,
    /// Completion time of the last task.
    time: f64,
    cost: f64,
    visited: u64,
    next_virtual: usize,
}

struct Undo {
    deck: DeckState,
    time: f64,
    cost: f64,
    visited: u64,
    next_virtual: usize,
}

impl<'a> Context<'a> {
    fn new(inst: &'a Instance, objective: Objective) -> Self {
        let pos = (0..inst.vertex_count())
            .map(|v| inst.position(v).map_or(0.0, |p| p as f64 * inst.unit_length))
            .collect();
        Context {
            inst,
            qr: inst.queue_relations(),
            objective,
            n: inst.n(),
            end: inst.end_vertex(),
            pos,
        }
    }

    fn root(&self) -> State {
        State {
            route: vec![0],
            deck: DeckState::new(),
            time: 0.0,
            cost: 0.0,
            visited: 0,
            next_virtual: 1,
        }
    }

    fn visited(&self, st: &State, v: usize) -> bool {
        st.visited & (1u64 << v) != 0
    }

    /// Candidate next vertices, before the time-window check.
    fn children(&self, st: &State) -> Vec<usize> {
        let inst = self.inst;
        if st.next_virtual <= inst.virtual_prefix {
            return vec![st.next_virtual];
        }
        let mut out = Vec::new();
        for j in inst.virtual_prefix + 1..=self.n {
            if self.visited(st, j) {
                continue;
            }
            if let Some(p) = self.qr.pred(j) {
                if !self.visited(st, p) {
                    continue;
                }
            }
            out.push(j);
        }
        for c in st.deck.deliverable(inst) {
            out.push(c + self.n);
        }
        out
    }

    /// Moves to `v`, or returns `None` when that breaks the deck or a deadline.
    fn step(&self, st: &mut State, v: usize) -> Option<Undo> {
        let inst = self.inst;
        let u = *st.route.last().unwrap();
        let mut deck = st.deck.clone();
        deck.apply_in_place(inst, v).ok()?;
        if !deck.is_clearable(inst) {
            return None;
        }
        let mut b = st.time + inst.travel_time(u, v);
        if let VertexKind::Delivery(i) = inst.kind(v) {
            let r = inst.request(i);
            b = b.max(r.e - inst.service(v));
            if b + inst.service(v) > r.l + TIME {
                return None;
            }
        }
        let arc_cost = match self.objective {
            Objective::Energy => inst.arc_energy(u, v, st.deck.load() as f64),
            Objective::Distance => inst.distance(u, v),
        };
        let undo = Undo {
            deck: std::mem::replace(&mut st.deck, deck),
            time: st.time,
            cost: st.cost,
            visited: st.visited,
            next_virtual: st.next_virtual,
        };
        st.time = b + inst.service(v);
        st.cost += arc_cost;
        st.visited |= 1u64 << v;
        if inst.is_virtual(v) {
            st.next_virtual += 1;
        }
        st.route.push(v);
        Some(undo)
    }

    fn unstep(&self, st: &mut State, undo: Undo) {
        st.route.pop();
        st.deck = undo.deck;
        st.time = undo.time;
        st.cost = undo.cost;
        st.visited = undo.visited;
        st.next_virtual = undo.next_virtual;
    }

    /// Admissible estimate of the remaining cost. The vehicle must still sweep
    /// the span of all unvisited positions, and every container must ride from
    /// where it is to its destination. Per-unit-weight arc energy is concave
    /// with zero intercept, hence subadditive, so charging each of those
    /// distances as one arc never overestimates.
    fn remainder(&self, st: &State) -> f64 {
        let inst = self.inst;
        let u = *st.route.last().unwrap();
        let p = self.pos[u];
        let (mut lo, mut hi) = (p, p);
        for v in 1..=2 * self.n {
            if !self.visited(st, v) {
                lo = lo.min(self.pos[v]);
                hi = hi.max(self.pos[v]);
            }
        }
        let sweep = (hi - lo) + (p - lo).min(hi - p);
        match self.objective {
            Objective::Distance => sweep,
            Objective::Energy => {
                let f = |r: f64| inst.rgv.energy_coefficient_unchecked(r);
                let mut e = inst.rgv.w_rgv * f(sweep);
                for i in 1..=self.n {
                    let q = inst.request(i).q as f64;
                    if !self.visited(st, i) {
                        e += q * f((self.pos[i + self.n] - self.pos[i]).abs());
                    } else if !self.visited(st, i + self.n) {
                        e += q * f((self.pos[i + self.n] - p).abs());
                    }
                }
                e
            }
        }
    }

    /// False when some open deadline cannot be met even by heading straight for it.
    /// Travel time is subadditive as well, so the direct legs are lower bounds.
    fn deadlines_reachable(&self, st: &State) -> bool {
        let inst = self.inst;
        let u = *st.route.last().unwrap();
        for i in 1..=self.n {
            let d = i + self.n;
            if self.visited(st, d) {
                continue;
            }
            let r = inst.request(i);
            if !r.has_deadline() {
                continue;
            }
            let done = if self.visited(st, i) {
                st.time + inst.travel_time(u, d) + inst.service(d)
            } else {
                st.time + inst.travel_time(u, i) + inst.service(i) + inst.travel_time(i, d) + inst.service(d)
            };
            if done > r.l + TIME {
                return false;
            }
        }
        true
    }

    /// Nodes at the shallowest depth with at least `want` open prefixes, for
    /// handing out to worker threads.
    fn frontier(&self, want: usize) -> Vec<State> {
        let full = 2 * self.n + 1;
        let mut level = vec![self.root()];
        loop {
            if level.len() >= want || level.iter().all(|s| s.route.len() == full) {
                return level;
            }
            let mut next = Vec::new();
            for st in level {
                if st.route.len() == full {
                    next.push(st);
                    continue;
                }
                let mut kids = self.children(&st);
                kids.sort_unstable();
                for v in kids {
                    let mut child = st.clone();
                    if self.step(&mut child, v).is_some() {
                        next.push(child);
                    }
                }
            }
            level = next;
        }
    }
}

struct Shared {
    best: AtomicU64,
    nodes: AtomicU64,
    limit: u64,
    aborted: AtomicBool,
}

struct Label {
    cost: f64,
    time: f64,
    prefix: Vec<u16>,
}

type MemoKey = (u64, u16, Vec<u16>);

struct Worker<'c, 'a> {
    ctx: &'c Context<'a>,
    shared: &'c Shared,
    best: Option<(f64, Vec<usize>)>,
    memo: HashMap<MemoKey, Vec<Label>>,
}

impl<'c, 'a> Worker<'c, 'a> {
    fn new(ctx: &'c Context<'a>, shared: &'c Shared) -> Self {
        Worker {
            ctx,
            shared,
            best: None,
            memo: HashMap::new(),
        }
    }

    fn incumbent(&self) -> f64 {
        f64::from_bits(self.shared.best.load(Ordering::Relaxed))
    }

    fn offer(&mut self, cost: f64, route: Vec<usize>) {
        let take = match &self.best {
            None => cost <= self.incumbent() + COST_TIE,
            Some((c, r)) => better(cost, &route, *c, r),
        };
        if take {
            // Costs are nonnegative, so bit order matches numeric order.
            self.shared.best.fetch_min(cost.max(0.0).to_bits(), Ordering::Relaxed);
            self.best = Some((cost, route));
        }
    }

    /// Records the node's label; true when an earlier label dominates it.
    fn dominated(&mut self, st: &State) -> bool {
        let last = *st.route.last().unwrap() as u16;
        let key = (st.visited, last, st.deck.containers().iter().map(|&c| c as u16).collect());
        let prefix: Vec<u16> = st.route.iter().map(|&v| v as u16).collect();
        let labels = self.memo.entry(key).or_default();
        for l in labels.iter() {
            let no_later = l.time <= st.time + TIME * 1e-3;
            let cheaper = l.cost < st.cost - COST_TIE;
            let tied = l.cost <= st.cost + COST_TIE * 1e-3 && l.prefix < prefix;
            if no_later && (cheaper || tied) {
                return true;
            }
        }
        labels.retain(|l| !(st.cost < l.cost - COST_TIE && st.time <= l.time));
        labels.push(Label {
            cost: st.cost,
            time: st.time,
            prefix,
        });
        false
    }

    fn dfs(&mut self, st: &mut State) {
        let ctx = self.ctx;
        let nodes = self.shared.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if nodes > self.shared.limit {
            self.shared.aborted.store(true, Ordering::Relaxed);
        }
        if self.shared.aborted.load(Ordering::Relaxed) {
            return;
        }
        if st.route.len() == 2 * ctx.n + 1 {
            let mut r = st.route.clone();
            r.push(ctx.end);
            self.offer(st.cost, r);
            return;
        }
        if st.cost + ctx.remainder(st) > self.incumbent() + COST_TIE {
            return;
        }
        if !ctx.deadlines_reachable(st) || self.dominated(st) {
            return;
        }
        let u = *st.route.last().unwrap();
        let mut kids = ctx.children(st);
        kids.sort_by(|&a, &b| {
            let da = (ctx.pos[a] - ctx.pos[u]).abs();
            let db = (ctx.pos[b] - ctx.pos[u]).abs();
            da.total_cmp(&db).then(a.cmp(&b))
        });
        for v in kids {
            if let Some(undo) = ctx.step(st, v) {
                self.dfs(st);
                ctx.unstep(st, undo);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Endpoint, Request, Side};
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
    fn single_request_is_forced() {
        let i = inst(vec![req(1, (3, N), (7, N))], 1);
        let s = solve_exact(&i, Objective::Energy).unwrap();
        assert_eq!(s.eval.route, vec![0, 1, 2, 3]);
        let expect = i.arc_energy(0, 1, 0.0) + i.arc_energy(1, 2, 1.0);
        assert!((s.cost - expect).abs() < 1e-12);
        assert!(s.proven_optimal);
    }

    #[test]
    fn free_pair_has_six_interleavings() {
        let i = inst(vec![req(1, (3, N), (7, N)), req(2, (4, S), (6, S))], 2);
        let e = enumerate_feasible(&i, 100).unwrap();
        assert_eq!(e.routes.len(), 6);
        assert!(!e.truncated);
    }

    #[test]
    fn deadlock_pair_is_never_interleaved() {
        let i = inst(vec![req(1, (3, N), (7, S)), req(2, (4, S), (6, N))], 2);
        let e = enumerate_feasible(&i, 100).unwrap();
        assert_eq!(e.routes.len(), 2);
        for r in &e.routes {
            let p = |v: usize| r.iter().position(|&x| x == v).unwrap();
            assert!(p(3) < p(2) || p(4) < p(1));
        }
    }

    #[test]
    fn truncation_is_flagged() {
        let i = inst(vec![req(1, (3, N), (7, N)), req(2, (4, S), (6, S))], 2);
        let e = enumerate_feasible(&i, 4).unwrap();
        assert_eq!(e.routes.len(), 4);
        assert!(e.truncated);
    }

    #[test]
    fn unreachable_deadline_is_certified() {
        let mut r = req(1, (3, N), (9, N));
        r.l = 1.0;
        let i = inst(vec![r], 1);
        assert_eq!(solve_exact(&i, Objective::Energy).unwrap_err(), SeqError::DeadlineUnreachable(1));
    }

    #[test]
    fn threads_agree_with_sequential() {
        let reqs = vec![
            req(1, (3, N), (7, N)),
            req(2, (3, N), (5, S)),
            req(3, (8, S), (2, S)),
            req(4, (6, S), (1, N)),
            req(5, (2, N), (9, N)),
        ];
        let i = inst(reqs, 2);
        let a = solve_exact(&i, Objective::Energy).unwrap();
        let b = solve_exact_with(
            &i,
            &SeqOptions {
                threads: 4,
                ..SeqOptions::default()
            },
        )
        .unwrap();
        assert_eq!(a.eval.route, b.eval.route);
        let all = enumerate_feasible(&i, 1 << 20).unwrap();
        let min = all
            .routes
            .iter()
            .map(|r| evaluate_route(&i, r).unwrap().energy)
            .fold(f64::INFINITY, f64::min);
        assert!((a.cost - min).abs() < 1e-9);
    }
}
