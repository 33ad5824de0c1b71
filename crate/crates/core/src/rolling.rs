//! Rolling-horizon dispatching: at each trigger, pick a handful of pending
//! requests, fold the containers already aboard into virtual requests, solve
//! the small static problem exactly and follow its route until the next trigger.

use std::collections::VecDeque;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::deck::{DeckState, Objective};
use crate::heuristic::{rule_route, DispatchRule};
use crate::instance::{Instance, Request, VertexKind};
use crate::milp::{augment_initial_load, build_model, reduce_arcs, Augmented, CutGroups, ModelOptions, Onboard};
use crate::milpsolver::{solve_milp, MilpOptions, MilpStatus};
use crate::seqsolver::{solve_exact_with, SeqError, SeqOptions};
use crate::tolerances::HORIZON_MAX;

pub const DEFAULT_HORIZON: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Backend {
    Seq,
    Milp {
        cuts: CutGroups,
        /// Seconds per decision; `None` runs to optimality.
        time_limit: Option<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RollingConfig {
    pub horizon: usize,
    pub backend: Backend,
    pub objective: Objective,
    /// Simulated seconds between a trigger and the moment its decision may be adopted.
    pub latency: f64,
    pub threads: usize,
}

impl Default for RollingConfig {
    fn default() -> Self {
        RollingConfig {
            horizon: DEFAULT_HORIZON,
            backend: Backend::Seq,
            objective: Objective::Energy,
            latency: 0.0,
            threads: 1,
        }
    }
}

/// Where the vehicle is between two tasks. Ids and vertices refer to the
/// full request stream.
#[derive(Clone, Debug, PartialEq)]
pub struct VehicleState {
    pub time: f64,
    pub pos: u32,
    pub last_vertex: usize,
    pub deck: DeckState,
    /// Indexed by request id; slot 0 unused.
    pub picked: Vec<bool>,
    pub delivered: Vec<bool>,
}

impl VehicleState {
    pub fn new(world: &Instance) -> Self {
        VehicleState {
            time: 0.0,
            pos: world.start_pos,
            last_vertex: 0,
            deck: DeckState::new(),
            picked: vec![false; world.n() + 1],
            delivered: vec![false; world.n() + 1],
        }
    }
}

/// Up to `h` requests from `backlog`, earliest deadline first, never taking a
/// request without the unpicked requests queued ahead of it.
pub fn select_horizon(world: &Instance, backlog: &[usize], h: usize) -> Vec<usize> {
    let qr = world.queue_relations();
    let mut order = backlog.to_vec();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (world.request(a), world.request(b));
        ra.l.total_cmp(&rb.l).then(ra.arrival.total_cmp(&rb.arrival)).then(a.cmp(&b))
    });
    let mut chosen: Vec<usize> = Vec::with_capacity(h);
    for &c in &order {
        if chosen.contains(&c) {
            continue;
        }
        let mut closure = vec![c];
        let mut cur = c;
        while let Some(p) = qr.pred(cur) {
            if backlog.contains(&p) && !chosen.contains(&p) {
                closure.push(p);
            }
            cur = p;
        }
        if chosen.len() + closure.len() <= h {
            chosen.extend(closure);
        }
        if chosen.len() == h {
            break;
        }
    }
    chosen.sort_unstable();
    chosen
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    /// Vertices of the full stream, in execution order.
    pub tasks: Vec<usize>,
    pub hash: String,
    /// Planned with deadlines dropped after the windowed problem proved infeasible.
    pub relaxed: bool,
    pub nodes: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReplanError {
    #[error("no route meets every deadline in the horizon")]
    Infeasible,
    #[error("solver stopped without a route: {0}")]
    Solver(String),
}

pub fn plan_hash(tasks: &[usize]) -> String {
    let mut h = Sha256::new();
    for t in tasks {
        h.update((*t as u64).to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

/// Windows of the sub-problem are measured from the decision time.
fn shifted_window(r: &Request, now: f64, relax: bool) -> Option<(f64, f64)> {
    let e = (r.e - now).max(0.0);
    if relax || !r.has_deadline() {
        return Some((e.min(HORIZON_MAX), HORIZON_MAX));
    }
    let l = r.l - now;
    (l >= e).then_some((e, l))
}

/// The static problem seen from `state`: aboard containers first, then `selected`.
pub fn horizon_instance(
    world: &Instance,
    state: &VehicleState,
    selected: &[usize],
    relax: bool,
) -> Result<Augmented, ReplanError> {
    let mut base = world.clone();
    base.start_pos = state.pos;
    base.virtual_prefix = 0;
    base.requests = Vec::with_capacity(selected.len());
    for (k, &id) in selected.iter().enumerate() {
        let r = world.request(id);
        let (e, l) = shifted_window(r, state.time, relax).ok_or(ReplanError::Infeasible)?;
        base.requests.push(Request { id: k + 1, e, l, ..r.clone() });
    }
    let mut onboard = Vec::with_capacity(state.deck.len());
    for &id in state.deck.containers() {
        let r = world.request(id);
        let (e, l) = shifted_window(r, state.time, relax).ok_or(ReplanError::Infeasible)?;
        onboard.push(Onboard { id, dest: r.dest, q: r.q, e, l });
    }
    let mut aug = augment_initial_load(&base, state.pos, &onboard).map_err(|e| ReplanError::Solver(e.to_string()))?;
    // Base requests come back numbered 1..; point them at stream ids.
    let v = aug.virtual_count();
    for k in v..aug.original_ids.len() {
        aug.original_ids[k] = selected[aug.original_ids[k] - 1];
    }
    Ok(aug)
}

/// Solves the horizon problem and translates its route into stream vertices.
pub fn replan(
    world: &Instance,
    state: &VehicleState,
    backlog: &[usize],
    cfg: &RollingConfig,
    relax: bool,
) -> Result<Plan, ReplanError> {
    let selected = select_horizon(world, backlog, cfg.horizon);
    let aug = horizon_instance(world, state, &selected, relax)?;
    let inst = &aug.instance;
    let (route, nodes) = match cfg.backend {
        Backend::Seq => {
            let opts = SeqOptions {
                objective: cfg.objective,
                threads: cfg.threads.max(1),
                ..SeqOptions::default()
            };
            match solve_exact_with(inst, &opts) {
                Ok(sol) => (sol.eval.route, sol.nodes),
                Err(SeqError::Infeasible { .. } | SeqError::DeadlineUnreachable(_)) => return Err(ReplanError::Infeasible),
                Err(e) => return Err(ReplanError::Solver(e.to_string())),
            }
        }
        Backend::Milp { cuts, time_limit } => {
            let model = build_model(
                inst,
                &reduce_arcs(inst),
                ModelOptions {
                    objective: cfg.objective,
                    ..ModelOptions::with_cuts(cuts)
                },
            )
            .map_err(|e| ReplanError::Solver(e.to_string()))?;
            let warm = rule_route(inst, DispatchRule::for_instance(inst));
            let opts = MilpOptions {
                time_limit: time_limit.map(Duration::from_secs_f64),
                node_limit: None,
                warm_start: warm.feasible.then_some(warm.route),
            };
            let res = solve_milp(&model, inst, &opts).map_err(|e| ReplanError::Solver(e.to_string()))?;
            match (res.status, res.route) {
                (MilpStatus::Infeasible, _) => return Err(ReplanError::Infeasible),
                (_, Some(route)) => (route, res.nodes),
                (_, None) => return Err(ReplanError::Solver("time limit reached before any route".into())),
            }
        }
    };
    let n = inst.n();
    let tasks: Vec<usize> = route
        .iter()
        .filter_map(|&v| match inst.kind(v) {
            VertexKind::Pickup(i) if !inst.is_virtual(i) => Some(aug.original_ids[i - 1]),
            VertexKind::Delivery(i) => Some(aug.original_ids[i - 1] + world.n()),
            _ => None,
        })
        .collect();
    debug_assert_eq!(tasks.len(), 2 * n - aug.virtual_count());
    Ok(Plan {
        hash: plan_hash(&tasks),
        tasks,
        relaxed: relax,
        nodes,
    })
}

/// What happened at a decision point, for the event log.
#[derive(Clone, Debug, PartialEq)]
pub enum DecisionOutcome {
    Adopted(Plan),
    /// The windowed problem was infeasible; the previous plan stays.
    KeptPrevious,
    Failed(ReplanError),
}

/// Controller state between tasks: the adopted plan and pending triggers.
#[derive(Clone, Debug)]
pub struct RollingController {
    pub cfg: RollingConfig,
    plan: VecDeque<usize>,
    in_plan: Vec<bool>,
    /// Earliest time the pending trigger's decision may be adopted.
    pending: Option<f64>,
}

impl RollingController {
    pub fn new(cfg: RollingConfig, world: &Instance) -> Self {
        RollingController {
            cfg,
            plan: VecDeque::new(),
            in_plan: vec![false; world.n() + 1],
            pending: None,
        }
    }

    pub fn plan(&self) -> &VecDeque<usize> {
        &self.plan
    }

    pub fn on_arrival(&mut self, t: f64) {
        let ready = t + self.cfg.latency;
        self.pending = Some(self.pending.map_or(ready, |p| p.min(ready)));
    }

    /// Time at which a not-yet-ready trigger becomes adoptable.
    pub fn pending_until(&self, now: f64) -> Option<f64> {
        self.pending.filter(|&p| p > now)
    }

    /// Replans when a trigger is ready or when arrived requests are missing
    /// from the plan. Returns `None` when no decision was due.
    pub fn decide(&mut self, world: &Instance, state: &VehicleState, backlog: &[usize]) -> Vec<DecisionOutcome> {
        let ready = self.pending.is_some_and(|p| p <= state.time);
        let unsequenced = backlog.iter().any(|&i| !self.in_plan[i]);
        let latency_blocks = self.pending.is_some_and(|p| p > state.time);
        if !(ready || unsequenced && !latency_blocks) {
            return Vec::new();
        }
        self.pending = None;
        let mut out = Vec::new();
        match replan(world, state, backlog, &self.cfg, false) {
            Ok(plan) => {
                self.adopt(world, &plan);
                out.push(DecisionOutcome::Adopted(plan));
            }
            Err(err) => {
                let needs_plan = self.plan.is_empty() && !(backlog.is_empty() && state.deck.is_empty());
                if !needs_plan {
                    out.push(DecisionOutcome::KeptPrevious);
                    if matches!(err, ReplanError::Solver(_)) {
                        out.push(DecisionOutcome::Failed(err));
                    }
                    return out;
                }
                out.push(DecisionOutcome::Failed(err));
                match replan(world, state, backlog, &self.cfg, true) {
                    Ok(plan) => {
                        self.adopt(world, &plan);
                        out.push(DecisionOutcome::Adopted(plan));
                    }
                    Err(e) => out.push(DecisionOutcome::Failed(e)),
                }
            }
        }
        out
    }

    fn adopt(&mut self, world: &Instance, plan: &Plan) {
        self.in_plan.iter_mut().for_each(|b| *b = false);
        for &v in &plan.tasks {
            if v <= world.n() {
                self.in_plan[v] = true;
            }
        }
        self.plan = plan.tasks.iter().copied().collect();
    }

    /// Next task of the adopted plan.
    pub fn pop(&mut self) -> Option<usize> {
        self.plan.pop_front()
    }
}
