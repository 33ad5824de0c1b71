//! Seeded instance generators and the discrete-event loop that drives a
//! controller over an arrival stream.

use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::deck::{evaluate_route, Objective};
use crate::heuristic::{next_task, DispatchRule, Phase};
use crate::instance::{Endpoint, Instance, Request, Side};
use crate::kinematics::RgvParams;
use crate::rolling::{DecisionOutcome, RollingConfig, RollingController, VehicleState};
use crate::seqsolver::{solve_exact, SeqError};
use crate::tolerances::{HORIZON_MAX, TIME};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TwMode {
    None,
    /// A third of the requests get a tight deadline, the rest a loose one.
    Mixed,
}

/// How the dynamic stream's "mean 0.5" is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArrivalReading {
    /// Exponential gaps with mean `arrival_mean`.
    InterArrivalMean,
    /// `arrival_mean` requests per time unit.
    Rate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub seed: u64,
    /// Station pairs on the track.
    pub m: u32,
    /// Fixed request count; when absent each station side draws its queue length from 0..=a.
    pub n: Option<usize>,
    pub a: u32,
    pub capacity: u32,
    pub arrival_mean: f64,
    pub arrival_reading: ArrivalReading,
    pub tw: TwMode,
    pub tight: (f64, f64),
    pub loose: (f64, f64),
    pub tight_fraction: f64,
    /// Width of the static deadline draw below each request's untimed completion.
    pub static_slack: f64,
    pub rgv: RgvParams,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            m: 20,
            n: None,
            a: 2,
            capacity: 2,
            arrival_mean: 0.5,
            arrival_reading: ArrivalReading::InterArrivalMean,
            tw: TwMode::None,
            tight: (50.0, 80.0),
            loose: (150.0, 200.0),
            tight_fraction: 1.0 / 3.0,
            static_slack: 15.0,
            rgv: RgvParams::default(),
        }
    }
}

impl GenConfig {
    /// The dynamic suite: 50 requests over 20 station pairs.
    pub fn dynamic(seed: u64, capacity: u32, tw: TwMode) -> Self {
        GenConfig {
            seed,
            m: 20,
            n: Some(50),
            capacity,
            tw,
            ..GenConfig::default()
        }
    }
}

fn side(r: &mut ChaCha8Rng) -> Side {
    if r.random_bool(0.5) {
        Side::North
    } else {
        Side::South
    }
}

/// Destination on a different station, uniform over stations and sides.
fn destination(r: &mut ChaCha8Rng, m: u32, origin: u32) -> Endpoint {
    let pos = if m == 1 {
        1
    } else {
        let p = r.random_range(1..m);
        if p >= origin {
            p + 1
        } else {
            p
        }
    };
    Endpoint::new(pos, side(r))
}

fn empty_instance(cfg: &GenConfig, r: &mut ChaCha8Rng) -> Instance {
    let mut inst = Instance::empty(cfg.m, cfg.capacity, r.random_range(1..=cfg.m));
    inst.rgv = cfg.rgv;
    inst
}

/// Reassigns the deadlines of each pickup queue so they increase from head to rear.
fn sort_deadlines_in_queues(inst: &mut Instance) {
    let queues: Vec<Vec<usize>> = inst.queue_relations().queues().to_vec();
    for q in queues {
        let mut ls: Vec<f64> = q.iter().map(|&i| inst.request(i).l).collect();
        ls.sort_by(f64::total_cmp);
        for (&i, l) in q.iter().zip(ls) {
            inst.requests[i - 1].l = l;
        }
    }
}

/// A static instance: every request present at time 0.
pub fn gen_static(cfg: &GenConfig) -> Instance {
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut inst = empty_instance(cfg, &mut r);
    let mut origins = Vec::new();
    match cfg.n {
        Some(n) => {
            for _ in 0..n {
                origins.push(Endpoint::new(r.random_range(1..=cfg.m), side(&mut r)));
            }
        }
        None => {
            for pos in 1..=cfg.m {
                for s in [Side::North, Side::South] {
                    for _ in 0..r.random_range(0..=cfg.a) {
                        origins.push(Endpoint::new(pos, s));
                    }
                }
            }
        }
    }
    for origin in origins {
        let dest = destination(&mut r, cfg.m, origin.pos);
        inst.requests.push(Request {
            id: inst.requests.len() + 1,
            origin,
            dest,
            q: 1,
            arrival: 0.0,
            e: 0.0,
            l: HORIZON_MAX,
        });
    }
    if cfg.tw == TwMode::Mixed && inst.n() > 0 {
        // Deadlines sit just below each request's completion in the untimed optimum.
        if let Ok(sol) = solve_exact(&inst, Objective::Energy) {
            let done: Vec<f64> = (1..=inst.n()).map(|i| sol.eval.request_completion(&inst, i)).collect();
            for (req, t) in inst.requests.iter_mut().zip(done) {
                let lo = (t - cfg.static_slack).max(0.0);
                req.l = if t > lo { r.random_range(lo..=t) } else { t };
            }
            sort_deadlines_in_queues(&mut inst);
        }
    }
    inst
}

/// A dynamic stream: exponential gaps between arrivals, deadlines counted from arrival.
pub fn gen_dynamic(cfg: &GenConfig) -> Instance {
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut inst = empty_instance(cfg, &mut r);
    let mean = match cfg.arrival_reading {
        ArrivalReading::InterArrivalMean => cfg.arrival_mean,
        ArrivalReading::Rate => 1.0 / cfg.arrival_mean,
    };
    let gaps = Exp::new(1.0 / mean).expect("positive arrival mean");
    let n = cfg.n.unwrap_or(50);
    let mut t = 0.0;
    for id in 1..=n {
        t += gaps.sample(&mut r);
        let origin = Endpoint::new(r.random_range(1..=cfg.m), side(&mut r));
        let dest = destination(&mut r, cfg.m, origin.pos);
        let l = match cfg.tw {
            TwMode::None => HORIZON_MAX,
            TwMode::Mixed => {
                let (lo, hi) = if r.random_bool(cfg.tight_fraction) { cfg.tight } else { cfg.loose };
                t + r.random_range(lo..=hi)
            }
        };
        inst.requests.push(Request { id, origin, dest, q: 1, arrival: t, e: 0.0, l });
    }
    if cfg.tw == TwMode::Mixed {
        sort_deadlines_in_queues(&mut inst);
    }
    inst
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ControllerKind {
    Rolling(RollingConfig),
    Rule,
}

impl ControllerKind {
    pub fn label(&self) -> &'static str {
        match self {
            ControllerKind::Rolling(_) => "rolling",
            ControllerKind::Rule => "rule",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceEvent {
    Arrival { time: f64, request: usize },
    Decision { time: f64, hash: String, tasks: Vec<usize>, relaxed: bool, nodes: u64 },
    /// The windowed horizon problem had no solution; the previous plan was kept.
    Infeasible { time: f64 },
    SolverFailure { time: f64, message: String },
    /// Neither a plan nor a relaxed plan was available; the dispatching rule chose the task.
    Fallback { time: f64, vertex: usize },
    Task { time: f64, vertex: usize, start: f64, done: f64, energy: f64 },
}

impl TraceEvent {
    pub fn time(&self) -> f64 {
        match self {
            TraceEvent::Arrival { time, .. }
            | TraceEvent::Decision { time, .. }
            | TraceEvent::Infeasible { time }
            | TraceEvent::SolverFailure { time, .. }
            | TraceEvent::Fallback { time, .. }
            | TraceEvent::Task { time, .. } => *time,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            TraceEvent::Arrival { .. } => "arrival",
            TraceEvent::Decision { .. } => "decision",
            TraceEvent::Infeasible { .. } => "infeasible",
            TraceEvent::SolverFailure { .. } => "solver_failure",
            TraceEvent::Fallback { .. } => "fallback",
            TraceEvent::Task { .. } => "task",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimulationTrace {
    pub events: Vec<TraceEvent>,
    /// Executed visit sequence over the stream's vertices, from 0 to the end vertex.
    pub route: Vec<usize>,
    /// Energy spent up to and including each event.
    pub energy_to_date: Vec<f64>,
}

impl SimulationTrace {
    fn push(&mut self, e: TraceEvent, energy: f64) {
        self.events.push(e);
        self.energy_to_date.push(energy);
    }

    /// One JSON object per line.
    pub fn write_jsonl<W: io::Write>(&self, mut out: W) -> io::Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// `time,kind,decision_hash,energy_to_date`.
    pub fn write_event_log<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "kind", "decision_hash", "energy_to_date"])?;
        for (e, energy) in self.events.iter().zip(&self.energy_to_date) {
            let hash = match e {
                TraceEvent::Decision { hash, .. } => hash.as_str(),
                _ => "",
            };
            w.write_record([format!("{:.6}", e.time()), e.kind().to_string(), hash.to_string(), format!("{energy:.6}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub requests: usize,
    pub energy: f64,
    pub distance: f64,
    pub completion_time: f64,
    pub tw_violations: usize,
    pub decisions: usize,
    pub infeasible_events: usize,
    pub fallback_tasks: usize,
    pub solver_nodes: u64,
}

enum Driver {
    Rolling(RollingController),
    Rule(Phase),
}

struct Sim<'a> {
    world: &'a Instance,
    state: VehicleState,
    trace: SimulationTrace,
    metrics: Metrics,
    arrived: Vec<bool>,
    rule: DispatchRule,
}

impl Sim<'_> {
    fn available(&self) -> Vec<usize> {
        let qr = self.world.queue_relations();
        (1..=self.world.n())
            .filter(|&i| self.arrived[i] && !self.state.picked[i] && qr.pred(i).is_none_or(|p| self.state.picked[p]))
            .collect()
    }

    fn backlog(&self) -> Vec<usize> {
        (1..=self.world.n()).filter(|&i| self.arrived[i] && !self.state.picked[i]).collect()
    }

    fn execute(&mut self, v: usize) {
        let w = self.world;
        let s = &mut self.state;
        let load = s.deck.load() as f64;
        let energy = w.arc_energy(s.last_vertex, v, load);
        let travel = w.travel_time(s.last_vertex, v);
        let mut start = s.time + travel;
        if let Some(i) = v.checked_sub(w.n()).filter(|&i| i >= 1) {
            start = start.max(w.request(i).e - w.service(v));
        }
        let done = start + w.service(v);
        s.deck.apply_in_place(w, v).expect("controller emitted an infeasible task");
        if v <= w.n() {
            s.picked[v] = true;
        } else {
            let i = v - w.n();
            s.delivered[i] = true;
            if done > w.request(i).l + TIME {
                self.metrics.tw_violations += 1;
            }
        }
        self.metrics.energy += energy;
        self.metrics.distance += w.distance(s.last_vertex, v);
        s.time = done;
        s.pos = w.position(v).expect("task vertex");
        s.last_vertex = v;
        self.trace.route.push(v);
        let event = TraceEvent::Task { time: done, vertex: v, start, done, energy };
        self.trace.push(event, self.metrics.energy);
    }
}

/// Runs `controller` over `stream` until every request has been delivered.
pub fn run_experiment(stream: &Instance, controller: ControllerKind) -> (Metrics, SimulationTrace) {
    let n = stream.n();
    let mut sim = Sim {
        world: stream,
        state: VehicleState::new(stream),
        trace: SimulationTrace { route: vec![0], ..Default::default() },
        metrics: Metrics { requests: n, ..Default::default() },
        arrived: vec![false; n + 1],
        rule: DispatchRule::for_instance(stream),
    };
    let mut driver = match controller {
        ControllerKind::Rolling(cfg) => Driver::Rolling(RollingController::new(cfg, stream)),
        ControllerKind::Rule => Driver::Rule(Phase::Loading),
    };
    let mut by_arrival: Vec<usize> = (1..=n).collect();
    by_arrival.sort_by(|&a, &b| stream.request(a).arrival.total_cmp(&stream.request(b).arrival).then(a.cmp(&b)));
    let mut next_arrival = 0;

    loop {
        while next_arrival < n && stream.request(by_arrival[next_arrival]).arrival <= sim.state.time + TIME {
            let id = by_arrival[next_arrival];
            let t = stream.request(id).arrival;
            sim.arrived[id] = true;
            sim.trace.push(TraceEvent::Arrival { time: t, request: id }, sim.metrics.energy);
            if let Driver::Rolling(c) = &mut driver {
                c.on_arrival(t);
            }
            next_arrival += 1;
        }
        if sim.state.delivered[1..].iter().all(|&d| d) {
            break;
        }
        let task = match &mut driver {
            Driver::Rule(phase) => {
                let available = sim.available();
                next_task(stream, sim.rule, phase, &sim.state.deck, sim.state.pos, &available)
            }
            Driver::Rolling(c) => {
                let backlog = sim.backlog();
                for outcome in c.decide(stream, &sim.state, &backlog) {
                    let time = sim.state.time;
                    let event = match outcome {
                        DecisionOutcome::Adopted(plan) => {
                            sim.metrics.decisions += 1;
                            sim.metrics.solver_nodes += plan.nodes;
                            TraceEvent::Decision { time, hash: plan.hash, tasks: plan.tasks, relaxed: plan.relaxed, nodes: plan.nodes }
                        }
                        DecisionOutcome::KeptPrevious => {
                            sim.metrics.infeasible_events += 1;
                            TraceEvent::Infeasible { time }
                        }
                        DecisionOutcome::Failed(e) => {
                            sim.metrics.infeasible_events += 1;
                            TraceEvent::SolverFailure { time, message: e.to_string() }
                        }
                    };
                    sim.trace.push(event, sim.metrics.energy);
                }
                match c.pop() {
                    Some(v) => Some(v),
                    None if c.pending_until(sim.state.time).is_some() => None,
                    None => {
                        // No plan could be made: let the rule keep the vehicle moving.
                        let available = sim.available();
                        let mut phase = if sim.state.deck.is_empty() { Phase::Loading } else { Phase::Delivering };
                        let v = next_task(stream, sim.rule, &mut phase, &sim.state.deck, sim.state.pos, &available);
                        if let Some(v) = v {
                            sim.metrics.fallback_tasks += 1;
                            sim.trace.push(TraceEvent::Fallback { time: sim.state.time, vertex: v }, sim.metrics.energy);
                        }
                        v
                    }
                }
            }
        };
        match task {
            Some(v) => sim.execute(v),
            None => {
                // Idle until something changes.
                let mut wake = f64::INFINITY;
                if next_arrival < n {
                    wake = stream.request(by_arrival[next_arrival]).arrival;
                }
                if let Driver::Rolling(c) = &driver {
                    if let Some(p) = c.pending_until(sim.state.time) {
                        wake = wake.min(p);
                    }
                }
                assert!(wake.is_finite(), "vehicle idle with undelivered requests and nothing pending");
                sim.state.time = sim.state.time.max(wake);
            }
        }
    }
    sim.trace.route.push(stream.end_vertex());
    sim.metrics.completion_time = sim.state.time;
    (sim.metrics, sim.trace)
}

/// Re-evaluates the executed route on the stream as a static instance.
pub fn replay_energy(stream: &Instance, trace: &SimulationTrace) -> Option<f64> {
    evaluate_route(stream, &trace.route).ok().map(|e| e.energy)
}

/// One row of the results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub instance: String,
    pub seed: u64,
    pub controller: String,
    #[serde(rename = "Q")]
    pub capacity: u32,
    pub tw: bool,
    #[serde(flatten)]
    pub metrics: Metrics,
}

pub fn write_results_csv<W: io::Write>(out: W, rows: &[ResultRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    // Flattened structs need explicit headers with the csv crate.
    w.write_record([
        "instance", "seed", "controller", "Q", "tw", "requests", "energy", "distance", "completion_time",
        "tw_violations", "decisions", "infeasible_events", "fallback_tasks", "solver_nodes",
    ])?;
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            r.instance.clone(),
            r.seed.to_string(),
            r.controller.clone(),
            r.capacity.to_string(),
            r.tw.to_string(),
            m.requests.to_string(),
            format!("{:.6}", m.energy),
            format!("{:.6}", m.distance),
            format!("{:.6}", m.completion_time),
            m.tw_violations.to_string(),
            m.decisions.to_string(),
            m.infeasible_events.to_string(),
            m.fallback_tasks.to_string(),
            m.solver_nodes.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean energy of each controller per (Q, windows) group and the saving of
/// rolling over rule, laid out like the comparison table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    #[serde(rename = "Q")]
    pub capacity: u32,
    pub tw: bool,
    pub instances: usize,
    pub rule_energy: f64,
    pub rolling_energy: f64,
    pub saving_pct: f64,
    pub rule_tw_violations: f64,
    pub rolling_tw_violations: f64,
}

pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(u32, bool)> = rows.iter().map(|r| (r.capacity, r.tw)).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.into_iter()
        .map(|(capacity, tw)| {
            let pick = |c: &str| -> Vec<&Metrics> {
                rows.iter()
                    .filter(|r| r.capacity == capacity && r.tw == tw && r.controller == c)
                    .map(|r| &r.metrics)
                    .collect()
            };
            let mean = |ms: &[&Metrics], f: &dyn Fn(&Metrics) -> f64| {
                if ms.is_empty() {
                    f64::NAN
                } else {
                    ms.iter().map(|m| f(m)).sum::<f64>() / ms.len() as f64
                }
            };
            let (rule, rolling) = (pick("rule"), pick("rolling"));
            let rule_energy = mean(&rule, &|m| m.energy);
            let rolling_energy = mean(&rolling, &|m| m.energy);
            SummaryRow {
                capacity,
                tw,
                instances: rule.len().max(rolling.len()),
                rule_energy,
                rolling_energy,
                saving_pct: 100.0 * (rule_energy - rolling_energy) / rule_energy,
                rule_tw_violations: mean(&rule, &|m| m.tw_violations as f64),
                rolling_tw_violations: mean(&rolling, &|m| m.tw_violations as f64),
            }
        })
        .collect()
}

pub fn write_summary_csv<W: io::Write>(out: W, rows: &[SummaryRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Whether the stream, taken as a static instance, admits a route meeting every deadline.
pub fn tw_feasible(stream: &Instance) -> Option<bool> {
    match solve_exact(stream, Objective::Energy) {
        Ok(_) => Some(true),
        Err(SeqError::Infeasible { .. } | SeqError::DeadlineUnreachable(_)) => Some(false),
        Err(_) => None,
    }
}
