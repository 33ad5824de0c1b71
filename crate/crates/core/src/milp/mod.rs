//! Solver-agnostic mixed-integer model of the routing problem.
//!
//! Variables: arc selectors `x_i_j`, per-request path markers `y_k_i_j`
//! (arc (i,j) lies between pickup k and delivery k+n), start times `b_i`,
//! loads `w_i` and per-vertex energies `z_i`. Rows are stored as
//! `lo <= a.x <= hi`.

mod arcs;
mod augment;
mod check;
mod cuts;
mod eval;
mod lp_format;
mod stats;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deck::Objective;
use crate::instance::{Instance, RequestType, VertexKind};

pub use arcs::{complete_arcs, reduce_arcs, virtual_north_count, ArcMode, ArcSet};
pub use check::{expressible_routes, oracle_report, Mismatch, OracleError, OracleReport};
pub use augment::{augment_initial_load, Augmented, AugmentError, Onboard};
pub use eval::{assignment_from_route, evaluate_assignment, route_from_assignment, AssignmentReport, ModelError};
pub use lp_format::{export_lp, write_lp};
pub use stats::{model_stats, write_stats_csv, ModelStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKind {
    X(usize, usize),
    /// (k, i, j)
    Y(usize, usize, usize),
    B(usize),
    W(usize),
    Z(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub kind: VarKind,
    pub lb: f64,
    pub ub: f64,
    pub binary: bool,
}

impl Variable {
    pub fn name(&self) -> String {
        match self.kind {
            VarKind::X(i, j) => format!("x_{i}_{j}"),
            VarKind::Y(k, i, j) => format!("y_{k}_{i}_{j}"),
            VarKind::B(i) => format!("b_{i}"),
            VarKind::W(i) => format!("w_{i}"),
            VarKind::Z(i) => format!("z_{i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RowFamily {
    OutDegree,
    InDegree,
    Pairing,
    QueueOrder,
    TimeLink,
    LoadLink,
    TimeWindow,
    LoadBound,
    Flow,
    Lifo,
    Fifo,
    Cfi,
    Clo,
    Deadlock,
    Linking,
    Energy,
    EnergyFloor,
    EnergyFlow,
    Subtour,
    LiftedPrecedence,
    LiftedD3,
    Group2,
    Group3,
}

impl RowFamily {
    pub const ALL: [RowFamily; 23] = [
        RowFamily::OutDegree,
        RowFamily::InDegree,
        RowFamily::Pairing,
        RowFamily::QueueOrder,
        RowFamily::TimeLink,
        RowFamily::LoadLink,
        RowFamily::TimeWindow,
        RowFamily::LoadBound,
        RowFamily::Flow,
        RowFamily::Lifo,
        RowFamily::Fifo,
        RowFamily::Cfi,
        RowFamily::Clo,
        RowFamily::Deadlock,
        RowFamily::Linking,
        RowFamily::Energy,
        RowFamily::EnergyFloor,
        RowFamily::EnergyFlow,
        RowFamily::Subtour,
        RowFamily::LiftedPrecedence,
        RowFamily::LiftedD3,
        RowFamily::Group2,
        RowFamily::Group3,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            RowFamily::OutDegree => "out",
            RowFamily::InDegree => "in",
            RowFamily::Pairing => "pair",
            RowFamily::QueueOrder => "queue",
            RowFamily::TimeLink => "tlink",
            RowFamily::LoadLink => "wlink",
            RowFamily::TimeWindow => "tw",
            RowFamily::LoadBound => "wbound",
            RowFamily::Flow => "flow",
            RowFamily::Lifo => "lifo",
            RowFamily::Fifo => "fifo",
            RowFamily::Cfi => "cfi",
            RowFamily::Clo => "clo",
            RowFamily::Deadlock => "deadlock",
            RowFamily::Linking => "link",
            RowFamily::Energy => "energy",
            RowFamily::EnergyFloor => "efloor",
            RowFamily::EnergyFlow => "eflow",
            RowFamily::Subtour => "sec",
            RowFamily::LiftedPrecedence => "lprec",
            RowFamily::LiftedD3 => "d3",
            RowFamily::Group2 => "g2",
            RowFamily::Group3 => "g3",
        }
    }

    pub fn is_cut(self) -> bool {
        matches!(
            self,
            RowFamily::Subtour | RowFamily::LiftedPrecedence | RowFamily::LiftedD3 | RowFamily::Group2 | RowFamily::Group3
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub family: RowFamily,
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub lo: f64,
    pub hi: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, a)| a * values[v]).sum()
    }

    pub fn is_equality(&self) -> bool {
        self.lo == self.hi
    }
}

/// Which valid-inequality groups to add.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CutGroups {
    pub g1: bool,
    pub g2: bool,
    pub g3: bool,
}

impl CutGroups {
    pub const NONE: CutGroups = CutGroups {
        g1: false,
        g2: false,
        g3: false,
    };

    /// The six configurations used by the cut benchmark.
    pub fn configurations() -> [CutGroups; 6] {
        ["none", "g1", "g2", "g3", "g23", "g123"].map(|s| s.parse().unwrap())
    }

    pub fn is_empty(&self) -> bool {
        !(self.g1 || self.g2 || self.g3)
    }
}

impl FromStr for CutGroups {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "none" {
            return Ok(CutGroups::NONE);
        }
        let digits = s
            .strip_prefix('g')
            .ok_or_else(|| format!("cut set `{s}`: expected none or g followed by group digits"))?;
        let mut c = CutGroups::NONE;
        if digits.is_empty() {
            return Err(format!("cut set `{s}` names no group"));
        }
        for ch in digits.chars() {
            match ch {
                '1' => c.g1 = true,
                '2' => c.g2 = true,
                '3' => c.g3 = true,
                _ => return Err(format!("cut set `{s}`: unknown group {ch}")),
            }
        }
        Ok(c)
    }
}

impl fmt::Display for CutGroups {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("none");
        }
        f.write_str("g")?;
        for (on, d) in [(self.g1, '1'), (self.g2, '2'), (self.g3, '3')] {
            if on {
                write!(f, "{d}")?;
            }
        }
        Ok(())
    }
}

/// How the crossing-first-in and crossing-last-out rules are written.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConflictForm {
    /// Forbid the crossing event outright: `sum y = 0`.
    #[default]
    Zero,
    /// The alternative inequality pairing of the same rules.
    Inequality,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelOptions {
    pub cuts: CutGroups,
    pub conflict_form: ConflictForm,
    /// Adds `z_i >= sum_j c_ij (w_rgv + w_i_min) x_ij + c_i_min (w_i - w_i_min)`,
    /// which keeps the relaxation from collapsing the objective to zero.
    pub energy_floor: bool,
    /// Adds `z_i >= sum_j c_ij (w_rgv x_ij + sum_k q_k y_kij)`: the load carried
    /// over a task arc is exactly the weight of the containers whose path
    /// markers use it, which prices cargo through the flow instead of big-M rows.
    pub flow_energy: bool,
    pub objective: Objective,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            cuts: CutGroups::NONE,
            conflict_form: ConflictForm::Zero,
            energy_floor: true,
            flow_energy: true,
            objective: Objective::Energy,
        }
    }
}

impl ModelOptions {
    pub fn with_cuts(cuts: CutGroups) -> Self {
        ModelOptions {
            cuts,
            ..Self::default()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BuildError {
    #[error("arc set was built for {0} vertices, instance has {1}")]
    ArcSetMismatch(usize, usize),
}

/// Constants attached to an arc: the energy coefficient c_ij per unit weight
/// (the short-arc or long-arc form as appropriate), the objective big-M γ, and
/// the time and load big-Ms η, ρ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcConstants {
    pub energy_coeff: f64,
    pub gamma: f64,
    pub eta: f64,
    pub rho: f64,
}

#[derive(Clone, Debug)]
pub struct MilpModel {
    pub n: usize,
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
    /// Minimization objective.
    pub objective: Vec<(usize, f64)>,
    pub arcs: ArcSet,
    pub options: ModelOptions,
    pub constants: HashMap<(usize, usize), ArcConstants>,
    /// Latest completion time used to bound schedules when windows are absent.
    pub horizon: f64,
    x: HashMap<(usize, usize), usize>,
    y: HashMap<(usize, usize, usize), usize>,
    b: Vec<usize>,
    w: Vec<Option<usize>>,
    z: Vec<Option<usize>>,
}

impl MilpModel {
    pub fn x(&self, i: usize, j: usize) -> Option<usize> {
        self.x.get(&(i, j)).copied()
    }

    pub fn y(&self, k: usize, i: usize, j: usize) -> Option<usize> {
        self.y.get(&(k, i, j)).copied()
    }

    pub fn b(&self, i: usize) -> usize {
        self.b[i]
    }

    pub fn w(&self, i: usize) -> Option<usize> {
        self.w[i]
    }

    pub fn z(&self, i: usize) -> Option<usize> {
        self.z[i]
    }

    pub fn x_vars(&self) -> impl Iterator<Item = ((usize, usize), usize)> + '_ {
        self.arcs.arcs().iter().map(|&a| (a, self.x[&a]))
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.coeffs.len()).sum()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v]).sum()
    }

    pub fn rows_in(&self, family: RowFamily) -> usize {
        self.rows.iter().filter(|r| r.family == family).count()
    }

    fn push_var(&mut self, kind: VarKind, lb: f64, ub: f64, binary: bool) -> usize {
        self.vars.push(Variable { kind, lb, ub, binary });
        self.vars.len() - 1
    }

    fn push_row(&mut self, family: RowFamily, name: String, coeffs: Vec<(usize, f64)>, lo: f64, hi: f64) {
        self.rows.push(Row {
            family,
            name,
            coeffs,
            lo,
            hi,
        });
    }
}

/// Upper bound on any request completion time in an earliest-start schedule:
/// the latest early window plus every service plus every arc at maximal span.
pub fn schedule_horizon(inst: &Instance) -> f64 {
    let n = inst.n();
    let mut lo = inst.start_pos;
    let mut hi = inst.start_pos;
    for r in &inst.requests {
        for p in [r.origin.pos, r.dest.pos] {
            lo = lo.min(p);
            hi = hi.max(p);
        }
    }
    let span = (hi - lo) as f64 * inst.unit_length;
    let services: f64 = (1..=2 * n).map(|v| inst.service(v)).sum();
    let max_e = inst.requests.iter().map(|r| r.e).fold(0.0, f64::max);
    max_e + services + (2 * n) as f64 * inst.rgv.travel_time_unchecked(span) + 1.0
}

/// Deadline actually used by the model: the request's own, capped by the schedule horizon.
fn effective_late(inst: &Instance, horizon: f64, i: usize) -> f64 {
    inst.request(i).l.min(horizon)
}

fn load_bounds(inst: &Instance, v: usize) -> (f64, f64) {
    let q = inst.load_delta(v) as f64;
    let cap = inst.capacity as f64;
    (q.max(0.0), cap.min(cap + q))
}

/// Builds the full model for `inst` over `arcs`.
pub fn build_model(inst: &Instance, arcs: &ArcSet, options: ModelOptions) -> Result<MilpModel, BuildError> {
    if arcs.vertex_count() != inst.vertex_count() {
        return Err(BuildError::ArcSetMismatch(arcs.vertex_count(), inst.vertex_count()));
    }
    let n = inst.n();
    let end = inst.end_vertex();
    let nv = inst.vertex_count();
    let qr = inst.queue_relations();
    let horizon = schedule_horizon(inst);
    let mut m = MilpModel {
        n,
        vars: Vec::new(),
        rows: Vec::new(),
        objective: Vec::new(),
        arcs: arcs.clone(),
        options,
        constants: HashMap::new(),
        horizon,
        x: HashMap::new(),
        y: HashMap::new(),
        b: Vec::new(),
        w: vec![None; nv],
        z: vec![None; nv],
    };

    for &(i, j) in arcs.arcs() {
        let v = m.push_var(VarKind::X(i, j), 0.0, 1.0, true);
        m.x.insert((i, j), v);
    }
    let inner: Vec<(usize, usize)> = arcs.inner_arcs().collect();
    for k in 1..=n {
        for &(i, j) in &inner {
            let v = m.push_var(VarKind::Y(k, i, j), 0.0, 1.0, true);
            m.y.insert((k, i, j), v);
        }
    }
    for i in 0..nv {
        let ub = if i == 0 { 0.0 } else { horizon };
        let v = m.push_var(VarKind::B(i), 0.0, ub, false);
        m.b.push(v);
    }
    for i in 0..end {
        let (lo, hi) = if i == 0 { (0.0, 0.0) } else { load_bounds(inst, i) };
        let v = m.push_var(VarKind::W(i), lo, hi, false);
        m.w[i] = Some(v);
    }

    // Arc constants.
    let w_rgv = inst.rgv.w_rgv;
    let cap = inst.capacity as f64;
    for &(i, j) in arcs.arcs() {
        let coeff = if j == end {
            0.0
        } else {
            inst.rgv.energy_coefficient_unchecked(inst.distance(i, j))
        };
        let w_max = if i == 0 { 0.0 } else { cap.min(cap + inst.load_delta(i) as f64) };
        let gamma = coeff * (w_rgv + w_max);
        let (eta, rho) = big_m(inst, horizon, i, j);
        m.constants.insert(
            (i, j),
            ArcConstants {
                energy_coeff: coeff,
                gamma,
                eta,
                rho,
            },
        );
    }
    for i in 0..end {
        let max_gamma = arcs
            .successors(i)
            .iter()
            .map(|&j| m.constants[&(i, j)].gamma)
            .fold(0.0, f64::max);
        let v = m.push_var(VarKind::Z(i), 0.0, max_gamma, false);
        m.z[i] = Some(v);
        if options.objective == Objective::Energy {
            m.objective.push((v, 1.0));
        }
    }
    if options.objective == Objective::Distance {
        for &(i, j) in arcs.arcs() {
            let r = inst.distance(i, j);
            if r > 0.0 {
                m.objective.push((m.x[&(i, j)], r));
            }
        }
    }

    // Degree rows.
    for i in 0..end {
        let coeffs = arcs.successors(i).iter().map(|&j| (m.x[&(i, j)], 1.0)).collect();
        m.push_row(RowFamily::OutDegree, format!("out_{i}"), coeffs, 1.0, 1.0);
    }
    for j in 1..nv {
        let coeffs = arcs.predecessors(j).iter().map(|&i| (m.x[&(i, j)], 1.0)).collect();
        m.push_row(RowFamily::InDegree, format!("in_{j}"), coeffs, 1.0, 1.0);
    }

    // Pairing: b_{i+n} - b_i >= s_i + t_{i,i+n}.
    for i in 1..=n {
        let rhs = inst.service(i) + inst.travel_time(i, i + n);
        let coeffs = vec![(m.b[i + n], 1.0), (m.b[i], -1.0)];
        m.push_row(RowFamily::Pairing, format!("pair_{i}"), coeffs, rhs, f64::INFINITY);
    }
    // FIFO queues: b_{i+1} - b_i >= s_i.
    for i in 1..=n {
        if let Some(next) = qr.succ(i) {
            let coeffs = vec![(m.b[next], 1.0), (m.b[i], -1.0)];
            m.push_row(
                RowFamily::QueueOrder,
                format!("queue_{i}_{next}"),
                coeffs,
                inst.service(i),
                f64::INFINITY,
            );
        }
    }

    // Big-M time and load propagation.
    for &(i, j) in arcs.arcs() {
        let c = m.constants[&(i, j)];
        let x = m.x[&(i, j)];
        // b_j - b_i - eta x_ij >= s_i + t_ij - eta
        let rhs = inst.service(i) + inst.travel_time(i, j) - c.eta;
        let coeffs = vec![(m.b[j], 1.0), (m.b[i], -1.0), (x, -c.eta)];
        m.push_row(RowFamily::TimeLink, format!("tlink_{i}_{j}"), coeffs, rhs, f64::INFINITY);
        if j != end {
            // w_j - w_i - rho x_ij >= q_j - rho
            let rhs = inst.load_delta(j) as f64 - c.rho;
            let coeffs = vec![(m.w[j].unwrap(), 1.0), (m.w[i].unwrap(), -1.0), (x, -c.rho)];
            m.push_row(RowFamily::LoadLink, format!("wlink_{i}_{j}"), coeffs, rhs, f64::INFINITY);
        }
    }

    // Time windows on completion, and load bounds.
    for i in 1..=n {
        let d = i + n;
        let r = inst.request(i);
        let s = inst.service(d);
        let late = effective_late(inst, horizon, i);
        m.push_row(RowFamily::TimeWindow, format!("tw_{i}"), vec![(m.b[d], 1.0)], r.e - s, late - s);
    }
    for v in 1..=2 * n {
        let (lo, hi) = load_bounds(inst, v);
        m.push_row(RowFamily::LoadBound, format!("wbound_{v}"), vec![(m.w[v].unwrap(), 1.0)], lo, hi);
    }

    // Path markers: unit flow from k to k+n over task arcs, never off the route.
    for k in 1..=n {
        for i in 1..=2 * n {
            let mut coeffs = Vec::new();
            for &j in arcs.successors(i) {
                if let Some(&v) = m.y.get(&(k, i, j)) {
                    coeffs.push((v, 1.0));
                }
            }
            for &h in arcs.predecessors(i) {
                if let Some(&v) = m.y.get(&(k, h, i)) {
                    coeffs.push((v, -1.0));
                }
            }
            let rhs = if i == k {
                1.0
            } else if i == k + n {
                -1.0
            } else {
                0.0
            };
            m.push_row(RowFamily::Flow, format!("flow_{k}_{i}"), coeffs, rhs, rhs);
        }
    }
    for k in 1..=n {
        for &(i, j) in &inner {
            let coeffs = vec![(m.y[&(k, i, j)], 1.0), (m.x[&(i, j)], -1.0)];
            m.push_row(RowFamily::Linking, format!("link_{k}_{i}_{j}"), coeffs, f64::NEG_INFINITY, 0.0);
        }
    }

    add_conflict_rows(&mut m, inst);

    // Linearized objective.
    for &(i, j) in arcs.arcs() {
        if j == end {
            continue;
        }
        let c = m.constants[&(i, j)];
        // z_i - c (w_rgv + w_i) - gamma x_ij >= -gamma, i.e. z_i >= c(w_rgv + w_i) - gamma(1 - x_ij)
        let coeffs = vec![(m.z[i].unwrap(), 1.0), (m.w[i].unwrap(), -c.energy_coeff), (m.x[&(i, j)], -c.gamma)];
        let rhs = c.energy_coeff * w_rgv - c.gamma;
        m.push_row(RowFamily::Energy, format!("energy_{i}_{j}"), coeffs, rhs, f64::INFINITY);
    }
    if options.energy_floor {
        for i in 0..end {
            let succ: Vec<usize> = arcs.successors(i).iter().copied().filter(|&j| j != end).collect();
            if succ.is_empty() {
                continue;
            }
            let w_min = if i == 0 { 0.0 } else { load_bounds(inst, i).0 };
            let c_min = arcs
                .successors(i)
                .iter()
                .map(|&j| m.constants[&(i, j)].energy_coeff)
                .fold(f64::INFINITY, f64::min);
            let mut coeffs = vec![(m.z[i].unwrap(), 1.0)];
            for &j in &succ {
                let c = m.constants[&(i, j)].energy_coeff;
                if c > 0.0 {
                    coeffs.push((m.x[&(i, j)], -c * (w_rgv + w_min)));
                }
            }
            let mut rhs = 0.0;
            if c_min > 0.0 && i != 0 {
                coeffs.push((m.w[i].unwrap(), -c_min));
                rhs = -c_min * w_min;
            }
            m.push_row(RowFamily::EnergyFloor, format!("efloor_{i}"), coeffs, rhs, f64::INFINITY);
        }
    }

    if options.flow_energy {
        for i in 0..end {
            let mut coeffs = vec![(m.z[i].unwrap(), 1.0)];
            for &j in arcs.successors(i) {
                let c = m.constants[&(i, j)].energy_coeff;
                if j == end || c == 0.0 {
                    continue;
                }
                coeffs.push((m.x[&(i, j)], -c * w_rgv));
                for k in 1..=n {
                    if let Some(&y) = m.y.get(&(k, i, j)) {
                        coeffs.push((y, -c * inst.request(k).q as f64));
                    }
                }
            }
            if coeffs.len() > 1 {
                m.push_row(RowFamily::EnergyFlow, format!("eflow_{i}"), coeffs, 0.0, f64::INFINITY);
            }
        }
    }

    if !options.cuts.is_empty() {
        cuts::add_valid_inequalities(&mut m, inst, options.cuts);
    }
    Ok(m)
}

/// Big-M constants (η, ρ) for the time and load propagation rows of arc (i, j).
fn big_m(inst: &Instance, horizon: f64, i: usize, j: usize) -> (f64, f64) {
    let n = inst.n();
    let cap = inst.capacity as f64;
    let t_ij = inst.travel_time(i, j);
    let q = |v: usize| inst.load_delta(v) as f64;
    // Lower bound on b_j implied by the window on j.
    let b_j_min = match inst.kind(j) {
        VertexKind::Delivery(r) => (inst.request(r).e - inst.service(j)).max(0.0),
        _ => 0.0,
    };
    let eta = match inst.kind(i) {
        VertexKind::Start => t_ij,
        VertexKind::Pickup(r) => {
            effective_late(inst, horizon, r) - inst.service(r + n) - inst.travel_time(r, r + n) + t_ij - b_j_min
        }
        VertexKind::Delivery(r) => effective_late(inst, horizon, r) + t_ij - b_j_min,
        VertexKind::End => 0.0,
    };
    let from_pickup_side = matches!(inst.kind(i), VertexKind::Start | VertexKind::Pickup(_));
    let rho = match (from_pickup_side, inst.kind(j)) {
        (true, VertexKind::Pickup(_)) => cap,
        (true, _) => cap + q(j),
        (false, VertexKind::Pickup(_)) => cap + q(i),
        (false, _) => cap + q(i) + q(j),
    };
    (eta.max(0.0), rho.max(0.0))
}

/// Public access to the big-M pair for tests and reports.
pub fn big_m_constants(inst: &Instance, i: usize, j: usize) -> (f64, f64) {
    big_m(inst, schedule_horizon(inst), i, j)
}

fn add_conflict_rows(m: &mut MilpModel, inst: &Instance) {
    use RequestType::*;
    let n = inst.n();
    let types: Vec<RequestType> = (0..=n).map(|i| if i == 0 { T1 } else { inst.request_type(i) }).collect();
    let into = |m: &MilpModel, k: usize, v: usize| -> Vec<usize> {
        m.arcs
            .predecessors(v)
            .iter()
            .filter_map(|&i| m.y.get(&(k, i, v)).copied())
            .collect()
    };
    let sum_row = |into_a: Vec<usize>, sign_a: f64, into_b: Vec<usize>, sign_b: f64| -> Vec<(usize, f64)> {
        into_a
            .into_iter()
            .map(|v| (v, sign_a))
            .chain(into_b.into_iter().map(|v| (v, sign_b)))
            .collect()
    };
    let form = m.options.conflict_form;
    for k in 1..=n {
        for j in 1..=n {
            if j == k {
                continue;
            }
            let (tk, tj) = (types[k], types[j]);
            // LIFO: j picked inside k's trip iff j delivered inside it.
            if (tk == T1 && tj == T1) || (tk == T2 && tj == T2) {
                let c = sum_row(into(m, k, j), 1.0, into(m, k, j + n), -1.0);
                m.push_row(RowFamily::Lifo, format!("lifo_{k}_{j}"), c, 0.0, 0.0);
            }
            // FIFO: never both endpoints of j inside k's trip.
            if (tk == T3 && tj == T3) || (tk == T4 && tj == T4) {
                let c = sum_row(into(m, k, j), 1.0, into(m, k, j + n), 1.0);
                m.push_row(RowFamily::Fifo, format!("fifo_{k}_{j}"), c, f64::NEG_INFINITY, 1.0);
            }
            match form {
                ConflictForm::Zero => {
                    if (tk == T1 && tj == T3) || (tk == T2 && tj == T4) {
                        let c = sum_row(into(m, k, j), 1.0, vec![], 0.0);
                        m.push_row(RowFamily::Cfi, format!("cfi_{k}_{j}"), c, 0.0, 0.0);
                    }
                    if (tk == T1 && tj == T4) || (tk == T2 && tj == T3) {
                        let c = sum_row(into(m, k, j + n), 1.0, vec![], 0.0);
                        m.push_row(RowFamily::Clo, format!("clo_{k}_{j}"), c, 0.0, 0.0);
                    }
                }
                ConflictForm::Inequality => {
                    if (tj == T1 && tk == T3) || (tj == T2 && tk == T4) {
                        let c = sum_row(into(m, k, j + n), 1.0, into(m, k, j), -1.0);
                        m.push_row(RowFamily::Cfi, format!("cfi_{k}_{j}"), c, f64::NEG_INFINITY, 0.0);
                    }
                    if (tj == T1 && tk == T4) || (tj == T2 && tk == T3) {
                        let c = sum_row(into(m, k, j), 1.0, into(m, k, j + n), -1.0);
                        m.push_row(RowFamily::Clo, format!("clo_{k}_{j}"), c, f64::NEG_INFINITY, 0.0);
                    }
                }
            }
            if (tk == T3 && tj == T4) || (tk == T4 && tj == T3) {
                let c = sum_row(into(m, k, j), 1.0, vec![], 0.0);
                m.push_row(RowFamily::Deadlock, format!("deadlock_{k}_{j}"), c, 0.0, 0.0);
            }
        }
    }
}
