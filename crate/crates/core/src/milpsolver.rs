//! LP relaxations and a best-bound branch and bound over the routing model.
//!
//! The simplex itself comes from `microlp`; every binary is handed to it as a
//! continuous variable in [0, 1] and the search below does the branching by
//! fixing variables on cloned parent solutions, so each child starts from its
//! parent's basis.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, SolveOutcome};
use serde::Serialize;
use thiserror::Error;

use crate::instance::Instance;
use crate::milp::{assignment_from_route, evaluate_assignment, route_from_assignment, MilpModel, RowFamily, VarKind};
use crate::tolerances::{INTEGRALITY, OBJECTIVE};

/// Every this many processed nodes the search dives depth-first from the node it just popped.
pub const PLUNGE_EVERY: u64 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
    Failed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Empty unless the status is optimal.
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    /// Stopped by the time or node limit; `gap` says how far from proven the incumbent is.
    Limit,
}

#[derive(Clone, Debug, Default)]
pub struct MilpOptions {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    /// Route used as the starting incumbent, typically from the dispatching rule.
    pub warm_start: Option<Vec<usize>>,
}

/// Why a model has no integer solution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    /// Row families that are jointly LP-infeasible, minimal under family deletion.
    /// Empty when the relaxation is feasible and the proof is the exhausted tree.
    pub families: Vec<String>,
    pub rows: Vec<String>,
    pub nodes: u64,
}

#[derive(Clone, Debug)]
pub struct MilpResult {
    pub status: MilpStatus,
    pub objective: Option<f64>,
    pub values: Option<Vec<f64>>,
    pub route: Option<Vec<usize>>,
    pub best_bound: f64,
    pub root_bound: Option<f64>,
    pub nodes: u64,
    pub lp_iterations: u64,
    pub elapsed: Duration,
    pub certificate: Option<Certificate>,
}

impl MilpResult {
    /// Relative gap between incumbent and bound; `None` without an incumbent.
    pub fn gap(&self) -> Option<f64> {
        let inc = self.objective?;
        Some(relative_gap(inc, self.best_bound))
    }

    /// Gap of the root relaxation against the final incumbent.
    pub fn root_gap(&self) -> Option<f64> {
        Some(relative_gap(self.objective?, self.root_bound?))
    }
}

fn relative_gap(inc: f64, bound: f64) -> f64 {
    ((inc - bound) / inc.abs().max(1e-9)).max(0.0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MilpError {
    #[error("LP engine failed: {0}")]
    Engine(String),
    #[error("relaxation is unbounded")]
    Unbounded,
}

struct Relaxation {
    problem: Problem,
    cols: Vec<microlp::Variable>,
}

/// Rows trivially violated by an empty left-hand side make the LP infeasible on their own.
fn build_relaxation(m: &MilpModel, skip: &dyn Fn(RowFamily) -> bool) -> Result<Relaxation, ()> {
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let mut obj = vec![0.0; m.vars.len()];
    for &(v, c) in &m.objective {
        obj[v] += c;
    }
    let cols: Vec<_> = m.vars.iter().zip(&obj).map(|(v, &c)| problem.add_var(c, (v.lb, v.ub))).collect();
    for row in m.rows.iter().filter(|r| !skip(r.family)) {
        if row.coeffs.is_empty() {
            if row.lo > INTEGRALITY || row.hi < -INTEGRALITY {
                return Err(());
            }
            continue;
        }
        let mut expr = LinearExpr::empty();
        for &(v, c) in &row.coeffs {
            expr.add(cols[v], c);
        }
        if row.is_equality() {
            problem.add_constraint(expr, ComparisonOp::Eq, row.lo);
            continue;
        }
        if row.lo.is_finite() && row.hi.is_finite() {
            problem.add_constraint(expr.clone(), ComparisonOp::Ge, row.lo);
            problem.add_constraint(expr, ComparisonOp::Le, row.hi);
        } else if row.lo.is_finite() {
            problem.add_constraint(expr, ComparisonOp::Ge, row.lo);
        } else if row.hi.is_finite() {
            problem.add_constraint(expr, ComparisonOp::Le, row.hi);
        }
    }
    Ok(Relaxation { problem, cols })
}

fn lp_failure(status: LpStatus) -> LpSolution {
    LpSolution { status, values: Vec::new(), objective: f64::NAN, iterations: 0 }
}

fn solve_filtered(m: &MilpModel, skip: &dyn Fn(RowFamily) -> bool, limit: Option<Duration>) -> LpSolution {
    let Ok(mut relax) = build_relaxation(m, skip) else {
        return lp_failure(LpStatus::Infeasible);
    };
    if let Some(t) = limit {
        relax.problem.set_time_limit(t);
    }
    match relax.problem.solve() {
        Ok(SolveOutcome::Solution(sol)) => LpSolution {
            status: LpStatus::Optimal,
            values: relax.cols.iter().map(|&c| sol.var_value_raw(c)).collect(),
            objective: sol.objective(),
            iterations: sol.stats().lp_iterations,
        },
        Ok(SolveOutcome::Interrupted(_)) => lp_failure(LpStatus::TimeLimit),
        Err(microlp::Error::Infeasible) => lp_failure(LpStatus::Infeasible),
        Err(microlp::Error::Unbounded) => lp_failure(LpStatus::Unbounded),
        Err(_) => lp_failure(LpStatus::Failed),
    }
}

/// Solves the linear relaxation of `m`.
pub fn solve_lp(m: &MilpModel) -> LpSolution {
    solve_filtered(m, &|_| false, None)
}

/// Deletion filter over row families: drops each family in turn and keeps it
/// out whenever the relaxation stays infeasible without it.
pub fn infeasible_families(m: &MilpModel) -> Vec<RowFamily> {
    let mut present: Vec<RowFamily> = RowFamily::ALL.iter().copied().filter(|&f| m.rows_in(f) > 0).collect();
    let mut i = 0;
    while i < present.len() {
        let trial: Vec<RowFamily> = present.iter().copied().enumerate().filter(|&(k, _)| k != i).map(|(_, f)| f).collect();
        let lp = solve_filtered(m, &|f| !trial.contains(&f), None);
        if lp.status == LpStatus::Infeasible {
            present = trial;
        } else {
            i += 1;
        }
    }
    present
}

struct Node {
    sol: microlp::Solution,
    bound: f64,
    depth: u32,
    seq: u64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: the smallest bound must compare greatest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    m: &'a MilpModel,
    cols: Vec<microlp::Variable>,
    /// Binary columns in branching priority order: arc variables, then flow variables.
    x_cols: Vec<usize>,
    y_cols: Vec<usize>,
    incumbent: Option<(f64, Vec<f64>)>,
    nodes: u64,
    iterations: u64,
    seq: u64,
    start: Instant,
    deadline: Option<Instant>,
    node_limit: Option<u64>,
    stopped: bool,
}

enum Child {
    Open(Node),
    Closed,
}

impl Search<'_> {
    fn out_of_budget(&mut self) -> bool {
        if self.deadline.is_some_and(|d| Instant::now() >= d) || self.node_limit.is_some_and(|l| self.nodes >= l) {
            self.stopped = true;
        }
        self.stopped
    }

    fn cutoff(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |(v, _)| *v - OBJECTIVE * 0.1)
    }

    fn values(&self, sol: &microlp::Solution) -> Vec<f64> {
        self.cols.iter().map(|&c| sol.var_value_raw(c)).collect()
    }

    /// Most fractional arc variable, else most fractional flow variable.
    fn branching_column(&self, values: &[f64]) -> Option<usize> {
        for set in [&self.x_cols, &self.y_cols] {
            let mut best: Option<(f64, usize)> = None;
            for &c in set.iter() {
                let v = values[c];
                let frac = (v - v.floor()).min(v.ceil() - v);
                if frac > INTEGRALITY && best.is_none_or(|(f, _)| frac > f + 1e-12) {
                    best = Some((frac, c));
                }
            }
            if let Some((_, c)) = best {
                return Some(c);
            }
        }
        None
    }

    fn offer(&mut self, objective: f64, values: Vec<f64>) {
        if self.incumbent.as_ref().is_none_or(|(v, _)| objective < *v - 1e-12) {
            self.incumbent = Some((objective, values));
        }
    }

    fn child(&mut self, parent: microlp::Solution, col: usize, val: f64, depth: u32) -> Result<Child, MilpError> {
        self.nodes += 1;
        let outcome = parent.fix_var(self.cols[col], val);
        match outcome {
            Ok(SolveOutcome::Solution(sol)) => {
                self.iterations = sol.stats().lp_iterations;
                let bound = sol.objective();
                if bound >= self.cutoff() {
                    return Ok(Child::Closed);
                }
                self.seq += 1;
                Ok(Child::Open(Node { sol, bound, depth, seq: self.seq }))
            }
            Ok(SolveOutcome::Interrupted(_)) => {
                self.stopped = true;
                Ok(Child::Closed)
            }
            Err(microlp::Error::Infeasible) => Ok(Child::Closed),
            Err(microlp::Error::Unbounded) => Err(MilpError::Unbounded),
            Err(e) => Err(MilpError::Engine(e.to_string())),
        }
    }

    /// Processes one node: either records an integral solution or returns its two children.
    fn expand(&mut self, node: Node) -> Result<Vec<Node>, MilpError> {
        if node.bound >= self.cutoff() {
            return Ok(Vec::new());
        }
        let values = self.values(&node.sol);
        let Some(col) = self.branching_column(&values) else {
            self.offer(node.bound, values);
            return Ok(Vec::new());
        };
        let mut kids = Vec::with_capacity(2);
        // Up-branch first: fixing an arc to 1 usually reaches a complete route faster.
        if !self.out_of_budget() {
            if let Child::Open(c) = self.child(node.sol.clone(), col, 1.0, node.depth + 1)? {
                kids.push(c);
            }
        }
        if !self.out_of_budget() {
            if let Child::Open(c) = self.child(node.sol, col, 0.0, node.depth + 1)? {
                kids.push(c);
            }
        }
        Ok(kids)
    }
}

/// Best-bound branch and bound. `inst` is used only to turn a warm-start
/// route into a full assignment and to read routes back.
pub fn solve_milp(m: &MilpModel, inst: &Instance, opts: &MilpOptions) -> Result<MilpResult, MilpError> {
    let start = Instant::now();
    let deadline = opts.time_limit.map(|t| start + t);
    let Ok(mut relax) = build_relaxation(m, &|_| false) else {
        return Ok(infeasible_result(m, start, 0, 0, None));
    };
    if let Some(t) = opts.time_limit {
        relax.problem.set_time_limit(t);
    }
    let mut search = Search {
        m,
        cols: relax.cols.clone(),
        x_cols: m.vars.iter().enumerate().filter(|(_, v)| v.binary && matches!(v.kind, VarKind::X(..))).map(|(k, _)| k).collect(),
        y_cols: m.vars.iter().enumerate().filter(|(_, v)| v.binary && matches!(v.kind, VarKind::Y(..))).map(|(k, _)| k).collect(),
        incumbent: None,
        nodes: 1,
        iterations: 0,
        seq: 0,
        start,
        deadline,
        node_limit: opts.node_limit,
        stopped: false,
    };
    if let Some(route) = &opts.warm_start {
        if let Ok(values) = assignment_from_route(m, inst, route) {
            if evaluate_assignment(m, &values).is_ok_and(|r| r.is_feasible()) {
                search.offer(m.objective_value(&values), values);
            }
        }
    }

    let root = match relax.problem.solve() {
        Ok(SolveOutcome::Solution(sol)) => sol,
        Ok(SolveOutcome::Interrupted(_)) => return Ok(search.finish(MilpStatus::Limit, f64::NEG_INFINITY, None)),
        Err(microlp::Error::Infeasible) => return Ok(infeasible_result(m, start, 1, 0, None)),
        Err(microlp::Error::Unbounded) => return Err(MilpError::Unbounded),
        Err(e) => return Err(MilpError::Engine(e.to_string())),
    };
    search.iterations = root.stats().lp_iterations;
    let root_bound = root.objective();
    let mut open = BinaryHeap::new();
    open.push(Node { sol: root, bound: root_bound, depth: 0, seq: 0 });

    let mut processed = 0u64;
    while let Some(node) = open.pop() {
        if node.bound >= search.cutoff() {
            // Everything left is at least as bad.
            open.clear();
            break;
        }
        if search.out_of_budget() {
            open.push(node);
            break;
        }
        processed += 1;
        let mut kids = search.expand(node)?;
        if processed % PLUNGE_EVERY == 0 {
            // Dive: keep the first child, shelve its sibling, until the dive closes.
            while !kids.is_empty() && !search.out_of_budget() {
                let first = kids.remove(0);
                open.extend(kids);
                kids = search.expand(first)?;
            }
        }
        open.extend(kids);
        if search.stopped {
            break;
        }
    }

    let cutoff = search.cutoff();
    open.retain(|n| n.bound < cutoff);
    if open.is_empty() {
        return Ok(match search.incumbent {
            Some(_) => {
                let bound = search.incumbent.as_ref().map(|(v, _)| *v).unwrap();
                search.finish(MilpStatus::Optimal, bound, Some(root_bound))
            }
            None => infeasible_result(m, start, search.nodes, search.iterations, Some(root_bound)),
        });
    }
    let mut bound = open.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    if let Some((v, _)) = &search.incumbent {
        bound = bound.min(*v);
    }
    Ok(search.finish(MilpStatus::Limit, bound, Some(root_bound)))
}

impl Search<'_> {
    fn finish(self, status: MilpStatus, best_bound: f64, root_bound: Option<f64>) -> MilpResult {
        let (objective, values) = match self.incumbent {
            Some((o, v)) => (Some(o), Some(v)),
            None => (None, None),
        };
        let route = values.as_ref().and_then(|v| route_from_assignment(self.m, v).ok());
        MilpResult {
            status,
            objective,
            values,
            route,
            best_bound,
            root_bound,
            nodes: self.nodes,
            lp_iterations: self.iterations,
            elapsed: self.start.elapsed(),
            certificate: None,
        }
    }
}

fn infeasible_result(m: &MilpModel, start: Instant, nodes: u64, iterations: u64, root_bound: Option<f64>) -> MilpResult {
    let families = if root_bound.is_none() { infeasible_families(m) } else { Vec::new() };
    let rows = m
        .rows
        .iter()
        .filter(|r| families.contains(&r.family))
        .map(|r| r.name.clone())
        .collect();
    MilpResult {
        status: MilpStatus::Infeasible,
        objective: None,
        values: None,
        route: None,
        best_bound: f64::INFINITY,
        root_bound,
        nodes,
        lp_iterations: iterations,
        elapsed: start.elapsed(),
        certificate: Some(Certificate {
            families: families.iter().map(|f| f.tag().to_string()).collect(),
            rows,
            nodes,
        }),
    }
}
