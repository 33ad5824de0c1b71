//! Solution files: the route with its schedule, loads and costs.

use serde::{Deserialize, Serialize};

use rgvroute::{evaluate_route, Instance, RouteEvaluation};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub backend: String,
    pub objective: String,
    pub cuts: Option<String>,
    /// optimal, feasible (limit reached), or heuristic.
    pub status: String,
    pub route: Vec<usize>,
    /// Service start time of each vertex, indexed by vertex.
    pub b: Vec<f64>,
    /// Load after serving each vertex, indexed by vertex.
    pub w: Vec<i64>,
    pub energy: f64,
    pub distance: f64,
    pub completion_time: f64,
    pub feasible: bool,
    pub tw_misses: usize,
    pub nodes: u64,
    pub gap: Option<f64>,
}

impl SolutionFile {
    pub fn new(backend: &str, objective: &str, cuts: Option<String>, status: &str, eval: &RouteEvaluation, nodes: u64, gap: Option<f64>) -> Self {
        SolutionFile {
            backend: backend.into(),
            objective: objective.into(),
            cuts,
            status: status.into(),
            route: eval.route.clone(),
            b: eval.start_times.clone(),
            w: eval.loads.clone(),
            energy: eval.energy,
            distance: eval.distance,
            completion_time: eval.completion_time,
            feasible: eval.feasible,
            tw_misses: eval.tw_misses,
            nodes,
            gap,
        }
    }

    /// Differences between the stored numbers and a fresh evaluation of the route.
    pub fn discrepancies(&self, inst: &Instance) -> Vec<String> {
        let ev = match evaluate_route(inst, &self.route) {
            Ok(ev) => ev,
            Err(e) => return vec![format!("route: {e}")],
        };
        let mut out = Vec::new();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
        if !close(ev.energy, self.energy) {
            out.push(format!("energy {} recomputes to {}", self.energy, ev.energy));
        }
        if !close(ev.distance, self.distance) {
            out.push(format!("distance {} recomputes to {}", self.distance, ev.distance));
        }
        if self.b.len() != ev.start_times.len() || self.b.iter().zip(&ev.start_times).any(|(a, b)| !close(*a, *b)) {
            out.push("b trajectory differs".into());
        }
        if self.w != ev.loads {
            out.push("w trajectory differs".into());
        }
        if self.feasible != ev.feasible {
            out.push(format!("feasible flag {} but route evaluates to {}", self.feasible, ev.feasible));
        }
        out
    }
}
