//! Route-set comparison between a model and the deck: every sequence the arc
//! set can express is accepted by the model exactly when the deck can execute it.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{assignment_from_route, build_model, evaluate_assignment, ArcSet, BuildError, ModelOptions};
use crate::instance::{Instance, QueueRelations};
use crate::seqsolver::{enumerate_feasible, EnumerateError};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mismatch {
    pub route: Vec<usize>,
    pub model_accepts: bool,
    pub deck_accepts: bool,
    pub violated_rows: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OracleReport {
    pub feasible_routes: usize,
    pub candidate_routes: usize,
    /// Deck-feasible routes that use an arc absent from the arc set.
    pub missing_arc_routes: Vec<Vec<usize>>,
    pub mismatches: Vec<Mismatch>,
}

impl OracleReport {
    pub fn agrees(&self) -> bool {
        self.missing_arc_routes.is_empty() && self.mismatches.is_empty()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
    #[error("more than {0} feasible routes")]
    Truncated(usize),
}

/// Sequences over `arcs` that respect pickup-before-delivery and queue order.
/// Any other sequence breaks a row that no schedule can repair.
pub fn expressible_routes(inst: &Instance, arcs: &ArcSet) -> Vec<Vec<usize>> {
    fn go(inst: &Instance, qr: &QueueRelations, arcs: &ArcSet, route: &mut Vec<usize>, seen: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let n = inst.n();
        let end = inst.end_vertex();
        let u = *route.last().unwrap();
        if route.len() == 2 * n + 1 {
            if arcs.contains(u, end) {
                let mut r = route.clone();
                r.push(end);
                out.push(r);
            }
            return;
        }
        for &v in arcs.successors(u) {
            if v == end || seen[v] || (v > n && !seen[v - n]) {
                continue;
            }
            if v <= n && qr.pred(v).is_some_and(|p| !seen[p]) {
                continue;
            }
            seen[v] = true;
            route.push(v);
            go(inst, qr, arcs, route, seen, out);
            route.pop();
            seen[v] = false;
        }
    }
    let mut out = Vec::new();
    let mut seen = vec![false; inst.vertex_count()];
    seen[0] = true;
    go(inst, &inst.queue_relations(), arcs, &mut vec![0], &mut seen, &mut out);
    out
}

pub fn oracle_report(inst: &Instance, arcs: &ArcSet, options: ModelOptions, limit: usize) -> Result<OracleReport, OracleError> {
    let m = build_model(inst, arcs, options)?;
    let en = enumerate_feasible(inst, limit)?;
    if en.truncated {
        return Err(OracleError::Truncated(limit));
    }
    let feasible: BTreeSet<Vec<usize>> = en.routes.into_iter().collect();
    let mut report = OracleReport { feasible_routes: feasible.len(), ..Default::default() };
    for r in &feasible {
        if r.windows(2).any(|w| !arcs.contains(w[0], w[1])) {
            report.missing_arc_routes.push(r.clone());
        }
    }
    for r in expressible_routes(inst, arcs) {
        report.candidate_routes += 1;
        let values = assignment_from_route(&m, inst, &r).expect("route over the model's own arcs");
        let rep = evaluate_assignment(&m, &values).expect("assignment sized by the model");
        let model_ok = rep.is_feasible();
        let deck_ok = feasible.contains(&r);
        if model_ok != deck_ok {
            let mut violated_rows = rep.violated_rows;
            violated_rows.extend(rep.violated_bounds);
            report.mismatches.push(Mismatch { route: r, model_accepts: model_ok, deck_accepts: deck_ok, violated_rows });
        }
    }
    Ok(report)
}
