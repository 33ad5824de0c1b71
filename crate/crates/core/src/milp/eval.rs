//! Checking a full variable assignment against every row of a model, and
//! converting between routes and assignments.

use thiserror::Error;

use super::{MilpModel, VarKind};
use crate::deck::{evaluate_route, RouteError};
use crate::instance::Instance;
use crate::tolerances::{INTEGRALITY, ROW_FEASIBILITY};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("assignment has {got} values, model has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("route uses arc ({0}, {1}) which the model does not contain")]
    ArcAbsent(usize, usize),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error("selected arcs do not form a single path from the start to the end vertex")]
    NotAPath,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssignmentReport {
    pub violated_rows: Vec<String>,
    pub violated_bounds: Vec<String>,
    pub fractional: Vec<String>,
    pub objective: f64,
}

impl AssignmentReport {
    pub fn is_feasible(&self) -> bool {
        self.violated_rows.is_empty() && self.violated_bounds.is_empty() && self.fractional.is_empty()
    }
}

pub fn evaluate_assignment(m: &MilpModel, values: &[f64]) -> Result<AssignmentReport, ModelError> {
    if values.len() != m.vars.len() {
        return Err(ModelError::DimensionMismatch {
            expected: m.vars.len(),
            got: values.len(),
        });
    }
    let violated_rows = m
        .rows
        .iter()
        .filter(|r| {
            let a = r.activity(values);
            a < r.lo - ROW_FEASIBILITY * (1.0 + r.lo.abs()) || a > r.hi + ROW_FEASIBILITY * (1.0 + r.hi.abs())
        })
        .map(|r| r.name.clone())
        .collect();
    let mut violated_bounds = Vec::new();
    let mut fractional = Vec::new();
    for (v, &val) in m.vars.iter().zip(values) {
        if val < v.lb - ROW_FEASIBILITY * (1.0 + v.lb.abs()) || val > v.ub + ROW_FEASIBILITY * (1.0 + v.ub.abs()) {
            violated_bounds.push(v.name());
        }
        if v.binary && (val - val.round()).abs() > INTEGRALITY {
            fractional.push(v.name());
        }
    }
    Ok(AssignmentReport {
        violated_rows,
        violated_bounds,
        fractional,
        objective: m.objective_value(values),
    })
}

/// The canonical assignment of a complete route: arc and path-marker
/// variables from the sequence, earliest start times, loads after service and
/// per-vertex energies.
pub fn assignment_from_route(m: &MilpModel, inst: &Instance, route: &[usize]) -> Result<Vec<f64>, ModelError> {
    let ev = evaluate_route(inst, route)?;
    for w in route.windows(2) {
        if m.x(w[0], w[1]).is_none() {
            return Err(ModelError::ArcAbsent(w[0], w[1]));
        }
    }
    let n = inst.n();
    let end = inst.end_vertex();
    let mut pos = vec![0usize; inst.vertex_count()];
    let mut next = vec![usize::MAX; inst.vertex_count()];
    for (k, &v) in route.iter().enumerate() {
        pos[v] = k;
    }
    for w in route.windows(2) {
        next[w[0]] = w[1];
    }
    let w_rgv = inst.rgv.w_rgv;
    let mut values = vec![0.0; m.vars.len()];
    for (idx, var) in m.vars.iter().enumerate() {
        values[idx] = match var.kind {
            VarKind::X(i, j) => f64::from(next[i] == j),
            VarKind::Y(k, i, j) => f64::from(next[i] == j && pos[k] <= pos[i] && pos[j] <= pos[k + n]),
            VarKind::B(i) => ev.start_times[i],
            VarKind::W(i) => ev.loads[i] as f64,
            VarKind::Z(i) => {
                let j = next[i];
                if j == end {
                    0.0
                } else {
                    m.constants[&(i, j)].energy_coeff * (w_rgv + ev.loads[i] as f64)
                }
            }
        };
    }
    Ok(values)
}

/// Follows the selected arcs (value above one half) from the start vertex.
pub fn route_from_assignment(m: &MilpModel, values: &[f64]) -> Result<Vec<usize>, ModelError> {
    if values.len() != m.vars.len() {
        return Err(ModelError::DimensionMismatch {
            expected: m.vars.len(),
            got: values.len(),
        });
    }
    let end = m.arcs.vertex_count() - 1;
    let mut route = vec![0];
    let mut cur = 0;
    while cur != end {
        let succ: Vec<usize> = m
            .arcs
            .successors(cur)
            .iter()
            .copied()
            .filter(|&j| values[m.x(cur, j).unwrap()] > 0.5)
            .collect();
        if succ.len() != 1 || route.len() > end {
            return Err(ModelError::NotAPath);
        }
        cur = succ[0];
        route.push(cur);
    }
    if route.len() != end + 1 {
        return Err(ModelError::NotAPath);
    }
    Ok(route)
}
