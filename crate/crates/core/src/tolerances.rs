//! Numerical tolerances shared by the model builder, the LP branch-and-bound and the checkers.

/// A relaxed binary within this distance of 0 or 1 counts as integral.
pub const INTEGRALITY: f64 = 1e-6;

/// Allowed residual when checking a linear row against its bounds.
pub const ROW_FEASIBILITY: f64 = 1e-7;

/// Two objective values closer than this are treated as equal (optimality gap, ties).
pub const OBJECTIVE: f64 = 1e-6;

/// Slack used when comparing schedule times against deadlines.
pub const TIME: f64 = 1e-9;

/// Default horizon used to encode an absent time window.
pub const HORIZON_MAX: f64 = 1e6;
