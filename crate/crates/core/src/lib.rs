//! Routing toolkit for a multi-capacity rail-guided vehicle with two-sided
//! loading and unloading on a linear track.

pub mod deck;
pub mod heuristic;
pub mod instance;
pub mod kinematics;
pub mod milp;
pub mod milpsolver;
pub mod rolling;
pub mod seqsolver;
pub mod simulator;
pub mod tolerances;
pub mod toy;

pub use deck::{evaluate_route, pairwise_case, DeckError, DeckState, Objective, RouteEvaluation, ServiceCase, Violation};
pub use instance::{classify, Endpoint, Instance, QueueRelations, Request, RequestType, Side};
pub use kinematics::RgvParams;
