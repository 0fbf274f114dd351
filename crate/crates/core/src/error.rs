use thiserror::Error;

use crate::extremality::CycleWitness;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected:?}, found {found:?}")]
    Dimension {
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unbalanced marginals: total of mu is {mu_total}, total of nu is {nu_total}")]
    Unbalanced { mu_total: f64, nu_total: f64 },

    #[error("infeasible push-forward: weight {weight} at index {index} lies outside the domain of the map")]
    OutsideDomain { index: usize, weight: f64 },

    #[error("infeasible potentials: reduced cost {reduced} at cell ({i}, {j})")]
    InfeasiblePotentials { i: usize, j: usize, reduced: f64 },

    #[error("instance too large: {what} is {size}, limit is {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("invalid cycle at edge ({}, {}): {reason}", edge.0, edge.1)]
    InvalidCycle {
        edge: (usize, usize),
        reason: &'static str,
    },

    #[error("support contains a cycle through {} cells", .0.len())]
    Cyclic(CycleWitness),

    #[error("invalid limb system: {}", .0.join("; "))]
    InvalidSystem(Vec<String>),

    #[error("no {kind} registered under {name:?} (available: {})", available.join(", "))]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: Vec<String>,
    },

    #[error("solver did not converge within {0} pivots")]
    IterationLimit(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
}
