//! Constructive procedures built on the exact LP and the verifiers.

mod chores;
mod grid;
mod nash;
mod welfare;

use thiserror::Error;

use crate::transforms::TransformError;

pub use chores::{
    for_each_grid_allocation, solve_min_disutility_product, solve_pareto_constrained_nb,
    ChoresGridConfig, ChoresOutcome,
};
pub use grid::{find_bivalued_equilibrium, find_hz_equilibrium_grid, GridConfig, GridEquilibrium};
pub use nash::{solve_nash_bargaining_goods, NbConfig, NbOutcome};
pub use welfare::{expand_types, solve_two_type_ef_po, solve_welfare_max_ef, TypeExpansion};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("expected {expected} agents, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("agent {agent} has non-integer demand {demand}")]
    NonIntegerDemand { agent: usize, demand: String },
    #[error("{what} is {got}, above the limit of {limit}")]
    TooLarge {
        what: &'static str,
        got: usize,
        limit: usize,
    },
    #[error("utility u[{agent}][{item}] = {value} has the wrong sign for this program")]
    WrongSign {
        agent: usize,
        item: usize,
        value: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(
        "no equilibrium on the price grid after {cells} cells; closest cell prices [{closest}] \
         with infeasibility {residual} (consider raising --cap or refining --delta)"
    )]
    NotFound {
        cells: usize,
        closest: String,
        residual: String,
    },
    #[error("no Pareto-optimal point on the allocation grid (tried {steps} steps per unit)")]
    NoPoGridPoint { steps: u64 },
    #[error("postcondition violated: {0}")]
    Postcondition(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
}
