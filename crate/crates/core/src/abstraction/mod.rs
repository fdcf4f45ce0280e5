//! Interval abstraction of systems into finite LTSs.

mod build;
mod finite;
mod query;
mod state;

pub use build::{build_abstract_lts, AbstractEdge, AbstractLts, AbstractionConfig, Widening};
pub use finite::{FiniteLts, LtsFormatError};
pub use query::{format_envelope, reach_envelope, EdgePattern, Query, QueryError};
pub use state::{AbstractNode, AbstractState, AbstractSucc, AbstractionError, Cause, PlantView};

/// Successors of a single abstract state of `m`'s plant.
pub fn abstract_successors(
    m: &crate::physics::Cps,
    s: &AbstractState,
) -> Result<Vec<AbstractSucc>, AbstractionError> {
    PlantView { env: m.env.clone() }.successors(s)
}
