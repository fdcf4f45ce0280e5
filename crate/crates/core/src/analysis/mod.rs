//! Analyses over systems and their abstractions: weak bisimilarity,
//! congruence checks, trace search, time properties and simulation.

mod bisim;
mod congruence;
mod montecarlo;
mod search;
mod time;

pub use bisim::{weak_bisim, weakly_bisimilar_states, BisimReport, BisimVerdict, Hml, Saturated, Side, Witness};
pub use congruence::{
    abstract_lts, airplane_congruence_chain, bisim_systems, check_congruence_instance, compose, ChainReport, ChainStep,
    CongruenceError, CongruenceJson, CongruenceReport, Context,
};
pub use montecarlo::{monte_carlo, simulate, RunRecord, RunStats, SwitchEvent};
pub use search::{find_trace_to, pattern_matches, FoundTrace, SearchError};
pub use time::{
    check_time_properties, PropertyResult, TimeConfig, TimeReport, MAXIMAL_PROGRESS, PATIENCE, TIME_DETERMINISM,
    WELL_TIMEDNESS,
};
