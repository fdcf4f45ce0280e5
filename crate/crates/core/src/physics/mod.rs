//! Physical environments, intervals and systems.

mod cps;
mod env;
mod interval;

pub use cps::{non_interfering, Cps, CpsError};
pub use env::{disjoint_union, Drift, EnvBuilder, NameClash, PhysicalEnv, PhysicsError, Plant};
pub use interval::{Interval, IntervalSet};
