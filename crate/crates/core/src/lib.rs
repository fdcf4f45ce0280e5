//! Workbench for a discrete-time process calculus of cyber-physical systems.
//!
//! A system `E ⋈ P` pairs a physical environment (state, actuators,
//! uncertainty, drift, sensors, invariant) with a timed process. The crate
//! executes the operational semantics, abstracts the plant into finite
//! interval LTSs, decides weak bisimilarity, searches for distinguishing
//! traces and reproduces the engine/airplane case study.

pub mod terms;
pub mod physics;
pub mod lts;
pub mod abstraction;
pub mod analysis;
pub mod casestudy;
pub mod cli;
pub mod dsl;
