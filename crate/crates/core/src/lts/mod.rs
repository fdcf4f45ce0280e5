//! Operational semantics: process transitions, system transitions and
//! trace replay.

mod label;
mod process;
mod system;
mod trace;

pub use label::{parse_value, Label};
pub use process::{process_steps, Frame, Pending, ProcStep};
pub use system::{
    resolve_move, system_moves, system_steps, system_steps_open, Chooser, DisturbanceResolver, LtsError, Request,
    Resolution, SysMove, SysStep, TickScript,
};
pub use trace::{
    run_trace, ticks_in, trace_to_json, write_trace_csv, ActionPattern, ActionSelector, TraceRecord, TraceRun, Via,
};
