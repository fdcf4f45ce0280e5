use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::label::Label;
use super::system::{resolve_move, system_moves, DisturbanceResolver, LtsError, SysMove, SysStep};
use crate::physics::Cps;
use crate::terms::{canonical, fmt_rational, ProcessTerm, Rational, Value};

/// Shape of the system action to take.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ActionPattern {
    Any,
    Tau,
    Tick,
    Out { chan: String, value: Option<Value> },
    In { chan: String, value: Value },
}

/// Which kind of `τ` produced the step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Via {
    Internal,
    Read(Option<String>),
    Write(Option<String>, Option<Value>),
}

/// One entry of a replay script. The first enabled move satisfying every
/// given constraint is taken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSelector {
    pub action: ActionPattern,
    pub via: Option<Via>,
    /// Measured value to use when the step is a sensor read.
    pub sensed: Option<Rational>,
    /// Required process part after the step, up to structural congruence.
    pub target: Option<ProcessTerm>,
}

impl ActionSelector {
    pub fn new(action: ActionPattern) -> ActionSelector {
        ActionSelector { action, via: None, sensed: None, target: None }
    }

    pub fn tick() -> ActionSelector {
        ActionSelector::new(ActionPattern::Tick)
    }

    pub fn tau() -> ActionSelector {
        ActionSelector::new(ActionPattern::Tau)
    }

    pub fn any() -> ActionSelector {
        ActionSelector::new(ActionPattern::Any)
    }

    pub fn out(chan: &str) -> ActionSelector {
        ActionSelector::new(ActionPattern::Out { chan: chan.to_string(), value: None })
    }

    pub fn read(sensor: &str, value: Rational) -> ActionSelector {
        ActionSelector {
            action: ActionPattern::Tau,
            via: Some(Via::Read(Some(sensor.to_string()))),
            sensed: Some(value),
            target: None,
        }
    }

    pub fn write(actuator: &str, value: Value) -> ActionSelector {
        ActionSelector {
            action: ActionPattern::Tau,
            via: Some(Via::Write(Some(actuator.to_string()), Some(value))),
            sensed: None,
            target: None,
        }
    }

    pub fn with_target(mut self, target: &ProcessTerm) -> ActionSelector {
        self.target = Some(canonical(target));
        self
    }

    fn admits(&self, mv: &SysMove) -> bool {
        let action_ok = match (&self.action, mv) {
            (ActionPattern::Any, SysMove::Input { .. }) => false,
            (ActionPattern::Any, _) => true,
            (ActionPattern::Tau, m) => m.is_silent(),
            (ActionPattern::Tick, m) => m.is_tick(),
            (ActionPattern::Out { chan, value }, SysMove::Out { chan: c, value: v, .. }) => {
                chan == c && value.as_ref().map_or(true, |x| x == v)
            }
            (ActionPattern::In { chan, .. }, SysMove::Input { chan: c, .. }) => chan == c,
            _ => false,
        };
        let via_ok = match (&self.via, mv) {
            (None, _) => true,
            (Some(Via::Internal), SysMove::Internal { .. }) => true,
            (Some(Via::Read(s)), SysMove::Read { sensor, .. }) => s.as_ref().map_or(true, |s| s == sensor),
            (Some(Via::Write(a, v)), SysMove::Write { actuator, value, .. }) => {
                a.as_ref().map_or(true, |a| a == actuator) && v.as_ref().map_or(true, |v| v == value)
            }
            _ => false,
        };
        action_ok && via_ok
    }
}

/// One exported step of a run. Field order is part of the export format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceRecord {
    pub step_index: usize,
    pub time_slot: usize,
    pub action: String,
    pub channel: Option<String>,
    pub value: Option<String>,
    pub per_variable_state: BTreeMap<String, String>,
    pub actuator_valuation: BTreeMap<String, String>,
    pub resolved_disturbances: BTreeMap<String, String>,
}

impl TraceRecord {
    pub fn from_step(step_index: usize, time_slot: usize, step: &SysStep) -> TraceRecord {
        let env = &step.successor.env;
        let mut resolved: BTreeMap<String, String> =
            step.resolution.disturbances.iter().map(|(k, v)| (k.clone(), fmt_rational(v))).collect();
        if let Some((s, v)) = &step.resolution.sensed {
            resolved.insert(s.clone(), fmt_rational(v));
        }
        TraceRecord {
            step_index,
            time_slot,
            action: step.action.kind().to_string(),
            channel: step.action.channel().map(str::to_string),
            value: step.action.value().map(|v| v.to_string()),
            per_variable_state: env.state.iter().map(|(k, v)| (k.clone(), fmt_rational(v))).collect(),
            actuator_valuation: env.actuators.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
            resolved_disturbances: resolved,
        }
    }
}

/// A completed replay.
#[derive(Clone, Debug)]
pub struct TraceRun {
    pub final_state: Cps,
    pub steps: Vec<SysStep>,
    pub records: Vec<TraceRecord>,
}

impl TraceRun {
    pub fn actions(&self) -> Vec<Label> {
        self.steps.iter().map(|s| s.action.clone()).collect()
    }
}

/// Number of ticks in a sequence of actions.
pub fn ticks_in(actions: &[Label]) -> usize {
    actions.iter().filter(|a| a.is_tick()).count()
}

/// Replays `script` from `m`. Fails with `StuckAt(i)` at the first selector
/// no enabled move satisfies.
pub fn run_trace(m: &Cps, script: &[ActionSelector], resolver: &mut DisturbanceResolver) -> Result<TraceRun, LtsError> {
    let mut current = m.clone();
    let mut steps = Vec::new();
    let mut records = Vec::new();
    let mut ticks = 0;
    for (i, sel) in script.iter().enumerate() {
        let mut taken = None;
        for mv in system_moves(&current).iter().filter(|mv| sel.admits(mv)) {
            let input = match &sel.action {
                ActionPattern::In { value, .. } => Some(value),
                _ => None,
            };
            let Some(step) = resolve_move(&current, mv, resolver, sel.sensed.as_ref(), input)? else { continue };
            if let Some(target) = &sel.target {
                if canonical(&step.successor.proc) != *target {
                    continue;
                }
            }
            taken = Some(step);
            break;
        }
        let step = taken.ok_or(LtsError::StuckAt(i))?;
        records.push(TraceRecord::from_step(i, ticks + 1, &step));
        if step.action.is_tick() {
            ticks += 1;
        }
        current = step.successor.clone();
        steps.push(step);
    }
    Ok(TraceRun { final_state: current, steps, records })
}

fn join_map(m: &BTreeMap<String, String>) -> String {
    m.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

/// Writes records as CSV; map-valued fields are `k=v` pairs joined by `;`.
pub fn write_trace_csv<W: Write>(records: &[TraceRecord], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "stepIndex",
        "timeSlot",
        "action",
        "channel",
        "value",
        "perVariableState",
        "actuatorValuation",
        "resolvedDisturbances",
    ])?;
    for r in records {
        w.write_record([
            r.step_index.to_string(),
            r.time_slot.to_string(),
            r.action.clone(),
            r.channel.clone().unwrap_or_default(),
            r.value.clone().unwrap_or_default(),
            join_map(&r.per_variable_state),
            join_map(&r.actuator_valuation),
            join_map(&r.resolved_disturbances),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn trace_to_json(records: &[TraceRecord]) -> String {
    serde_json::to_string_pretty(records).expect("records serialize")
}
