use std::fmt;

use crate::physics::Cps;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DeviceProblem {
    UnknownSensor(String),
    UnknownActuator(String),
}

impl fmt::Display for DeviceProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeviceProblem::UnknownSensor(s) => write!(f, "unknown sensor `{s}`"),
            DeviceProblem::UnknownActuator(a) => write!(f, "unknown actuator `{a}`"),
        }
    }
}

/// Every device the process mentions but the environment does not declare.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("ill-formed system: {}", .problems.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", "))]
pub struct WellFormednessError {
    pub problems: Vec<DeviceProblem>,
}

/// Checks that each sensor read by the process has an error bound and a
/// measured variable, and each actuator written is declared.
pub fn well_formed(m: &Cps) -> Result<(), WellFormednessError> {
    let mut problems = Vec::new();
    for s in m.proc.sensors_read() {
        if !m.env.plant.sensor_target.contains_key(&s) || !m.env.plant.sensor_error.contains_key(&s) {
            problems.push(DeviceProblem::UnknownSensor(s));
        }
    }
    for a in m.proc.actuators_written() {
        if !m.env.actuators.contains_key(&a) {
            problems.push(DeviceProblem::UnknownActuator(a));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(WellFormednessError { problems })
    }
}
