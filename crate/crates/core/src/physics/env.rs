use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::Zero;

use super::interval::Interval;
use crate::terms::{Rational, Value};

/// Piecewise-constant drift: the first arm whose actuator conditions all hold
/// gives the per-tick rate, otherwise `default`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Drift {
    pub arms: Vec<(Vec<(String, Value)>, Rational)>,
    pub default: Rational,
}

impl Drift {
    pub fn constant(rate: Rational) -> Drift {
        Drift { arms: Vec::new(), default: rate }
    }

    pub fn when(mut self, conditions: Vec<(String, Value)>, rate: Rational) -> Drift {
        self.arms.push((conditions, rate));
        self
    }

    pub fn rate(&self, actuators: &BTreeMap<String, Value>) -> &Rational {
        self.arms
            .iter()
            .find(|(conds, _)| conds.iter().all(|(a, v)| actuators.get(a) == Some(v)))
            .map(|(_, r)| r)
            .unwrap_or(&self.default)
    }

    fn rename(&self, f: &dyn Fn(&str) -> String) -> Drift {
        Drift {
            arms: self
                .arms
                .iter()
                .map(|(conds, r)| (conds.iter().map(|(a, v)| (f(a), v.clone())).collect(), r.clone()))
                .collect(),
            default: self.default.clone(),
        }
    }
}

/// The time-invariant part of a physical environment: uncertainty,
/// evolution, sensor error, measurement and invariant.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Plant {
    pub uncertainty: BTreeMap<String, Rational>,
    pub dynamics: BTreeMap<String, Drift>,
    pub sensor_error: BTreeMap<String, Rational>,
    pub sensor_target: BTreeMap<String, String>,
    /// Box constraint; variables without an entry are unconstrained.
    pub invariant: BTreeMap<String, Interval>,
}

/// A physical environment: current state and actuator valuation over a
/// shared [`Plant`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhysicalEnv {
    pub plant: Arc<Plant>,
    pub state: BTreeMap<String, Rational>,
    pub actuators: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PhysicsError {
    #[error("unknown sensor `{0}`")]
    UnknownSensor(String),
    #[error("unknown actuator `{0}`")]
    UnknownActuator(String),
    #[error("unknown state variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("negative bound for `{0}`")]
    Negative(String),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("name clash: {}", .0.join(", "))]
pub struct NameClash(pub Vec<String>);

/// Incremental constructor for [`PhysicalEnv`].
#[derive(Default)]
pub struct EnvBuilder {
    plant: Plant,
    state: BTreeMap<String, Rational>,
    actuators: BTreeMap<String, Value>,
    errors: Vec<PhysicsError>,
}

impl EnvBuilder {
    pub fn new() -> EnvBuilder {
        EnvBuilder::default()
    }

    pub fn var(mut self, name: &str, init: Rational, uncertainty: Rational, invariant: Option<Interval>) -> Self {
        if self.state.contains_key(name) {
            self.errors.push(PhysicsError::Duplicate(name.to_string()));
        }
        if uncertainty < Rational::zero() {
            self.errors.push(PhysicsError::Negative(name.to_string()));
        }
        self.state.insert(name.to_string(), init);
        self.plant.uncertainty.insert(name.to_string(), uncertainty);
        self.plant.dynamics.entry(name.to_string()).or_insert_with(|| Drift::constant(Rational::zero()));
        if let Some(inv) = invariant {
            self.plant.invariant.insert(name.to_string(), inv);
        }
        self
    }

    pub fn actuator(mut self, name: &str, init: Value) -> Self {
        if self.actuators.insert(name.to_string(), init).is_some() {
            self.errors.push(PhysicsError::Duplicate(name.to_string()));
        }
        self
    }

    pub fn sensor(mut self, name: &str, target: &str, error: Rational) -> Self {
        if self.plant.sensor_target.contains_key(name) {
            self.errors.push(PhysicsError::Duplicate(name.to_string()));
        }
        if error < Rational::zero() {
            self.errors.push(PhysicsError::Negative(name.to_string()));
        }
        self.plant.sensor_target.insert(name.to_string(), target.to_string());
        self.plant.sensor_error.insert(name.to_string(), error);
        self
    }

    pub fn drift(mut self, var: &str, drift: Drift) -> Self {
        self.plant.dynamics.insert(var.to_string(), drift);
        self
    }

    pub fn build(mut self) -> Result<PhysicalEnv, PhysicsError> {
        if let Some(e) = self.errors.drain(..).next() {
            return Err(e);
        }
        for var in self.plant.dynamics.keys() {
            if !self.state.contains_key(var) {
                return Err(PhysicsError::UnknownVariable(var.clone()));
            }
        }
        for drift in self.plant.dynamics.values() {
            for (conds, _) in &drift.arms {
                for (a, _) in conds {
                    if !self.actuators.contains_key(a) {
                        return Err(PhysicsError::UnknownActuator(a.clone()));
                    }
                }
            }
        }
        for target in self.plant.sensor_target.values() {
            if !self.state.contains_key(target) {
                return Err(PhysicsError::UnknownVariable(target.clone()));
            }
        }
        Ok(PhysicalEnv { plant: Arc::new(self.plant), state: self.state, actuators: self.actuators })
    }
}

impl PhysicalEnv {
    /// Environment with no variables, sensors or actuators.
    pub fn empty() -> PhysicalEnv {
        PhysicalEnv { plant: Arc::new(Plant::default()), state: BTreeMap::new(), actuators: BTreeMap::new() }
    }

    pub fn sensors(&self) -> impl Iterator<Item = &String> {
        self.plant.sensor_target.keys()
    }

    /// All variable, actuator and sensor names.
    pub fn names(&self) -> BTreeSet<String> {
        self.state
            .keys()
            .chain(self.actuators.keys())
            .chain(self.plant.sensor_target.keys())
            .cloned()
            .collect()
    }

    /// Possible measurements of sensor `s`.
    pub fn read_sensor(&self, s: &str) -> Result<Interval, PhysicsError> {
        let target = self.plant.sensor_target.get(s).ok_or_else(|| PhysicsError::UnknownSensor(s.to_string()))?;
        let err = &self.plant.sensor_error[s];
        Ok(Interval::around(&self.state[target], err))
    }

    pub fn update_act(&self, a: &str, v: Value) -> Result<PhysicalEnv, PhysicsError> {
        if !self.actuators.contains_key(a) {
            return Err(PhysicsError::UnknownActuator(a.to_string()));
        }
        let mut next = self.clone();
        next.actuators.insert(a.to_string(), v);
        Ok(next)
    }

    pub fn drift_of(&self, var: &str) -> Rational {
        self.plant.dynamics.get(var).map(|d| d.rate(&self.actuators).clone()).unwrap_or_else(Rational::zero)
    }

    pub fn uncertainty_of(&self, var: &str) -> Rational {
        self.plant.uncertainty.get(var).cloned().unwrap_or_else(Rational::zero)
    }

    /// Admissible values of every variable after one time unit.
    pub fn next_envs(&self) -> BTreeMap<String, Interval> {
        self.state
            .iter()
            .map(|(x, v)| (x.clone(), Interval::around(&(v + self.drift_of(x)), &self.uncertainty_of(x))))
            .collect()
    }

    pub fn invariant_holds(&self) -> bool {
        self.plant.invariant.iter().all(|(x, box_)| self.state.get(x).map_or(true, |v| box_.contains(v)))
    }

    /// Same plant and actuators, new state.
    pub fn with_state(&self, state: BTreeMap<String, Rational>) -> PhysicalEnv {
        PhysicalEnv { plant: self.plant.clone(), state, actuators: self.actuators.clone() }
    }

    /// Renames variables, actuators and sensors.
    pub fn renamed(&self, f: &dyn Fn(&str) -> String) -> PhysicalEnv {
        let p = &self.plant;
        let plant = Plant {
            uncertainty: p.uncertainty.iter().map(|(k, v)| (f(k), v.clone())).collect(),
            dynamics: p.dynamics.iter().map(|(k, d)| (f(k), d.rename(f))).collect(),
            sensor_error: p.sensor_error.iter().map(|(k, v)| (f(k), v.clone())).collect(),
            sensor_target: p.sensor_target.iter().map(|(k, v)| (f(k), f(v))).collect(),
            invariant: p.invariant.iter().map(|(k, v)| (f(k), v.clone())).collect(),
        };
        PhysicalEnv {
            plant: Arc::new(plant),
            state: self.state.iter().map(|(k, v)| (f(k), v.clone())).collect(),
            actuators: self.actuators.iter().map(|(k, v)| (f(k), v.clone())).collect(),
        }
    }
}

/// `E1 ⊎ E2`, defined when the two environments share no names.
pub fn disjoint_union(e1: &PhysicalEnv, e2: &PhysicalEnv) -> Result<PhysicalEnv, NameClash> {
    let clash: Vec<String> = e1.names().intersection(&e2.names()).cloned().collect();
    if !clash.is_empty() {
        return Err(NameClash(clash));
    }
    let (p1, p2) = (&e1.plant, &e2.plant);
    fn join<V: Clone>(a: &BTreeMap<String, V>, b: &BTreeMap<String, V>) -> BTreeMap<String, V> {
        a.iter().chain(b.iter()).map(|(k, v)| (k.clone(), v.clone())).collect()
    }
    let plant = Plant {
        uncertainty: join(&p1.uncertainty, &p2.uncertainty),
        dynamics: join(&p1.dynamics, &p2.dynamics),
        sensor_error: join(&p1.sensor_error, &p2.sensor_error),
        sensor_target: join(&p1.sensor_target, &p2.sensor_target),
        invariant: join(&p1.invariant, &p2.invariant),
    };
    Ok(PhysicalEnv { plant: Arc::new(plant), state: join(&e1.state, &e2.state), actuators: join(&e1.actuators, &e2.actuators) })
}
