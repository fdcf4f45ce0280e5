use std::collections::BTreeMap;
use std::fmt;

use crate::lts::{process_steps, Label, Pending, ProcStep};
use crate::physics::{Cps, Interval, IntervalSet, PhysicalEnv};
use crate::terms::{canonical, BoolExpr, CmpOp, Expr, ProcessTerm, Rational, Value};

/// Control location paired with a box of possible plant states.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbstractState {
    /// Canonical representative of the process part.
    pub control: ProcessTerm,
    pub actuators: BTreeMap<String, Value>,
    pub boxes: BTreeMap<String, Interval>,
}

impl AbstractState {
    /// The abstraction of a concrete system: point boxes.
    pub fn of(m: &Cps) -> AbstractState {
        AbstractState {
            control: canonical(&m.proc),
            actuators: m.env.actuators.clone(),
            boxes: m.env.state.iter().map(|(k, v)| (k.clone(), Interval::point(v.clone()))).collect(),
        }
    }

    pub fn location(&self) -> (ProcessTerm, BTreeMap<String, Value>) {
        (self.control.clone(), self.actuators.clone())
    }

    /// True when every concrete variable lies in the box.
    pub fn covers(&self, env: &PhysicalEnv) -> bool {
        env.state.iter().all(|(k, v)| self.boxes.get(k).is_some_and(|b| b.contains(v)))
    }
}

impl fmt::Display for AbstractState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars: Vec<String> = self.boxes.iter().map(|(k, b)| format!("{k} in {b}")).collect();
        let acts: Vec<String> = self.actuators.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "[{}; {}] {}", vars.join(", "), acts.join(", "), self.control)
    }
}

/// Node of an abstract LTS.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AbstractNode {
    State(AbstractState),
    /// Any state violating the invariant.
    Deadlock,
}

/// Which rule produced an abstract edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cause {
    Internal,
    Read(String),
    Write(String, Value),
    Tick,
    Out,
    In,
}

impl fmt::Display for Cause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cause::Internal => f.write_str("internal"),
            Cause::Read(s) => write!(f, "read {s}"),
            Cause::Write(a, v) => write!(f, "write {a} {v}"),
            Cause::Tick => f.write_str("tick"),
            Cause::Out => f.write_str("out"),
            Cause::In => f.write_str("in"),
        }
    }
}

/// One abstract successor. For reads, `sensed` is the set of measurements
/// that select this branch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractSucc {
    pub action: Label,
    pub cause: Cause,
    pub target: AbstractNode,
    pub sensed: Option<IntervalSet>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AbstractionError {
    #[error("state budget of {0} abstract states exceeded")]
    StateBudgetExceeded(usize),
    #[error("value read from sensor `{sensor}` is used outside a linear guard")]
    UnsupportedSensedUse { sensor: String },
    #[error("unknown sensor `{0}`")]
    UnknownSensor(String),
}

/// Static plant data needed to step boxes.
#[derive(Clone, Debug)]
pub struct PlantView {
    pub env: PhysicalEnv,
}

impl PlantView {
    fn drift(&self, var: &str, actuators: &BTreeMap<String, Value>) -> Rational {
        self.env.plant.dynamics.get(var).map(|d| d.rate(actuators).clone()).unwrap_or_else(num_traits::Zero::zero)
    }

    /// Box transition of one tick, before the invariant is applied.
    pub fn evolve(&self, s: &AbstractState) -> BTreeMap<String, Interval> {
        s.boxes
            .iter()
            .map(|(x, b)| {
                let w = self.env.uncertainty_of(x);
                (x.clone(), b.add(&Interval::around(&self.drift(x, &s.actuators), &w)))
            })
            .collect()
    }

    /// Boxes clipped to the invariant, and whether any part lay outside it.
    pub fn clip(&self, boxes: BTreeMap<String, Interval>) -> (Option<BTreeMap<String, Interval>>, bool) {
        let mut escapes = false;
        let mut out = BTreeMap::new();
        for (x, b) in boxes {
            let clipped = match self.env.plant.invariant.get(&x) {
                Some(inv) => b.intersect(inv),
                None => b.clone(),
            };
            if clipped != b {
                escapes = true;
            }
            if clipped.is_empty() {
                return (None, true);
            }
            out.insert(x, clipped);
        }
        (Some(out), escapes)
    }

    /// Successors of an abstract state.
    pub fn successors(&self, s: &AbstractState) -> Result<Vec<AbstractSucc>, AbstractionError> {
        let mut out = Vec::new();
        let mut ticks = Vec::new();
        let mut silent = false;
        let state = |control: &ProcessTerm, actuators: &BTreeMap<String, Value>, boxes: &BTreeMap<String, Interval>| {
            AbstractNode::State(AbstractState { control: canonical(control), actuators: actuators.clone(), boxes: boxes.clone() })
        };
        for step in process_steps(&s.control) {
            silent |= matches!(step, ProcStep::Sense { .. } | ProcStep::Ready(Label::Tau | Label::ActWrite(..), _));
            match step {
                ProcStep::Ready(Label::Tau, next) => out.push(AbstractSucc {
                    action: Label::Tau,
                    cause: Cause::Internal,
                    target: state(&next, &s.actuators, &s.boxes),
                    sensed: None,
                }),
                ProcStep::Ready(Label::Out(c, v), next) => out.push(AbstractSucc {
                    action: Label::Out(c, v),
                    cause: Cause::Out,
                    target: state(&next, &s.actuators, &s.boxes),
                    sensed: None,
                }),
                ProcStep::Ready(Label::ActWrite(a, v), next) => {
                    let mut acts = s.actuators.clone();
                    acts.insert(a.clone(), v.clone());
                    out.push(AbstractSucc {
                        action: Label::Tau,
                        cause: Cause::Write(a, v),
                        target: state(&next, &acts, &s.boxes),
                        sensed: None,
                    });
                }
                ProcStep::Ready(Label::Tick, next) => ticks.push(next),
                ProcStep::Ready(Label::In(..) | Label::SensRead(..), _) => {}
                ProcStep::Input { .. } => {}
                ProcStep::Sense { sensor, pending } => {
                    for (leaf, sensed, boxes) in self.split_read(s, &sensor, &pending)? {
                        out.push(AbstractSucc {
                            action: Label::Tau,
                            cause: Cause::Read(sensor.clone()),
                            target: state(&leaf, &s.actuators, &boxes),
                            sensed: Some(sensed),
                        });
                    }
                }
            }
        }
        if !silent {
            let (clipped, escapes) = self.clip(self.evolve(s));
            for next in ticks {
                if let Some(boxes) = &clipped {
                    out.push(AbstractSucc { action: Label::Tick, cause: Cause::Tick, target: state(&next, &s.actuators, boxes), sensed: None });
                }
                if escapes {
                    out.push(AbstractSucc { action: Label::Tick, cause: Cause::Tick, target: AbstractNode::Deadlock, sensed: None });
                }
            }
        }
        Ok(out)
    }

    /// Splits a sensor read on the conditionals at the head of its
    /// continuation. Each branch yields the continuation, the measurements
    /// selecting it and the refined boxes.
    pub fn split_read(
        &self,
        s: &AbstractState,
        sensor: &str,
        pending: &Pending,
    ) -> Result<Vec<(ProcessTerm, IntervalSet, BTreeMap<String, Interval>)>, AbstractionError> {
        let plant = &self.env.plant;
        let target = plant.sensor_target.get(sensor).ok_or_else(|| AbstractionError::UnknownSensor(sensor.to_string()))?;
        let eps = &plant.sensor_error[sensor];
        let truth = &s.boxes[target];
        let range = truth.widen(eps);
        let mut leaves = Vec::new();
        split_tree(&pending.body, &pending.var, IntervalSet::from_interval(range.clone()), &range, sensor, &mut leaves)?;
        let mut out = Vec::new();
        for (leaf, sensed) in leaves {
            if sensed.is_empty() {
                continue;
            }
            let refined = sensed
                .parts()
                .iter()
                .fold(Interval::Empty, |acc, part| acc.hull(&part.widen(eps).intersect(truth)));
            if refined.is_empty() {
                continue;
            }
            let mut boxes = s.boxes.clone();
            boxes.insert(target.clone(), refined);
            let whole = Pending { var: pending.var.clone(), body: leaf, frames: pending.frames.clone() };
            out.push((whole.instantiate(&Value::Unit), sensed, boxes));
        }
        Ok(out)
    }
}

fn split_tree(
    t: &ProcessTerm,
    x: &str,
    sensed: IntervalSet,
    range: &Interval,
    sensor: &str,
    out: &mut Vec<(ProcessTerm, IntervalSet)>,
) -> Result<(), AbstractionError> {
    match t {
        ProcessTerm::If { guard, then, otherwise } if guard.mentions(x) => {
            let g = guard_set(guard, x, range, sensor)?;
            split_tree(then, x, sensed.intersect(&g), range, sensor, out)?;
            split_tree(otherwise, x, sensed.intersect(&g.complement_within(range)), range, sensor, out)
        }
        leaf => {
            if leaf.free_data_vars().contains(x) {
                return Err(AbstractionError::UnsupportedSensedUse { sensor: sensor.to_string() });
            }
            out.push((leaf.clone(), sensed));
            Ok(())
        }
    }
}

/// Measurements in `range` satisfying `guard`.
fn guard_set(guard: &BoolExpr, x: &str, range: &Interval, sensor: &str) -> Result<IntervalSet, AbstractionError> {
    let all = || IntervalSet::from_interval(range.clone());
    Ok(match guard {
        BoolExpr::Const(true) => all(),
        BoolExpr::Const(false) => IntervalSet::empty(),
        BoolExpr::Not(b) => guard_set(b, x, range, sensor)?.complement_within(range),
        BoolExpr::And(a, b) => guard_set(a, x, range, sensor)?.intersect(&guard_set(b, x, range, sensor)?),
        BoolExpr::Or(a, b) => guard_set(a, x, range, sensor)?.union(&guard_set(b, x, range, sensor)?),
        BoolExpr::Cmp(op, a, b) => {
            if !a.mentions(x) && !b.mentions(x) {
                return Ok(if guard.eval().unwrap_or(false) { all() } else { IntervalSet::empty() });
            }
            let diff = Expr::Bin(crate::terms::ArithOp::Sub, Box::new(a.clone()), Box::new(b.clone()));
            match diff.affine_in(x) {
                Some((k, c)) => linear_set(*op, &k, &c, range),
                None => {
                    let other = match (a, b) {
                        (Expr::Var(v), e) | (e, Expr::Var(v)) if v == x && !e.mentions(x) => e.eval().ok(),
                        _ => None,
                    };
                    match other {
                        Some(v) if v.as_real().is_none() => match op {
                            CmpOp::Ne => all(),
                            _ => IntervalSet::empty(),
                        },
                        _ => return Err(AbstractionError::UnsupportedSensedUse { sensor: sensor.to_string() }),
                    }
                }
            }
        }
    })
}

/// `{v ∈ range | k*v + c op 0}`.
fn linear_set(op: CmpOp, k: &Rational, c: &Rational, range: &Interval) -> IntervalSet {
    use num_traits::Zero;
    let zero = Rational::zero();
    if k.is_zero() {
        return if op.holds(&Value::Real(c.clone()), &Value::Real(zero)) {
            IntervalSet::from_interval(range.clone())
        } else {
            IntervalSet::empty()
        };
    }
    let theta = -c / k;
    let op = if *k < zero { op.flipped() } else { op };
    let set = match op {
        CmpOp::Gt => range.above(&theta, true),
        CmpOp::Ge => range.above(&theta, false),
        CmpOp::Lt => range.below(&theta, true),
        CmpOp::Le => range.below(&theta, false),
        CmpOp::Eq => range.intersect(&Interval::point(theta)),
        CmpOp::Ne => {
            return IntervalSet::from_interval(range.intersect(&Interval::point(theta))).complement_within(range);
        }
    };
    IntervalSet::from_interval(set)
}
