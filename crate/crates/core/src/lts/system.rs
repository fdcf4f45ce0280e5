use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::label::Label;
use super::process::{process_steps, Pending, ProcStep};
use crate::physics::{Cps, Interval, PhysicalEnv};
use crate::terms::{ProcessTerm, Rational, Value};

/// A system-level move before the continuous choices are resolved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SysMove {
    Out { chan: String, value: Value, next: ProcessTerm },
    Input { chan: String, pending: Pending },
    Internal { next: ProcessTerm },
    Write { actuator: String, value: Value, next: ProcessTerm },
    Read { sensor: String, pending: Pending },
    Tick { next: ProcessTerm },
}

impl SysMove {
    /// True for moves observed as `τ` at system level.
    pub fn is_silent(&self) -> bool {
        matches!(self, SysMove::Internal { .. } | SysMove::Write { .. } | SysMove::Read { .. })
    }

    pub fn is_tick(&self) -> bool {
        matches!(self, SysMove::Tick { .. })
    }
}

/// The moves of `E ⋈ P`. Empty when the invariant is violated; `Tick` only
/// when no silent move exists.
pub fn system_moves(m: &Cps) -> Vec<SysMove> {
    if !m.env.invariant_holds() {
        return Vec::new();
    }
    let mut moves = Vec::new();
    let mut ticks = Vec::new();
    for step in process_steps(&m.proc) {
        match step {
            ProcStep::Ready(Label::Tau, next) => moves.push(SysMove::Internal { next }),
            ProcStep::Ready(Label::Out(chan, value), next) => moves.push(SysMove::Out { chan, value, next }),
            ProcStep::Ready(Label::ActWrite(actuator, value), next) => {
                moves.push(SysMove::Write { actuator, value, next })
            }
            ProcStep::Ready(Label::Tick, next) => ticks.push(SysMove::Tick { next }),
            ProcStep::Ready(Label::In(..) | Label::SensRead(..), _) => {}
            ProcStep::Input { chan, pending } => moves.push(SysMove::Input { chan, pending }),
            ProcStep::Sense { sensor, pending } => moves.push(SysMove::Read { sensor, pending }),
        }
    }
    if !moves.iter().any(SysMove::is_silent) {
        moves.extend(ticks);
    }
    moves
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LtsError {
    #[error("resolver chose {value} outside {interval} for `{what}`")]
    ResolverOutOfRange { what: String, value: String, interval: String },
    #[error("no step matches selector {0}")]
    StuckAt(usize),
    #[error(transparent)]
    Physics(#[from] crate::physics::PhysicsError),
}

/// What the resolver is asked to choose.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Request<'a> {
    /// Next value of a state variable after a tick.
    Evolve { var: &'a str, current: &'a Rational, drift: &'a Rational },
    /// Measurement of a sensor.
    Sense { sensor: &'a str, actual: &'a Rational },
}

/// Point choices made by the resolver during one tick.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TickScript {
    /// Disturbance `γ` per variable; missing variables get `γ = 0`.
    pub gamma: BTreeMap<String, Rational>,
}

pub type Chooser = Box<dyn FnMut(&Request<'_>, &Interval) -> Rational + Send>;

/// Resolves the continuous nondeterminism of sensing and evolution.
pub enum DisturbanceResolver {
    /// No disturbance; sensors return the true value.
    ZeroNoise,
    /// Uniform choice on a dyadic grid of 2^16 cells over each interval.
    Seeded(Box<ChaCha8Rng>),
    /// Replays recorded choices, then behaves as `ZeroNoise`.
    Scripted { ticks: Vec<TickScript>, sensed: Vec<Rational>, next_tick: usize, next_sense: usize },
    /// Arbitrary caller-provided choice; checked against the interval.
    Adversarial(Chooser),
}

const GRID: u32 = 1 << 16;

impl DisturbanceResolver {
    pub fn seeded(seed: u64) -> DisturbanceResolver {
        DisturbanceResolver::Seeded(Box::new(ChaCha8Rng::seed_from_u64(seed)))
    }

    pub fn from_rng(rng: ChaCha8Rng) -> DisturbanceResolver {
        DisturbanceResolver::Seeded(Box::new(rng))
    }

    pub fn scripted(ticks: Vec<TickScript>, sensed: Vec<Rational>) -> DisturbanceResolver {
        DisturbanceResolver::Scripted { ticks, sensed, next_tick: 0, next_sense: 0 }
    }

    pub fn adversarial(f: impl FnMut(&Request<'_>, &Interval) -> Rational + Send + 'static) -> DisturbanceResolver {
        DisturbanceResolver::Adversarial(Box::new(f))
    }

    fn sample(rng: &mut ChaCha8Rng, i: &Interval) -> Rational {
        let (lo, hi) = (i.lo().unwrap(), i.hi().unwrap());
        if lo == hi {
            return lo.clone();
        }
        let first = if i.lo_open() { 1 } else { 0 };
        let last = if i.hi_open() { GRID - 1 } else { GRID };
        let k = rng.gen_range(first..=last);
        lo + (hi - lo) * Rational::new(BigInt::from(k), BigInt::from(GRID))
    }

    /// Next state of the environment after one tick and the disturbances
    /// chosen.
    pub fn evolve(&mut self, env: &PhysicalEnv) -> Result<(PhysicalEnv, BTreeMap<String, Rational>), LtsError> {
        let boxes = env.next_envs();
        let script = match self {
            DisturbanceResolver::Scripted { ticks, next_tick, .. } => {
                let s = ticks.get(*next_tick).cloned();
                *next_tick += 1;
                s
            }
            _ => None,
        };
        let mut state = BTreeMap::new();
        let mut gammas = BTreeMap::new();
        for (x, current) in &env.state {
            let drift = env.drift_of(x);
            let base = current + &drift;
            let offered = &boxes[x];
            let point = match self {
                DisturbanceResolver::ZeroNoise => base.clone(),
                DisturbanceResolver::Seeded(rng) => Self::sample(rng, offered),
                DisturbanceResolver::Scripted { .. } => {
                    let g = script.as_ref().and_then(|s| s.gamma.get(x)).cloned().unwrap_or_else(Rational::zero);
                    &base + g
                }
                DisturbanceResolver::Adversarial(f) => f(&Request::Evolve { var: x, current, drift: &drift }, offered),
            };
            if !offered.contains(&point) {
                return Err(LtsError::ResolverOutOfRange {
                    what: x.clone(),
                    value: crate::terms::fmt_rational(&point),
                    interval: offered.to_string(),
                });
            }
            gammas.insert(x.clone(), &point - &base);
            state.insert(x.clone(), point);
        }
        Ok((env.with_state(state), gammas))
    }

    /// A measurement of `sensor` in the current environment.
    pub fn sense(&mut self, env: &PhysicalEnv, sensor: &str) -> Result<Rational, LtsError> {
        let offered = env.read_sensor(sensor)?;
        let actual = &env.state[&env.plant.sensor_target[sensor]];
        let v = match self {
            DisturbanceResolver::ZeroNoise => actual.clone(),
            DisturbanceResolver::Seeded(rng) => Self::sample(rng, &offered),
            DisturbanceResolver::Scripted { sensed, next_sense, .. } => {
                let v = sensed.get(*next_sense).cloned().unwrap_or_else(|| actual.clone());
                *next_sense += 1;
                v
            }
            DisturbanceResolver::Adversarial(f) => f(&Request::Sense { sensor, actual }, &offered),
        };
        check_sensed(sensor, &v, &offered)?;
        Ok(v)
    }
}

pub(crate) fn check_sensed(sensor: &str, v: &Rational, offered: &Interval) -> Result<(), LtsError> {
    if offered.contains(v) {
        Ok(())
    } else {
        Err(LtsError::ResolverOutOfRange {
            what: sensor.to_string(),
            value: crate::terms::fmt_rational(v),
            interval: offered.to_string(),
        })
    }
}

/// Choices made while resolving one step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Resolution {
    pub sensed: Option<(String, Rational)>,
    pub disturbances: BTreeMap<String, Rational>,
}

/// A resolved system transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SysStep {
    pub action: Label,
    pub successor: Cps,
    pub resolution: Resolution,
}

/// Resolves one move. `sensed` pins the measured value of a read; `input`
/// supplies the value of an open-system input.
pub fn resolve_move(
    m: &Cps,
    mv: &SysMove,
    resolver: &mut DisturbanceResolver,
    sensed: Option<&Rational>,
    input: Option<&Value>,
) -> Result<Option<SysStep>, LtsError> {
    let step = |action, env: PhysicalEnv, proc, resolution| SysStep { action, successor: Cps::unchecked(env, proc), resolution };
    Ok(Some(match mv {
        SysMove::Out { chan, value, next } => {
            step(Label::Out(chan.clone(), value.clone()), m.env.clone(), next.clone(), Resolution::default())
        }
        SysMove::Input { chan, pending } => {
            let Some(v) = input else { return Ok(None) };
            step(Label::In(chan.clone(), v.clone()), m.env.clone(), pending.instantiate(v), Resolution::default())
        }
        SysMove::Internal { next } => step(Label::Tau, m.env.clone(), next.clone(), Resolution::default()),
        SysMove::Write { actuator, value, next } => {
            step(Label::Tau, m.env.update_act(actuator, value.clone())?, next.clone(), Resolution::default())
        }
        SysMove::Read { sensor, pending } => {
            let v = match sensed {
                Some(v) => {
                    check_sensed(sensor, v, &m.env.read_sensor(sensor)?)?;
                    v.clone()
                }
                None => resolver.sense(&m.env, sensor)?,
            };
            let next = pending.instantiate(&Value::Real(v.clone()));
            step(
                Label::Tau,
                m.env.clone(),
                next,
                Resolution { sensed: Some((sensor.clone(), v)), disturbances: BTreeMap::new() },
            )
        }
        SysMove::Tick { next } => {
            let (env, gammas) = resolver.evolve(&m.env)?;
            step(Label::Tick, env, next.clone(), Resolution { sensed: None, disturbances: gammas })
        }
    }))
}

/// Resolved transitions of `m` in a closed world: inputs from outside the
/// system are not offered.
pub fn system_steps(m: &Cps, resolver: &mut DisturbanceResolver) -> Result<Vec<SysStep>, LtsError> {
    system_steps_open(m, resolver, &BTreeMap::new())
}

/// Like [`system_steps`], offering each listed value on each input channel.
pub fn system_steps_open(
    m: &Cps,
    resolver: &mut DisturbanceResolver,
    inputs: &BTreeMap<String, Vec<Value>>,
) -> Result<Vec<SysStep>, LtsError> {
    let mut out = Vec::new();
    for mv in system_moves(m) {
        if let SysMove::Input { chan, .. } = &mv {
            for v in inputs.get(chan).into_iter().flatten() {
                out.extend(resolve_move(m, &mv, resolver, None, Some(v))?);
            }
        } else {
            out.extend(resolve_move(m, &mv, resolver, None, None)?);
        }
    }
    Ok(out)
}
