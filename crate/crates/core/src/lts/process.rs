use std::sync::Arc;

use super::label::Label;
use crate::terms::{par, restrict, Prefix, ProcessTerm, Value};

/// Context around a pending input or sensor read, innermost frame first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Frame {
    /// The pending term is the left operand; the right one is stored.
    ParLeft(ProcessTerm),
    ParRight(ProcessTerm),
    Restrict(String),
}

/// Continuation of an input or read prefix, awaiting the received value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pending {
    pub var: String,
    pub body: ProcessTerm,
    pub frames: Vec<Frame>,
}

impl Pending {
    pub fn instantiate(&self, v: &Value) -> ProcessTerm {
        let inner = self.body.substitute_value(&self.var, v);
        self.frames.iter().fold(inner, |acc, frame| match frame {
            Frame::ParLeft(right) => par(acc, right.clone()),
            Frame::ParRight(left) => par(left.clone(), acc),
            Frame::Restrict(c) => restrict(acc, c.clone()),
        })
    }

    fn framed(mut self, frame: Frame) -> Pending {
        self.frames.push(frame);
        self
    }
}

/// One process-level transition. Inputs and sensor reads are symbolic in
/// the received value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ProcStep {
    Ready(Label, ProcessTerm),
    Input { chan: String, pending: Pending },
    Sense { sensor: String, pending: Pending },
}

impl ProcStep {
    pub fn is_tau(&self) -> bool {
        matches!(self, ProcStep::Ready(Label::Tau, _))
    }

    pub fn is_tick(&self) -> bool {
        matches!(self, ProcStep::Ready(Label::Tick, _))
    }

    fn map_term(self, f: impl Fn(ProcessTerm) -> ProcessTerm, frame: Frame) -> ProcStep {
        match self {
            ProcStep::Ready(l, p) => ProcStep::Ready(l, f(p)),
            ProcStep::Input { chan, pending } => ProcStep::Input { chan, pending: pending.framed(frame) },
            ProcStep::Sense { sensor, pending } => ProcStep::Sense { sensor, pending: pending.framed(frame) },
        }
    }
}

/// All transitions of a closed process term.
pub fn process_steps(p: &ProcessTerm) -> Vec<ProcStep> {
    use ProcessTerm as P;
    match p {
        P::Nil => vec![ProcStep::Ready(Label::Tick, P::Nil)],
        P::Tick(body) => vec![ProcStep::Ready(Label::Tick, (**body).clone())],
        P::Var(_) => Vec::new(),
        P::Fix(..) => process_steps(&p.unfold_fix()),
        P::If { guard, then, otherwise } => {
            if guard.eval().unwrap_or(false) {
                process_steps(then)
            } else {
                process_steps(otherwise)
            }
        }
        P::Timeout { prefix, then, timeout } => {
            let mut out = Vec::with_capacity(2);
            let then = (**then).clone();
            match prefix {
                Prefix::Send { chan, value } => {
                    if let Ok(v) = value.eval() {
                        out.push(ProcStep::Ready(Label::Out(chan.clone(), v), then));
                    }
                }
                Prefix::Write { actuator, value } => {
                    if let Ok(v) = value.eval() {
                        out.push(ProcStep::Ready(Label::ActWrite(actuator.clone(), v), then));
                    }
                }
                Prefix::Receive { chan, var } => out.push(ProcStep::Input {
                    chan: chan.clone(),
                    pending: Pending { var: var.clone(), body: then, frames: Vec::new() },
                }),
                Prefix::Read { sensor, var } => out.push(ProcStep::Sense {
                    sensor: sensor.clone(),
                    pending: Pending { var: var.clone(), body: then, frames: Vec::new() },
                }),
            }
            out.push(ProcStep::Ready(Label::Tick, (**timeout).clone()));
            out
        }
        P::Restrict(body, c) => process_steps(body)
            .into_iter()
            .filter(|s| match s {
                ProcStep::Ready(l, _) => l.channel() != Some(c.as_str()),
                ProcStep::Input { chan, .. } => chan != c,
                ProcStep::Sense { .. } => true,
            })
            .map(|s| s.map_term(|t| restrict(t, c.clone()), Frame::Restrict(c.clone())))
            .collect(),
        P::Par(a, b) => par_steps(a, b),
    }
}

fn par_steps(a: &Arc<ProcessTerm>, b: &Arc<ProcessTerm>) -> Vec<ProcStep> {
    let sa = process_steps(a);
    let sb = process_steps(b);
    let mut out = Vec::new();
    for s in &sa {
        if !s.is_tick() {
            out.push(s.clone().map_term(|t| par(t, (**b).clone()), Frame::ParLeft((**b).clone())));
        }
    }
    for s in &sb {
        if !s.is_tick() {
            out.push(s.clone().map_term(|t| par((**a).clone(), t), Frame::ParRight((**a).clone())));
        }
    }
    for x in &sa {
        for y in &sb {
            match (x, y) {
                (ProcStep::Ready(Label::Out(c, v), p), ProcStep::Input { chan, pending }) if c == chan => {
                    out.push(ProcStep::Ready(Label::Tau, par(p.clone(), pending.instantiate(v))));
                }
                (ProcStep::Input { chan, pending }, ProcStep::Ready(Label::Out(c, v), q)) if c == chan => {
                    out.push(ProcStep::Ready(Label::Tau, par(pending.instantiate(v), q.clone())));
                }
                _ => {}
            }
        }
    }
    if !out.iter().any(ProcStep::is_tau) {
        for x in sa.iter().filter(|s| s.is_tick()) {
            for y in sb.iter().filter(|s| s.is_tick()) {
                if let (ProcStep::Ready(_, p), ProcStep::Ready(_, q)) = (x, y) {
                    out.push(ProcStep::Ready(Label::Tick, par(p.clone(), q.clone())));
                }
            }
        }
    }
    out
}
