use std::sync::Arc;

use super::process::{par, Prefix, ProcessTerm};
use super::value::Expr;

type Env = Vec<(String, String)>;

fn lookup(env: &Env, name: &str) -> String {
    env.iter().rev().find(|(from, _)| from == name).map(|(_, to)| to.clone()).unwrap_or_else(|| name.to_string())
}

fn map_expr(e: &Expr, env: &Env) -> Expr {
    e.map_vars(&|x| lookup(env, x))
}

struct Normalizer {
    sort_parallel: bool,
}

impl Normalizer {
    fn run(&self, t: &ProcessTerm, depth: usize, penv: &mut Env, denv: &mut Env) -> ProcessTerm {
        use ProcessTerm as P;
        match t {
            P::Nil => P::Nil,
            P::Var(x) => P::Var(lookup(penv, x)),
            P::Tick(p) => P::Tick(Arc::new(self.run(p, depth, penv, denv))),
            P::Restrict(p, c) => P::Restrict(Arc::new(self.run(p, depth, penv, denv)), c.clone()),
            P::Fix(x, body) => {
                let name = format!("#{depth}");
                penv.push((x.clone(), name.clone()));
                let body = self.run(body, depth + 1, penv, denv);
                penv.pop();
                P::Fix(name, Arc::new(body))
            }
            P::If { guard, then, otherwise } => {
                let guard = guard.map_vars(&|x| lookup(denv, x));
                if self.sort_parallel && guard.is_closed() {
                    let taken = if guard.eval().unwrap_or(false) { then } else { otherwise };
                    return self.run(taken, depth, penv, denv);
                }
                P::If {
                    guard,
                    then: Arc::new(self.run(then, depth, penv, denv)),
                    otherwise: Arc::new(self.run(otherwise, depth, penv, denv)),
                }
            }
            P::Timeout { prefix, then, timeout } => {
                let timeout = Arc::new(self.run(timeout, depth, penv, denv));
                let (prefix, then) = match prefix {
                    Prefix::Send { chan, value } => (
                        Prefix::Send { chan: chan.clone(), value: map_expr(value, denv) },
                        self.run(then, depth, penv, denv),
                    ),
                    Prefix::Write { actuator, value } => (
                        Prefix::Write { actuator: actuator.clone(), value: map_expr(value, denv) },
                        self.run(then, depth, penv, denv),
                    ),
                    Prefix::Receive { chan, var } => {
                        let name = format!("#{depth}");
                        denv.push((var.clone(), name.clone()));
                        let then = self.run(then, depth + 1, penv, denv);
                        denv.pop();
                        (Prefix::Receive { chan: chan.clone(), var: name }, then)
                    }
                    Prefix::Read { sensor, var } => {
                        let name = format!("#{depth}");
                        denv.push((var.clone(), name.clone()));
                        let then = self.run(then, depth + 1, penv, denv);
                        denv.pop();
                        (Prefix::Read { sensor: sensor.clone(), var: name }, then)
                    }
                };
                P::Timeout { prefix, then: Arc::new(then), timeout }
            }
            P::Par(a, b) => {
                let a = self.run(a, depth, penv, denv);
                let b = self.run(b, depth, penv, denv);
                if !self.sort_parallel {
                    return par(a, b);
                }
                let mut parts = Vec::new();
                flatten(a, &mut parts);
                flatten(b, &mut parts);
                parts.sort();
                rebuild(parts)
            }
        }
    }
}

fn flatten(t: ProcessTerm, out: &mut Vec<ProcessTerm>) {
    match t {
        ProcessTerm::Nil => {}
        ProcessTerm::Par(a, b) => {
            flatten((*a).clone(), out);
            flatten((*b).clone(), out);
        }
        other => out.push(other),
    }
}

fn rebuild(mut parts: Vec<ProcessTerm>) -> ProcessTerm {
    match parts.pop() {
        None => ProcessTerm::Nil,
        Some(last) => parts.into_iter().rev().fold(last, |acc, p| par(p, acc)),
    }
}

/// Representative of the structural-congruence class of `t`: binders are
/// renamed by nesting depth, parallel components are flattened, sorted and
/// stripped of `nil`, and conditionals with closed guards are replaced by the
/// branch they select.
pub fn canonical(t: &ProcessTerm) -> ProcessTerm {
    Normalizer { sort_parallel: true }.run(t, 0, &mut Vec::new(), &mut Vec::new())
}

/// Decides `p ≡ q`.
pub fn structurally_congruent(p: &ProcessTerm, q: &ProcessTerm) -> bool {
    canonical(p) == canonical(q)
}

/// Equality up to renaming of bound variables only.
pub fn alpha_eq(p: &ProcessTerm, q: &ProcessTerm) -> bool {
    let n = Normalizer { sort_parallel: false };
    n.run(p, 0, &mut Vec::new(), &mut Vec::new()) == n.run(q, 0, &mut Vec::new(), &mut Vec::new())
}
