use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use super::value::{BoolExpr, Expr, Value};

pub type ProcRef = Arc<ProcessTerm>;

/// Action guarding a timeout construct `⌊π.P⌋Q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prefix {
    Send { chan: String, value: Expr },
    Receive { chan: String, var: String },
    Read { sensor: String, var: String },
    Write { actuator: String, value: Expr },
}

impl Prefix {
    pub fn send(chan: impl Into<String>, value: Expr) -> Prefix {
        Prefix::Send { chan: chan.into(), value }
    }

    pub fn signal(chan: impl Into<String>) -> Prefix {
        Prefix::Send { chan: chan.into(), value: Expr::Lit(Value::Unit) }
    }

    pub fn receive(chan: impl Into<String>, var: impl Into<String>) -> Prefix {
        Prefix::Receive { chan: chan.into(), var: var.into() }
    }

    pub fn read(sensor: impl Into<String>, var: impl Into<String>) -> Prefix {
        Prefix::Read { sensor: sensor.into(), var: var.into() }
    }

    pub fn write(actuator: impl Into<String>, value: Expr) -> Prefix {
        Prefix::Write { actuator: actuator.into(), value }
    }

    /// Data variable bound in the continuation, if any.
    pub fn binder(&self) -> Option<&str> {
        match self {
            Prefix::Receive { var, .. } | Prefix::Read { var, .. } => Some(var),
            _ => None,
        }
    }

    fn with_binder(&self, fresh: &str) -> Prefix {
        match self {
            Prefix::Receive { chan, .. } => Prefix::Receive { chan: chan.clone(), var: fresh.to_string() },
            Prefix::Read { sensor, .. } => Prefix::Read { sensor: sensor.clone(), var: fresh.to_string() },
            other => other.clone(),
        }
    }

    fn free_data_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Prefix::Send { value, .. } | Prefix::Write { value, .. } => value.free_vars(out),
            _ => {}
        }
    }

    fn subst_value(&self, var: &str, v: &Value) -> Prefix {
        match self {
            Prefix::Send { chan, value } => Prefix::Send { chan: chan.clone(), value: value.subst(var, v) },
            Prefix::Write { actuator, value } => Prefix::Write { actuator: actuator.clone(), value: value.subst(var, v) },
            other => other.clone(),
        }
    }

    fn rename_data(&self, from: &str, to: &str) -> Prefix {
        match self {
            Prefix::Send { chan, value } => Prefix::Send { chan: chan.clone(), value: value.rename(from, to) },
            Prefix::Write { actuator, value } => Prefix::Write { actuator: actuator.clone(), value: value.rename(from, to) },
            other => other.clone(),
        }
    }
}

/// Process term of the calculus.
///
/// Children are shared through `Arc`, so cloning a term is cheap and terms
/// can be handed to worker threads.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProcessTerm {
    Nil,
    Tick(ProcRef),
    Par(ProcRef, ProcRef),
    Timeout { prefix: Prefix, then: ProcRef, timeout: ProcRef },
    If { guard: BoolExpr, then: ProcRef, otherwise: ProcRef },
    Restrict(ProcRef, String),
    Var(String),
    Fix(String, ProcRef),
}

use ProcessTerm as P;

pub fn nil() -> ProcessTerm {
    P::Nil
}

pub fn tick(body: ProcessTerm) -> ProcessTerm {
    P::Tick(Arc::new(body))
}

/// `tick^k.body`.
pub fn ticks(k: usize, body: ProcessTerm) -> ProcessTerm {
    (0..k).fold(body, |acc, _| tick(acc))
}

pub fn par(left: ProcessTerm, right: ProcessTerm) -> ProcessTerm {
    P::Par(Arc::new(left), Arc::new(right))
}

/// `⌊π.then⌋timeout`.
pub fn timeout(prefix: Prefix, then: ProcessTerm, timeout: ProcessTerm) -> ProcessTerm {
    P::Timeout { prefix, then: Arc::new(then), timeout: Arc::new(timeout) }
}

/// Persistent prefix `π.P`, i.e. `fix X.⌊π.P⌋X` with `X` fresh.
pub fn prefix(pi: Prefix, then: ProcessTerm) -> ProcessTerm {
    let mut used = then.free_proc_vars();
    then.bound_proc_vars(&mut used);
    let x = fresh_name("W", &used);
    fix(&x, timeout(pi, then, var(&x)))
}

pub fn if_else(guard: BoolExpr, then: ProcessTerm, otherwise: ProcessTerm) -> ProcessTerm {
    P::If { guard, then: Arc::new(then), otherwise: Arc::new(otherwise) }
}

pub fn restrict(body: ProcessTerm, chan: impl Into<String>) -> ProcessTerm {
    P::Restrict(Arc::new(body), chan.into())
}

pub fn var(name: &str) -> ProcessTerm {
    P::Var(name.to_string())
}

pub fn fix(name: &str, body: ProcessTerm) -> ProcessTerm {
    P::Fix(name.to_string(), Arc::new(body))
}

/// First of `base`, `base1`, `base2`, ... not in `used`.
pub fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    (1..).map(|i| format!("{base}{i}")).find(|n| !used.contains(n)).expect("unbounded")
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TermError {
    #[error("recursion variable `{0}` occurs unguarded by time")]
    Unguarded(String),
    #[error("free recursion variable `{0}`")]
    FreeProcVar(String),
    #[error("free data variable `{0}`")]
    FreeDataVar(String),
}

impl ProcessTerm {
    pub fn free_proc_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free_proc(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_proc(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            P::Nil => {}
            P::Tick(p) | P::Restrict(p, _) => p.collect_free_proc(bound, out),
            P::Par(a, b) => {
                a.collect_free_proc(bound, out);
                b.collect_free_proc(bound, out);
            }
            P::Timeout { then, timeout, .. } => {
                then.collect_free_proc(bound, out);
                timeout.collect_free_proc(bound, out);
            }
            P::If { then, otherwise, .. } => {
                then.collect_free_proc(bound, out);
                otherwise.collect_free_proc(bound, out);
            }
            P::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            P::Fix(x, body) => {
                bound.push(x.clone());
                body.collect_free_proc(bound, out);
                bound.pop();
            }
        }
    }

    fn bound_proc_vars(&self, out: &mut BTreeSet<String>) {
        self.visit(&mut |t| {
            if let P::Fix(x, _) = t {
                out.insert(x.clone());
            }
        });
    }

    pub fn free_data_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free_data(&mut out);
        out
    }

    fn collect_free_data(&self, out: &mut BTreeSet<String>) {
        match self {
            P::Nil | P::Var(_) => {}
            P::Tick(p) | P::Restrict(p, _) | P::Fix(_, p) => p.collect_free_data(out),
            P::Par(a, b) => {
                a.collect_free_data(out);
                b.collect_free_data(out);
            }
            P::Timeout { prefix, then, timeout } => {
                prefix.free_data_vars(out);
                let mut inner = BTreeSet::new();
                then.collect_free_data(&mut inner);
                if let Some(x) = prefix.binder() {
                    inner.remove(x);
                }
                out.extend(inner);
                timeout.collect_free_data(out);
            }
            P::If { guard, then, otherwise } => {
                guard.free_vars(out);
                then.collect_free_data(out);
                otherwise.collect_free_data(out);
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_proc_vars().is_empty() && self.free_data_vars().is_empty()
    }

    /// Pre-order traversal of every subterm.
    pub fn visit(&self, f: &mut impl FnMut(&ProcessTerm)) {
        f(self);
        match self {
            P::Nil | P::Var(_) => {}
            P::Tick(p) | P::Restrict(p, _) | P::Fix(_, p) => p.visit(f),
            P::Par(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            P::Timeout { then, timeout, .. } => {
                then.visit(f);
                timeout.visit(f);
            }
            P::If { then, otherwise, .. } => {
                then.visit(f);
                otherwise.visit(f);
            }
        }
    }

    /// Every prefix occurring in the term.
    pub fn prefixes(&self) -> Vec<Prefix> {
        let mut out = Vec::new();
        self.visit(&mut |t| {
            if let P::Timeout { prefix, .. } = t {
                out.push(prefix.clone());
            }
        });
        out
    }

    pub fn sensors_read(&self) -> BTreeSet<String> {
        self.prefixes()
            .into_iter()
            .filter_map(|p| match p {
                Prefix::Read { sensor, .. } => Some(sensor),
                _ => None,
            })
            .collect()
    }

    pub fn actuators_written(&self) -> BTreeSet<String> {
        self.prefixes()
            .into_iter()
            .filter_map(|p| match p {
                Prefix::Write { actuator, .. } => Some(actuator),
                _ => None,
            })
            .collect()
    }

    /// True when the process never reads a sensor nor writes an actuator.
    pub fn touches_no_device(&self) -> bool {
        self.prefixes().iter().all(|p| matches!(p, Prefix::Send { .. } | Prefix::Receive { .. }))
    }

    /// Renames sensors, actuators and channels occurring in prefixes and
    /// restrictions.
    pub fn rename_names(&self, f: &dyn Fn(&str) -> String) -> ProcessTerm {
        match self {
            P::Nil | P::Var(_) => self.clone(),
            P::Tick(p) => tick(p.rename_names(f)),
            P::Restrict(p, c) => restrict(p.rename_names(f), f(c)),
            P::Fix(x, p) => fix(x, p.rename_names(f)),
            P::Par(a, b) => par(a.rename_names(f), b.rename_names(f)),
            P::If { guard, then, otherwise } => if_else(guard.clone(), then.rename_names(f), otherwise.rename_names(f)),
            P::Timeout { prefix, then, timeout: t } => {
                let prefix = match prefix {
                    Prefix::Send { chan, value } => Prefix::Send { chan: f(chan), value: value.clone() },
                    Prefix::Receive { chan, var } => Prefix::Receive { chan: f(chan), var: var.clone() },
                    Prefix::Read { sensor, var } => Prefix::Read { sensor: f(sensor), var: var.clone() },
                    Prefix::Write { actuator, value } => Prefix::Write { actuator: f(actuator), value: value.clone() },
                };
                timeout(prefix, then.rename_names(f), t.rename_names(f))
            }
        }
    }

    /// Checks that every recursion variable is time-guarded: each occurrence
    /// of `X` in `fix X.P` sits under a `tick` or inside the timeout branch
    /// of a timeout construct.
    pub fn check_guarded(&self) -> Result<(), TermError> {
        fn walk(t: &ProcessTerm, unguarded: &mut Vec<String>) -> Result<(), TermError> {
            match t {
                P::Nil => Ok(()),
                P::Var(x) => {
                    if unguarded.contains(x) {
                        Err(TermError::Unguarded(x.clone()))
                    } else {
                        Ok(())
                    }
                }
                P::Tick(p) => walk_guarded(p),
                P::Restrict(p, _) => walk(p, unguarded),
                P::Par(a, b) => {
                    walk(a, unguarded)?;
                    walk(b, unguarded)
                }
                P::Timeout { then, timeout, .. } => {
                    walk(then, unguarded)?;
                    walk_guarded(timeout)
                }
                P::If { then, otherwise, .. } => {
                    walk(then, unguarded)?;
                    walk(otherwise, unguarded)
                }
                P::Fix(x, body) => {
                    let mut inner: Vec<String> = unguarded.iter().filter(|v| *v != x).cloned().collect();
                    inner.push(x.clone());
                    walk(body, &mut inner)
                }
            }
        }
        fn walk_guarded(t: &ProcessTerm) -> Result<(), TermError> {
            walk(t, &mut Vec::new())
        }
        walk(self, &mut Vec::new())
    }

    /// Closed, guarded term; the precondition of the operational semantics.
    pub fn validate(&self) -> Result<(), TermError> {
        if let Some(x) = self.free_proc_vars().into_iter().next() {
            return Err(TermError::FreeProcVar(x));
        }
        if let Some(x) = self.free_data_vars().into_iter().next() {
            return Err(TermError::FreeDataVar(x));
        }
        self.check_guarded()
    }

    /// `T{v/x}`: replaces free occurrences of data variable `var`.
    pub fn substitute_value(&self, var: &str, v: &Value) -> ProcessTerm {
        match self {
            P::Nil | P::Var(_) => self.clone(),
            P::Tick(p) => P::Tick(Arc::new(p.substitute_value(var, v))),
            P::Restrict(p, c) => P::Restrict(Arc::new(p.substitute_value(var, v)), c.clone()),
            P::Fix(x, p) => P::Fix(x.clone(), Arc::new(p.substitute_value(var, v))),
            P::Par(a, b) => par(a.substitute_value(var, v), b.substitute_value(var, v)),
            P::Timeout { prefix, then, timeout: t } => {
                let then = if prefix.binder() == Some(var) { then.clone() } else { Arc::new(then.substitute_value(var, v)) };
                P::Timeout { prefix: prefix.subst_value(var, v), then, timeout: Arc::new(t.substitute_value(var, v)) }
            }
            P::If { guard, then, otherwise } => if_else(
                guard.subst(var, v),
                then.substitute_value(var, v),
                otherwise.substitute_value(var, v),
            ),
        }
    }

    fn rename_data(&self, from: &str, to: &str) -> ProcessTerm {
        match self {
            P::Nil | P::Var(_) => self.clone(),
            P::Tick(p) => tick(p.rename_data(from, to)),
            P::Restrict(p, c) => restrict(p.rename_data(from, to), c.clone()),
            P::Fix(x, p) => fix(x, p.rename_data(from, to)),
            P::Par(a, b) => par(a.rename_data(from, to), b.rename_data(from, to)),
            P::Timeout { prefix, then, timeout: t } => {
                let then = if prefix.binder() == Some(from) { (**then).clone() } else { then.rename_data(from, to) };
                timeout(prefix.rename_data(from, to), then, t.rename_data(from, to))
            }
            P::If { guard, then, otherwise } => {
                if_else(guard.rename(from, to), then.rename_data(from, to), otherwise.rename_data(from, to))
            }
        }
    }

    /// `T{R/X}`: capture-avoiding substitution of a process for a recursion
    /// variable.
    pub fn substitute_proc(&self, x: &str, replacement: &ProcessTerm) -> ProcessTerm {
        let free_p = replacement.free_proc_vars();
        let free_d = replacement.free_data_vars();
        self.subst_proc(x, replacement, &free_p, &free_d)
    }

    fn subst_proc(
        &self,
        x: &str,
        r: &ProcessTerm,
        free_p: &BTreeSet<String>,
        free_d: &BTreeSet<String>,
    ) -> ProcessTerm {
        match self {
            P::Nil => P::Nil,
            P::Var(y) => {
                if y == x {
                    r.clone()
                } else {
                    self.clone()
                }
            }
            P::Tick(p) => tick(p.subst_proc(x, r, free_p, free_d)),
            P::Restrict(p, c) => restrict(p.subst_proc(x, r, free_p, free_d), c.clone()),
            P::Par(a, b) => par(a.subst_proc(x, r, free_p, free_d), b.subst_proc(x, r, free_p, free_d)),
            P::If { guard, then, otherwise } => if_else(
                guard.clone(),
                then.subst_proc(x, r, free_p, free_d),
                otherwise.subst_proc(x, r, free_p, free_d),
            ),
            P::Fix(y, body) => {
                if y == x || !body.free_proc_vars().contains(x) {
                    return self.clone();
                }
                if free_p.contains(y) {
                    let mut used = free_p.clone();
                    used.extend(body.free_proc_vars());
                    used.insert(x.to_string());
                    let fresh = fresh_name(y, &used);
                    let renamed = body.substitute_proc(y, &var(&fresh));
                    fix(&fresh, renamed.subst_proc(x, r, free_p, free_d))
                } else {
                    fix(y, body.subst_proc(x, r, free_p, free_d))
                }
            }
            P::Timeout { prefix, then, timeout: t } => {
                let t = t.subst_proc(x, r, free_p, free_d);
                match prefix.binder() {
                    Some(b) if free_d.contains(b) => {
                        let mut used = free_d.clone();
                        used.extend(then.free_data_vars());
                        let fresh = fresh_name(b, &used);
                        let then = then.rename_data(b, &fresh);
                        timeout(prefix.with_binder(&fresh), then.subst_proc(x, r, free_p, free_d), t)
                    }
                    _ => timeout(prefix.clone(), then.subst_proc(x, r, free_p, free_d), t),
                }
            }
        }
    }

    /// Rule Rec: `fix X.P` becomes `P{fix X.P/X}`. Other terms are returned
    /// unchanged.
    pub fn unfold_fix(&self) -> ProcessTerm {
        match self {
            P::Fix(x, body) => body.substitute_proc(x, self),
            other => other.clone(),
        }
    }

    /// Upper bound on the number of consecutive untimed actions this term
    /// can perform before it must let time pass.
    pub fn instant_bound(&self) -> usize {
        match self {
            P::Nil | P::Tick(_) | P::Var(_) => 0,
            P::Timeout { then, .. } => 1 + then.instant_bound(),
            P::If { then, otherwise, .. } => then.instant_bound().max(otherwise.instant_bound()),
            P::Par(a, b) => a.instant_bound() + b.instant_bound(),
            P::Restrict(p, _) | P::Fix(_, p) => p.instant_bound(),
        }
    }

    /// If `self` is the persistent prefix `fix X.⌊π.P⌋X`, returns `(π, P)`.
    pub fn as_persistent_prefix(&self) -> Option<(&Prefix, &ProcessTerm)> {
        if let P::Fix(x, body) = self {
            if let P::Timeout { prefix, then, timeout } = &**body {
                if matches!(&**timeout, P::Var(y) if y == x) && !then.free_proc_vars().contains(x) {
                    return Some((prefix, then));
                }
            }
        }
        None
    }
}

impl fmt::Display for ProcessTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::print_process(self))
    }
}
