use std::fmt::Write;

use super::parser::KEYWORDS;
use crate::physics::{Cps, Drift, PhysicalEnv};
use crate::terms::*;

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_alphabetic() || c == '_')
        && cs.all(|c| c.is_alphanumeric() || c == '_')
        && s != "_"
}

fn name(n: &str, scope: &[String]) -> String {
    if is_ident(n) && !KEYWORDS.contains(&n) && !scope.iter().any(|x| x == n) {
        n.to_string()
    } else {
        format!("'{n}")
    }
}

fn value(v: &Value, scope: &[String]) -> String {
    match v {
        Value::Name(n) => name(n, scope),
        Value::Real(r) => {
            let s = fmt_rational(r);
            if s.contains('/') {
                format!("({s})")
            } else {
                s
            }
        }
        other => other.to_string(),
    }
}

fn expr(e: &Expr, level: u8, scope: &[String]) -> String {
    let (own, s) = match e {
        Expr::Lit(v) => (3, value(v, scope)),
        Expr::Var(x) => (3, x.clone()),
        Expr::Neg(a) => (3, format!("-{}", expr(a, 3, scope))),
        Expr::Bin(op, a, b) => {
            let (own, sym) = match op {
                ArithOp::Add => (1, "+"),
                ArithOp::Sub => (1, "-"),
                ArithOp::Mul => (2, "*"),
                ArithOp::Div => (2, "/"),
            };
            (own, format!("{} {sym} {}", expr(a, own, scope), expr(b, own + 1, scope)))
        }
    };
    if own < level {
        format!("({s})")
    } else {
        s
    }
}

fn bexpr(b: &BoolExpr, level: u8, scope: &[String]) -> String {
    let (own, s) = match b {
        BoolExpr::Const(c) => (3, c.to_string()),
        BoolExpr::Cmp(op, a, c) => (3, format!("{} {} {}", expr(a, 1, scope), op.symbol(), expr(c, 1, scope))),
        BoolExpr::Not(a) => (3, format!("!{}", bexpr(a, 3, scope))),
        BoolExpr::And(a, c) => (2, format!("{} && {}", bexpr(a, 2, scope), bexpr(c, 3, scope))),
        BoolExpr::Or(a, c) => (1, format!("{} || {}", bexpr(a, 1, scope), bexpr(c, 2, scope))),
    };
    if own < level {
        format!("({s})")
    } else {
        s
    }
}

fn prefix_text(pi: &Prefix, scope: &[String]) -> String {
    match pi {
        Prefix::Send { chan, value: Expr::Lit(Value::Unit) } => format!("out {chan}"),
        Prefix::Send { chan, value } => format!("out {chan}<{}>", expr(value, 1, scope)),
        Prefix::Receive { chan, var } if var == "_" => format!("in {chan}"),
        Prefix::Receive { chan, var } => format!("in {chan}({var})"),
        Prefix::Read { sensor, var } => format!("read {sensor}({var})"),
        Prefix::Write { actuator, value } => format!("write {actuator}<{}>", expr(value, 1, scope)),
    }
}

// Levels: 0 parallel, 1 sequential forms, 2 atoms.
fn process(t: &ProcessTerm, level: u8, scope: &mut Vec<String>) -> String {
    use ProcessTerm as P;
    let (own, s) = match t {
        P::Nil => (2, "nil".to_string()),
        P::Var(x) => (2, x.clone()),
        P::Restrict(p, c) => (2, format!("{}\\{c}", process(p, 2, scope))),
        P::Par(a, b) => (0, format!("{} | {}", process(a, 1, scope), process(b, 0, scope))),
        P::Tick(_) => {
            let mut k = 0;
            let mut cur = t;
            while let P::Tick(p) = cur {
                k += 1;
                cur = p;
            }
            let head = if k == 1 { "tick".to_string() } else { format!("tick^{k}") };
            (1, format!("{head}. {}", process(cur, 1, scope)))
        }
        P::If { guard, then, otherwise } => (
            1,
            format!(
                "if {} then {} else {}",
                bexpr(guard, 1, scope),
                process(then, 1, scope),
                process(otherwise, 1, scope)
            ),
        ),
        P::Fix(x, body) => match t.as_persistent_prefix() {
            Some((pi, then)) if prefix(pi.clone(), then.clone()) == *t => {
                let head = prefix_text(pi, scope);
                (1, format!("{head}. {}", with_binder(pi, scope, |sc| process(then, 1, sc))))
            }
            _ => (1, format!("fix {x}. {}", process(body, 1, scope))),
        },
        P::Timeout { prefix: pi, then, timeout } => {
            let head = prefix_text(pi, scope);
            let p = with_binder(pi, scope, |sc| process(then, 0, sc));
            (1, format!("[{head}. {p}]{}", process(timeout, 1, scope)))
        }
    };
    if own < level {
        format!("({s})")
    } else {
        s
    }
}

fn with_binder(pi: &Prefix, scope: &mut Vec<String>, f: impl FnOnce(&mut Vec<String>) -> String) -> String {
    match pi.binder() {
        Some(x) => {
            scope.push(x.to_string());
            let s = f(scope);
            scope.pop();
            s
        }
        None => f(scope),
    }
}

/// Renders a process term in the model syntax.
pub fn print_process(t: &ProcessTerm) -> String {
    process(t, 0, &mut Vec::new())
}

fn drift_text(d: &Drift) -> String {
    let mut arms: Vec<String> = d
        .arms
        .iter()
        .map(|(conds, r)| {
            let lhs: Vec<String> = conds.iter().map(|(a, v)| format!("{a} = {}", value(v, &[]))).collect();
            format!("{} -> {}", lhs.join(" & "), fmt_rational(r))
        })
        .collect();
    arms.push(format!("_ -> {}", fmt_rational(&d.default)));
    arms.join(", ")
}

/// Renders the declarations of a physical environment.
pub fn print_env(env: &PhysicalEnv) -> String {
    let plant = &env.plant;
    let mut out = String::new();
    if !env.state.is_empty() {
        out.push_str("vars {\n");
        for (x, v) in &env.state {
            let _ = write!(out, "    {x} = {}", fmt_rational(v));
            if let Some(u) = plant.uncertainty.get(x) {
                let _ = write!(out, " +- {}", fmt_rational(u));
            }
            if let Some(i) = plant.invariant.get(x) {
                let _ = write!(out, " in {i}");
            }
            out.push_str(";\n");
        }
        out.push_str("}\n");
    }
    if !env.actuators.is_empty() {
        out.push_str("actuators {\n");
        for (a, v) in &env.actuators {
            let _ = writeln!(out, "    {a} = {};", value(v, &[]));
        }
        out.push_str("}\n");
    }
    if !plant.sensor_target.is_empty() {
        out.push_str("sensors {\n");
        for (s, x) in &plant.sensor_target {
            let err = plant.sensor_error.get(s).map(fmt_rational).unwrap_or_else(|| "0".to_string());
            let _ = writeln!(out, "    {s} measures {x} +- {err};");
        }
        out.push_str("}\n");
    }
    if !plant.dynamics.is_empty() {
        out.push_str("dynamics {\n");
        for (x, d) in &plant.dynamics {
            let _ = writeln!(out, "    {x}: {};", drift_text(d));
        }
        out.push_str("}\n");
    }
    out
}

/// Renders a whole system as a model file.
pub fn print_model(cps: &Cps) -> String {
    format!("{}\nprocess Main = {};\n\nsystem Main;\n", print_env(&cps.env), print_process(&cps.proc))
}
