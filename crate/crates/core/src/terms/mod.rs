//! Process terms, data values, substitution and structural congruence.

mod congruence;
mod process;
mod value;
mod wellformed;

pub use congruence::{alpha_eq, canonical, structurally_congruent};
pub use process::{
    fix, fresh_name, if_else, nil, par, prefix, restrict, tick, ticks, timeout, var, Prefix, ProcRef, ProcessTerm,
    TermError,
};
pub use value::{
    fmt_rational, parse_rational, rat, ratio, rational_to_f64, serialize_rational, ArithOp, BoolExpr, CmpOp,
    EvalError, Expr, Rational, Switch, Value,
};
pub use wellformed::{well_formed, DeviceProblem, WellFormednessError};

/// Free function form of [`ProcessTerm::substitute_value`].
pub fn substitute_value(term: &ProcessTerm, var: &str, v: &Value) -> ProcessTerm {
    term.substitute_value(var, v)
}

/// Free function form of [`ProcessTerm::unfold_fix`].
pub fn unfold_fix(term: &ProcessTerm) -> ProcessTerm {
    term.unfold_fix()
}
