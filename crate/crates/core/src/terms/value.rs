use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

/// Exact rational number used for every physical quantity.
pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `num / den` as an exact rational. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `12`, `-0.4`, `3/7` or `-1.25` exactly.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    if body.is_empty() {
        return None;
    }
    let value = if let Some((num, den)) = body.split_once('/') {
        let num: BigInt = parse_decimal(num)?.to_integer();
        let den: BigInt = parse_decimal(den)?.to_integer();
        if den.is_zero() {
            return None;
        }
        Rational::new(num, den)
    } else {
        parse_decimal(body)?
    };
    Some(if neg { -value } else { value })
}

fn parse_decimal(text: &str) -> Option<Rational> {
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    Some(Rational::new(numer, denom))
}

/// Exact textual form: a terminating decimal when one exists, `p/q` otherwise.
pub fn fmt_rational(r: &Rational) -> String {
    let mut den = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0usize;
    let mut fives = 0usize;
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    if places == 0 {
        return r.numer().to_string();
    }
    let scaled = (r * Rational::from_integer(num_traits::pow(BigInt::from(10), places))).to_integer();
    let neg = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let digits = format!("{:0>width$}", digits, width = places + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    let frac_part = frac_part.trim_end_matches('0');
    let sign = if neg { "-" } else { "" };
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Switch {
    On,
    Off,
}

impl fmt::Display for Switch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Switch::On => f.write_str("on"),
            Switch::Off => f.write_str("off"),
        }
    }
}

/// Data carried on channels, written to actuators and bound by inputs.
///
/// `Unit` is the payload of pure synchronisation (`out alarm`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Real(Rational),
    Switch(Switch),
    Name(String),
    Unit,
}

impl Value {
    pub fn real(n: i64) -> Value {
        Value::Real(rat(n))
    }

    pub fn name(n: impl Into<String>) -> Value {
        Value::Name(n.into())
    }

    pub fn as_real(&self) -> Option<&Rational> {
        match self {
            Value::Real(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(r) => f.write_str(&fmt_rational(r)),
            Value::Switch(s) => s.fmt(f),
            Value::Name(n) => f.write_str(n),
            Value::Unit => f.write_str("()"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Serde helper for exact rationals.
pub fn serialize_rational<S: Serializer>(r: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(&fmt_rational(r))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Arithmetic expression over data variables and literal values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Lit(Value),
    Var(String),
    Neg(Box<Expr>),
    Bin(ArithOp, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound data variable `{0}`")]
    Unbound(String),
    #[error("arithmetic on a non-numeric value")]
    Type,
    #[error("division by zero")]
    DivByZero,
}

impl Expr {
    pub fn lit(v: Value) -> Expr {
        Expr::Lit(v)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn eval(&self) -> Result<Value, EvalError> {
        match self {
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Var(x) => Err(EvalError::Unbound(x.clone())),
            Expr::Neg(e) => match e.eval()? {
                Value::Real(r) => Ok(Value::Real(-r)),
                _ => Err(EvalError::Type),
            },
            Expr::Bin(op, a, b) => {
                let (Value::Real(a), Value::Real(b)) = (a.eval()?, b.eval()?) else {
                    return Err(EvalError::Type);
                };
                Ok(Value::Real(match op {
                    ArithOp::Add => a + b,
                    ArithOp::Sub => a - b,
                    ArithOp::Mul => a * b,
                    ArithOp::Div => {
                        if b.is_zero() {
                            return Err(EvalError::DivByZero);
                        }
                        a / b
                    }
                }))
            }
        }
    }

    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Var(x) => {
                out.insert(x.clone());
            }
            Expr::Neg(e) => e.free_vars(out),
            Expr::Bin(_, a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
        }
    }

    pub fn mentions(&self, var: &str) -> bool {
        match self {
            Expr::Lit(_) => false,
            Expr::Var(x) => x == var,
            Expr::Neg(e) => e.mentions(var),
            Expr::Bin(_, a, b) => a.mentions(var) || b.mentions(var),
        }
    }

    pub fn subst(&self, var: &str, v: &Value) -> Expr {
        match self {
            Expr::Var(x) if x == var => Expr::Lit(v.clone()),
            Expr::Lit(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(e) => Expr::Neg(Box::new(e.subst(var, v))),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.subst(var, v)), Box::new(b.subst(var, v))),
        }
    }

    pub fn rename(&self, from: &str, to: &str) -> Expr {
        match self {
            Expr::Var(x) if x == from => Expr::Var(to.to_string()),
            Expr::Lit(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(e) => Expr::Neg(Box::new(e.rename(from, to))),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.rename(from, to)), Box::new(b.rename(from, to))),
        }
    }

    pub fn map_vars(&self, f: &impl Fn(&str) -> String) -> Expr {
        match self {
            Expr::Lit(_) => self.clone(),
            Expr::Var(x) => Expr::Var(f(x)),
            Expr::Neg(e) => Expr::Neg(Box::new(e.map_vars(f))),
            Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
        }
    }

    /// Views the expression as `coeff * var + offset`; `None` when it is not
    /// affine in `var` or involves non-numeric literals.
    pub fn affine_in(&self, var: &str) -> Option<(Rational, Rational)> {
        match self {
            Expr::Lit(Value::Real(r)) => Some((Rational::zero(), r.clone())),
            Expr::Lit(_) => None,
            Expr::Var(x) if x == var => Some((Rational::one(), Rational::zero())),
            Expr::Var(_) => None,
            Expr::Neg(e) => e.affine_in(var).map(|(k, c)| (-k, -c)),
            Expr::Bin(op, a, b) => {
                let (ka, ca) = a.affine_in(var)?;
                let (kb, cb) = b.affine_in(var)?;
                match op {
                    ArithOp::Add => Some((ka + kb, ca + cb)),
                    ArithOp::Sub => Some((ka - kb, ca - cb)),
                    ArithOp::Mul => {
                        if ka.is_zero() {
                            Some((&ca * kb, ca * cb))
                        } else if kb.is_zero() {
                            Some((ka * &cb, ca * cb))
                        } else {
                            None
                        }
                    }
                    ArithOp::Div => {
                        if !kb.is_zero() || cb.is_zero() {
                            None
                        } else {
                            Some((ka / &cb, ca / cb))
                        }
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
        }
    }

    /// Compares two values. Ordering on non-numeric values is false;
    /// equality is structural.
    pub fn holds(self, a: &Value, b: &Value) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            _ => match (a, b) {
                (Value::Real(a), Value::Real(b)) => match self {
                    CmpOp::Lt => a < b,
                    CmpOp::Le => a <= b,
                    CmpOp::Gt => a > b,
                    CmpOp::Ge => a >= b,
                    CmpOp::Eq | CmpOp::Ne => unreachable!(),
                },
                _ => false,
            },
        }
    }

    pub fn flipped(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            op => op,
        }
    }
}

/// Decidable guard of a conditional.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoolExpr {
    Const(bool),
    Cmp(CmpOp, Expr, Expr),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> BoolExpr {
        BoolExpr::Cmp(op, a, b)
    }

    /// Evaluates a closed guard. Ill-typed or undefined arithmetic inside a
    /// comparison makes that comparison false.
    pub fn eval(&self) -> Result<bool, EvalError> {
        match self {
            BoolExpr::Const(b) => Ok(*b),
            BoolExpr::Cmp(op, a, b) => {
                let (a, b) = match (a.eval(), b.eval()) {
                    (Err(EvalError::Unbound(x)), _) | (_, Err(EvalError::Unbound(x))) => {
                        return Err(EvalError::Unbound(x))
                    }
                    (Ok(a), Ok(b)) => (a, b),
                    _ => return Ok(false),
                };
                Ok(op.holds(&a, &b))
            }
            BoolExpr::Not(b) => Ok(!b.eval()?),
            BoolExpr::And(a, b) => Ok(a.eval()? & b.eval()?),
            BoolExpr::Or(a, b) => Ok(a.eval()? | b.eval()?),
        }
    }

    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            BoolExpr::Const(_) => {}
            BoolExpr::Cmp(_, a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            BoolExpr::Not(b) => b.free_vars(out),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        let mut vars = BTreeSet::new();
        self.free_vars(&mut vars);
        vars.is_empty()
    }

    pub fn mentions(&self, var: &str) -> bool {
        match self {
            BoolExpr::Const(_) => false,
            BoolExpr::Cmp(_, a, b) => a.mentions(var) || b.mentions(var),
            BoolExpr::Not(b) => b.mentions(var),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => a.mentions(var) || b.mentions(var),
        }
    }

    pub fn subst(&self, var: &str, v: &Value) -> BoolExpr {
        match self {
            BoolExpr::Const(_) => self.clone(),
            BoolExpr::Cmp(op, a, b) => BoolExpr::Cmp(*op, a.subst(var, v), b.subst(var, v)),
            BoolExpr::Not(b) => BoolExpr::Not(Box::new(b.subst(var, v))),
            BoolExpr::And(a, b) => BoolExpr::And(Box::new(a.subst(var, v)), Box::new(b.subst(var, v))),
            BoolExpr::Or(a, b) => BoolExpr::Or(Box::new(a.subst(var, v)), Box::new(b.subst(var, v))),
        }
    }

    pub fn map_vars(&self, f: &impl Fn(&str) -> String) -> BoolExpr {
        match self {
            BoolExpr::Const(_) => self.clone(),
            BoolExpr::Cmp(op, a, b) => BoolExpr::Cmp(*op, a.map_vars(f), b.map_vars(f)),
            BoolExpr::Not(b) => BoolExpr::Not(Box::new(b.map_vars(f))),
            BoolExpr::And(a, b) => BoolExpr::And(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            BoolExpr::Or(a, b) => BoolExpr::Or(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
        }
    }

    pub fn rename(&self, from: &str, to: &str) -> BoolExpr {
        match self {
            BoolExpr::Const(_) => self.clone(),
            BoolExpr::Cmp(op, a, b) => BoolExpr::Cmp(*op, a.rename(from, to), b.rename(from, to)),
            BoolExpr::Not(b) => BoolExpr::Not(Box::new(b.rename(from, to))),
            BoolExpr::And(a, b) => BoolExpr::And(Box::new(a.rename(from, to)), Box::new(b.rename(from, to))),
            BoolExpr::Or(a, b) => BoolExpr::Or(Box::new(a.rename(from, to)), Box::new(b.rename(from, to))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(parse_rational("0.4"), Some(ratio(2, 5)));
        assert_eq!(parse_rational("-1.01"), Some(ratio(-101, 100)));
        assert_eq!(parse_rational("3/9"), Some(ratio(1, 3)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("-"), None);
    }

    #[test]
    fn rationals_print_exactly() {
        assert_eq!(fmt_rational(&ratio(99, 10)), "9.9");
        assert_eq!(fmt_rational(&ratio(-1, 20)), "-0.05");
        assert_eq!(fmt_rational(&rat(30)), "30");
        assert_eq!(fmt_rational(&ratio(1, 3)), "1/3");
        assert_eq!(fmt_rational(&ratio(-7, 8)), "-0.875");
    }

    #[test]
    fn guard_evaluation() {
        let g = BoolExpr::cmp(CmpOp::Gt, Expr::lit(Value::Real(ratio(101, 10))), Expr::lit(Value::real(10)));
        assert_eq!(g.eval(), Ok(true));
        let ne = BoolExpr::cmp(CmpOp::Ne, Expr::lit(Value::name("L")), Expr::lit(Value::name("R")));
        assert_eq!(ne.eval(), Ok(true));
        let mixed = BoolExpr::cmp(CmpOp::Lt, Expr::lit(Value::name("L")), Expr::lit(Value::real(1)));
        assert_eq!(mixed.eval(), Ok(false));
        let open = BoolExpr::cmp(CmpOp::Gt, Expr::var("x"), Expr::lit(Value::real(10)));
        assert_eq!(open.eval(), Err(EvalError::Unbound("x".into())));
    }

    #[test]
    fn affine_views() {
        let e = Expr::Bin(
            ArithOp::Sub,
            Box::new(Expr::Bin(ArithOp::Mul, Box::new(Expr::lit(Value::real(2))), Box::new(Expr::var("x")))),
            Box::new(Expr::lit(Value::real(3))),
        );
        assert_eq!(e.affine_in("x"), Some((rat(2), rat(-3))));
        let sq = Expr::Bin(ArithOp::Mul, Box::new(Expr::var("x")), Box::new(Expr::var("x")));
        assert_eq!(sq.affine_in("x"), None);
    }
}
