use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::lexer::{lex, Spanned, Tok};
use crate::physics::{Cps, CpsError, Drift, EnvBuilder, Interval, PhysicsError};
use crate::terms::*;

/// Syntax error with the set of tokens that would have been accepted.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.col)?;
        match self.expected.len() {
            0 => write!(f, "unexpected {}", self.found),
            1 => write!(f, "expected {}, found {}", self.expected[0], self.found),
            _ => write!(f, "expected one of {}, found {}", self.expected.join(", "), self.found),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Definition(String),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
    #[error(transparent)]
    Cps(#[from] CpsError),
}

/// A parsed model: the system and the named process definitions it used.
#[derive(Clone, Debug)]
pub struct Model {
    pub cps: Cps,
    pub definitions: Vec<(String, ProcessTerm)>,
}

pub const KEYWORDS: &[&str] = &[
    "nil", "tick", "fix", "if", "then", "else", "out", "in", "read", "write", "vars", "actuators", "sensors", "dynamics",
    "process", "system", "measures", "on", "off", "true", "false",
];

type PResult<T> = Result<T, ParseError>;

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    expected: BTreeSet<String>,
    scope: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        self.expected.clear();
        t
    }

    fn error(&self) -> ParseError {
        let here = &self.toks[self.pos];
        ParseError { line: here.line, col: here.col, expected: self.expected.iter().cloned().collect(), found: here.tok.to_string() }
    }

    fn is_sym(&mut self, s: &str) -> bool {
        self.expected.insert(format!("`{s}`"));
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error())
        }
    }

    fn is_kw(&mut self, k: &str) -> bool {
        self.expected.insert(format!("`{k}`"));
        matches!(self.peek(), Tok::Ident(t) if t == k)
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            Err(self.error())
        }
    }

    fn ident(&mut self) -> PResult<String> {
        self.expected.insert("identifier".to_string());
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error()),
        }
    }

    fn number(&mut self) -> PResult<Rational> {
        let neg = self.eat_sym("-");
        self.expected.insert("number".to_string());
        let Tok::Number(n) = self.peek().clone() else { return Err(self.error()) };
        self.bump();
        let mut text = n;
        if let (Tok::Sym("/"), Tok::Number(d)) = (self.peek(), self.peek_at(1)) {
            if !text.contains('.') && !d.contains('.') {
                text = format!("{text}/{d}");
                self.bump();
                self.bump();
            }
        }
        let r = parse_rational(&text).ok_or_else(|| self.error())?;
        Ok(if neg { -r } else { r })
    }

    fn value(&mut self) -> PResult<Value> {
        if self.eat_kw("on") {
            return Ok(Value::Switch(Switch::On));
        }
        if self.eat_kw("off") {
            return Ok(Value::Switch(Switch::Off));
        }
        if let Tok::Quoted(q) = self.peek().clone() {
            self.bump();
            return Ok(Value::Name(q));
        }
        if let Tok::Ident(_) = self.peek() {
            return Ok(Value::Name(self.ident()?));
        }
        Ok(Value::Real(self.number()?))
    }

    fn interval(&mut self) -> PResult<Interval> {
        let lo_open = if self.eat_sym("(") {
            true
        } else {
            self.expect_sym("[")?;
            false
        };
        let lo = self.number()?;
        self.expect_sym(",")?;
        let hi = self.number()?;
        let hi_open = if self.eat_sym(")") {
            true
        } else {
            self.expect_sym("]")?;
            false
        };
        Ok(Interval::new(lo, hi, lo_open, hi_open))
    }

    // ---- expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        let mut acc = self.term()?;
        loop {
            let op = if self.eat_sym("+") {
                ArithOp::Add
            } else if self.eat_sym("-") {
                ArithOp::Sub
            } else {
                return Ok(acc);
            };
            acc = fold(op, acc, self.term()?);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut acc = self.unary()?;
        loop {
            let op = if self.eat_sym("*") {
                ArithOp::Mul
            } else if self.eat_sym("/") {
                ArithOp::Div
            } else {
                return Ok(acc);
            };
            acc = fold(op, acc, self.unary()?);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            return Ok(match self.unary()? {
                Expr::Lit(Value::Real(r)) => Expr::Lit(Value::Real(-r)),
                e => Expr::Neg(Box::new(e)),
            });
        }
        if self.eat_sym("(") {
            let e = self.expr()?;
            self.expect_sym(")")?;
            return Ok(e);
        }
        if self.eat_kw("on") {
            return Ok(Expr::Lit(Value::Switch(Switch::On)));
        }
        if self.eat_kw("off") {
            return Ok(Expr::Lit(Value::Switch(Switch::Off)));
        }
        match self.peek().clone() {
            Tok::Number(_) => Ok(Expr::Lit(Value::Real(self.number()?))),
            Tok::Quoted(q) => {
                self.bump();
                Ok(Expr::Lit(Value::Name(q)))
            }
            _ => {
                let id = self.ident()?;
                Ok(if self.scope.contains(&id) { Expr::Var(id) } else { Expr::Lit(Value::Name(id)) })
            }
        }
    }

    fn relop(&mut self) -> Option<CmpOp> {
        for (s, op) in [
            ("<=", CmpOp::Le),
            (">=", CmpOp::Ge),
            ("<", CmpOp::Lt),
            (">", CmpOp::Gt),
            ("==", CmpOp::Eq),
            ("=", CmpOp::Eq),
            ("!=", CmpOp::Ne),
        ] {
            if self.eat_sym(s) {
                return Some(op);
            }
        }
        None
    }

    fn bexpr(&mut self) -> PResult<BoolExpr> {
        let mut acc = self.band()?;
        while self.eat_sym("||") {
            acc = BoolExpr::Or(Box::new(acc), Box::new(self.band()?));
        }
        Ok(acc)
    }

    fn band(&mut self) -> PResult<BoolExpr> {
        let mut acc = self.bnot()?;
        while self.eat_sym("&&") {
            acc = BoolExpr::And(Box::new(acc), Box::new(self.bnot()?));
        }
        Ok(acc)
    }

    fn bnot(&mut self) -> PResult<BoolExpr> {
        if self.eat_sym("!") {
            return Ok(BoolExpr::Not(Box::new(self.bnot()?)));
        }
        if self.eat_kw("true") {
            return Ok(BoolExpr::Const(true));
        }
        if self.eat_kw("false") {
            return Ok(BoolExpr::Const(false));
        }
        if self.is_sym("(") {
            let save = (self.pos, self.expected.clone());
            self.bump();
            if let Ok(b) = self.bexpr() {
                if self.eat_sym(")") && !self.at_operator() {
                    return Ok(b);
                }
            }
            self.pos = save.0;
            self.expected = save.1;
        }
        let a = self.expr()?;
        let op = self.relop().ok_or_else(|| self.error())?;
        let b = self.expr()?;
        Ok(BoolExpr::Cmp(op, a, b))
    }

    fn at_operator(&self) -> bool {
        matches!(self.peek(), Tok::Sym("<" | "<=" | ">" | ">=" | "=" | "==" | "!=" | "+" | "-" | "*" | "/"))
    }

    // ---- processes ----

    fn proc(&mut self) -> PResult<ProcessTerm> {
        let left = self.seq()?;
        if self.eat_sym("|") {
            Ok(par(left, self.proc()?))
        } else {
            Ok(left)
        }
    }

    fn seq(&mut self) -> PResult<ProcessTerm> {
        if self.eat_kw("tick") {
            let mut k = 1;
            if self.eat_sym("^") {
                self.expected.insert("number".to_string());
                let Tok::Number(n) = self.peek().clone() else { return Err(self.error()) };
                k = n.parse().map_err(|_| self.error())?;
                self.bump();
            }
            self.expect_sym(".")?;
            return Ok(ticks(k, self.seq()?));
        }
        if self.eat_kw("fix") {
            let x = self.ident()?;
            self.expect_sym(".")?;
            return Ok(fix(&x, self.seq()?));
        }
        if self.eat_kw("if") {
            let b = self.bexpr()?;
            self.expect_kw("then")?;
            let p = self.seq()?;
            self.expect_kw("else")?;
            let q = self.seq()?;
            return Ok(if_else(b, p, q));
        }
        if self.eat_sym("[") {
            let pi = self.prefix()?;
            self.expect_sym(".")?;
            let p = self.scoped(&pi, |s| s.proc())?;
            self.expect_sym("]")?;
            let q = self.seq()?;
            return Ok(timeout(pi, p, q));
        }
        if ["out", "in", "read", "write"].iter().any(|k| self.is_kw(k)) {
            let pi = self.prefix()?;
            self.expect_sym(".")?;
            let p = self.scoped(&pi, |s| s.seq())?;
            return Ok(prefix(pi, p));
        }
        let mut t = self.atom()?;
        while self.eat_sym("\\") {
            if self.eat_sym("{") {
                loop {
                    t = restrict(t, self.ident()?);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym("}")?;
            } else {
                t = restrict(t, self.ident()?);
            }
        }
        Ok(t)
    }

    fn scoped<T>(&mut self, pi: &Prefix, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        let bound = pi.binder().map(str::to_string);
        if let Some(x) = &bound {
            self.scope.push(x.clone());
        }
        let r = f(self);
        if bound.is_some() {
            self.scope.pop();
        }
        r
    }

    fn atom(&mut self) -> PResult<ProcessTerm> {
        if self.eat_kw("nil") {
            return Ok(nil());
        }
        if self.eat_sym("(") {
            let p = self.proc()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        Ok(var(&self.ident()?))
    }

    fn binder(&mut self) -> PResult<String> {
        if self.eat_sym("_") {
            Ok("_".to_string())
        } else {
            self.ident()
        }
    }

    fn prefix(&mut self) -> PResult<Prefix> {
        if self.eat_kw("out") {
            let c = self.ident()?;
            if self.eat_sym("<") {
                let e = self.expr()?;
                self.expect_sym(">")?;
                return Ok(Prefix::send(c, e));
            }
            return Ok(Prefix::signal(c));
        }
        if self.eat_kw("in") {
            let c = self.ident()?;
            if self.eat_sym("(") {
                let x = self.binder()?;
                self.expect_sym(")")?;
                return Ok(Prefix::receive(c, x));
            }
            return Ok(Prefix::receive(c, "_"));
        }
        if self.eat_kw("read") {
            let s = self.ident()?;
            self.expect_sym("(")?;
            let x = self.binder()?;
            self.expect_sym(")")?;
            return Ok(Prefix::read(s, x));
        }
        self.expect_kw("write")?;
        let a = self.ident()?;
        self.expect_sym("<")?;
        let e = self.expr()?;
        self.expect_sym(">")?;
        Ok(Prefix::write(a, e))
    }
}

fn fold(op: ArithOp, a: Expr, b: Expr) -> Expr {
    let e = Expr::Bin(op, Box::new(a), Box::new(b));
    if let Expr::Bin(_, a, b) = &e {
        if matches!((&**a, &**b), (Expr::Lit(Value::Real(_)), Expr::Lit(Value::Real(_)))) {
            if let Ok(v) = e.eval() {
                return Expr::Lit(v);
            }
        }
    }
    e
}

struct VarDecl {
    name: String,
    init: Rational,
    uncertainty: Rational,
    invariant: Option<Interval>,
}

/// Parses a `.ccps` model.
pub fn parse_model(src: &str) -> Result<Model, ModelError> {
    let toks = lex(src).map_err(|e| ParseError {
        line: e.line,
        col: e.col,
        expected: Vec::new(),
        found: format!("character `{}`", e.ch),
    })?;
    let mut p = Parser { toks, pos: 0, expected: BTreeSet::new(), scope: Vec::new() };
    let mut vars = Vec::new();
    let mut actuators = Vec::new();
    let mut sensors = Vec::new();
    let mut dynamics = Vec::new();
    let mut defs: Vec<(String, ProcessTerm)> = Vec::new();
    let mut system = None;
    loop {
        p.expected.insert("end of input".to_string());
        if matches!(p.peek(), Tok::Eof) {
            break;
        }
        if p.eat_kw("vars") {
            p.expect_sym("{")?;
            while !p.eat_sym("}") {
                let name = p.ident()?;
                p.expect_sym("=")?;
                let init = p.number()?;
                let uncertainty = if p.eat_sym("+-") { p.number()? } else { rat(0) };
                let invariant = if p.eat_kw("in") { Some(p.interval()?) } else { None };
                p.expect_sym(";")?;
                vars.push(VarDecl { name, init, uncertainty, invariant });
            }
        } else if p.eat_kw("actuators") {
            p.expect_sym("{")?;
            while !p.eat_sym("}") {
                let name = p.ident()?;
                p.expect_sym("=")?;
                let v = p.value()?;
                p.expect_sym(";")?;
                actuators.push((name, v));
            }
        } else if p.eat_kw("sensors") {
            p.expect_sym("{")?;
            while !p.eat_sym("}") {
                let name = p.ident()?;
                p.expect_kw("measures")?;
                let target = p.ident()?;
                let err = if p.eat_sym("+-") { p.number()? } else { rat(0) };
                p.expect_sym(";")?;
                sensors.push((name, target, err));
            }
        } else if p.eat_kw("dynamics") {
            p.expect_sym("{")?;
            while !p.eat_sym("}") {
                let name = p.ident()?;
                p.expect_sym(":")?;
                let mut drift = Drift::constant(rat(0));
                loop {
                    if p.eat_sym("_") {
                        p.expect_sym("->")?;
                        drift.default = p.number()?;
                    } else {
                        let mut conds = Vec::new();
                        loop {
                            let a = p.ident()?;
                            p.expect_sym("=")?;
                            conds.push((a, p.value()?));
                            if !p.eat_sym("&") {
                                break;
                            }
                        }
                        p.expect_sym("->")?;
                        let rate = p.number()?;
                        drift = drift.when(conds, rate);
                    }
                    if !p.eat_sym(",") {
                        break;
                    }
                }
                p.expect_sym(";")?;
                dynamics.push((name, drift));
            }
        } else if p.eat_kw("process") {
            let (line, col) = (p.toks[p.pos].line, p.toks[p.pos].col);
            let name = p.ident()?;
            p.expect_sym("=")?;
            let body = p.proc()?;
            p.expect_sym(";")?;
            if defs.iter().any(|(n, _)| *n == name) {
                return Err(ModelError::Definition(format!("line {line}, column {col}: process `{name}` defined twice")));
            }
            defs.push((name, body));
        } else if p.eat_kw("system") {
            let body = p.proc()?;
            p.expect_sym(";")?;
            if system.replace(body).is_some() {
                return Err(ModelError::Definition("more than one `system` entry".to_string()));
            }
        } else {
            return Err(p.error().into());
        }
    }
    let system = system.ok_or_else(|| ModelError::Definition("missing `system` entry".to_string()))?;
    let mut b = EnvBuilder::new();
    for v in vars {
        b = b.var(&v.name, v.init, v.uncertainty, v.invariant);
    }
    for (a, v) in actuators {
        b = b.actuator(&a, v);
    }
    for (s, t, e) in sensors {
        b = b.sensor(&s, &t, e);
    }
    for (x, d) in dynamics {
        b = b.drift(&x, d);
    }
    let env = b.build()?;
    let table: BTreeMap<String, ProcessTerm> = defs.iter().cloned().collect();
    let proc = expand(&system, &table, &mut Vec::new(), &mut Vec::new())?;
    let cps = Cps::new(env, proc)?;
    Ok(Model { cps, definitions: defs })
}

/// Parses a model and returns its system.
pub fn parse(src: &str) -> Result<Cps, ModelError> {
    parse_model(src).map(|m| m.cps)
}

/// Replaces process names by their definitions. Free recursion variables of
/// an inserted body are captured by binders at the use site.
fn expand(
    t: &ProcessTerm,
    defs: &BTreeMap<String, ProcessTerm>,
    bound: &mut Vec<String>,
    active: &mut Vec<String>,
) -> Result<ProcessTerm, ModelError> {
    use ProcessTerm as P;
    Ok(match t {
        P::Nil => P::Nil,
        P::Var(x) if !bound.contains(x) && defs.contains_key(x) => {
            if active.contains(x) {
                return Err(ModelError::Definition(format!(
                    "process `{x}` refers to itself; use `fix` for recursion"
                )));
            }
            active.push(x.clone());
            let body = expand(&defs[x], defs, bound, active)?;
            active.pop();
            body
        }
        P::Var(_) => t.clone(),
        P::Tick(p) => tick(expand(p, defs, bound, active)?),
        P::Restrict(p, c) => restrict(expand(p, defs, bound, active)?, c.clone()),
        P::Par(a, b) => par(expand(a, defs, bound, active)?, expand(b, defs, bound, active)?),
        P::If { guard, then, otherwise } => {
            if_else(guard.clone(), expand(then, defs, bound, active)?, expand(otherwise, defs, bound, active)?)
        }
        P::Timeout { prefix, then, timeout: q } => {
            timeout(prefix.clone(), expand(then, defs, bound, active)?, expand(q, defs, bound, active)?)
        }
        P::Fix(..) if t.as_persistent_prefix().is_some_and(|(pi, p)| prefix(pi.clone(), p.clone()) == *t) => {
            // Rebuild the sugar so the fresh loop name accounts for the expanded body.
            let (pi, p) = t.as_persistent_prefix().expect("checked above");
            prefix(pi.clone(), expand(p, defs, bound, active)?)
        }
        P::Fix(x, body) => {
            bound.push(x.clone());
            let body = expand(body, defs, bound, active);
            bound.pop();
            fix(x, body?)
        }
    })
}
