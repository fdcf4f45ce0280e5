use std::collections::BTreeMap;
use std::fmt;

use super::build::{AbstractEdge, AbstractLts};
use super::state::Cause;
use crate::lts::{parse_value, Label};
use crate::physics::Interval;
use crate::terms::{Switch, Value};

/// Which edges a query selects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgePattern {
    /// Some actuator is switched on.
    TurnOn,
    TurnOff,
    Write(String, Option<Value>),
    Read(String),
    Tick,
    /// Internal synchronisation.
    Tau,
    Out(String),
    In(String),
    Any,
}

/// Location predicate: an edge pattern and actuator values required in the
/// source state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub pattern: EdgePattern,
    pub when: Vec<(String, Value)>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("cannot parse query `{0}`")]
    Syntax(String),
    #[error("no state matches the query")]
    EmptySelection,
}

impl Query {
    /// Parses `EVENT [when A = V, ...]` where `EVENT` is one of
    /// `turn_on`, `turn_off`, `write A [V]`, `read S`, `tick`, `tau`,
    /// `out C`, `in C`, `any`.
    pub fn parse(text: &str) -> Result<Query, QueryError> {
        let bad = || QueryError::Syntax(text.to_string());
        let (event, when) = match text.split_once(" when ") {
            Some((e, w)) => (e, Some(w)),
            None => (text, None),
        };
        let words: Vec<&str> = event.split_whitespace().collect();
        let pattern = match words[..] {
            ["turn_on"] => EdgePattern::TurnOn,
            ["turn_off"] => EdgePattern::TurnOff,
            ["write", a] => EdgePattern::Write(a.to_string(), None),
            ["write", a, v] => EdgePattern::Write(a.to_string(), Some(parse_value(v).ok_or_else(bad)?)),
            ["read", s] => EdgePattern::Read(s.to_string()),
            ["tick"] => EdgePattern::Tick,
            ["tau"] => EdgePattern::Tau,
            ["out", c] => EdgePattern::Out(c.to_string()),
            ["in", c] => EdgePattern::In(c.to_string()),
            ["any"] => EdgePattern::Any,
            _ => return Err(bad()),
        };
        let mut conditions = Vec::new();
        if let Some(w) = when {
            for cond in w.split(',') {
                let (a, v) = cond.split_once('=').ok_or_else(bad)?;
                let (a, v) = (a.trim(), v.trim());
                if a.is_empty() {
                    return Err(bad());
                }
                conditions.push((a.to_string(), parse_value(v).ok_or_else(bad)?));
            }
        }
        Ok(Query { pattern, when: conditions })
    }

    pub fn matches(&self, lts: &AbstractLts, e: &AbstractEdge) -> bool {
        let Some(src) = lts.state(e.src) else { return false };
        if !self.when.iter().all(|(a, v)| src.actuators.get(a) == Some(v)) {
            return false;
        }
        match (&self.pattern, &e.cause, &e.action) {
            (EdgePattern::Any, _, _) => true,
            (EdgePattern::TurnOn, Cause::Write(_, Value::Switch(Switch::On)), _) => true,
            (EdgePattern::TurnOff, Cause::Write(_, Value::Switch(Switch::Off)), _) => true,
            (EdgePattern::Write(a, v), Cause::Write(b, w), _) => a == b && v.as_ref().map_or(true, |v| v == w),
            (EdgePattern::Read(s), Cause::Read(t), _) => s == t,
            (EdgePattern::Tick, Cause::Tick, _) => true,
            (EdgePattern::Tau, Cause::Internal, _) => true,
            (EdgePattern::Out(c), _, Label::Out(d, _)) => c == d,
            (EdgePattern::In(c), _, Label::In(d, _)) => c == d,
            _ => false,
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.pattern {
            EdgePattern::TurnOn => f.write_str("turn_on")?,
            EdgePattern::TurnOff => f.write_str("turn_off")?,
            EdgePattern::Write(a, None) => write!(f, "write {a}")?,
            EdgePattern::Write(a, Some(v)) => write!(f, "write {a} {v}")?,
            EdgePattern::Read(s) => write!(f, "read {s}")?,
            EdgePattern::Tick => f.write_str("tick")?,
            EdgePattern::Tau => f.write_str("tau")?,
            EdgePattern::Out(c) => write!(f, "out {c}")?,
            EdgePattern::In(c) => write!(f, "in {c}")?,
            EdgePattern::Any => f.write_str("any")?,
        }
        if !self.when.is_empty() {
            let conds: Vec<String> = self.when.iter().map(|(a, v)| format!("{a} = {v}")).collect();
            write!(f, " when {}", conds.join(", "))?;
        }
        Ok(())
    }
}

/// Hull, per variable, of the source boxes of all edges the query selects.
pub fn reach_envelope(lts: &AbstractLts, query: &Query) -> Result<BTreeMap<String, Interval>, QueryError> {
    let mut out: Option<BTreeMap<String, Interval>> = None;
    for e in lts.edges.iter().filter(|e| query.matches(lts, e)) {
        let src = lts.state(e.src).expect("matched edges leave a proper state");
        let acc = out.get_or_insert_with(|| src.boxes.keys().map(|k| (k.clone(), Interval::Empty)).collect());
        for (x, b) in &src.boxes {
            let joined = acc[x].hull(b);
            acc.insert(x.clone(), joined);
        }
    }
    out.ok_or(QueryError::EmptySelection)
}

/// `VAR in (LO, HI]` lines.
pub fn format_envelope(env: &BTreeMap<String, Interval>) -> String {
    env.iter().map(|(x, b)| format!("{x} in {b}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::{build_abstract_lts, AbstractionConfig};
    use crate::casestudy::{build_engine, EngineParams};

    fn envelope(p: EngineParams, q: &str) -> String {
        let lts = build_abstract_lts(&build_engine(&p), &AbstractionConfig::default()).unwrap();
        format_envelope(&reach_envelope(&lts, &Query::parse(q).unwrap()).unwrap())
    }

    #[test]
    fn engine_envelopes() {
        assert_eq!(envelope(EngineParams::eng(), "turn_on"), "temp in (9.9, 11.5]\n");
        assert_eq!(envelope(EngineParams::eng(), "turn_off"), "temp in (2.9, 8.5]\n");
        assert_eq!(envelope(EngineParams::eng_bar(), "read st when cool = on"), "temp in (3.9, 9.5]\n");
    }

    #[test]
    fn query_syntax() {
        for q in ["turn_on", "write cool on when cool = off", "read st", "out warning", "any when cool = on"] {
            assert_eq!(Query::parse(q).unwrap().to_string(), q);
        }
        assert!(Query::parse("jump").is_err());
        assert!(Query::parse("tick when cool").is_err());
        let lts = build_abstract_lts(&build_engine(&EngineParams::eng()), &AbstractionConfig::default()).unwrap();
        assert_eq!(reach_envelope(&lts, &Query::parse("out warning").unwrap()), Err(QueryError::EmptySelection));
    }
}
