use std::fmt;

use serde::{Serialize, Serializer};

use crate::terms::{parse_rational, Switch, Value};

/// Transition label. `ActWrite` and `SensRead` only occur at process level.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Tau,
    Out(String, Value),
    In(String, Value),
    Tick,
    ActWrite(String, Value),
    SensRead(String, Value),
}

impl Label {
    pub fn is_tau(&self) -> bool {
        matches!(self, Label::Tau)
    }

    pub fn is_tick(&self) -> bool {
        matches!(self, Label::Tick)
    }

    pub fn channel(&self) -> Option<&str> {
        match self {
            Label::Out(c, _) | Label::In(c, _) => Some(c),
            _ => None,
        }
    }

    pub fn value(&self) -> Option<&Value> {
        match self {
            Label::Out(_, v) | Label::In(_, v) | Label::ActWrite(_, v) | Label::SensRead(_, v) => Some(v),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Label::Tau => "tau",
            Label::Out(..) => "out",
            Label::In(..) => "in",
            Label::Tick => "tick",
            Label::ActWrite(..) => "write",
            Label::SensRead(..) => "read",
        }
    }

    /// Inverse of `Display`: `tau`, `tick`, `out(c)`, `out(c,v)`, `in(c,v)`,
    /// `write(a,v)`, `read(s,v)`.
    pub fn parse(text: &str) -> Option<Label> {
        let text = text.trim();
        match text {
            "tau" => return Some(Label::Tau),
            "tick" => return Some(Label::Tick),
            _ => {}
        }
        let open = text.find('(')?;
        let inner = text[open + 1..].strip_suffix(')')?;
        let (chan, value) = match inner.split_once(',') {
            Some((c, v)) => (c.trim().to_string(), parse_value(v.trim())?),
            None => (inner.trim().to_string(), Value::Unit),
        };
        if chan.is_empty() {
            return None;
        }
        match &text[..open] {
            "out" => Some(Label::Out(chan, value)),
            "in" => Some(Label::In(chan, value)),
            "write" => Some(Label::ActWrite(chan, value)),
            "read" => Some(Label::SensRead(chan, value)),
            _ => None,
        }
    }
}

/// Parses a value as printed by `Value`'s `Display`.
pub fn parse_value(text: &str) -> Option<Value> {
    match text {
        "on" => Some(Value::Switch(Switch::On)),
        "off" => Some(Value::Switch(Switch::Off)),
        "()" => Some(Value::Unit),
        _ => match parse_rational(text) {
            Some(r) => Some(Value::Real(r)),
            None if !text.is_empty() && text.chars().all(|c| c.is_alphanumeric() || c == '_') => {
                Some(Value::Name(text.to_string()))
            }
            None => None,
        },
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Tau | Label::Tick => f.write_str(self.kind()),
            Label::Out(c, Value::Unit) | Label::In(c, Value::Unit) => write!(f, "{}({c})", self.kind()),
            Label::Out(c, v) | Label::In(c, v) | Label::ActWrite(c, v) | Label::SensRead(c, v) => {
                write!(f, "{}({c},{v})", self.kind())
            }
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::ratio;

    #[test]
    fn labels_round_trip() {
        let labels = [
            Label::Tau,
            Label::Tick,
            Label::Out("warning".into(), Value::name("L")),
            Label::Out("alarm".into(), Value::Unit),
            Label::In("c".into(), Value::Real(ratio(-21, 2))),
            Label::ActWrite("cool".into(), Value::Switch(Switch::On)),
            Label::SensRead("st".into(), Value::Real(ratio(1, 3))),
        ];
        for l in labels {
            assert_eq!(Label::parse(&l.to_string()), Some(l.clone()), "{l}");
        }
        assert_eq!(Label::parse("jump(x)"), None);
    }
}
