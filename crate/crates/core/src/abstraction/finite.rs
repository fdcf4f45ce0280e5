use std::collections::BTreeSet;
use std::fmt;

use crate::lts::Label;

/// Explicit finite LTS over states `0..num_states`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteLts {
    pub num_states: usize,
    pub initial: usize,
    /// Sorted and free of duplicates.
    pub edges: Vec<(usize, Label, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LtsFormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

impl FiniteLts {
    pub fn new(num_states: usize, initial: usize, edges: impl IntoIterator<Item = (usize, Label, usize)>) -> FiniteLts {
        let set: BTreeSet<(usize, Label, usize)> = edges.into_iter().collect();
        assert!(initial < num_states.max(1), "initial state out of range");
        assert!(set.iter().all(|(s, _, t)| *s < num_states && *t < num_states), "edge endpoint out of range");
        FiniteLts { num_states, initial, edges: set.into_iter().collect() }
    }

    /// Outgoing edges per state.
    pub fn successors(&self) -> Vec<Vec<(Label, usize)>> {
        let mut out = vec![Vec::new(); self.num_states];
        for (s, a, t) in &self.edges {
            out[*s].push((a.clone(), *t));
        }
        out
    }

    pub fn actions(&self) -> BTreeSet<Label> {
        self.edges.iter().map(|(_, a, _)| a.clone()).collect()
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> Vec<bool> {
        let succ = self.successors();
        let mut seen = vec![false; self.num_states];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(s) = stack.pop() {
            for (_, t) in &succ[s] {
                if !seen[*t] {
                    seen[*t] = true;
                    stack.push(*t);
                }
            }
        }
        seen
    }

    /// Parses the text format produced by `Display`.
    pub fn parse(text: &str) -> Result<FiniteLts, LtsFormatError> {
        let err = |line: usize, message: &str| LtsFormatError::Syntax { line, message: message.to_string() };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (n_line, header) = lines.next().ok_or_else(|| err(1, "missing `states` header"))?;
        let num_states: usize = header
            .strip_prefix("states ")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| err(n_line, "expected `states N`"))?;
        let (i_line, header) = lines.next().ok_or_else(|| err(n_line + 1, "missing `initial` header"))?;
        let initial: usize = header
            .strip_prefix("initial ")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| err(i_line, "expected `initial I`"))?;
        if initial >= num_states.max(1) {
            return Err(err(i_line, "initial state out of range"));
        }
        let mut edges = BTreeSet::new();
        for (line, text) in lines {
            let parts: Vec<&str> = text.split_whitespace().collect();
            let [src, action, dst] = parts[..] else {
                return Err(err(line, "expected `src action dst`"));
            };
            let src: usize = src.parse().map_err(|_| err(line, "bad source state"))?;
            let dst: usize = dst.parse().map_err(|_| err(line, "bad target state"))?;
            if src >= num_states || dst >= num_states {
                return Err(err(line, "state out of range"));
            }
            let action = Label::parse(action).ok_or_else(|| err(line, "bad action"))?;
            edges.insert((src, action, dst));
        }
        Ok(FiniteLts { num_states, initial, edges: edges.into_iter().collect() })
    }
}

impl fmt::Display for FiniteLts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "states {}", self.num_states)?;
        writeln!(f, "initial {}", self.initial)?;
        for (s, a, t) in &self.edges {
            writeln!(f, "{s} {a} {t}")?;
        }
        Ok(())
    }
}
