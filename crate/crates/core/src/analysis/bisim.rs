use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::abstraction::FiniteLts;
use crate::lts::Label;

/// Weak transitions of an LTS: `τ` edges are the reflexive-transitive
/// closure of `τ`, a visible `a` edge stands for `⇒ a ⇒`.
#[derive(Clone, Debug)]
pub struct Saturated {
    pub initial: usize,
    /// Sorted, duplicate free.
    pub succ: Vec<Vec<(Label, usize)>>,
}

impl Saturated {
    pub fn new(l: &FiniteLts) -> Saturated {
        let n = l.num_states;
        let raw = l.successors();
        let closure: Vec<Vec<usize>> = (0..n)
            .map(|s| {
                let mut seen = vec![false; n];
                let mut stack = vec![s];
                seen[s] = true;
                let mut out = Vec::new();
                while let Some(u) = stack.pop() {
                    out.push(u);
                    for (a, v) in &raw[u] {
                        if a.is_tau() && !seen[*v] {
                            seen[*v] = true;
                            stack.push(*v);
                        }
                    }
                }
                out.sort_unstable();
                out
            })
            .collect();
        let succ = (0..n)
            .map(|s| {
                let mut set = BTreeSet::new();
                for &u in &closure[s] {
                    set.insert((Label::Tau, u));
                    for (a, v) in &raw[u] {
                        if !a.is_tau() {
                            for &w in &closure[*v] {
                                set.insert((a.clone(), w));
                            }
                        }
                    }
                }
                set.into_iter().collect()
            })
            .collect();
        Saturated { initial: l.initial, succ }
    }

    pub fn num_states(&self) -> usize {
        self.succ.len()
    }

    /// Weak `a`-successors of `s` (`τ` includes `s` itself).
    pub fn after<'a>(&'a self, s: usize, a: &'a Label) -> impl Iterator<Item = usize> + 'a {
        self.succ[s].iter().filter(move |(b, _)| b == a).map(|(_, t)| *t)
    }

    /// Disjoint union, the states of `other` shifted by `self.num_states()`.
    fn union(&self, other: &Saturated) -> Vec<Vec<(Label, usize)>> {
        let k = self.num_states();
        let mut out = self.succ.clone();
        out.extend(other.succ.iter().map(|row| row.iter().map(|(a, t)| (a.clone(), t + k)).collect()));
        out
    }
}

/// Hennessy-Milner formula with weak modalities: `<a>φ` holds when some
/// `⇒ a ⇒` successor (`⇒` for `τ`) satisfies `φ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Hml {
    True,
    Not(Box<Hml>),
    And(Vec<Hml>),
    Diamond(Label, Box<Hml>),
}

impl Hml {
    pub fn holds(&self, l: &Saturated, s: usize) -> bool {
        match self {
            Hml::True => true,
            Hml::Not(f) => !f.holds(l, s),
            Hml::And(fs) => fs.iter().all(|f| f.holds(l, s)),
            Hml::Diamond(a, f) => l.after(s, a).any(|t| f.holds(l, t)),
        }
    }

    pub fn negations(&self) -> usize {
        match self {
            Hml::True => 0,
            Hml::Not(f) => 1 + f.negations(),
            Hml::And(fs) => fs.iter().map(Hml::negations).sum(),
            Hml::Diamond(_, f) => f.negations(),
        }
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            Hml::True => 0,
            Hml::Not(f) => f.modal_depth(),
            Hml::And(fs) => fs.iter().map(Hml::modal_depth).max().unwrap_or(0),
            Hml::Diamond(_, f) => 1 + f.modal_depth(),
        }
    }
}

impl fmt::Display for Hml {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hml::True => f.write_str("tt"),
            Hml::Not(g) => write!(f, "!{g}"),
            Hml::And(gs) => {
                let parts: Vec<String> = gs.iter().map(|g| g.to_string()).collect();
                write!(f, "({})", parts.join(" & "))
            }
            Hml::Diamond(a, g) => write!(f, "<{a}>{g}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A formula true at the initial state of one LTS and false at the other's.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub formula: Hml,
    pub satisfied_by: Side,
}

impl Witness {
    /// The attacker's path: the modalities along the first conjunct of each
    /// level.
    pub fn actions(&self) -> Vec<Label> {
        let mut out = Vec::new();
        let mut f = &self.formula;
        loop {
            match f {
                Hml::True => return out,
                Hml::Not(g) => f = g,
                Hml::And(gs) => match gs.first() {
                    Some(g) => f = g,
                    None => return out,
                },
                Hml::Diamond(a, g) => {
                    out.push(a.clone());
                    f = g;
                }
            }
        }
    }

    /// Checks the formula on both LTSs.
    pub fn validate(&self, left: &FiniteLts, right: &FiniteLts) -> bool {
        let (l, r) = (Saturated::new(left), Saturated::new(right));
        let on_left = self.formula.holds(&l, l.initial);
        let on_right = self.formula.holds(&r, r.initial);
        match self.satisfied_by {
            Side::Left => on_left && !on_right,
            Side::Right => on_right && !on_left,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BisimVerdict {
    /// Pairs of reachable states related by the largest weak bisimulation.
    Bisimilar { relation: Vec<(usize, usize)> },
    NotBisimilar { witness: Witness },
}

impl BisimVerdict {
    pub fn is_bisimilar(&self) -> bool {
        matches!(self, BisimVerdict::Bisimilar { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            BisimVerdict::NotBisimilar { witness } => Some(witness),
            BisimVerdict::Bisimilar { .. } => None,
        }
    }

    pub fn report(&self) -> BisimReport {
        match self {
            BisimVerdict::Bisimilar { relation } => BisimReport {
                verdict: "bisimilar",
                level: "box abstraction",
                relation_size: Some(relation.len()),
                witness: None,
                formula: None,
                satisfied_by: None,
            },
            BisimVerdict::NotBisimilar { witness } => BisimReport {
                verdict: "not bisimilar",
                level: "box abstraction",
                relation_size: None,
                witness: Some(witness.actions().iter().map(|a| a.to_string()).collect()),
                formula: Some(witness.formula.to_string()),
                satisfied_by: Some(witness.satisfied_by),
            },
        }
    }
}

/// JSON form of a verdict.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BisimReport {
    pub verdict: &'static str,
    pub level: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relation_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub satisfied_by: Option<Side>,
}

/// Partition refinement over a saturated LTS, keeping every level.
struct Refinement {
    succ: Vec<Vec<(Label, usize)>>,
    /// `levels[k][s]`: block of `s` after `k` rounds.
    levels: Vec<Vec<usize>>,
    memo: HashMap<(usize, usize), Hml>,
}

impl Refinement {
    fn run(succ: Vec<Vec<(Label, usize)>>) -> Refinement {
        let n = succ.len();
        let mut levels = vec![vec![0; n]];
        let mut count = usize::from(n > 0);
        loop {
            let prev = levels.last().expect("level 0 exists");
            let mut ids: HashMap<(usize, Vec<(Label, usize)>), usize> = HashMap::new();
            let next: Vec<usize> = (0..n)
                .map(|s| {
                    let key = (prev[s], Self::signature(&succ, prev, s));
                    let fresh = ids.len();
                    *ids.entry(key).or_insert(fresh)
                })
                .collect();
            let stable = ids.len() == count;
            count = ids.len();
            levels.push(next);
            if stable {
                break;
            }
        }
        Refinement { succ, levels, memo: HashMap::new() }
    }

    fn signature(succ: &[Vec<(Label, usize)>], blocks: &[usize], s: usize) -> Vec<(Label, usize)> {
        let set: BTreeSet<(Label, usize)> = succ[s].iter().map(|(a, t)| (a.clone(), blocks[*t])).collect();
        set.into_iter().collect()
    }

    fn final_block(&self, s: usize) -> usize {
        self.levels.last().expect("levels")[s]
    }

    /// A formula true at `s` and false at `t`; requires them in different
    /// final blocks. Splits at the earliest level that separates them and
    /// prefers the smallest action.
    fn distinguish(&mut self, s: usize, t: usize) -> Hml {
        if let Some(f) = self.memo.get(&(s, t)) {
            return f.clone();
        }
        let k = (1..self.levels.len()).find(|&k| self.levels[k][s] != self.levels[k][t]).expect("states are separated");
        let prev = &self.levels[k - 1];
        let sig_s = Self::signature(&self.succ, prev, s);
        let sig_t: BTreeSet<_> = Self::signature(&self.succ, prev, t).into_iter().collect();
        let f = match sig_s.into_iter().find(|x| !sig_t.contains(x)) {
            Some((a, block)) => {
                let s2 = self.succ[s].iter().find(|(b, u)| *b == a && prev[*u] == block).expect("signature entry").1;
                let ts: BTreeSet<usize> = self.succ[t].iter().filter(|(b, _)| *b == a).map(|(_, u)| *u).collect();
                let mut conj: Vec<Hml> = Vec::new();
                for t2 in ts {
                    let g = self.distinguish(s2, t2);
                    if !conj.contains(&g) {
                        conj.push(g);
                    }
                }
                let body = match conj.len() {
                    0 => Hml::True,
                    1 => conj.pop().expect("one conjunct"),
                    _ => Hml::And(conj),
                };
                Hml::Diamond(a, Box::new(body))
            }
            None => Hml::Not(Box::new(self.distinguish(t, s))),
        };
        self.memo.insert((s, t), f.clone());
        f
    }
}

/// Decides weak bisimilarity of the initial states of two finite LTSs.
pub fn weak_bisim(l1: &FiniteLts, l2: &FiniteLts) -> BisimVerdict {
    let (s1, s2) = (Saturated::new(l1), Saturated::new(l2));
    let k = s1.num_states();
    let mut r = Refinement::run(s1.union(&s2));
    let (i1, i2) = (l1.initial, l2.initial + k);
    if r.final_block(i1) == r.final_block(i2) {
        let (reach1, reach2) = (l1.reachable(), l2.reachable());
        let relation = (0..l1.num_states)
            .filter(|&s| reach1[s])
            .flat_map(|s| (0..l2.num_states).filter(|&t| reach2[t]).map(move |t| (s, t)))
            .filter(|&(s, t)| r.final_block(s) == r.final_block(t + k))
            .collect();
        return BisimVerdict::Bisimilar { relation };
    }
    let left = r.distinguish(i1, i2);
    let right = r.distinguish(i2, i1);
    // Prefer the shorter attack, then the smaller action sequence, then
    // fewer negations.
    let wl = Witness { formula: left, satisfied_by: Side::Left };
    let wr = Witness { formula: right, satisfied_by: Side::Right };
    let key = |w: &Witness| (w.actions().len(), w.actions(), w.formula.negations());
    let witness = if key(&wr) < key(&wl) { wr } else { wl };
    BisimVerdict::NotBisimilar { witness }
}

/// Weak bisimilarity of two states of the same LTS.
pub fn weakly_bisimilar_states(l: &FiniteLts, s: usize, t: usize) -> bool {
    let r = Refinement::run(Saturated::new(l).succ);
    r.final_block(s) == r.final_block(t)
}
