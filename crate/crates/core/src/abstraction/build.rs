use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::finite::FiniteLts;
use super::state::{AbstractNode, AbstractState, AbstractionError, Cause, PlantView};
use crate::lts::{Label, SysStep};
use crate::physics::{Cps, Interval};
use crate::terms::{canonical, ProcessTerm, Value};

/// How states at the same location are merged.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Widening {
    /// One state per (control, actuators), boxes joined by interval hull.
    Hull,
    /// States distinguished by their boxes.
    Exact,
}

#[derive(Clone, Debug)]
pub struct AbstractionConfig {
    pub max_states: usize,
    pub widening: Widening,
    /// Exploration depth in transitions; states at this depth are not
    /// expanded.
    pub max_depth: Option<usize>,
}

impl Default for AbstractionConfig {
    fn default() -> Self {
        AbstractionConfig { max_states: 100_000, widening: Widening::Hull, max_depth: None }
    }
}

impl AbstractionConfig {
    pub fn exact(max_states: usize) -> AbstractionConfig {
        AbstractionConfig { max_states, widening: Widening::Exact, max_depth: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AbstractEdge {
    pub src: usize,
    pub action: Label,
    pub cause: Cause,
    pub dst: usize,
}

/// Abstract LTS with its states and the rule behind each edge.
#[derive(Clone, Debug)]
pub struct AbstractLts {
    pub nodes: Vec<AbstractNode>,
    pub initial: usize,
    pub edges: Vec<AbstractEdge>,
    /// Some box was enlarged by a hull join.
    pub widened: bool,
    /// Some state was left unexpanded because of the depth bound.
    pub truncated: bool,
    pub depth: Vec<usize>,
    pub view: PlantView,
}

type Location = (ProcessTerm, BTreeMap<String, Value>);

/// Explores the abstraction of `m` from its initial state.
pub fn build_abstract_lts(m: &Cps, config: &AbstractionConfig) -> Result<AbstractLts, AbstractionError> {
    let view = PlantView { env: m.env.clone() };
    let mut b = Builder { view, config: config.clone(), nodes: Vec::new(), depth: Vec::new(), deadlock: None, widened: false, truncated: false };
    if !m.env.invariant_holds() {
        let d = b.deadlock();
        return Ok(b.finish(d, Vec::new()));
    }
    let init = AbstractState::of(m);
    match config.widening {
        Widening::Hull => b.hull(init),
        Widening::Exact => b.exact(init),
    }
}

struct Builder {
    view: PlantView,
    config: AbstractionConfig,
    nodes: Vec<AbstractNode>,
    depth: Vec<usize>,
    deadlock: Option<usize>,
    widened: bool,
    truncated: bool,
}

impl Builder {
    fn deadlock(&mut self) -> usize {
        if let Some(d) = self.deadlock {
            return d;
        }
        self.nodes.push(AbstractNode::Deadlock);
        self.depth.push(usize::MAX);
        self.deadlock = Some(self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn add(&mut self, node: AbstractNode, depth: usize) -> Result<usize, AbstractionError> {
        if self.nodes.len() >= self.config.max_states {
            return Err(AbstractionError::StateBudgetExceeded(self.config.max_states));
        }
        self.nodes.push(node);
        self.depth.push(depth);
        Ok(self.nodes.len() - 1)
    }

    fn expandable(&mut self, n: usize) -> bool {
        match self.config.max_depth {
            Some(d) if self.depth[n] >= d => {
                self.truncated = true;
                false
            }
            _ => true,
        }
    }

    fn state(&self, n: usize) -> &AbstractState {
        match &self.nodes[n] {
            AbstractNode::State(s) => s,
            AbstractNode::Deadlock => unreachable!("deadlock has no successors"),
        }
    }

    fn hull(mut self, init: AbstractState) -> Result<AbstractLts, AbstractionError> {
        let mut index: HashMap<Location, usize> = HashMap::new();
        index.insert(init.location(), 0);
        self.add(AbstractNode::State(init), 0)?;
        let mut queue = VecDeque::from([0]);
        let mut queued = vec![true];
        let mut pops = 0usize;
        let pop_limit = self.config.max_states.saturating_mul(256);
        while let Some(n) = queue.pop_front() {
            queued[n] = false;
            pops += 1;
            if pops > pop_limit {
                return Err(AbstractionError::StateBudgetExceeded(self.config.max_states));
            }
            if !self.expandable(n) {
                continue;
            }
            let d = self.depth[n] + 1;
            for succ in self.view.successors(self.state(n))? {
                let AbstractNode::State(t) = succ.target else {
                    self.deadlock();
                    queued.resize(self.nodes.len(), false);
                    continue;
                };
                let loc = t.location();
                match index.get(&loc) {
                    None => {
                        let id = self.add(AbstractNode::State(t), d)?;
                        index.insert(loc, id);
                        queued.resize(self.nodes.len(), false);
                        queued[id] = true;
                        queue.push_back(id);
                    }
                    Some(&id) => {
                        if d < self.depth[id] {
                            self.depth[id] = d;
                        }
                        let AbstractNode::State(old) = &mut self.nodes[id] else { unreachable!() };
                        let mut grew = false;
                        for (x, b) in &t.boxes {
                            let joined = old.boxes[x].hull(b);
                            if joined != old.boxes[x] {
                                old.boxes.insert(x.clone(), joined);
                                grew = true;
                            }
                        }
                        if grew {
                            self.widened = true;
                            if !queued[id] {
                                queued[id] = true;
                                queue.push_back(id);
                            }
                        }
                    }
                }
            }
        }
        let mut edges = BTreeSet::new();
        for n in 0..self.nodes.len() {
            if matches!(self.nodes[n], AbstractNode::Deadlock) {
                continue;
            }
            if self.config.max_depth.is_some_and(|d| self.depth[n] >= d) {
                continue;
            }
            for succ in self.view.successors(self.state(n))? {
                let dst = match &succ.target {
                    AbstractNode::Deadlock => self.deadlock.expect("deadlock node exists"),
                    AbstractNode::State(t) => index[&t.location()],
                };
                edges.insert(AbstractEdge { src: n, action: succ.action, cause: succ.cause, dst });
            }
        }
        Ok(self.finish(0, edges.into_iter().collect()))
    }

    fn exact(mut self, init: AbstractState) -> Result<AbstractLts, AbstractionError> {
        let mut index: HashMap<AbstractState, usize> = HashMap::new();
        index.insert(init.clone(), 0);
        self.add(AbstractNode::State(init), 0)?;
        let mut queue = VecDeque::from([0]);
        let mut edges = BTreeSet::new();
        while let Some(n) = queue.pop_front() {
            if !self.expandable(n) {
                continue;
            }
            let d = self.depth[n] + 1;
            for succ in self.view.successors(self.state(n))? {
                let dst = match succ.target {
                    AbstractNode::Deadlock => self.deadlock(),
                    AbstractNode::State(t) => match index.get(&t) {
                        Some(&id) => id,
                        None => {
                            let id = self.add(AbstractNode::State(t.clone()), d)?;
                            index.insert(t, id);
                            queue.push_back(id);
                            id
                        }
                    },
                };
                edges.insert(AbstractEdge { src: n, action: succ.action, cause: succ.cause, dst });
            }
        }
        Ok(self.finish(0, edges.into_iter().collect()))
    }

    fn finish(self, initial: usize, edges: Vec<AbstractEdge>) -> AbstractLts {
        AbstractLts {
            nodes: self.nodes,
            initial,
            edges,
            widened: self.widened,
            truncated: self.truncated,
            depth: self.depth,
            view: self.view,
        }
    }
}

impl AbstractLts {
    pub fn num_states(&self) -> usize {
        self.nodes.len()
    }

    /// Forgets states and causes.
    pub fn to_finite(&self) -> FiniteLts {
        FiniteLts::new(self.nodes.len(), self.initial, self.edges.iter().map(|e| (e.src, e.action.clone(), e.dst)))
    }

    pub fn deadlock(&self) -> Option<usize> {
        self.nodes.iter().position(|n| matches!(n, AbstractNode::Deadlock))
    }

    pub fn state(&self, n: usize) -> Option<&AbstractState> {
        match &self.nodes[n] {
            AbstractNode::State(s) => Some(s),
            AbstractNode::Deadlock => None,
        }
    }

    pub fn out_edges(&self) -> Vec<&AbstractEdge> {
        self.edges.iter().filter(|e| matches!(e.action, Label::Out(..))).collect()
    }

    /// States (deadlock included) with no outgoing edge.
    pub fn stuck_states(&self) -> Vec<usize> {
        let with_succ: BTreeSet<usize> = self.edges.iter().map(|e| e.src).collect();
        (0..self.nodes.len()).filter(|n| !with_succ.contains(n)).collect()
    }

    pub fn edges_from(&self, n: usize) -> impl Iterator<Item = &AbstractEdge> {
        let start = self.edges.partition_point(|e| e.src < n);
        self.edges[start..].iter().take_while(move |e| e.src == n)
    }

    /// Checks that a concrete run from `start` is matched edge by edge by
    /// states whose boxes contain the concrete values. Returns the index of
    /// the first unmatched step.
    pub fn embed_run(&self, start: &Cps, steps: &[SysStep]) -> Result<(), usize> {
        let fits = |n: usize, m: &Cps, control: &ProcessTerm| match &self.nodes[n] {
            AbstractNode::Deadlock => !m.env.invariant_holds(),
            AbstractNode::State(s) => {
                m.env.invariant_holds() && s.actuators == m.env.actuators && s.control == *control && s.covers(&m.env)
            }
        };
        if !fits(self.initial, start, &canonical(&start.proc)) {
            return Err(0);
        }
        let mut current = BTreeSet::from([self.initial]);
        for (i, step) in steps.iter().enumerate() {
            let control = canonical(&step.successor.proc);
            let next: BTreeSet<usize> = current
                .iter()
                .flat_map(|&n| self.edges_from(n))
                .filter(|e| e.action == step.action && fits(e.dst, &step.successor, &control))
                .map(|e| e.dst)
                .collect();
            if next.is_empty() {
                return Err(i);
            }
            current = next;
        }
        Ok(())
    }

    /// Hull of the boxes of all states.
    pub fn overall_boxes(&self) -> BTreeMap<String, Interval> {
        let mut out: BTreeMap<String, Interval> = BTreeMap::new();
        for node in &self.nodes {
            if let AbstractNode::State(s) = node {
                for (x, b) in &s.boxes {
                    let e = out.entry(x.clone()).or_insert(Interval::Empty);
                    *e = e.hull(b);
                }
            }
        }
        out
    }
}
