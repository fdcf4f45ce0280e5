use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::abstraction::{AbstractNode, AbstractState, AbstractSucc, AbstractionError, Cause, PlantView};
use crate::lts::{
    run_trace, ActionPattern, ActionSelector, DisturbanceResolver, Label, LtsError, TickScript, TraceRun, Via,
};
use crate::physics::{Cps, Interval};
use crate::terms::{Rational, Value};

/// True when `label` has the shape `p`.
pub fn pattern_matches(p: &ActionPattern, label: &Label) -> bool {
    match (p, label) {
        (ActionPattern::Any, _) => true,
        (ActionPattern::Tau, Label::Tau) | (ActionPattern::Tick, Label::Tick) => true,
        (ActionPattern::Out { chan, value }, Label::Out(c, v)) => chan == c && value.as_ref().map_or(true, |x| x == v),
        (ActionPattern::In { chan, value }, Label::In(c, v)) => chan == c && value == v,
        _ => false,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error("abstract path found but its concrete replay failed: {0}")]
    ConcretizationFailed(String),
    #[error("search budget of {0} abstract states exceeded")]
    BudgetExceeded(usize),
}

/// A concrete run ending in the target action, with the resolver choices
/// that reproduce it.
#[derive(Clone, Debug)]
pub struct FoundTrace {
    pub script: Vec<ActionSelector>,
    pub ticks: Vec<TickScript>,
    pub sensed: Vec<Rational>,
    pub run: TraceRun,
}

impl FoundTrace {
    /// Time slot (1-based) of the final action.
    pub fn target_slot(&self) -> usize {
        self.run.records.last().map_or(0, |r| r.time_slot)
    }

    pub fn resolver(&self) -> DisturbanceResolver {
        DisturbanceResolver::scripted(self.ticks.clone(), self.sensed.clone())
    }

    /// Replays the script from `m` with the recorded choices.
    pub fn replay(&self, m: &Cps) -> Result<TraceRun, LtsError> {
        run_trace(m, &self.script, &mut self.resolver())
    }
}

const SEARCH_BUDGET: usize = 200_000;

/// Searches the exact-box abstraction of `m` for a path with at most
/// `bound` ticks whose last edge matches `target`, fewest ticks first, and
/// turns it into a concrete run.
pub fn find_trace_to(m: &Cps, target: &ActionPattern, bound: usize) -> Result<Option<FoundTrace>, SearchError> {
    if !m.env.invariant_holds() {
        return Ok(None);
    }
    let view = PlantView { env: m.env.clone() };
    let init = AbstractState::of(m);
    let mut states = vec![init.clone()];
    let mut index: HashMap<AbstractState, usize> = HashMap::from([(init, 0)]);
    let mut cost = vec![0usize];
    let mut parent: Vec<Option<(usize, AbstractSucc)>> = vec![None];
    let mut done = vec![false];
    let mut deque = VecDeque::from([0usize]);
    while let Some(n) = deque.pop_front() {
        if done[n] {
            continue;
        }
        done[n] = true;
        for succ in view.successors(&states[n])? {
            let c = cost[n] + usize::from(succ.action.is_tick());
            if c > bound {
                continue;
            }
            let AbstractNode::State(t) = &succ.target else { continue };
            if pattern_matches(target, &succ.action) {
                let mut path = vec![(n, succ.clone())];
                let mut cur = n;
                while let Some((p, e)) = &parent[cur] {
                    path.push((*p, e.clone()));
                    cur = *p;
                }
                path.reverse();
                let steps: Vec<(AbstractState, AbstractSucc)> =
                    path.into_iter().map(|(src, e)| (states[src].clone(), e)).collect();
                return concretize(m, &view, &steps).map(Some);
            }
            let id = match index.get(t) {
                Some(&id) => id,
                None => {
                    if states.len() >= SEARCH_BUDGET {
                        return Err(SearchError::BudgetExceeded(SEARCH_BUDGET));
                    }
                    states.push(t.clone());
                    cost.push(usize::MAX);
                    parent.push(None);
                    done.push(false);
                    index.insert(t.clone(), states.len() - 1);
                    states.len() - 1
                }
            };
            if c < cost[id] {
                cost[id] = c;
                parent[id] = Some((n, succ.clone()));
                if succ.action.is_tick() {
                    deque.push_back(id);
                } else {
                    deque.push_front(id);
                }
            }
        }
    }
    Ok(None)
}

fn drift(view: &PlantView, x: &str, actuators: &BTreeMap<String, Value>) -> Rational {
    view.env.plant.dynamics.get(x).map(|d| d.rate(actuators).clone()).unwrap_or_else(num_traits::Zero::zero)
}

fn target_box(s: &AbstractSucc) -> &BTreeMap<String, Interval> {
    match &s.target {
        AbstractNode::State(t) => &t.boxes,
        AbstractNode::Deadlock => unreachable!("paths avoid the deadlock node"),
    }
}

fn pick(i: &Interval, what: &str) -> Result<Rational, SearchError> {
    i.midpoint().ok_or_else(|| SearchError::ConcretizationFailed(format!("no feasible value for `{what}`")))
}

/// Picks concrete choices along an abstract path. A backward pass computes,
/// per step, the values from which the rest of the path stays feasible; a
/// forward pass then takes the midpoint of each feasible window.
fn concretize(m: &Cps, view: &PlantView, path: &[(AbstractState, AbstractSucc)]) -> Result<FoundTrace, SearchError> {
    let plant = &view.env.plant;
    let mut feasible: Vec<BTreeMap<String, Interval>> = vec![target_box(&path.last().expect("non-empty path").1).clone()];
    for (src, e) in path.iter().rev() {
        let after = feasible.last().expect("seeded");
        let mut before = BTreeMap::new();
        for (x, b) in &src.boxes {
            let mut f = after[x].clone();
            if e.cause == Cause::Tick {
                let drift = drift(view, x, &src.actuators);
                f = f.shift(&-drift).widen(&view.env.uncertainty_of(x));
            }
            if let (Cause::Read(s), Some(sensed)) = (&e.cause, &e.sensed) {
                if plant.sensor_target[s] == *x {
                    f = f.intersect(&sensed.hull().widen(&plant.sensor_error[s]));
                }
            }
            before.insert(x.clone(), f.intersect(b));
        }
        feasible.push(before);
    }
    feasible.reverse();

    let mut state = m.env.state.clone();
    for (x, v) in &state {
        if !feasible[0][x].contains(v) {
            return Err(SearchError::ConcretizationFailed(format!("initial `{x}` outside the feasible set")));
        }
    }
    let mut script = Vec::new();
    let mut ticks = Vec::new();
    let mut sensed_values = Vec::new();
    for (i, (src, e)) in path.iter().enumerate() {
        let AbstractNode::State(dst) = &e.target else { unreachable!() };
        let sel = match &e.cause {
            Cause::Tick => {
                let mut gamma = BTreeMap::new();
                for (x, v) in state.iter_mut() {
                    let drift = drift(view, x, &src.actuators);
                    let base = &*v + drift;
                    let window = Interval::around(&base, &view.env.uncertainty_of(x)).intersect(&feasible[i + 1][x]);
                    let next = pick(&window, x)?;
                    gamma.insert(x.clone(), &next - &base);
                    *v = next;
                }
                ticks.push(TickScript { gamma });
                ActionSelector::tick()
            }
            Cause::Read(s) => {
                let x = &plant.sensor_target[s];
                let offered = Interval::around(&state[x], &plant.sensor_error[s]);
                let choices = e.sensed.as_ref().expect("reads carry their sensed set").intersect_interval(&offered);
                let v = pick(choices.parts().first().unwrap_or(&Interval::Empty), s)?;
                sensed_values.push(v.clone());
                ActionSelector::read(s, v)
            }
            Cause::Write(a, v) => ActionSelector::write(a, v.clone()),
            Cause::Internal => ActionSelector { via: Some(Via::Internal), ..ActionSelector::tau() },
            Cause::Out => match &e.action {
                Label::Out(c, v) => ActionSelector::new(ActionPattern::Out { chan: c.clone(), value: Some(v.clone()) }),
                _ => unreachable!("out edges carry out labels"),
            },
            Cause::In => return Err(SearchError::ConcretizationFailed("input edges are not replayable".into())),
        };
        script.push(sel.with_target(&dst.control));
    }
    let mut resolver = DisturbanceResolver::scripted(ticks.clone(), sensed_values.clone());
    let run = run_trace(m, &script, &mut resolver).map_err(|e| SearchError::ConcretizationFailed(e.to_string()))?;
    for ((_, e), step) in path.iter().zip(&run.steps) {
        if !target_box(e).iter().all(|(x, b)| b.contains(&step.successor.env.state[x])) {
            return Err(SearchError::ConcretizationFailed("replay left the abstract path".into()));
        }
    }
    Ok(FoundTrace { script, ticks, sensed: sensed_values, run })
}
