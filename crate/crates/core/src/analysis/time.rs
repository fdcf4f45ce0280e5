use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::abstraction::{build_abstract_lts, AbstractLts, AbstractionConfig, Cause, Widening};
use crate::lts::{process_steps, resolve_move, system_moves, DisturbanceResolver, Label, ProcStep, SysMove};
use crate::physics::Cps;
use crate::terms::{canonical, ProcessTerm};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TimeConfig {
    /// Abstract exploration depth and length of each sampled run.
    pub depth: usize,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    /// States at which the property was checked.
    pub checked: usize,
    pub counterexamples: Vec<String>,
}

impl PropertyResult {
    fn new(name: &'static str) -> PropertyResult {
        PropertyResult { name, passed: true, ..Default::default() }
    }

    fn check(&mut self, ok: bool, state: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.passed = false;
            if self.counterexamples.len() < 10 {
                self.counterexamples.push(state());
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TimeReport {
    pub properties: Vec<PropertyResult>,
    /// Largest number of consecutive untimed actions allowed at any visited
    /// state.
    pub instant_bound: usize,
    pub abstract_states: usize,
    pub abstract_error: Option<String>,
    pub sampled_steps: usize,
    /// Visited states whose invariant fails, where time stops legitimately.
    pub invariant_deadlocks: usize,
}

impl TimeReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }
}

pub const TIME_DETERMINISM: &str = "time determinism";
pub const MAXIMAL_PROGRESS: &str = "maximal progress";
pub const PATIENCE: &str = "patience";
pub const WELL_TIMEDNESS: &str = "well-timedness";

struct Checks {
    det: PropertyResult,
    progress: PropertyResult,
    patience: PropertyResult,
    timed: PropertyResult,
    bound: usize,
    deadlocks: usize,
}

fn tick_derivatives(p: &ProcessTerm) -> Vec<ProcessTerm> {
    process_steps(p)
        .into_iter()
        .filter_map(|s| match s {
            ProcStep::Ready(Label::Tick, next) => Some(canonical(&next)),
            _ => None,
        })
        .collect()
}

/// Checks time determinism, maximal progress, patience and well-timedness
/// on a depth-bounded exact abstraction and on seeded concrete runs.
pub fn check_time_properties(m: &Cps, config: &TimeConfig) -> TimeReport {
    let mut c = Checks {
        det: PropertyResult::new(TIME_DETERMINISM),
        progress: PropertyResult::new(MAXIMAL_PROGRESS),
        patience: PropertyResult::new(PATIENCE),
        timed: PropertyResult::new(WELL_TIMEDNESS),
        bound: 0,
        deadlocks: 0,
    };
    let cfg = AbstractionConfig { max_states: 50_000, widening: Widening::Exact, max_depth: Some(config.depth) };
    let (abstract_states, abstract_error) = match build_abstract_lts(m, &cfg) {
        Ok(lts) => {
            check_abstract(&lts, config.depth, &mut c);
            (lts.num_states(), None)
        }
        Err(e) => (0, Some(e.to_string())),
    };
    let mut sampled_steps = 0;
    for run in 0..config.samples {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(run as u64);
        sampled_steps += sample_run(m, config.depth, rng, &mut c);
    }
    TimeReport {
        properties: vec![c.det, c.progress, c.patience, c.timed],
        instant_bound: c.bound,
        abstract_states,
        abstract_error,
        sampled_steps,
        invariant_deadlocks: c.deadlocks,
    }
}

fn check_abstract(lts: &AbstractLts, depth: usize, c: &mut Checks) {
    let expanded = |n: usize| lts.depth[n] < depth && lts.state(n).is_some();
    for n in (0..lts.num_states()).filter(|&n| expanded(n)) {
        let s = lts.state(n).expect("expanded states are states");
        let shown = || s.to_string();
        let derivs = tick_derivatives(&s.control);
        c.det.check(derivs.windows(2).all(|w| w[0] == w[1]), shown);
        let edges: Vec<_> = lts.edges_from(n).collect();
        let silent = edges.iter().any(|e| matches!(e.cause, Cause::Internal | Cause::Read(_) | Cause::Write(..)));
        let tick = edges.iter().any(|e| e.action.is_tick());
        // Every tick edge leads to the same control location.
        let targets: Vec<&ProcessTerm> =
            edges.iter().filter(|e| e.action.is_tick()).filter_map(|e| lts.state(e.dst)).map(|t| &t.control).collect();
        c.det.check(targets.windows(2).all(|w| w[0] == w[1]), shown);
        c.progress.check(!(silent && tick), shown);
        c.patience.check(tick || silent, shown);
    }
    c.deadlocks += usize::from(lts.deadlock().is_some());

    // Longest untimed path from each expanded state.
    let mut longest: HashMap<usize, Option<usize>> = HashMap::new();
    fn walk(lts: &AbstractLts, n: usize, memo: &mut HashMap<usize, Option<usize>>, on_stack: &mut Vec<usize>) -> Option<usize> {
        if let Some(v) = memo.get(&n) {
            return *v;
        }
        if on_stack.contains(&n) {
            return None;
        }
        on_stack.push(n);
        let mut best = Some(0);
        for e in lts.edges_from(n).filter(|e| !e.action.is_tick()) {
            best = match (best, walk(lts, e.dst, memo, on_stack)) {
                (Some(b), Some(l)) => Some(b.max(l + 1)),
                _ => None,
            };
        }
        on_stack.pop();
        memo.insert(n, best);
        best
    }
    for n in (0..lts.num_states()).filter(|&n| expanded(n)) {
        let s = lts.state(n).expect("state");
        let allowed = s.control.instant_bound();
        c.bound = c.bound.max(allowed);
        let run = walk(lts, n, &mut longest, &mut Vec::new());
        c.timed.check(run.is_some_and(|l| l <= allowed), || format!("{s} (untimed run {run:?}, bound {allowed})"));
    }
}

fn sample_run(m: &Cps, depth: usize, rng: ChaCha8Rng, c: &mut Checks) -> usize {
    let mut choice = ChaCha8Rng::from_rng(rng.clone()).expect("rng");
    let mut resolver = DisturbanceResolver::from_rng(rng);
    let mut cur = m.clone();
    let mut untimed = 0;
    let mut allowed = cur.proc.instant_bound();
    c.bound = c.bound.max(allowed);
    for step in 0..depth {
        let shown = || cur.to_string();
        let moves: Vec<SysMove> = system_moves(&cur).into_iter().filter(|mv| !matches!(mv, SysMove::Input { .. })).collect();
        let silent = moves.iter().any(SysMove::is_silent);
        let ticks: Vec<ProcessTerm> = moves
            .iter()
            .filter_map(|mv| match mv {
                SysMove::Tick { next } => Some(canonical(next)),
                _ => None,
            })
            .collect();
        c.det.check(ticks.windows(2).all(|w| w[0] == w[1]), shown);
        c.progress.check(!(silent && !ticks.is_empty()), shown);
        let holds = cur.env.invariant_holds();
        c.patience.check(!ticks.is_empty() || !holds || silent, shown);
        if moves.is_empty() {
            c.deadlocks += usize::from(!holds);
            return step;
        }
        let mv = &moves[choice.gen_range(0..moves.len())];
        let next = match resolve_move(&cur, mv, &mut resolver, None, None) {
            Ok(Some(s)) => s,
            _ => return step,
        };
        if mv.is_tick() {
            let boxes = cur.env.next_envs();
            let inside = next.successor.env.state.iter().all(|(x, v)| boxes[x].contains(v));
            c.det.check(inside, shown);
            untimed = 0;
            allowed = next.successor.proc.instant_bound();
            c.bound = c.bound.max(allowed);
        } else {
            untimed += 1;
            c.timed.check(untimed <= allowed, || format!("{cur} (untimed run {untimed}, bound {allowed})"));
        }
        cur = next.successor;
    }
    depth
}
