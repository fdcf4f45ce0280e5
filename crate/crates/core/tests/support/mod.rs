//! Oracles and generators shared by the integration tests.
//!
//! The oracles are deliberately naive and do not reuse the library's
//! saturation or refinement code.

#![allow(dead_code)]

use std::collections::BTreeSet;

use ccps::abstraction::FiniteLts;
use ccps::analysis::Hml;
use ccps::lts::{system_steps, DisturbanceResolver, Label, SysStep};
use ccps::physics::{Cps, Drift, EnvBuilder, Interval};
use ccps::terms::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Weak transitions and bisimilarity by greatest fixpoint.

fn out_edges(l: &FiniteLts, s: usize) -> Vec<(Label, usize)> {
    l.edges.iter().filter(|(src, _, _)| *src == s).map(|(_, a, t)| (a.clone(), *t)).collect()
}

/// States reachable from `s` by zero or more τ steps.
pub fn tau_closure(l: &FiniteLts, s: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([s]);
    let mut stack = vec![s];
    while let Some(u) = stack.pop() {
        for (a, t) in out_edges(l, u) {
            if a == Label::Tau && seen.insert(t) {
                stack.push(t);
            }
        }
    }
    seen
}

/// `s =â=> t`: τ* for τ, τ* a τ* otherwise.
pub fn weak_hat(l: &FiniteLts, s: usize, a: &Label) -> BTreeSet<usize> {
    if *a == Label::Tau {
        return tau_closure(l, s);
    }
    let mut out = BTreeSet::new();
    for u in tau_closure(l, s) {
        for (b, t) in out_edges(l, u) {
            if b == *a {
                out.extend(tau_closure(l, t));
            }
        }
    }
    out
}

/// Disjoint union; the right LTS's states are shifted by `left.num_states`.
pub fn union(left: &FiniteLts, right: &FiniteLts) -> FiniteLts {
    let n = left.num_states;
    let edges = left.edges.iter().cloned().chain(right.edges.iter().map(|(s, a, t)| (s + n, a.clone(), t + n)));
    FiniteLts::new(n + right.num_states, left.initial, edges)
}

/// Largest weak bisimulation on `l`: strong moves answered by weak ones.
pub fn naive_bisimulation(l: &FiniteLts) -> Vec<Vec<bool>> {
    let n = l.num_states;
    let mut rel = vec![vec![true; n]; n];
    let moves: Vec<Vec<(Label, usize)>> = (0..n).map(|s| out_edges(l, s)).collect();
    let answers = |q: usize, a: &Label, p2: usize, rel: &Vec<Vec<bool>>, flip: bool| {
        weak_hat(l, q, a).into_iter().any(|q2| if flip { rel[q2][p2] } else { rel[p2][q2] })
    };
    loop {
        let mut changed = false;
        for p in 0..n {
            for q in 0..n {
                if !rel[p][q] {
                    continue;
                }
                let fwd = moves[p].iter().all(|(a, p2)| answers(q, a, *p2, &rel, false));
                let bwd = moves[q].iter().all(|(a, q2)| answers(p, a, *q2, &rel, true));
                if !(fwd && bwd) {
                    rel[p][q] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return rel;
        }
    }
}

pub fn naive_weakly_bisimilar(left: &FiniteLts, right: &FiniteLts) -> bool {
    let u = union(left, right);
    naive_bisimulation(&u)[left.initial][left.num_states + right.initial]
}

/// Evaluates a formula with weak diamonds directly on the raw LTS.
pub fn hml_eval(l: &FiniteLts, s: usize, f: &Hml) -> bool {
    match f {
        Hml::True => true,
        Hml::Not(g) => !hml_eval(l, s, g),
        Hml::And(gs) => gs.iter().all(|g| hml_eval(l, s, g)),
        Hml::Diamond(a, g) => weak_hat(l, s, a).into_iter().any(|t| hml_eval(l, t, g)),
    }
}

// ---------------------------------------------------------------------------
// Random labelled transition systems.

pub fn alphabet() -> Vec<Label> {
    vec![Label::Tau, Label::Out("a".into(), Value::Unit), Label::Out("b".into(), Value::Unit)]
}

pub fn random_lts(rng: &mut impl Rng, max_states: usize) -> FiniteLts {
    let n = rng.gen_range(1..=max_states);
    let actions = alphabet();
    let m = rng.gen_range(0..=2 * n + 2);
    let edges: Vec<_> = (0..m)
        .map(|_| (rng.gen_range(0..n), actions.choose(rng).unwrap().clone(), rng.gen_range(0..n)))
        .collect();
    FiniteLts::new(n, 0, edges)
}

/// A variant built by weak-bisimilarity-preserving rewrites, optionally
/// followed by one arbitrary edge mutation.
pub fn perturb(rng: &mut impl Rng, l: &FiniteLts, max_states: usize) -> FiniteLts {
    let mut n = l.num_states;
    let mut edges = l.edges.clone();
    for _ in 0..rng.gen_range(0..3) {
        match rng.gen_range(0..3) {
            // τ self loop.
            0 => {
                let s = rng.gen_range(0..n);
                edges.push((s, Label::Tau, s));
            }
            // s -a-> t becomes s -a-> u -τ-> t.
            1 if !edges.is_empty() && n < max_states => {
                let i = rng.gen_range(0..edges.len());
                let (s, a, t) = edges.remove(i);
                edges.push((s, a, n));
                edges.push((n, Label::Tau, t));
                n += 1;
            }
            // Copy of a state taking over some of its incoming edges.
            2 if n < max_states => {
                let s = rng.gen_range(0..n);
                let copies: Vec<_> = edges.iter().filter(|e| e.0 == s).map(|(_, a, t)| (n, a.clone(), *t)).collect();
                edges.extend(copies);
                for e in edges.iter_mut() {
                    if e.2 == s && rng.gen_bool(0.5) {
                        e.2 = n;
                    }
                }
                n += 1;
            }
            _ => {}
        }
    }
    if rng.gen_bool(0.4) {
        if !edges.is_empty() && rng.gen_bool(0.5) {
            let i = rng.gen_range(0..edges.len());
            edges.remove(i);
        } else {
            edges.push((rng.gen_range(0..n), alphabet().choose(rng).unwrap().clone(), rng.gen_range(0..n)));
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    FiniteLts::new(n, perm[l.initial], edges.into_iter().map(|(s, a, t)| (perm[s], a, perm[t])))
}

/// A pair that is bisimilar often enough to exercise both verdicts.
pub fn random_pair(rng: &mut impl Rng, max_states: usize) -> (FiniteLts, FiniteLts) {
    let l = random_lts(rng, max_states);
    let r = if rng.gen_bool(0.6) { perturb(rng, &l, max_states) } else { random_lts(rng, max_states) };
    (l, r)
}

// ---------------------------------------------------------------------------
// Random well-formed models.

struct TermGen<'a> {
    rng: &'a mut ChaCha8Rng,
    fresh: usize,
}

#[derive(Clone)]
struct Scope {
    /// Process variables and whether an occurrence here would be guarded.
    procs: Vec<(String, bool)>,
    /// Data variables bound by channel inputs.
    data: Vec<String>,
}

impl Scope {
    fn guarded(&self) -> Scope {
        Scope { procs: self.procs.iter().map(|(x, _)| (x.clone(), true)).collect(), data: self.data.clone() }
    }
}

impl TermGen<'_> {
    fn fresh(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("{base}{}", self.fresh)
    }

    fn constant(&mut self) -> Expr {
        Expr::lit(Value::real(self.rng.gen_range(0..3)))
    }

    fn prefix(&mut self, scope: &mut Scope) -> Prefix {
        let chan = ["c", "d"][self.rng.gen_range(0..2)];
        match self.rng.gen_range(0..4) {
            0 => {
                let v = match scope.data.choose(self.rng) {
                    Some(y) if self.rng.gen_bool(0.5) => Expr::var(y.clone()),
                    _ => self.constant(),
                };
                Prefix::send(chan, v)
            }
            1 => {
                let y = self.fresh("y");
                scope.data.push(y.clone());
                Prefix::receive(chan, y)
            }
            2 => Prefix::signal(chan),
            _ => Prefix::write("a", Expr::lit(Value::Switch(if self.rng.gen_bool(0.5) { Switch::On } else { Switch::Off }))),
        }
    }

    fn leaf(&mut self, scope: &Scope) -> ProcessTerm {
        let guarded: Vec<&String> = scope.procs.iter().filter(|(_, g)| *g).map(|(x, _)| x).collect();
        if let Some(x) = guarded.choose(self.rng) {
            return var(x);
        }
        if let Some((x, _)) = scope.procs.choose(self.rng) {
            return tick(var(x));
        }
        if self.rng.gen_bool(0.5) {
            nil()
        } else {
            tick(nil())
        }
    }

    fn seq(&mut self, depth: usize, scope: &Scope) -> ProcessTerm {
        if depth == 0 {
            return self.leaf(scope);
        }
        match self.rng.gen_range(0..8) {
            0 => self.leaf(scope),
            1 => tick(self.seq(depth - 1, &scope.guarded())),
            2 if scope.procs.len() < 2 => {
                let x = self.fresh("X");
                let mut inner = scope.clone();
                inner.procs.push((x.clone(), false));
                fix(&x, self.seq(depth - 1, &inner))
            }
            3 => {
                let mut inner = scope.clone();
                let pi = self.prefix(&mut inner);
                let then = self.seq(depth - 1, &inner);
                let other = self.seq(depth - 1, &scope.guarded());
                timeout(pi, then, other)
            }
            4 => {
                let mut inner = scope.clone();
                let pi = self.prefix(&mut inner);
                prefix(pi, self.seq(depth - 1, &inner))
            }
            5 | 6 => {
                // Sensed values only feed a threshold guard.
                let x = self.fresh("v");
                let theta = Expr::lit(Value::real(self.rng.gen_range(-2..4)));
                let op = if self.rng.gen_bool(0.5) { CmpOp::Gt } else { CmpOp::Le };
                let body = if_else(
                    BoolExpr::cmp(op, Expr::var(x.clone()), theta),
                    self.seq(depth - 1, scope),
                    self.seq(depth - 1, scope),
                );
                if self.rng.gen_bool(0.7) {
                    prefix(Prefix::read("s", x), body)
                } else {
                    let other = self.seq(depth - 1, &scope.guarded());
                    timeout(Prefix::read("s", x), body, other)
                }
            }
            _ => match scope.data.choose(self.rng).cloned() {
                Some(y) => {
                    let guard = BoolExpr::cmp(CmpOp::Eq, Expr::var(y), self.constant());
                    if_else(guard, self.seq(depth - 1, scope), self.seq(depth - 1, scope))
                }
                None => tick(self.seq(depth - 1, &scope.guarded())),
            },
        }
    }

    fn top(&mut self) -> ProcessTerm {
        let empty = Scope { procs: vec![], data: vec![] };
        let main = fix("X", self.seq(3, &Scope { procs: vec![("X".into(), false)], data: vec![] }));
        match self.rng.gen_range(0..4) {
            0 => {
                let other = self.seq(3, &empty);
                restrict(par(main, other), "c")
            }
            1 => par(main, self.seq(2, &empty)),
            _ => main,
        }
    }
}

/// Random closed, guarded model over one variable `x`, sensor `s` and
/// actuator `a`. Equal seeds give equal models.
pub fn random_model(seed: u64) -> Cps {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rates = [rat(1), ratio(1, 2), rat(0), ratio(-1, 2), rat(-1)];
    let uncertainty = [rat(0), ratio(1, 10), ratio(1, 4)][rng.gen_range(0..3)].clone();
    let error = [rat(0), ratio(1, 10)][rng.gen_range(0..2)].clone();
    let off = rates[rng.gen_range(0..rates.len())].clone();
    let on = rates[rng.gen_range(0..rates.len())].clone();
    let env = EnvBuilder::new()
        .var("x", rat(0), uncertainty, Some(Interval::closed(rat(-20), rat(20))))
        .actuator("a", Value::Switch(Switch::Off))
        .sensor("s", "x", error)
        .drift("x", Drift::constant(off).when(vec![("a".into(), Value::Switch(Switch::On))], on))
        .build()
        .expect("generated environment");
    let mut g = TermGen { rng: &mut rng, fresh: 0 };
    let proc = g.top();
    Cps::new(env, proc).expect("generated model is well formed")
}

// ---------------------------------------------------------------------------
// Concrete runs.

/// Random run of at most `max_steps` steps: a uniform choice among the
/// available steps, with inputs never offered by the environment.
pub fn random_run(m: &Cps, seed: u64, max_steps: usize) -> Vec<SysStep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut resolver = DisturbanceResolver::from_rng(ChaCha8Rng::seed_from_u64(seed ^ 0x5851_f42d_4c95_7f2d));
    let mut current = m.clone();
    let mut run = Vec::new();
    while run.len() < max_steps {
        let mut steps = system_steps(&current, &mut resolver).expect("stepping a well-formed model");
        steps.retain(|s| !matches!(s.action, Label::In(..)));
        if steps.is_empty() {
            break;
        }
        let i = rng.gen_range(0..steps.len());
        let step = steps.swap_remove(i);
        current = step.successor.clone();
        run.push(step);
    }
    run
}
