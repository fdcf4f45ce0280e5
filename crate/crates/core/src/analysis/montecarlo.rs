use std::collections::BTreeMap;
use std::io::Write;

use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::lts::{resolve_move, system_moves, DisturbanceResolver, Label, SysMove};
use crate::physics::Cps;
use crate::terms::{fmt_rational, Rational, Switch, Value};

/// An actuator switched on or off, with the variables it drives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwitchEvent {
    /// Ticks elapsed before the write.
    pub tick: usize,
    pub actuator: String,
    pub on: bool,
    pub state: BTreeMap<String, Rational>,
}

/// Outcome of one simulation run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub ticks: usize,
    /// Sum over ticks of the number of switch actuators that are on.
    pub on_ticks: usize,
    pub switch_actuators: usize,
    /// Sum over ticks of the magnitude of every actuator-selected drift.
    pub consumption: Rational,
    pub warnings: usize,
    pub outputs: usize,
    pub deadlocked: bool,
    pub switches: Vec<SwitchEvent>,
}

impl RunRecord {
    pub fn coolant_on_fraction(&self) -> Option<f64> {
        let total = self.ticks * self.switch_actuators;
        (total > 0).then(|| self.on_ticks as f64 / total as f64)
    }
}

/// Results of a simulation campaign, ordered by run index.
#[derive(Clone, Debug, PartialEq)]
pub struct RunStats {
    pub horizon: usize,
    pub seed: u64,
    pub runs: Vec<RunRecord>,
}

impl RunStats {
    pub fn total_ticks(&self) -> usize {
        self.runs.iter().map(|r| r.ticks).sum()
    }

    /// Fraction of actuator-ticks with the actuator on; absent without ticks.
    pub fn coolant_on_fraction(&self) -> Option<f64> {
        let total: usize = self.runs.iter().map(|r| r.ticks * r.switch_actuators).sum();
        let on: usize = self.runs.iter().map(|r| r.on_ticks).sum();
        (total > 0).then(|| on as f64 / total as f64)
    }

    /// Mean actuator-selected drift magnitude per tick.
    pub fn mean_consumption(&self) -> Option<f64> {
        let ticks = self.total_ticks();
        let sum = self.runs.iter().fold(Rational::zero(), |acc, r| acc + &r.consumption);
        (ticks > 0).then(|| sum.to_f64().unwrap_or(f64::NAN) / ticks as f64)
    }

    pub fn warnings(&self) -> usize {
        self.runs.iter().map(|r| r.warnings).sum()
    }

    pub fn deadlocks(&self) -> usize {
        self.runs.iter().filter(|r| r.deadlocked).count()
    }

    fn switch_values(&self, on: bool, var: &str) -> Vec<Rational> {
        self.runs
            .iter()
            .flat_map(|r| &r.switches)
            .filter(|e| e.on == on)
            .filter_map(|e| e.state.get(var).cloned())
            .collect()
    }

    /// Values of `var` whenever an actuator driving it was switched on.
    pub fn turn_on_values(&self, var: &str) -> Vec<Rational> {
        self.switch_values(true, var)
    }

    pub fn turn_off_values(&self, var: &str) -> Vec<Rational> {
        self.switch_values(false, var)
    }

    /// One row per run and a final `summary` row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "run",
            "ticks",
            "onTicks",
            "coolantOnFraction",
            "consumption",
            "warnings",
            "deadlocked",
            "turnOn",
            "turnOff",
        ])?;
        let opt = |v: Option<f64>| v.map(|f| format!("{f:.6}")).unwrap_or_default();
        let events = |r: &RunRecord, on: bool| {
            r.switches
                .iter()
                .filter(|e| e.on == on)
                .flat_map(|e| e.state.iter().map(|(k, v)| format!("{k}={}", fmt_rational(v))))
                .collect::<Vec<_>>()
                .join(" ")
        };
        for r in &self.runs {
            w.write_record([
                r.run.to_string(),
                r.ticks.to_string(),
                r.on_ticks.to_string(),
                opt(r.coolant_on_fraction()),
                opt(r.consumption.to_f64().map(|c| if r.ticks > 0 { c / r.ticks as f64 } else { f64::NAN })),
                r.warnings.to_string(),
                r.deadlocked.to_string(),
                events(r, true),
                events(r, false),
            ])?;
        }
        w.write_record([
            "summary".to_string(),
            self.total_ticks().to_string(),
            self.runs.iter().map(|r| r.on_ticks).sum::<usize>().to_string(),
            opt(self.coolant_on_fraction()),
            opt(self.mean_consumption()),
            self.warnings().to_string(),
            self.deadlocks().to_string(),
            String::new(),
            String::new(),
        ])?;
        w.flush()?;
        Ok(())
    }
}

/// Runs `runs` independent simulations of `horizon` ticks. Run `i` draws
/// from stream `i` of generators seeded with `seed`, so results do not
/// depend on scheduling.
pub fn monte_carlo(m: &Cps, runs: usize, horizon: usize, seed: u64) -> RunStats {
    let runs = (0..runs).into_par_iter().map(|i| simulate(m, horizon, seed, i)).collect();
    RunStats { horizon, seed, runs }
}

fn stream(seed: u64, salt: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt);
    rng.set_stream(run as u64);
    rng
}

/// One run. Untimed moves are taken before time passes, uniformly among
/// those enabled: outputs are assumed to be received by the surroundings,
/// inputs from outside are never offered.
pub fn simulate(m: &Cps, horizon: usize, seed: u64, run: usize) -> RunRecord {
    let mut resolver = DisturbanceResolver::from_rng(stream(seed, 0, run));
    let mut choice = stream(seed, 0x9e37_79b9_7f4a_7c15, run);
    let plant = m.env.plant.clone();
    let switch_acts: Vec<String> =
        m.env.actuators.iter().filter(|(_, v)| matches!(v, Value::Switch(_))).map(|(a, _)| a.clone()).collect();
    let driven = |a: &str| -> Vec<String> {
        plant
            .dynamics
            .iter()
            .filter(|(_, d)| d.arms.iter().any(|(conds, _)| conds.iter().any(|(b, _)| b == a)))
            .map(|(x, _)| x.clone())
            .collect()
    };
    let mut rec = RunRecord {
        run,
        ticks: 0,
        on_ticks: 0,
        switch_actuators: switch_acts.len(),
        consumption: Rational::zero(),
        warnings: 0,
        outputs: 0,
        deadlocked: false,
        switches: Vec::new(),
    };
    let mut cur = m.clone();
    let step_cap = horizon.saturating_mul(64).saturating_add(64);
    let mut steps = 0;
    while rec.ticks < horizon && steps < step_cap {
        steps += 1;
        let moves: Vec<SysMove> = system_moves(&cur).into_iter().filter(|mv| !matches!(mv, SysMove::Input { .. })).collect();
        if moves.is_empty() {
            rec.deadlocked = !cur.env.invariant_holds();
            break;
        }
        let untimed: Vec<&SysMove> = moves.iter().filter(|mv| !mv.is_tick()).collect();
        let mv = if untimed.is_empty() { &moves[0] } else { untimed[choice.gen_range(0..untimed.len())] };
        if mv.is_tick() {
            rec.ticks += 1;
            rec.on_ticks +=
                switch_acts.iter().filter(|a| cur.env.actuators.get(*a) == Some(&Value::Switch(Switch::On))).count();
            for d in plant.dynamics.values() {
                if let Some((_, rate)) =
                    d.arms.iter().find(|(conds, _)| conds.iter().all(|(a, v)| cur.env.actuators.get(a) == Some(v)))
                {
                    rec.consumption += rate.abs();
                }
            }
        }
        if let SysMove::Write { actuator, value: Value::Switch(s), .. } = mv {
            let state = driven(actuator).into_iter().map(|x| (x.clone(), cur.env.state[&x].clone())).collect();
            rec.switches.push(SwitchEvent { tick: rec.ticks, actuator: actuator.clone(), on: *s == Switch::On, state });
        }
        let step = match resolve_move(&cur, mv, &mut resolver, None, None) {
            Ok(Some(step)) => step,
            _ => break,
        };
        if let Label::Out(c, _) = &step.action {
            rec.outputs += 1;
            rec.warnings += usize::from(c == "warning");
        }
        cur = step.successor;
    }
    rec
}
