//! The engine and airplane models and their property suite.

use serde::Serialize;

use crate::abstraction::{build_abstract_lts, reach_envelope, AbstractionConfig, Query, Widening};
use crate::analysis::{airplane_congruence_chain, bisim_systems, check_time_properties, find_trace_to, TimeConfig};
use crate::lts::ActionPattern;
use crate::physics::{disjoint_union, Cps, Drift, EnvBuilder, Interval};
use crate::terms::*;

/// Parameters of the engine model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineParams {
    pub initial_temp: Rational,
    /// Uncertainty `δ` of the temperature evolution.
    pub delta: Rational,
    /// Error `ε` of the temperature sensor.
    pub epsilon: Rational,
    pub heat_off: Rational,
    pub heat_on: Rational,
    pub threshold: Rational,
    pub cool_ticks: usize,
    pub invariant: Interval,
    pub engine_id: String,
}

impl EngineParams {
    /// `Eng`.
    pub fn eng() -> EngineParams {
        EngineParams {
            initial_temp: rat(0),
            delta: ratio(2, 5),
            epsilon: ratio(1, 10),
            heat_off: rat(1),
            heat_on: rat(-1),
            threshold: rat(10),
            cool_ticks: 5,
            invariant: Interval::closed(rat(0), rat(30)),
            engine_id: "ID".to_string(),
        }
    }

    /// `Eng` with the cooling power reduced by 20%.
    pub fn eng_bar() -> EngineParams {
        EngineParams { heat_on: ratio(-4, 5), ..EngineParams::eng() }
    }

    /// `Eng` with the cooling power reduced by 30%.
    pub fn eng_hat() -> EngineParams {
        EngineParams { heat_on: ratio(-7, 10), ..EngineParams::eng() }
    }

    pub fn with_id(mut self, id: &str) -> EngineParams {
        self.engine_id = id.to_string();
        self
    }
}

fn threshold_guard(x: &str, p: &EngineParams) -> BoolExpr {
    BoolExpr::cmp(CmpOp::Gt, Expr::var(x), Expr::lit(Value::Real(p.threshold.clone())))
}

fn switch(s: Switch) -> Expr {
    Expr::lit(Value::Switch(s))
}

/// `Ctrl = fix X. read st(x). if x > θ then Cooling else tick.X`.
pub fn controller(p: &EngineParams) -> ProcessTerm {
    let cooling = prefix(
        Prefix::write("cool", switch(Switch::On)),
        fix(
            "Y",
            ticks(
                p.cool_ticks,
                prefix(
                    Prefix::read("st", "x"),
                    if_else(
                        threshold_guard("x", p),
                        prefix(Prefix::send("warning", Expr::lit(Value::name(&p.engine_id))), var("Y")),
                        prefix(Prefix::write("cool", switch(Switch::Off)), tick(var("X"))),
                    ),
                ),
            ),
        ),
    );
    fix("X", prefix(Prefix::read("st", "x"), if_else(threshold_guard("x", p), cooling, tick(var("X")))))
}

/// `Env ⋈ Ctrl` for the given parameters.
pub fn build_engine(p: &EngineParams) -> Cps {
    let env = EnvBuilder::new()
        .var("temp", p.initial_temp.clone(), p.delta.clone(), Some(p.invariant.clone()))
        .actuator("cool", Value::Switch(Switch::Off))
        .sensor("st", "temp", p.epsilon.clone())
        .drift(
            "temp",
            Drift::constant(p.heat_off.clone()).when(vec![("cool".into(), Value::Switch(Switch::On))], p.heat_on.clone()),
        )
        .build()
        .expect("engine environment is valid");
    Cps::new(env, controller(p)).expect("engine is well formed")
}

/// Engine with identifier `id` and its devices renamed `temp_<suffix>`,
/// `cool_<suffix>`, `st_<suffix>`.
pub fn build_side_engine(p: &EngineParams, id: &str, suffix: &str) -> Cps {
    let base = build_engine(&p.clone().with_id(id));
    let rename = |n: &str| match n {
        "temp" | "cool" | "st" => format!("{n}_{suffix}"),
        other => other.to_string(),
    };
    Cps::new(base.env.renamed(&rename), base.proc.rename_names(&rename)).expect("renamed engine is well formed")
}

fn neq(x: &str, id: &str) -> BoolExpr {
    BoolExpr::cmp(CmpOp::Ne, Expr::var(x), Expr::lit(Value::name(id)))
}

fn check_stage(id: &str, i: usize, checks: usize) -> ProcessTerm {
    let alarm = prefix(Prefix::signal("alarm"), tick(var("X")));
    let failure = |cont| prefix(Prefix::send("failure", Expr::lit(Value::name(id))), cont);
    if i == checks {
        timeout(
            Prefix::receive("warning", "z"),
            if_else(neq("z", id), alarm, failure(tick(var("X")))),
            failure(var("X")),
        )
    } else {
        timeout(
            Prefix::receive("warning", "y"),
            if_else(neq("y", id), alarm, tick(check_stage(id, i + 1, checks))),
            check_stage(id, i + 1, checks),
        )
    }
}

/// The airplane monitor watching warnings from engines `L` and `R`.
pub fn check_process() -> ProcessTerm {
    let is_left = BoolExpr::cmp(CmpOp::Eq, Expr::var("x"), Expr::lit(Value::name("L")));
    fix(
        "X",
        timeout(
            Prefix::receive("warning", "x"),
            if_else(is_left, check_stage("L", 1, 5), check_stage("R", 1, 5)),
            var("X"),
        ),
    )
}

/// `Eng_L ⊎ Eng_R`.
pub fn build_engine_pair(p: &EngineParams) -> Cps {
    let l = build_side_engine(p, "L", "l");
    let r = build_side_engine(p, "R", "r");
    let env = disjoint_union(&l.env, &r.env).expect("engines are renamed apart");
    Cps::new(env, par(l.proc, r.proc)).expect("engine pair is well formed")
}

/// `((Eng_L ⊎ Eng_R) ‖ Check) \ {warning}`.
pub fn build_airplane(p: &EngineParams) -> Cps {
    let pair = build_engine_pair(p);
    Cps::new(pair.env, restrict(par(pair.proc, check_process()), "warning")).expect("airplane is well formed")
}

/// One entry of the property suite.
#[derive(Clone, Debug, Serialize)]
pub struct PropositionResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub results: Vec<PropositionResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn get(&self, name: &str) -> Option<&PropositionResult> {
        self.results.iter().find(|r| r.name == name)
    }
}

/// Models and budgets used by [`proposition_suite_with`].
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    /// The engine the safety and envelope properties are checked on.
    pub eng: EngineParams,
    pub eng_bar: EngineParams,
    pub eng_hat: EngineParams,
    pub time: TimeConfig,
    /// Tick budget of the warning-trace search.
    pub trace_bound: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            eng: EngineParams::eng(),
            eng_bar: EngineParams::eng_bar(),
            eng_hat: EngineParams::eng_hat(),
            time: TimeConfig { depth: 30, samples: 100, seed: 1 },
            trace_bound: 20,
        }
    }
}

/// Turn-on envelope predicted by hand: `(θ − ε, θ + heat_off + ε + δ]`.
pub fn expected_turn_on(p: &EngineParams) -> Interval {
    Interval::new(
        &p.threshold - &p.epsilon,
        &p.threshold + &p.heat_off + &p.epsilon + &p.delta,
        true,
        false,
    )
}

/// Turn-off envelope predicted by hand: the turn-on envelope moved by
/// `cool_ticks` cooling steps of `heat_on ± δ`, cut by the sensing bound
/// `θ + ε`.
pub fn expected_turn_off(p: &EngineParams) -> Interval {
    let k = rat(p.cool_ticks as i64);
    let on = expected_turn_on(p);
    let lo = on.lo().expect("non-empty") + &k * (&p.heat_on - &p.delta);
    let hi = on.hi().expect("non-empty") + &k * (&p.heat_on + &p.delta);
    let sensed_low = &p.threshold + &p.epsilon;
    if hi > sensed_low {
        Interval::new(lo, sensed_low, true, false)
    } else {
        Interval::new(lo, hi, true, false)
    }
}

fn entry(name: &str, passed: bool, detail: String) -> PropositionResult {
    PropositionResult { name: name.to_string(), passed, detail }
}

fn envelope(m: &Cps, query: &str) -> Result<Interval, String> {
    let lts = build_abstract_lts(m, &AbstractionConfig::default()).map_err(|e| e.to_string())?;
    let q = Query::parse(query).map_err(|e| e.to_string())?;
    let env = reach_envelope(&lts, &q).map_err(|e| e.to_string())?;
    env.get("temp").cloned().ok_or_else(|| "no temp envelope".to_string())
}

fn warning() -> ActionPattern {
    ActionPattern::Out { chan: "warning".to_string(), value: None }
}

/// Runs the case-study properties on the default models.
pub fn proposition_suite() -> SuiteReport {
    proposition_suite_with(&SuiteConfig::default())
}

/// Safety of `Eng`, its temperature envelopes, `Eng ≈ Eng-bar`,
/// `Eng ≉ Eng-hat` with a replayable warning, the airplane congruence
/// chain, and the time properties of every model.
pub fn proposition_suite_with(cfg: &SuiteConfig) -> SuiteReport {
    let eng = build_engine(&cfg.eng);
    let bar = build_engine(&cfg.eng_bar);
    let hat = build_engine(&cfg.eng_hat);
    let mut results = Vec::new();

    // Only τ and tick, no deadlock, no stuck state.
    results.push(match build_abstract_lts(&eng, &AbstractionConfig::default()) {
        Ok(lts) => {
            let outs = lts.out_edges().len();
            let stuck = lts.stuck_states().len();
            let dead = lts.deadlock().is_some();
            let mut detail = format!("{} states, {outs} out edges, deadlock {dead}, {stuck} stuck states", lts.num_states());
            if outs > 0 {
                match find_trace_to(&eng, &warning(), cfg.trace_bound) {
                    Ok(Some(t)) => detail.push_str(&format!("; warning trace: {}", labels(&t.run.actions()))),
                    Ok(None) => detail.push_str("; no concrete warning within the bound"),
                    Err(e) => detail.push_str(&format!("; {e}")),
                }
            }
            entry("engine safety", outs == 0 && stuck == 0 && !dead, detail)
        }
        Err(e) => entry("engine safety", false, e.to_string()),
    });

    // Envelopes at the switching points.
    let (on, off) = (envelope(&eng, "turn_on"), envelope(&eng, "turn_off"));
    let (want_on, want_off) = (expected_turn_on(&cfg.eng), expected_turn_off(&cfg.eng));
    results.push(match (on, off) {
        (Ok(on), Ok(off)) => entry(
            "switching envelopes",
            on == want_on && off == want_off,
            format!("turn on {on} (expected {want_on}), turn off {off} (expected {want_off})"),
        ),
        (Err(e), _) | (_, Err(e)) => entry("switching envelopes", false, e),
    });

    // Eng ≈ Eng-bar under both policies; Eng-bar's envelope after cooling.
    let p3 = [Widening::Hull, Widening::Exact].map(|w| bisim_systems(&eng, &bar, w).map(|v| v.is_bisimilar()));
    let after = envelope(&bar, "read st when cool = on");
    let want_after = {
        let on = expected_turn_on(&cfg.eng_bar);
        let k = rat(cfg.eng_bar.cool_ticks as i64);
        Interval::new(
            on.lo().expect("non-empty") + &k * (&cfg.eng_bar.heat_on - &cfg.eng_bar.delta),
            on.hi().expect("non-empty") + &k * (&cfg.eng_bar.heat_on + &cfg.eng_bar.delta),
            true,
            false,
        )
    };
    results.push(match (&p3, &after) {
        ([Ok(h), Ok(x)], Ok(a)) => entry(
            "Eng and Eng-bar equivalent",
            *h && *x && *a == want_after,
            format!("bisimilar (hull {h}, exact {x}); cooled envelope {a} (expected {want_after})"),
        ),
        _ => entry("Eng and Eng-bar equivalent", false, format!("{p3:?} {after:?}")),
    });

    // Eng ≉ Eng-hat, with a concrete warning run.
    results.push(match (bisim_systems(&eng, &hat, Widening::Exact), find_trace_to(&hat, &warning(), cfg.trace_bound)) {
        (Ok(v), Ok(trace)) => {
            let witness = v.witness().map(|w| labels(&w.actions())).unwrap_or_default();
            let replay = trace.as_ref().map(|t| (t.replay(&hat).is_ok(), t.target_slot()));
            let passed = !v.is_bisimilar() && matches!(replay, Some((true, _)));
            entry(
                "Eng and Eng-hat distinguished",
                passed,
                format!("verdict {}, witness [{witness}], warning replay {replay:?}", v.report().verdict),
            )
        }
        (Err(e), _) => entry("Eng and Eng-hat distinguished", false, e.to_string()),
        (_, Err(e)) => entry("Eng and Eng-hat distinguished", false, e.to_string()),
    });

    // Airplane ≈ Airplane-bar through the congruence chain.
    results.push(match airplane_congruence_chain(&cfg.eng, &cfg.eng_bar) {
        Ok(chain) => {
            let steps: Vec<String> = chain
                .steps
                .iter()
                .map(|s| format!("{}: {}/{}", s.name, s.report.component.is_bisimilar(), s.report.composite.is_bisimilar()))
                .collect();
            entry(
                "airplane congruence",
                chain.all_bisimilar() && chain.agrees() && chain.direct.is_bisimilar(),
                format!("{}; direct {}", steps.join("; "), chain.direct.is_bisimilar()),
            )
        }
        Err(e) => entry("airplane congruence", false, e.to_string()),
    });

    // Time properties on every model.
    let models =
        [("Eng", eng), ("Eng-bar", bar), ("Eng-hat", hat), ("Airplane", build_airplane(&cfg.eng)), ("Airplane-bar", build_airplane(&cfg.eng_bar))];
    let mut failed = Vec::new();
    for (name, m) in &models {
        let r = check_time_properties(m, &cfg.time);
        if !r.passed() {
            failed.push(format!("{name}: {:?}", r.properties.iter().filter(|p| !p.passed).map(|p| p.name).collect::<Vec<_>>()));
        }
    }
    results.push(entry(
        "time properties",
        failed.is_empty(),
        if failed.is_empty() { format!("{} models pass", models.len()) } else { failed.join("; ") },
    ));
    SuiteReport { results }
}

fn labels(ls: &[crate::lts::Label]) -> String {
    ls.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ")
}
