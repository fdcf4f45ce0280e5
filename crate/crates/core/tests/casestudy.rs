//! The engine and airplane case study end to end.

use ccps::abstraction::{build_abstract_lts, AbstractionConfig, FiniteLts};
use ccps::analysis::{
    check_congruence_instance, check_time_properties, find_trace_to, monte_carlo, weak_bisim, CongruenceError, Context,
    TimeConfig, PATIENCE,
};
use ccps::casestudy::*;
use ccps::lts::{system_steps, ActionPattern, DisturbanceResolver, Label, TickScript};
use ccps::physics::{Cps, Drift, EnvBuilder, Interval};
use ccps::terms::*;

fn half_open(lo: Rational, hi: Rational) -> Interval {
    Interval::new(lo, hi, true, false)
}

fn warning() -> ActionPattern {
    ActionPattern::Out { chan: "warning".into(), value: None }
}

#[test]
fn suite_passes_on_the_standard_engines() {
    let report = proposition_suite();
    for r in &report.results {
        assert!(r.passed, "{}: {}", r.name, r.detail);
    }
    assert_eq!(report.results.len(), 6);
}

#[test]
fn envelopes_without_uncertainty() {
    let p = EngineParams { delta: rat(0), ..EngineParams::eng() };
    assert_eq!(expected_turn_on(&p), half_open(ratio(99, 10), ratio(111, 10)));
    assert_eq!(expected_turn_off(&p), half_open(ratio(49, 10), ratio(61, 10)));
    let report = proposition_suite_with(&SuiteConfig { eng: p, ..SuiteConfig::default() });
    let envelopes = report.get("switching envelopes").unwrap();
    assert!(envelopes.passed, "{}", envelopes.detail);
    assert!(envelopes.detail.contains("(9.9, 11.1]") && envelopes.detail.contains("(4.9, 6.1]"));
}

#[test]
fn weakest_cooling_fails_the_safety_check_with_a_trace() {
    let report = proposition_suite_with(&SuiteConfig { eng: EngineParams::eng_hat(), ..SuiteConfig::default() });
    let safety = report.get("engine safety").unwrap();
    assert!(!safety.passed);
    assert!(safety.detail.contains("warning trace") && safety.detail.contains("out(warning,ID)"), "{}", safety.detail);
}

/// Ten ticks at +1.01, a reading of 10, one tick at +1.4, five cooling ticks
/// at -0.3 and a final reading of 10.1.
#[test]
fn handmade_warning_trace_reaches_the_seventeenth_slot() {
    let m = build_engine(&EngineParams::eng_hat());
    let gamma = |g: Rational| TickScript { gamma: [("temp".to_string(), g)].into() };
    let mut ticks: Vec<TickScript> = (0..10).map(|_| gamma(ratio(1, 100))).collect();
    ticks.extend((0..6).map(|_| gamma(ratio(2, 5))));
    let mut sensed: Vec<Rational> = (0..10).map(|k| ratio(101 * k, 100)).collect();
    sensed.extend([rat(10), ratio(23, 2), ratio(101, 10)]);
    let mut resolver = DisturbanceResolver::scripted(ticks, sensed);
    let (mut state, mut slot) = (m, 1);
    loop {
        let mut steps = system_steps(&state, &mut resolver).unwrap();
        // Only the pending warning offers a choice: emit it or let time pass.
        if let Some(i) = steps.iter().position(|s| matches!(s.action, Label::Out(..))) {
            steps.swap(0, i);
            steps.truncate(1);
        }
        assert_eq!(steps.len(), 1, "the engine is deterministic under a script");
        let step = steps.into_iter().next().unwrap();
        match &step.action {
            Label::Tick => slot += 1,
            Label::Out(c, v) => {
                assert_eq!((c.as_str(), v), ("warning", &Value::name("ID")));
                break;
            }
            _ => {}
        }
        state = step.successor;
        assert!(slot <= 17);
    }
    assert_eq!(slot, 17);
    assert_eq!(state.env.state["temp"], rat(10));
}

#[test]
fn trace_search_examples() {
    let hat = build_engine(&EngineParams::eng_hat());
    let found = find_trace_to(&hat, &warning(), 20).unwrap().unwrap();
    assert!(found.target_slot() <= 17);
    assert!(found.replay(&hat).is_ok());
    assert!(find_trace_to(&build_engine(&EngineParams::eng()), &warning(), 50).unwrap().is_none());
    let first_tick = find_trace_to(&hat, &ActionPattern::Tick, 1).unwrap().unwrap();
    assert_eq!(first_tick.run.actions().last(), Some(&Label::Tick));
    assert_eq!(first_tick.run.actions().iter().filter(|a| a.is_tick()).count(), 1);
}

#[test]
fn engine_variants_against_each_other() {
    let hat = build_engine(&EngineParams::eng_hat());
    let lts = build_abstract_lts(&hat, &AbstractionConfig::default()).unwrap();
    assert!(lts.out_edges().iter().any(|e| e.action == Label::Out("warning".into(), Value::name("ID"))));
    let eng = ccps::analysis::abstract_lts(&build_engine(&EngineParams::eng()), ccps::abstraction::Widening::Exact).unwrap().0;
    let hat = ccps::analysis::abstract_lts(&hat, ccps::abstraction::Widening::Exact).unwrap().0;
    let verdict = weak_bisim(&eng, &hat);
    let witness = verdict.witness().unwrap();
    assert!(witness.actions().contains(&Label::Out("warning".into(), Value::name("ID"))));
    match weak_bisim(&eng, &eng) {
        ccps::analysis::BisimVerdict::Bisimilar { relation } => {
            assert!((0..eng.num_states).filter(|&s| eng.reachable()[s]).all(|s| relation.contains(&(s, s))));
        }
        v => panic!("{v:?}"),
    }
}

#[test]
fn congruence_instances() {
    let (eng, bar) = (build_engine(&EngineParams::eng()), build_engine(&EngineParams::eng_bar()));
    let r = check_congruence_instance(&eng, &bar, &Context::Restrict("warning".into())).unwrap();
    assert!(r.component.is_bisimilar() && r.composite.is_bisimilar() && !r.violation());
    let snooper = prefix(Prefix::read("st", "x"), tick(nil()));
    let err = check_congruence_instance(&eng, &bar, &Context::ParallelWith(snooper)).unwrap_err();
    assert!(matches!(err, CongruenceError::InterferenceViolation(_)));
}

#[test]
fn airplane_structure() {
    let l = build_side_engine(&EngineParams::eng(), "L", "l");
    let r = build_side_engine(&EngineParams::eng(), "R", "r");
    assert!(ccps::physics::non_interfering(&l, &r));
    let eng = build_engine(&EngineParams::eng());
    assert!(!ccps::physics::non_interfering(&eng, &eng));
    let check = Cps::new(ccps::physics::PhysicalEnv::empty(), check_process()).unwrap();
    assert!(ccps::physics::non_interfering(&eng, &check));

    // Only alarm and failure are visible once warnings are restricted.
    let plane = build_airplane(&EngineParams::eng_hat());
    let lts = build_abstract_lts(&plane, &AbstractionConfig::default()).unwrap();
    let channels: std::collections::BTreeSet<String> =
        lts.out_edges().iter().filter_map(|e| e.action.channel().map(str::to_string)).collect();
    assert!(!channels.is_empty());
    assert!(channels.iter().all(|c| c == "alarm" || c == "failure"), "{channels:?}");
}

#[test]
fn narrowed_invariant_deadlocks_without_breaking_patience() {
    let p = EngineParams { invariant: Interval::closed(rat(0), rat(5)), ..EngineParams::eng() };
    let report = check_time_properties(&build_engine(&p), &TimeConfig { depth: 30, samples: 100, seed: 5 });
    assert!(report.passed(), "{report:?}");
    assert!(report.property(PATIENCE).unwrap().passed);
    assert!(report.invariant_deadlocks > 0);
}

#[test]
fn inert_nil_system_only_ticks() {
    let env = EnvBuilder::new().var("x", rat(0), rat(0), None).drift("x", Drift::constant(rat(0))).build().unwrap();
    let m = Cps::new(env, nil()).unwrap();
    let report = check_time_properties(&m, &TimeConfig { depth: 10, samples: 10, seed: 0 });
    assert!(report.passed());
    assert_eq!(report.instant_bound, 0);
    let lts = build_abstract_lts(&m, &AbstractionConfig::default()).unwrap();
    assert_eq!(lts.to_finite(), FiniteLts::new(1, 0, [(0, Label::Tick, 0)]));
}

#[test]
fn inert_physics_leaves_the_control_graph() {
    // fix X. out c. tick. tick. X has three control points.
    let env = EnvBuilder::new().var("x", rat(0), rat(0), None).drift("x", Drift::constant(rat(0))).build().unwrap();
    let p = fix("X", timeout(Prefix::signal("c"), tick(tick(var("X"))), var("X")));
    let lts = build_abstract_lts(&Cps::new(env, p).unwrap(), &AbstractionConfig::default()).unwrap();
    let finite = lts.to_finite();
    assert_eq!(finite.num_states, 3);
    let out = Label::Out("c".into(), Value::Unit);
    assert_eq!(
        finite.edges,
        vec![(0, Label::Tick, 0), (0, out, 1), (1, Label::Tick, 2), (2, Label::Tick, 0)]
            .into_iter()
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect::<Vec<_>>()
    );
}

#[test]
fn simulation_statistics() {
    let eng = build_engine(&EngineParams::eng());
    let empty = monte_carlo(&eng, 0, 100, 1);
    assert_eq!(empty.coolant_on_fraction(), None);
    assert_eq!(empty.mean_consumption(), None);
    let stats = monte_carlo(&eng, 20, 250, 3);
    let (on, off) = (expected_turn_on(&EngineParams::eng()), expected_turn_off(&EngineParams::eng()));
    assert!(stats.turn_on_values("temp").iter().all(|v| on.contains(v)));
    assert!(stats.turn_off_values("temp").iter().all(|v| off.contains(v)));
    assert_eq!((stats.warnings(), stats.deadlocks()), (0, 0));
}
