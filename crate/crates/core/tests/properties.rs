//! Property tests for the invariants of each module.

mod support;

use ccps::abstraction::{build_abstract_lts, reach_envelope, AbstractNode, AbstractionConfig, FiniteLts, Query};
use ccps::analysis::{find_trace_to, monte_carlo, weak_bisim};
use ccps::casestudy::{build_engine, EngineParams};
use ccps::dsl::{parse, print_model};
use ccps::lts::{system_steps, ActionPattern, DisturbanceResolver, Label};
use ccps::physics::{disjoint_union, Drift, EnvBuilder, Interval, PhysicalEnv};
use ccps::terms::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

/// Swaps the operands of every parallel composition.
fn mirror(t: &ProcessTerm) -> ProcessTerm {
    match t {
        ProcessTerm::Par(a, b) => par(mirror(b), mirror(a)),
        ProcessTerm::Tick(p) => tick(mirror(p)),
        ProcessTerm::Timeout { prefix, then, timeout: q } => timeout(prefix.clone(), mirror(then), mirror(q)),
        ProcessTerm::If { guard, then, otherwise } => if_else(guard.clone(), mirror(then), mirror(otherwise)),
        ProcessTerm::Restrict(p, c) => restrict(mirror(p), c.clone()),
        ProcessTerm::Fix(x, p) => fix(x, mirror(p)),
        other => other.clone(),
    }
}

fn lts_pair() -> impl Strategy<Value = (FiniteLts, FiniteLts)> {
    any::<u64>().prop_map(|seed| support::random_pair(&mut ChaCha8Rng::seed_from_u64(seed), 7))
}

fn rates() -> impl Strategy<Value = Rational> {
    (-8i64..=8).prop_map(|n| ratio(n, 4))
}

fn env_with(prefix: &str, w: Rational, off: Rational, on: Rational) -> PhysicalEnv {
    EnvBuilder::new()
        .var(&format!("{prefix}x"), rat(1), w, Some(Interval::closed(rat(-10), rat(10))))
        .actuator(&format!("{prefix}a"), Value::Switch(Switch::Off))
        .sensor(&format!("{prefix}s"), &format!("{prefix}x"), ratio(1, 10))
        .drift(
            &format!("{prefix}x"),
            Drift::constant(off).when(vec![(format!("{prefix}a"), Value::Switch(Switch::On))], on),
        )
        .build()
        .unwrap()
}

// ---------------------------------------------------------------------------
// Terms.

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn congruence_is_an_equivalence(s1 in any::<u64>(), s2 in any::<u64>()) {
        let t = support::random_model(s1).proc;
        let u = mirror(&t);
        let v = par(u.clone(), nil());
        prop_assert!(structurally_congruent(&t, &t));
        prop_assert!(structurally_congruent(&t, &u) && structurally_congruent(&u, &t));
        prop_assert!(structurally_congruent(&u, &v));
        prop_assert!(structurally_congruent(&t, &v));
        let w = support::random_model(s2).proc;
        prop_assert_eq!(structurally_congruent(&t, &w), structurally_congruent(&w, &t));
    }

    #[test]
    fn substitution_is_idempotent(seed in any::<u64>(), v in 0i64..5) {
        let body = support::random_model(seed).proc;
        let t = prefix(Prefix::send("c", Expr::var("y")), body);
        let once = substitute_value(&t, "y", &Value::real(v));
        prop_assert_eq!(substitute_value(&once, "y", &Value::real(v)), once.clone());
        prop_assert!(once.is_closed());
    }

    #[test]
    fn unfolding_keeps_terms_closed(seed in any::<u64>()) {
        let t = support::random_model(seed).proc;
        t.visit(&mut |sub| {
            if matches!(sub, ProcessTerm::Fix(..)) && sub.is_closed() {
                assert!(unfold_fix(sub).is_closed());
            }
        });
    }
}

// ---------------------------------------------------------------------------
// Physics.

proptest! {
    #![proptest_config(cfg(128))]

    #[test]
    fn evolution_is_monotone_in_uncertainty(w in 0i64..8, extra in 0i64..8, off in rates(), on in rates()) {
        let small = env_with("", ratio(w, 8), off.clone(), on.clone());
        let large = env_with("", ratio(w + extra, 8), off, on);
        let (a, b) = (small.next_envs(), large.next_envs());
        for (x, i) in &a {
            prop_assert!(i.is_subset(&b[x]));
        }
    }

    #[test]
    fn next_box_contains_the_undisturbed_point(w in 0i64..8, off in rates(), on in rates(), switch_on in any::<bool>()) {
        let mut env = env_with("", ratio(w, 8), off, on);
        if switch_on {
            env = env.update_act("a", Value::Switch(Switch::On)).unwrap();
        }
        let point = &env.state["x"] + env.drift_of("x");
        prop_assert!(env.next_envs()["x"].contains(&point));
    }

    #[test]
    fn writing_an_actuator_changes_nothing_else(w in 0i64..8, off in rates(), on in rates()) {
        let env = env_with("", ratio(w, 8), off, on);
        let after = env.update_act("a", Value::Switch(Switch::On)).unwrap();
        prop_assert_eq!(&after.state, &env.state);
        prop_assert_eq!(&after.plant, &env.plant);
        prop_assert_ne!(&after.actuators, &env.actuators);
    }

    #[test]
    fn disjoint_union_is_a_commutative_monoid(w in 0i64..4, off in rates(), on in rates()) {
        let (a, b, c) = (
            env_with("p", ratio(w, 4), off.clone(), on.clone()),
            env_with("q", ratio(w + 1, 4), on.clone(), off.clone()),
            env_with("r", rat(0), off, on),
        );
        let ab = disjoint_union(&a, &b).unwrap();
        prop_assert_eq!(&ab, &disjoint_union(&b, &a).unwrap());
        prop_assert_eq!(
            disjoint_union(&ab, &c).unwrap(),
            disjoint_union(&a, &disjoint_union(&b, &c).unwrap()).unwrap()
        );
        prop_assert_eq!(&disjoint_union(&a, &PhysicalEnv::empty()).unwrap(), &a);
        prop_assert!(disjoint_union(&a, &a).is_err());
    }
}

// ---------------------------------------------------------------------------
// Stepping.

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn plant_data_is_conserved_and_tau_preempts_tick(seed in any::<u64>()) {
        let m = support::random_model(seed);
        let run = support::random_run(&m, seed, 60);
        let mut resolver = DisturbanceResolver::seeded(seed);
        for step in &run {
            prop_assert_eq!(&step.successor.env.plant, &m.env.plant);
            let next = system_steps(&step.successor, &mut resolver).unwrap();
            let tau = next.iter().any(|s| s.action == Label::Tau);
            let tick = next.iter().any(|s| s.action == Label::Tick);
            prop_assert!(!(tau && tick));
        }
    }
}

// ---------------------------------------------------------------------------
// Abstraction.

fn contained_in_hull(exact: &ccps::abstraction::AbstractLts, hull: &ccps::abstraction::AbstractLts) -> bool {
    exact.nodes.iter().all(|n| match n {
        AbstractNode::Deadlock => hull.deadlock().is_some(),
        AbstractNode::State(s) => hull.nodes.iter().any(|h| match h {
            AbstractNode::State(h) => {
                h.control == s.control
                    && h.actuators == s.actuators
                    && s.boxes.iter().all(|(x, b)| b.is_subset(&h.boxes[x]))
            }
            AbstractNode::Deadlock => false,
        }),
    })
}

proptest! {
    #![proptest_config(cfg(48))]

    #[test]
    fn hull_boxes_contain_exact_boxes(seed in any::<u64>()) {
        let m = support::random_model(seed);
        let hull = build_abstract_lts(&m, &AbstractionConfig::default()).unwrap();
        let exact = build_abstract_lts(&m, &AbstractionConfig { max_depth: Some(12), ..AbstractionConfig::exact(50_000) }).unwrap();
        prop_assert!(contained_in_hull(&exact, &hull));
    }

    #[test]
    fn random_runs_embed_into_the_abstraction(seed in any::<u64>()) {
        let m = support::random_model(seed);
        let lts = build_abstract_lts(&m, &AbstractionConfig::default()).unwrap();
        let run = support::random_run(&m, seed, 80);
        prop_assert_eq!(lts.embed_run(&m, &run), Ok(()));
    }

    #[test]
    fn envelopes_grow_with_uncertainty(d in 0i64..=4, extra in 0i64..=4, e in 0i64..=2) {
        let at = |delta: i64| {
            let p = EngineParams { delta: ratio(delta, 10), epsilon: ratio(e, 10), ..EngineParams::eng() };
            let lts = build_abstract_lts(&build_engine(&p), &AbstractionConfig::default()).unwrap();
            ["turn_on", "turn_off"].map(|q| reach_envelope(&lts, &Query::parse(q).unwrap()).unwrap())
        };
        let (small, large) = (at(d), at(d + extra));
        for (s, l) in small.iter().zip(&large) {
            for (x, i) in s {
                prop_assert!(i.is_subset(&l[x]), "{} not within {}", i, l[x]);
            }
        }
    }

    #[test]
    fn lts_text_round_trips(seed in any::<u64>()) {
        let (l, _) = support::random_pair(&mut ChaCha8Rng::seed_from_u64(seed), 7);
        prop_assert_eq!(FiniteLts::parse(&l.to_string()).unwrap(), l);
    }
}

// ---------------------------------------------------------------------------
// Bisimulation.

proptest! {
    #![proptest_config(cfg(300))]

    #[test]
    fn verdicts_match_the_fixpoint_oracle((l, r) in lts_pair()) {
        let verdict = weak_bisim(&l, &r);
        prop_assert_eq!(verdict.is_bisimilar(), support::naive_weakly_bisimilar(&l, &r));
        if let Some(w) = verdict.witness() {
            prop_assert!(w.validate(&l, &r));
            let (on_l, on_r) = (
                support::hml_eval(&l, l.initial, &w.formula),
                support::hml_eval(&r, r.initial, &w.formula),
            );
            prop_assert!(on_l != on_r);
        }
    }

    #[test]
    fn bisimilarity_is_an_equivalence(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = support::random_lts(&mut rng, 5);
        let b = support::perturb(&mut rng, &a, 7);
        let c = support::perturb(&mut rng, &b, 7);
        let bis = |x: &FiniteLts, y: &FiniteLts| weak_bisim(x, y).is_bisimilar();
        prop_assert!(bis(&a, &a));
        prop_assert_eq!(bis(&a, &b), bis(&b, &a));
        if bis(&a, &b) && bis(&b, &c) {
            prop_assert!(bis(&a, &c));
        }
    }
}

// ---------------------------------------------------------------------------
// Simulation, trace search and the model language.

proptest! {
    #![proptest_config(cfg(16))]

    #[test]
    fn monte_carlo_is_reproducible(seed in any::<u64>(), model in any::<u64>()) {
        let m = support::random_model(model);
        prop_assert_eq!(monte_carlo(&m, 6, 40, seed), monte_carlo(&m, 6, 40, seed));
    }

    #[test]
    fn found_traces_replay(cooling in 5i64..=7, bound in 15usize..=25) {
        let p = EngineParams { heat_on: ratio(-cooling, 10), ..EngineParams::eng() };
        let m = build_engine(&p);
        let target = ActionPattern::Out { chan: "warning".into(), value: None };
        let trace = find_trace_to(&m, &target, bound).unwrap();
        prop_assert!(trace.is_some());
        let trace = trace.unwrap();
        let run = trace.replay(&m).unwrap();
        prop_assert!(matches!(run.actions().last(), Some(Label::Out(c, _)) if c == "warning"));
        prop_assert!(trace.target_slot() <= bound);
    }
}

proptest! {
    #![proptest_config(cfg(128))]

    #[test]
    fn printed_models_parse_back(seed in any::<u64>()) {
        let m = support::random_model(seed);
        let text = print_model(&m);
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(print_model(&back), text);
    }
}
