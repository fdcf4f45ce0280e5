//! Temperature envelopes of the engine at the moments the coolant switches.

use ccps::abstraction::{build_abstract_lts, format_envelope, reach_envelope, AbstractionConfig, Query};
use ccps::casestudy::{build_engine, expected_turn_off, expected_turn_on, EngineParams};

fn main() -> anyhow::Result<()> {
    for (name, p) in [("Eng", EngineParams::eng()), ("Eng-bar", EngineParams::eng_bar())] {
        let lts = build_abstract_lts(&build_engine(&p), &AbstractionConfig::default())?;
        println!("{name}: {} abstract states", lts.num_states());
        for (q, expected) in [("turn_on", expected_turn_on(&p)), ("turn_off", expected_turn_off(&p))] {
            let env = reach_envelope(&lts, &Query::parse(q)?)?;
            println!("  {q:<9} {} (closed form {expected})", format_envelope(&env).trim_end());
        }
    }
    Ok(())
}
