//! Time determinism, maximal progress, patience and well-timedness on the engines.

use ccps::analysis::{check_time_properties, TimeConfig};
use ccps::casestudy::{build_engine, EngineParams};

fn main() {
    let cfg = TimeConfig { depth: 30, samples: 200, seed: 1 };
    for (name, p) in [("Eng", EngineParams::eng()), ("Eng-hat", EngineParams::eng_hat())] {
        let report = check_time_properties(&build_engine(&p), &cfg);
        println!("{name}: instant bound {}", report.instant_bound);
        for prop in &report.properties {
            println!("  {:<18} {} ({} checks)", prop.name, if prop.passed { "ok" } else { "FAILED" }, prop.checked);
        }
    }
}
