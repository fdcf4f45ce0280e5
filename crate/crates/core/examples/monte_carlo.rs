//! Seeded simulation campaign comparing coolant usage of Eng and Eng-bar.

use ccps::analysis::monte_carlo;
use ccps::casestudy::{build_engine, EngineParams};

fn main() -> anyhow::Result<()> {
    let (runs, horizon, seed) = (100, 250, 2024);
    for (name, p) in [("Eng", EngineParams::eng()), ("Eng-bar", EngineParams::eng_bar())] {
        let stats = monte_carlo(&build_engine(&p), runs, horizon, seed);
        let on = stats.turn_on_values("temp");
        let lo = on.iter().min().map(|r| format!("{:.3}", ccps::terms::rational_to_f64(r)));
        let hi = on.iter().max().map(|r| format!("{:.3}", ccps::terms::rational_to_f64(r)));
        println!(
            "{name}: coolant on {:.3}, consumption {:.3}, warnings {}, turn-on temp range {:?}..{:?}",
            stats.coolant_on_fraction().unwrap_or(f64::NAN),
            stats.mean_consumption().unwrap_or(f64::NAN),
            stats.warnings(),
            lo,
            hi
        );
    }
    Ok(())
}
