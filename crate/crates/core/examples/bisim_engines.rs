//! Weak bisimilarity between the engine variants, with a distinguishing formula
//! when they differ.

use ccps::abstraction::Widening;
use ccps::analysis::bisim_systems;
use ccps::casestudy::{build_engine, EngineParams};

fn main() -> anyhow::Result<()> {
    let eng = build_engine(&EngineParams::eng());
    let pairs = [
        ("Eng", "Eng-bar", build_engine(&EngineParams::eng_bar())),
        ("Eng", "Eng-hat", build_engine(&EngineParams::eng_hat())),
    ];
    for (a, b, other) in pairs {
        let verdict = bisim_systems(&eng, &other, Widening::Exact)?;
        println!("{a} vs {b}: {}", serde_json::to_string_pretty(&verdict.report())?);
    }
    Ok(())
}
