//! Parse a model file, print it back and run one step of the semantics.

use ccps::dsl::{parse_model, print_model};
use ccps::lts::{system_steps, DisturbanceResolver};

fn main() -> anyhow::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/models/eng.ccps").into());
    let model = parse_model(&std::fs::read_to_string(&path)?)?;
    for (name, _) in &model.definitions {
        println!("defined {name}");
    }
    print!("{}", print_model(&model.cps));
    for step in system_steps(&model.cps, &mut DisturbanceResolver::ZeroNoise)? {
        println!("initial move: {}", step.action);
    }
    Ok(())
}
