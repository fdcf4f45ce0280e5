//! Lifting the equivalence of single engines to the two-engine airplane.

use ccps::analysis::airplane_congruence_chain;
use ccps::casestudy::EngineParams;

fn main() -> anyhow::Result<()> {
    let chain = airplane_congruence_chain(&EngineParams::eng(), &EngineParams::eng_bar())?;
    for step in &chain.steps {
        let r = &step.report;
        println!(
            "{:<36} components bisimilar {}, composites bisimilar {}",
            step.name,
            r.component.is_bisimilar(),
            r.composite.is_bisimilar()
        );
    }
    println!("every step bisimilar: {}", chain.all_bisimilar());
    println!("direct airplane comparison agrees: {}", chain.agrees());
    Ok(())
}
