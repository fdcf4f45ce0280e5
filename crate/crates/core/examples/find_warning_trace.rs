//! Concrete execution of the under-powered engine that ends in a warning.

use ccps::analysis::find_trace_to;
use ccps::casestudy::{build_engine, EngineParams};
use ccps::lts::{write_trace_csv, ActionPattern};

fn main() -> anyhow::Result<()> {
    let m = build_engine(&EngineParams::eng_hat());
    let target = ActionPattern::Out { chan: "warning".into(), value: None };
    let Some(trace) = find_trace_to(&m, &target, 20)? else {
        println!("no warning within 20 ticks");
        return Ok(());
    };
    println!("warning emitted in time slot {}", trace.target_slot());
    let replay = trace.replay(&m)?;
    write_trace_csv(&replay.records, std::io::stdout())?;

    let safe = build_engine(&EngineParams::eng());
    println!("Eng within 50 ticks: {:?}", find_trace_to(&safe, &target, 50)?.map(|t| t.target_slot()));
    Ok(())
}
