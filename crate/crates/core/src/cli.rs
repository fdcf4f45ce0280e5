//! Command-line driver. Exit codes: 0 success (or bisimilar), 1 negative
//! answer (not bisimilar, no trace, failed property), 2 error.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _};
use clap::{Parser, Subcommand, ValueEnum};

use crate::abstraction::{build_abstract_lts, format_envelope, reach_envelope, AbstractionConfig, FiniteLts, Query, Widening};
use crate::analysis::{abstract_lts, check_time_properties, find_trace_to, monte_carlo, weak_bisim, TimeConfig};
use crate::casestudy::proposition_suite;
use crate::dsl::{parse, print_model};
use crate::lts::{parse_value, trace_to_json, write_trace_csv, ActionPattern};
use crate::physics::Cps;

#[derive(Parser, Debug)]
#[command(name = "ccps", version, about = "Analyse cyber-physical system models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Policy {
    Hull,
    Exact,
}

impl From<Policy> for Widening {
    fn from(p: Policy) -> Widening {
        match p {
            Policy::Hull => Widening::Hull,
            Policy::Exact => Widening::Exact,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a model and print it in normal form.
    Parse { file: PathBuf },
    /// Seeded simulation campaign.
    Simulate {
        file: PathBuf,
        #[arg(long)]
        runs: usize,
        #[arg(long)]
        horizon: usize,
        #[arg(long)]
        seed: u64,
        /// Per-run CSV output; `-` for standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build the abstract LTS and print its size.
    Explore {
        file: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_enum, default_value = "hull")]
        widening: Policy,
        /// Write the LTS in text form.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Temperature envelopes at the locations a query selects.
    Reach {
        file: PathBuf,
        #[arg(long = "where")]
        query: String,
    },
    /// Weak bisimilarity of two models (or two `.lts` files).
    Bisim {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        widening: Policy,
        #[arg(long)]
        json: bool,
    },
    /// Concrete run ending in the target action.
    FindTrace {
        file: PathBuf,
        /// `tick`, `tau`, `out CHANNEL` or `out CHANNEL VALUE`.
        #[arg(long)]
        target: String,
        #[arg(long)]
        bound: usize,
        #[arg(long)]
        json: bool,
    },
    /// Run the case-study property suite.
    Props {
        #[arg(long)]
        json: bool,
    },
    /// Check time determinism, maximal progress, patience and well-timedness.
    CheckTime {
        file: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
}

fn load(path: &Path) -> anyhow::Result<Cps> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn load_lts(path: &Path, widening: Widening) -> anyhow::Result<(FiniteLts, Option<Widening>)> {
    if path.extension().is_some_and(|e| e == "lts") {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        return Ok((FiniteLts::parse(&text)?, None));
    }
    let (l, w) = abstract_lts(&load(path)?, widening)?;
    Ok((l, Some(w)))
}

fn parse_target(text: &str) -> anyhow::Result<ActionPattern> {
    let words: Vec<&str> = text.split_whitespace().collect();
    Ok(match words[..] {
        ["tick"] => ActionPattern::Tick,
        ["tau"] => ActionPattern::Tau,
        ["out", c] => ActionPattern::Out { chan: c.to_string(), value: None },
        ["out", c, v] => ActionPattern::Out {
            chan: c.to_string(),
            value: Some(parse_value(v).ok_or_else(|| anyhow!("bad value `{v}`"))?),
        },
        _ => bail!("cannot parse target `{text}`"),
    })
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            2
        }
    }
}

fn execute(cmd: Command, out: &mut dyn Write) -> anyhow::Result<i32> {
    match cmd {
        Command::Parse { file } => {
            write!(out, "{}", print_model(&load(&file)?))?;
            Ok(0)
        }
        Command::Simulate { file, runs, horizon, seed, csv } => {
            let stats = monte_carlo(&load(&file)?, runs, horizon, seed);
            let fmt = |v: Option<f64>| v.map_or("absent".to_string(), |f| format!("{f:.6}"));
            writeln!(out, "runs {runs}, horizon {horizon}, seed {seed}")?;
            writeln!(out, "coolant on fraction {}", fmt(stats.coolant_on_fraction()))?;
            writeln!(out, "mean consumption {}", fmt(stats.mean_consumption()))?;
            writeln!(out, "warnings {}", stats.warnings())?;
            writeln!(out, "deadlocks {}", stats.deadlocks())?;
            match csv {
                Some(p) if p.as_os_str() == "-" => stats.write_csv(&mut *out)?,
                Some(p) => stats.write_csv(std::fs::File::create(&p).with_context(|| format!("cannot create {}", p.display()))?)?,
                None => {}
            }
            Ok(0)
        }
        Command::Explore { file, depth, widening, export } => {
            let m = load(&file)?;
            let cfg = AbstractionConfig { widening: widening.into(), max_depth: depth, ..AbstractionConfig::default() };
            let lts = build_abstract_lts(&m, &cfg)?;
            writeln!(out, "states {}", lts.num_states())?;
            writeln!(out, "edges {}", lts.edges.len())?;
            writeln!(out, "out edges {}", lts.out_edges().len())?;
            writeln!(out, "deadlock {}", lts.deadlock().is_some())?;
            writeln!(out, "widened {}", lts.widened)?;
            writeln!(out, "truncated {}", lts.truncated)?;
            for (x, b) in lts.overall_boxes() {
                writeln!(out, "{x} in {b}")?;
            }
            if let Some(p) = export {
                std::fs::write(&p, lts.to_finite().to_string()).with_context(|| format!("cannot write {}", p.display()))?;
            }
            Ok(0)
        }
        Command::Reach { file, query } => {
            let m = load(&file)?;
            let lts = build_abstract_lts(&m, &AbstractionConfig::default())?;
            let env = reach_envelope(&lts, &Query::parse(&query)?)?;
            write!(out, "{}", format_envelope(&env))?;
            Ok(0)
        }
        Command::Bisim { left, right, widening, json } => {
            let (l, wl) = load_lts(&left, widening.into())?;
            let (mut r, wr) = load_lts(&right, wl.unwrap_or(widening.into()))?;
            let mut l = l;
            if let (Some(a), Some(b)) = (wl, wr) {
                if a != b {
                    // Compare at the same policy.
                    l = load_lts(&left, Widening::Hull)?.0;
                    r = load_lts(&right, Widening::Hull)?.0;
                }
            }
            let verdict = weak_bisim(&l, &r);
            let mut report = verdict.report();
            if wl.is_none() && wr.is_none() {
                report.level = "given LTS";
            }
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            } else {
                writeln!(out, "{} (at {})", report.verdict, report.level)?;
                if let Some(w) = verdict.witness() {
                    let side = match w.satisfied_by {
                        crate::analysis::Side::Left => left.display(),
                        crate::analysis::Side::Right => right.display(),
                    };
                    let actions: Vec<String> = w.actions().iter().map(|a| a.to_string()).collect();
                    writeln!(out, "witness: {}", actions.join(" "))?;
                    writeln!(out, "formula: {}", w.formula)?;
                    writeln!(out, "satisfied by {side}")?;
                }
            }
            Ok(if verdict.is_bisimilar() { 0 } else { 1 })
        }
        Command::FindTrace { file, target, bound, json } => {
            let m = load(&file)?;
            match find_trace_to(&m, &parse_target(&target)?, bound)? {
                Some(t) => {
                    if json {
                        writeln!(out, "{}", trace_to_json(&t.run.records))?;
                    } else {
                        write_trace_csv(&t.run.records, &mut *out)?;
                    }
                    Ok(0)
                }
                None => {
                    writeln!(out, "no trace within {bound} ticks")?;
                    Ok(1)
                }
            }
        }
        Command::Props { json } => {
            let report = proposition_suite();
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            } else {
                for r in &report.results {
                    writeln!(out, "{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail)?;
                }
            }
            Ok(if report.all_passed() { 0 } else { 1 })
        }
        Command::CheckTime { file, depth, samples, seed } => {
            let report = check_time_properties(&load(&file)?, &TimeConfig { depth, samples, seed });
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}
