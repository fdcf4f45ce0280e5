use std::fmt;

use serde::Serialize;

use super::bisim::{weak_bisim, BisimReport, BisimVerdict};
use crate::abstraction::{build_abstract_lts, AbstractionConfig, AbstractionError, FiniteLts, Widening};
use crate::casestudy::{build_airplane, build_engine_pair, build_side_engine, check_process, EngineParams};
use crate::physics::{disjoint_union, non_interfering, Cps, CpsError};
use crate::terms::{par, restrict, ProcessTerm};

/// The contexts covered by the congruence theorem.
#[derive(Clone, Debug)]
pub enum Context {
    /// `M ⊎ O`.
    UplusWith(Cps),
    /// `M ∥ P` with `P` touching no device.
    ParallelWith(ProcessTerm),
    /// `M \ c`.
    Restrict(String),
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Context::UplusWith(_) => f.write_str("uplus"),
            Context::ParallelWith(_) => f.write_str("parallel"),
            Context::Restrict(c) => write!(f, "restrict {c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CongruenceError {
    #[error("interference: {0}")]
    InterferenceViolation(String),
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error(transparent)]
    Compose(#[from] CpsError),
}

/// State budget of the exact policy before falling back to hulls.
pub const EXACT_BUDGET: usize = 20_000;

/// Box abstraction of a system as a finite LTS. The exact policy falls back
/// to hull widening when it exceeds [`EXACT_BUDGET`]; the policy used is
/// returned alongside.
pub fn abstract_lts(m: &Cps, widening: Widening) -> Result<(FiniteLts, Widening), AbstractionError> {
    if widening == Widening::Exact {
        match build_abstract_lts(m, &AbstractionConfig::exact(EXACT_BUDGET)) {
            Ok(l) => return Ok((l.to_finite(), Widening::Exact)),
            Err(AbstractionError::StateBudgetExceeded(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((build_abstract_lts(m, &AbstractionConfig::default())?.to_finite(), Widening::Hull))
}

/// Weak bisimilarity of the abstractions of two systems. Both sides use
/// the same policy: if either falls back to hulls, so does the other.
pub fn bisim_systems(m: &Cps, n: &Cps, widening: Widening) -> Result<BisimVerdict, AbstractionError> {
    let (lm, wm) = abstract_lts(m, widening)?;
    let (ln, wn) = abstract_lts(n, wm)?;
    if wn == wm {
        return Ok(weak_bisim(&lm, &ln));
    }
    let (lm, _) = abstract_lts(m, Widening::Hull)?;
    Ok(weak_bisim(&lm, &ln))
}

/// Places `m` in `ctx`, checking the side condition first.
pub fn compose(m: &Cps, ctx: &Context) -> Result<Cps, CongruenceError> {
    match ctx {
        Context::UplusWith(o) => {
            if !non_interfering(m, o) {
                return Err(CongruenceError::InterferenceViolation("the plants share names".to_string()));
            }
            let env = disjoint_union(&m.env, &o.env).map_err(|e| CongruenceError::InterferenceViolation(e.to_string()))?;
            Ok(Cps::new(env, par(m.proc.clone(), o.proc.clone()))?)
        }
        Context::ParallelWith(p) => {
            if !p.touches_no_device() {
                return Err(CongruenceError::InterferenceViolation(
                    "the parallel process uses a sensor or an actuator".to_string(),
                ));
            }
            Ok(Cps::new(m.env.clone(), par(m.proc.clone(), p.clone()))?)
        }
        Context::Restrict(c) => Ok(Cps::new(m.env.clone(), restrict(m.proc.clone(), c.clone()))?),
    }
}

/// Verdicts before and after placing two systems in a context.
#[derive(Clone, Debug)]
pub struct CongruenceReport {
    pub context: String,
    pub component: BisimVerdict,
    pub composite: BisimVerdict,
}

impl CongruenceReport {
    /// Bisimilar components whose composites are not: a checker bug.
    pub fn violation(&self) -> bool {
        self.component.is_bisimilar() && !self.composite.is_bisimilar()
    }

    pub fn to_json(&self) -> CongruenceJson {
        CongruenceJson {
            context: self.context.clone(),
            component: self.component.report(),
            composite: self.composite.report(),
            violation: self.violation(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CongruenceJson {
    pub context: String,
    pub component: BisimReport,
    pub composite: BisimReport,
    pub violation: bool,
}

/// Checks one instance of the congruence theorem on hull abstractions.
pub fn check_congruence_instance(m: &Cps, n: &Cps, ctx: &Context) -> Result<CongruenceReport, CongruenceError> {
    if let Context::UplusWith(o) = ctx {
        if !non_interfering(m, o) || !non_interfering(n, o) {
            return Err(CongruenceError::InterferenceViolation("the plants share names".to_string()));
        }
    }
    let (cm, cn) = (compose(m, ctx)?, compose(n, ctx)?);
    Ok(CongruenceReport { context: ctx.to_string(), component: bisim_systems(m, n, Widening::Hull)?, composite: bisim_systems(&cm, &cn, Widening::Hull)? })
}

/// One link of a proof chain.
#[derive(Clone, Debug)]
pub struct ChainStep {
    pub name: String,
    pub report: CongruenceReport,
}

#[derive(Clone, Debug)]
pub struct ChainReport {
    pub steps: Vec<ChainStep>,
    /// Direct comparison of the two complete systems.
    pub direct: BisimVerdict,
}

impl ChainReport {
    pub fn all_bisimilar(&self) -> bool {
        self.steps.iter().all(|s| s.report.component.is_bisimilar() && s.report.composite.is_bisimilar())
    }

    /// The last composite verdict equals the direct verdict.
    pub fn agrees(&self) -> bool {
        self.steps.last().is_some_and(|s| s.report.composite.is_bisimilar() == self.direct.is_bisimilar())
    }
}

/// Airplane built from engines `m` compared with the one built from `n`,
/// one context at a time: each side engine under `⊎`, then `∥ Check`, then
/// `\ warning`.
pub fn airplane_congruence_chain(m: &EngineParams, n: &EngineParams) -> Result<ChainReport, CongruenceError> {
    let (ml, mr) = (build_side_engine(m, "L", "l"), build_side_engine(m, "R", "r"));
    let (nl, nr) = (build_side_engine(n, "L", "l"), build_side_engine(n, "R", "r"));
    let mut steps = Vec::new();
    let report = check_congruence_instance(&ml, &nl, &Context::UplusWith(mr.clone()))?;
    steps.push(ChainStep { name: "left engine, uplus right engine".into(), report });
    let report = check_congruence_instance(&mr, &nr, &Context::UplusWith(nl.clone()))?;
    steps.push(ChainStep { name: "right engine, uplus left engine".into(), report });
    let (pm, pn) = (build_engine_pair(m), build_engine_pair(n));
    let report = check_congruence_instance(&pm, &pn, &Context::ParallelWith(check_process()))?;
    steps.push(ChainStep { name: "engine pair, parallel Check".into(), report });
    let (cm, cn) = (compose(&pm, &Context::ParallelWith(check_process()))?, compose(&pn, &Context::ParallelWith(check_process()))?);
    let report = check_congruence_instance(&cm, &cn, &Context::Restrict("warning".into()))?;
    steps.push(ChainStep { name: "with Check, restrict warning".into(), report });
    let direct = bisim_systems(&build_airplane(m), &build_airplane(n), Widening::Hull)?;
    Ok(ChainReport { steps, direct })
}
