use std::fmt;

use super::env::PhysicalEnv;
use crate::terms::{well_formed, ProcessTerm, TermError, WellFormednessError};

/// A cyber-physical system `E ⋈ P`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cps {
    pub env: PhysicalEnv,
    pub proc: ProcessTerm,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CpsError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    WellFormed(#[from] WellFormednessError),
}

impl Cps {
    /// Checks that `proc` is closed, time-guarded and well formed against
    /// `env`.
    pub fn new(env: PhysicalEnv, proc: ProcessTerm) -> Result<Cps, CpsError> {
        proc.validate()?;
        let m = Cps { env, proc };
        well_formed(&m)?;
        Ok(m)
    }

    /// Builds a system without validation. Used for intermediate states of
    /// a run, which inherit validity from their source.
    pub fn unchecked(env: PhysicalEnv, proc: ProcessTerm) -> Cps {
        Cps { env, proc }
    }
}

/// Two systems whose plants share no variable, sensor or actuator.
pub fn non_interfering(m: &Cps, n: &Cps) -> bool {
    m.env.names().is_disjoint(&n.env.names())
}

impl fmt::Display for Cps {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for (x, v) in &self.env.state {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{x}={}", crate::terms::fmt_rational(v))?;
        }
        for (a, v) in &self.env.actuators {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{a}={v}")?;
        }
        write!(f, "}} |> {}", self.proc)
    }
}
