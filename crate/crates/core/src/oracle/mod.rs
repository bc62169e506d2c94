//! Numeric semantics: function values by integrating the defining ODE,
//! three-valued formula evaluation, seeded simulation of hybrid programs and
//! trace monitoring.

mod eval;
pub mod integrate;
mod simulate;

use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

pub use eval::Evaluator;
pub use simulate::{monitor, EventKind, MonitorReport, Policy, Trace, TraceEvent};

use crate::derivative::DerivativeError;
use crate::syntax::{Formula, Ident, Program};

/// Variable values. Iteration order is insertion order.
pub type State = IndexMap<Ident, f64>;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig {
    /// Equality tolerance for graph membership and reported agreement.
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Comparisons whose sides differ by at most this much are unknown.
    pub strict_margin: f64,
    pub max_step: f64,
    pub rng_seed: u64,
    /// Simulated (hybrid) time after which a run stops.
    pub horizon: f64,
    /// Evaluate functions whose existence was refused as zero, tainting the
    /// result, instead of failing.
    pub zero_fallback: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            strict_margin: 1e-7,
            max_step: 0.1,
            rng_seed: 0,
            horizon: 10.0,
            zero_fallback: false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("integration step underflow at t={t}")]
    StepUnderflow { t: f64 },
    #[error("solution blows up near t={t}")]
    BlowUp { t: f64 },
    #[error("division by a value within the margin of zero")]
    DivisionByZero,
    #[error("{0} has no value in the state")]
    UnboundVariable(Ident),
    #[error("cannot evaluate {0}: {1}")]
    UnknownFunction(Ident, String),
    #[error("unsupported formula {0}")]
    UnsupportedFormula(Formula),
    #[error("unsupported program {0}")]
    UnsupportedProgram(Program),
    #[error("no completed run within {0} attempts")]
    PolicyExhausted(usize),
    #[error("square root of a negative number")]
    Domain,
    #[error(transparent)]
    Derivative(#[from] DerivativeError),
}

/// Three-valued truth with Kleene connectives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Truth {
    False,
    Unknown,
    True,
}

impl Truth {
    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    pub fn and(self, other: Truth) -> Truth {
        self.min(other)
    }

    pub fn or(self, other: Truth) -> Truth {
        self.max(other)
    }

    pub fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    pub fn implies(self, other: Truth) -> Truth {
        self.not().or(other)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Truth::True => "true",
            Truth::False => "false",
            Truth::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Worst of all verdicts; `True` for none.
pub fn combine(verdicts: impl IntoIterator<Item = Truth>) -> Truth {
    verdicts.into_iter().fold(Truth::True, Truth::and)
}
