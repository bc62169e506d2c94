//! The soundness-critical surface: FI instances for differentially-defined
//! symbols, gated by an existence certificate, and occurrence expansion.

mod existence;
mod expand;
mod fi;

use thiserror::Error;

pub use existence::{check_existence, Evidence, ExistenceCertificate, ExistenceMethod, ExistenceMode};
pub use expand::{expand_occurrence, function_occurrences};
pub use fi::{instantiate_fi, FIInstance};

use crate::syntax::{CaptureError, Ident};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KernelError {
    #[error("global existence for family {} unproven: {reason}", names(.family))]
    ExistenceUnproven { family: Vec<Ident>, reason: String },
    #[error("no existence certificate for {symbol}: {reason}")]
    NoCertificate { symbol: Ident, reason: String },
    #[error("{symbol} expects {expected} argument(s), got {found}")]
    ArityError { symbol: Ident, expected: usize, found: usize },
    #[error(transparent)]
    Capture(#[from] CaptureError),
    #[error("bad occurrence: {0}")]
    PositionError(String),
}

fn names(ids: &[Ident]) -> String {
    ids.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(",")
}
