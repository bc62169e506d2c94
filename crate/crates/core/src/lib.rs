//! Differentially-defined functions for differential dynamic logic.
//!
//! Function symbols such as `exp`, `sin` or a user's `tanh` carry a graph
//! formula characterizing them as the solution of an ODE. The crate parses
//! and prints models that use them, checks global existence before handing
//! out function-interpretation instances, generates the usual derived facts
//! and evaluates everything numerically for testing.

pub mod check;
pub mod definitions;
pub mod derivative;
pub mod kernel;
pub mod lemmas;
pub mod oracle;
pub mod parse;
pub mod poly;
pub mod print;
pub mod syntax;

pub use definitions::{DefinedFamily, DefinitionError, Registry};
pub use lemmas::{Fact, FactKind};
pub use oracle::{Evaluator, OracleConfig, Truth};
pub use kernel::{ExistenceCertificate, ExistenceMode, KernelError};
pub use parse::{parse_formula, parse_model, parse_program, parse_term, ModelFile, SyntaxError};
pub use syntax::{CompareOp, Formula, Ident, InterpretedSymbol, OdeSystem, Program, Term};
