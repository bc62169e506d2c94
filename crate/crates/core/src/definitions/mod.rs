//! Differentially-defined function families: construction and recognition
//! of their characterizing formulas, and the symbol registry.

mod family;
pub mod registry;
mod shape;

use thiserror::Error;

pub use family::{build_interpretation, exact_value, DefinedFamily};
pub use registry::{builtin_registry, NumericBuiltin, RegisteredFamily, Registry, SymbolInfo};
pub use shape::{match_graph, recognize_shape, GraphMatch};

use crate::parse::ImplicitDecl;
use crate::syntax::{Ident, InterpretedSymbol, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DefinitionError {
    #[error("coordinate {index} out of range for a family of {len}")]
    IndexError { index: usize, len: usize },
    #[error("ill-formed definition: {0}")]
    IllFormedFamily(String),
    #[error("{0} is already defined differently")]
    ShadowingError(Ident),
}

/// The family induced by an `implicit` declaration. Initial assignments must
/// cover every declared name; an assignment to the argument sets the initial
/// time, which is zero otherwise.
pub fn family_from_decl(decl: &ImplicitDecl) -> Result<DefinedFamily, DefinitionError> {
    let ill = |m: String| Err(DefinitionError::IllFormedFamily(m));
    let mut rhs = Vec::with_capacity(decl.names.len());
    let mut init = Vec::with_capacity(decl.names.len());
    for name in &decl.names {
        match decl.ode.iter().find(|(x, _)| x == name) {
            Some((_, f)) => rhs.push(f.clone()),
            None => return ill(format!("no differential equation for {name}")),
        }
        match decl.init_assignments.iter().find(|(x, _)| x == name) {
            Some((_, v)) => init.push(v.clone()),
            None => return ill(format!("no initial value for {name}")),
        }
    }
    if let Some((x, _)) = decl.ode.iter().find(|(x, _)| !decl.names.contains(x)) {
        return ill(format!("differential equation for undeclared {x}"));
    }
    let mut init_time = Term::int(0);
    for (x, v) in &decl.init_assignments {
        if *x == decl.argument {
            init_time = v.clone();
        } else if !decl.names.contains(x) {
            return ill(format!("initial assignment to undeclared {x}"));
        }
    }
    DefinedFamily::new(decl.names.clone(), rhs, decl.argument.clone(), init, init_time)
}

/// One annotated symbol per declared name, in declaration order.
pub fn desugar_implicit(decl: &ImplicitDecl) -> Result<Vec<InterpretedSymbol>, DefinitionError> {
    let family = family_from_decl(decl)?;
    symbols_of(&family)
}

pub fn symbols_of(family: &DefinedFamily) -> Result<Vec<InterpretedSymbol>, DefinitionError> {
    (0..family.len())
        .map(|i| {
            let phi = build_interpretation(family, i)?;
            InterpretedSymbol::interpreted(family.names()[i].clone(), 1, phi)
                .map_err(|e| DefinitionError::IllFormedFamily(e.to_string()))
        })
        .collect()
}
