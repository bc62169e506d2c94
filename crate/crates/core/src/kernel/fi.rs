use super::KernelError;
use crate::definitions::{Registry, SymbolInfo};
use crate::syntax::subst::substitute_renaming;
use crate::syntax::{input_placeholder, Formula, Ident, InterpretedSymbol, Substitution, Term, OUTPUT_PLACEHOLDER};

/// `(e0 = h(e1..ek)) <-> φ(e0, e1..ek)`
#[derive(Clone, Debug, PartialEq)]
pub struct FIInstance {
    pub symbol: InterpretedSymbol,
    pub output_term: Term,
    pub input_terms: Vec<Term>,
    pub equivalence: Formula,
    /// The existence certificate behind this instance was assumed.
    pub assumed: bool,
}

impl FIInstance {
    /// The right-hand side `φ(e0, e1..ek)`.
    pub fn characterization(&self) -> &Formula {
        match &self.equivalence {
            Formula::Equiv(_, rhs) => rhs,
            _ => unreachable!("FI instances are equivalences"),
        }
    }
}

pub fn instantiate_fi(
    registry: &Registry,
    symbol: &InterpretedSymbol,
    e0: Term,
    args: Vec<Term>,
) -> Result<FIInstance, KernelError> {
    if args.len() != symbol.arity {
        return Err(KernelError::ArityError { symbol: symbol.name.clone(), expected: symbol.arity, found: args.len() });
    }
    let no_cert = |reason: &str| KernelError::NoCertificate { symbol: symbol.name.clone(), reason: reason.to_string() };
    let assumed = match registry.resolve(symbol) {
        Some(SymbolInfo::Family { family, .. }) => match &family.existence {
            Ok(cert) => cert.is_assumed(),
            Err(e) => return Err(no_cert(&e.to_string())),
        },
        Some(SymbolInfo::Numeric(_)) => return Err(no_cert("numeric-only builtin")),
        None => return Err(no_cert("not a differentially-defined symbol")),
    };
    let phi = symbol.interpretation.as_ref().ok_or_else(|| no_cert("no interpretation"))?;
    let mut sigma: Substitution = Substitution::new();
    sigma.insert(Ident::new(OUTPUT_PLACEHOLDER), e0.clone());
    for (i, a) in args.iter().enumerate() {
        sigma.insert(input_placeholder(i + 1), a.clone());
    }
    let rhs = substitute_renaming(phi, &sigma)?;
    let lhs = Formula::eq(e0.clone(), Term::FuncApp(symbol.clone(), args.clone()));
    Ok(FIInstance { symbol: symbol.clone(), output_term: e0, input_terms: args, equivalence: lhs.equiv(rhs), assumed })
}
