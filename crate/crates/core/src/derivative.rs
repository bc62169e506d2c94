//! Symbolic Lie derivatives along an ODE, differentiating defined functions
//! with their differential axioms.

use thiserror::Error;

use crate::definitions::{Registry, SymbolInfo};
use crate::lemmas::{differential_axiom, LemmaError, Statement};
use crate::syntax::simplify::simplify_term;
use crate::syntax::{substitute_term, Ident, OdeSystem, Substitution, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DerivativeError {
    #[error("no differential axiom for {0}")]
    MissingAxiom(Ident),
    #[error("cannot differentiate the differential {0}")]
    NestedDifferential(Term),
    #[error(transparent)]
    Lemma(#[from] LemmaError),
}

/// The total derivative of `e` along the vector field of `ode`. Variables
/// without an equation are constants.
pub fn lie_derivative(registry: &Registry, ode: &OdeSystem, e: &Term) -> Result<Term, DerivativeError> {
    let d = Differentiator { registry, ode };
    Ok(simplify_term(&d.derive(e)?))
}

struct Differentiator<'a> {
    registry: &'a Registry,
    ode: &'a OdeSystem,
}

impl Differentiator<'_> {
    fn derive(&self, e: &Term) -> Result<Term, DerivativeError> {
        Ok(match e {
            Term::Var(x) => self.ode.rhs_of(x.as_str()).cloned().unwrap_or(Term::int(0)),
            Term::Const(_) => Term::int(0),
            Term::Plus(a, b) => self.derive(a)? + self.derive(b)?,
            Term::Minus(a, b) => self.derive(a)? - self.derive(b)?,
            Term::Times(a, b) => self.derive(a)? * (**b).clone() + (**a).clone() * self.derive(b)?,
            Term::Divide(a, b) => {
                let num = self.derive(a)? * (**b).clone() - (**a).clone() * self.derive(b)?;
                num / (**b).clone().pow(2)
            }
            Term::Power(_, 0) => Term::int(0),
            Term::Power(a, n) => Term::int(*n as i64) * (**a).clone().pow(n - 1) * self.derive(a)?,
            Term::Negate(a) => -self.derive(a)?,
            Term::Differential(_) => return Err(DerivativeError::NestedDifferential(e.clone())),
            Term::FuncApp(s, _) if s.arity == 0 => Term::int(0),
            Term::FuncApp(s, args) => {
                let missing = || DerivativeError::MissingAxiom(s.name.clone());
                let Some(SymbolInfo::Family { family, index }) = self.registry.resolve(s) else {
                    return Err(missing());
                };
                let fact = differential_axiom(self.registry, &family, index)?;
                let Statement::Equation(Term::Differential(lhs), rhs) = fact.statement else {
                    return Err(missing());
                };
                let Term::FuncApp(_, ref placeholder) = *lhs else { return Err(missing()) };
                let Term::Var(p) = &placeholder[0] else { return Err(missing()) };
                let arg = &args[0];
                // instantiate the axiom at the argument, then replace (arg)'
                let sigma = Substitution::from([(p.clone(), arg.clone())]);
                let rhs = substitute_term(&rhs, &sigma).map_err(LemmaError::from)?;
                rhs.replace(&arg.clone().differential(), &self.derive(arg)?)
            }
        })
    }
}
