//! Capture-avoiding substitution of terms for free variable occurrences and
//! renaming of bound variables.

use std::collections::BTreeMap;

use thiserror::Error;

use super::vars::{AllNames, FreeVars, VarSet};
use super::{Formula, Ident, OdeSystem, Program, Term};

pub type Substitution = BTreeMap<Ident, Term>;

/// The substitution would bind a free variable of a replacement term, or
/// replace an occurrence that is bound on some runs but not others.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("substituting for {var} is not admissible: {binder} is bound at the occurrence")]
pub struct CaptureError {
    pub var: Ident,
    pub binder: Ident,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0} already occurs in the formula")]
pub struct FreshnessError(pub Ident);

/// Replaces every free occurrence of each mapped identifier.
pub fn substitute(phi: &Formula, sigma: &Substitution) -> Result<Formula, CaptureError> {
    Subst { sigma }.formula(phi, &Scope::default())
}

pub fn substitute_term(e: &Term, sigma: &Substitution) -> Result<Term, CaptureError> {
    Subst { sigma }.term(e, &Scope::default())
}

#[derive(Clone, Default)]
struct Scope {
    /// May be bound at this position.
    bound: VarSet,
    /// Bound on every path to this position.
    must: VarSet,
}

impl Scope {
    fn bind_all(&self, vars: impl IntoIterator<Item = Ident> + Clone) -> Scope {
        let mut s = self.clone();
        s.bound.extend(vars.clone());
        s.must.extend(vars);
        s
    }
}

struct Subst<'a> {
    sigma: &'a Substitution,
}

impl Subst<'_> {
    fn term(&self, e: &Term, scope: &Scope) -> Result<Term, CaptureError> {
        let r = |t: &Term| self.term(t, scope).map(Box::new);
        Ok(match e {
            Term::Var(x) => match self.sigma.get(x) {
                Some(_) if scope.must.contains(x) => e.clone(),
                Some(_) if scope.bound.contains(x) => {
                    return Err(CaptureError { var: x.clone(), binder: x.clone() })
                }
                Some(replacement) => {
                    if let Some(b) = replacement.free_vars().intersection(&scope.bound).next() {
                        return Err(CaptureError { var: x.clone(), binder: b.clone() });
                    }
                    replacement.clone()
                }
                None => e.clone(),
            },
            Term::Const(_) => e.clone(),
            Term::Plus(a, b) => Term::Plus(r(a)?, r(b)?),
            Term::Minus(a, b) => Term::Minus(r(a)?, r(b)?),
            Term::Times(a, b) => Term::Times(r(a)?, r(b)?),
            Term::Divide(a, b) => Term::Divide(r(a)?, r(b)?),
            Term::Power(a, n) => Term::Power(r(a)?, *n),
            Term::Negate(a) => Term::Negate(r(a)?),
            Term::Differential(a) => Term::Differential(r(a)?),
            Term::FuncApp(s, args) => Term::FuncApp(
                s.clone(),
                args.iter().map(|a| self.term(a, scope)).collect::<Result<_, _>>()?,
            ),
        })
    }

    fn formula(&self, f: &Formula, scope: &Scope) -> Result<Formula, CaptureError> {
        let r = |p: &Formula| self.formula(p, scope).map(Box::new);
        Ok(match f {
            Formula::True | Formula::False => f.clone(),
            Formula::Compare(op, a, b) => Formula::Compare(*op, self.term(a, scope)?, self.term(b, scope)?),
            Formula::Not(p) => Formula::Not(r(p)?),
            Formula::And(a, b) => Formula::And(r(a)?, r(b)?),
            Formula::Or(a, b) => Formula::Or(r(a)?, r(b)?),
            Formula::Implies(a, b) => Formula::Implies(r(a)?, r(b)?),
            Formula::Equiv(a, b) => Formula::Equiv(r(a)?, r(b)?),
            Formula::Forall(x, p) => Formula::Forall(x.clone(), Box::new(self.formula(p, &scope.bind_all([x.clone()]))?)),
            Formula::Exists(x, p) => Formula::Exists(x.clone(), Box::new(self.formula(p, &scope.bind_all([x.clone()]))?)),
            Formula::Boxed(a, p) => {
                let (a2, after) = self.program(a, scope)?;
                Formula::Boxed(Box::new(a2), Box::new(self.formula(p, &after)?))
            }
            Formula::Diamond(a, p) => {
                let (a2, after) = self.program(a, scope)?;
                Formula::Diamond(Box::new(a2), Box::new(self.formula(p, &after)?))
            }
        })
    }

    /// Substitutes in `a` and returns the scope that holds after it ran.
    fn program(&self, a: &Program, scope: &Scope) -> Result<(Program, Scope), CaptureError> {
        Ok(match a {
            Program::Test(p) => (Program::Test(self.formula(p, scope)?), scope.clone()),
            Program::Assign(x, e) => (Program::Assign(x.clone(), self.term(e, scope)?), scope.bind_all([x.clone()])),
            Program::AssignAny(x) => (a.clone(), scope.bind_all([x.clone()])),
            Program::Ode(ode) => {
                let inner = scope.bind_all(ode.equations.iter().map(|(x, _)| x.clone()).collect::<Vec<_>>());
                let mut eqs = Vec::with_capacity(ode.equations.len());
                for (x, e) in &ode.equations {
                    eqs.push((x.clone(), self.term(e, &inner)?));
                }
                let domain = self.formula(&ode.domain, &inner)?;
                (Program::Ode(OdeSystem { equations: eqs, domain }), inner)
            }
            Program::Choice(p, q) => {
                let (p2, sp) = self.program(p, scope)?;
                let (q2, sq) = self.program(q, scope)?;
                let mut after = scope.clone();
                after.bound.extend(sp.bound.union(&sq.bound).cloned());
                after.must.extend(sp.must.intersection(&sq.must).cloned());
                (p2.choice(q2), after)
            }
            Program::Sequence(p, q) => {
                let (p2, sp) = self.program(p, scope)?;
                let (q2, sq) = self.program(q, &sp)?;
                (p2.seq(q2), sq)
            }
            Program::Loop(p) => {
                let mut inner = scope.clone();
                inner.bound.extend(p.bound_vars());
                let (p2, _) = self.program(p, &inner)?;
                (p2.repeat(), inner)
            }
            Program::IfThen(c, p) => {
                let c2 = self.formula(c, scope)?;
                let (p2, sp) = self.program(p, scope)?;
                let mut after = scope.clone();
                after.bound.extend(sp.bound);
                (Program::IfThen(c2, Box::new(p2)), after)
            }
        })
    }
}

/// Renames the binder `old` to `fresh` wherever `old` is bound: quantifiers
/// over `old`, and modalities whose program writes `old` before any read.
/// Free occurrences stay untouched.
pub fn alpha_rename(phi: &Formula, old: &Ident, fresh: &Ident) -> Result<Formula, FreshnessError> {
    if phi.all_names().contains(fresh) {
        return Err(FreshnessError(fresh.clone()));
    }
    Ok(rename_binders(phi, old, fresh))
}

fn rename_binders(f: &Formula, old: &Ident, fresh: &Ident) -> Formula {
    let r = |p: &Formula| Box::new(rename_binders(p, old, fresh));
    match f {
        Formula::True | Formula::False | Formula::Compare(..) => f.clone(),
        Formula::Not(p) => Formula::Not(r(p)),
        Formula::And(a, b) => Formula::And(r(a), r(b)),
        Formula::Or(a, b) => Formula::Or(r(a), r(b)),
        Formula::Implies(a, b) => Formula::Implies(r(a), r(b)),
        Formula::Equiv(a, b) => Formula::Equiv(r(a), r(b)),
        Formula::Forall(x, p) if x == old => Formula::Forall(fresh.clone(), Box::new(rename_everywhere(p, old, fresh))),
        Formula::Exists(x, p) if x == old => Formula::Exists(fresh.clone(), Box::new(rename_everywhere(p, old, fresh))),
        Formula::Forall(x, p) => Formula::Forall(x.clone(), r(p)),
        Formula::Exists(x, p) => Formula::Exists(x.clone(), r(p)),
        Formula::Boxed(a, p) | Formula::Diamond(a, p) => {
            let renamable = a.bound_vars().contains(old) && !f.free_vars().contains(old);
            let (a2, p2) = if renamable {
                (rename_program(a, old, fresh), rename_everywhere(p, old, fresh))
            } else {
                (rename_program_binders(a, old, fresh), rename_binders(p, old, fresh))
            };
            match f {
                Formula::Boxed(..) => Formula::boxed(a2, p2),
                _ => Formula::diamond(a2, p2),
            }
        }
    }
}

fn rename_program_binders(a: &Program, old: &Ident, fresh: &Ident) -> Program {
    match a {
        Program::Test(p) => Program::Test(rename_binders(p, old, fresh)),
        Program::Assign(..) | Program::AssignAny(_) => a.clone(),
        Program::Ode(ode) => Program::Ode(OdeSystem {
            equations: ode.equations.clone(),
            domain: rename_binders(&ode.domain, old, fresh),
        }),
        Program::Choice(p, q) => rename_program_binders(p, old, fresh).choice(rename_program_binders(q, old, fresh)),
        Program::Sequence(p, q) => rename_program_binders(p, old, fresh).seq(rename_program_binders(q, old, fresh)),
        Program::Loop(p) => rename_program_binders(p, old, fresh).repeat(),
        Program::IfThen(c, p) => Program::IfThen(rename_binders(c, old, fresh), Box::new(rename_program_binders(p, old, fresh))),
    }
}

fn rename_term(e: &Term, old: &Ident, fresh: &Ident) -> Term {
    e.map_bottom_up(&mut |t| match t {
        Term::Var(ref x) if x == old => Term::Var(fresh.clone()),
        other => other,
    })
}

fn rename_ident(x: &Ident, old: &Ident, fresh: &Ident) -> Ident {
    if x == old {
        fresh.clone()
    } else {
        x.clone()
    }
}

/// Blind renaming of every occurrence, binders included.
fn rename_everywhere(f: &Formula, old: &Ident, fresh: &Ident) -> Formula {
    let r = |p: &Formula| Box::new(rename_everywhere(p, old, fresh));
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Compare(op, a, b) => Formula::Compare(*op, rename_term(a, old, fresh), rename_term(b, old, fresh)),
        Formula::Not(p) => Formula::Not(r(p)),
        Formula::And(a, b) => Formula::And(r(a), r(b)),
        Formula::Or(a, b) => Formula::Or(r(a), r(b)),
        Formula::Implies(a, b) => Formula::Implies(r(a), r(b)),
        Formula::Equiv(a, b) => Formula::Equiv(r(a), r(b)),
        Formula::Forall(x, p) => Formula::Forall(rename_ident(x, old, fresh), r(p)),
        Formula::Exists(x, p) => Formula::Exists(rename_ident(x, old, fresh), r(p)),
        Formula::Boxed(a, p) => Formula::boxed(rename_program(a, old, fresh), rename_everywhere(p, old, fresh)),
        Formula::Diamond(a, p) => Formula::diamond(rename_program(a, old, fresh), rename_everywhere(p, old, fresh)),
    }
}

fn rename_program(a: &Program, old: &Ident, fresh: &Ident) -> Program {
    match a {
        Program::Test(p) => Program::Test(rename_everywhere(p, old, fresh)),
        Program::Assign(x, e) => Program::Assign(rename_ident(x, old, fresh), rename_term(e, old, fresh)),
        Program::AssignAny(x) => Program::AssignAny(rename_ident(x, old, fresh)),
        Program::Ode(ode) => Program::Ode(OdeSystem {
            equations: ode
                .equations
                .iter()
                .map(|(x, e)| (rename_ident(x, old, fresh), rename_term(e, old, fresh)))
                .collect(),
            domain: rename_everywhere(&ode.domain, old, fresh),
        }),
        Program::Choice(p, q) => rename_program(p, old, fresh).choice(rename_program(q, old, fresh)),
        Program::Sequence(p, q) => rename_program(p, old, fresh).seq(rename_program(q, old, fresh)),
        Program::Loop(p) => rename_program(p, old, fresh).repeat(),
        Program::IfThen(c, p) => Program::IfThen(rename_everywhere(c, old, fresh), Box::new(rename_program(p, old, fresh))),
    }
}

/// Substitution that renames clashing binders until it becomes admissible.
pub fn substitute_renaming(phi: &Formula, sigma: &Substitution) -> Result<Formula, CaptureError> {
    let mut current = phi.clone();
    loop {
        match substitute(&current, sigma) {
            Ok(done) => return Ok(done),
            Err(err) => {
                let mut avoid = current.all_names();
                for (x, e) in sigma {
                    avoid.insert(x.clone());
                    avoid.extend(e.free_vars());
                }
                let fresh = super::vars::fresh_name(err.binder.as_str(), &avoid);
                let renamed = rename_binders(&current, &err.binder, &fresh);
                if renamed == current {
                    return Err(err);
                }
                current = renamed;
            }
        }
    }
}
