//! Expansion of a single function occurrence into its characterization.

use super::{instantiate_fi, KernelError};
use crate::definitions::Registry;
use crate::syntax::vars::{fresh_name, AllNames};
use crate::syntax::{Formula, FreeVars, OdeSystem, Program, Term};

/// Every function application in term positions of the formula, in the
/// pre-order used to number occurrences.
pub fn function_occurrences(phi: &Formula) -> Vec<Term> {
    let mut out = Vec::new();
    phi.for_each_term(&mut |t| {
        t.visit(&mut |s| {
            if matches!(s, Term::FuncApp(..)) {
                out.push(s.clone());
            }
        })
    });
    out
}

/// Replaces the atom containing occurrence number `occurrence` (see
/// [`function_occurrences`]) by `\exists z (φ_h(z,e) & A(z))` in positive
/// positions or `\forall z (φ_h(z,e) -> A(z))` in negative ones.
pub fn expand_occurrence(registry: &Registry, phi: &Formula, occurrence: usize) -> Result<Formula, KernelError> {
    let occurrences = function_occurrences(phi);
    if occurrence >= occurrences.len() {
        return Err(KernelError::PositionError(format!(
            "occurrence {occurrence} requested, formula has {}",
            occurrences.len()
        )));
    }
    let mut avoid = phi.all_names();
    avoid.extend(occurrences[occurrence].free_vars());
    let z = fresh_name("z", &avoid);
    let mut ex = Expander { registry, target: occurrence, seen: 0, z: Term::Var(z), result: None };
    let out = ex.formula(phi, false)?;
    match ex.result {
        Some(()) => Ok(out),
        None => Err(KernelError::PositionError("occurrence is not inside a comparison".into())),
    }
}

struct Expander<'a> {
    registry: &'a Registry,
    target: usize,
    seen: usize,
    z: Term,
    result: Option<()>,
}

impl Expander<'_> {
    fn formula(&mut self, f: &Formula, negative: bool) -> Result<Formula, KernelError> {
        Ok(match f {
            Formula::True | Formula::False => f.clone(),
            Formula::Compare(op, a, b) => {
                let count = count_apps(a) + count_apps(b);
                if self.result.is_none() && self.target >= self.seen && self.target < self.seen + count {
                    let local = self.target - self.seen;
                    self.seen += count;
                    return self.expand_atom(*op, a, b, local, negative);
                }
                self.seen += count;
                f.clone()
            }
            Formula::Not(p) => Formula::Not(Box::new(self.formula(p, !negative)?)),
            Formula::And(a, b) => self.formula(a, negative)?.and(self.formula(b, negative)?),
            Formula::Or(a, b) => self.formula(a, negative)?.or(self.formula(b, negative)?),
            Formula::Implies(a, b) => self.formula(a, !negative)?.implies(self.formula(b, negative)?),
            Formula::Equiv(a, b) => self.formula(a, negative)?.equiv(self.formula(b, negative)?),
            Formula::Forall(x, p) => Formula::Forall(x.clone(), Box::new(self.formula(p, negative)?)),
            Formula::Exists(x, p) => Formula::Exists(x.clone(), Box::new(self.formula(p, negative)?)),
            Formula::Boxed(a, p) => {
                let a2 = self.program(a, !negative)?;
                Formula::boxed(a2, self.formula(p, negative)?)
            }
            Formula::Diamond(a, p) => {
                let a2 = self.program(a, negative)?;
                Formula::diamond(a2, self.formula(p, negative)?)
            }
        })
    }

    /// `test_negative` is the polarity of test conditions in this program.
    fn program(&mut self, a: &Program, test_negative: bool) -> Result<Program, KernelError> {
        Ok(match a {
            Program::Test(p) => Program::Test(self.formula(p, test_negative)?),
            Program::Assign(x, e) => {
                self.skip_term(e)?;
                Program::Assign(x.clone(), e.clone())
            }
            Program::AssignAny(_) => a.clone(),
            Program::Ode(ode) => {
                for (_, e) in &ode.equations {
                    self.skip_term(e)?;
                }
                let domain = self.formula(&ode.domain, test_negative)?;
                Program::Ode(OdeSystem { equations: ode.equations.clone(), domain })
            }
            Program::Choice(p, q) => self.program(p, test_negative)?.choice(self.program(q, test_negative)?),
            Program::Sequence(p, q) => self.program(p, test_negative)?.seq(self.program(q, test_negative)?),
            Program::Loop(p) => self.program(p, test_negative)?.repeat(),
            Program::IfThen(c, p) => {
                let c2 = self.formula(c, test_negative)?;
                Program::IfThen(c2, Box::new(self.program(p, test_negative)?))
            }
        })
    }

    fn skip_term(&mut self, e: &Term) -> Result<(), KernelError> {
        let count = count_apps(e);
        if self.result.is_none() && self.target >= self.seen && self.target < self.seen + count {
            return Err(KernelError::PositionError(
                "occurrence sits in an assignment or differential equation, not in a formula".into(),
            ));
        }
        self.seen += count;
        Ok(())
    }

    fn expand_atom(
        &mut self,
        op: crate::syntax::CompareOp,
        a: &Term,
        b: &Term,
        local: usize,
        negative: bool,
    ) -> Result<Formula, KernelError> {
        let mut counter = 0;
        let mut found = None;
        let a2 = replace_nth(a, local, &mut counter, &self.z, &mut found);
        let b2 = replace_nth(b, local, &mut counter, &self.z, &mut found);
        let Some(Term::FuncApp(symbol, args)) = found else {
            unreachable!("occurrence index located inside this atom");
        };
        let inst = instantiate_fi(self.registry, &symbol, self.z.clone(), args)?;
        let Term::Var(z) = &self.z else { unreachable!() };
        let atom = Formula::Compare(op, a2, b2);
        let characterization = inst.characterization().clone();
        self.result = Some(());
        Ok(if negative {
            Formula::Forall(z.clone(), Box::new(characterization.implies(atom)))
        } else {
            Formula::Exists(z.clone(), Box::new(characterization.and(atom)))
        })
    }
}

fn count_apps(e: &Term) -> usize {
    let mut n = 0;
    e.visit(&mut |t| n += usize::from(matches!(t, Term::FuncApp(..))));
    n
}

/// Replaces the `n`-th application (pre-order) by `with`, storing the
/// replaced subterm in `found`.
fn replace_nth(e: &Term, n: usize, counter: &mut usize, with: &Term, found: &mut Option<Term>) -> Term {
    if let Term::FuncApp(s, args) = e {
        if *counter == n {
            *counter += 1 + args.iter().map(count_apps).sum::<usize>();
            *found = Some(e.clone());
            return with.clone();
        }
        *counter += 1;
        let args = args.iter().map(|a| replace_nth(a, n, counter, with, found)).collect();
        return Term::FuncApp(s.clone(), args);
    }
    let r = |t: &Term, counter: &mut usize, found: &mut Option<Term>| Box::new(replace_nth(t, n, counter, with, found));
    match e {
        Term::Var(_) | Term::Const(_) => e.clone(),
        Term::Plus(a, b) => {
            let a2 = r(a, counter, found);
            Term::Plus(a2, r(b, counter, found))
        }
        Term::Minus(a, b) => {
            let a2 = r(a, counter, found);
            Term::Minus(a2, r(b, counter, found))
        }
        Term::Times(a, b) => {
            let a2 = r(a, counter, found);
            Term::Times(a2, r(b, counter, found))
        }
        Term::Divide(a, b) => {
            let a2 = r(a, counter, found);
            Term::Divide(a2, r(b, counter, found))
        }
        Term::Power(a, k) => Term::Power(r(a, counter, found), *k),
        Term::Negate(a) => Term::Negate(r(a, counter, found)),
        Term::Differential(a) => Term::Differential(r(a, counter, found)),
        Term::FuncApp(..) => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definitions::builtin_registry;
    use crate::syntax::CompareOp;

    fn sin_of(e: Term) -> Term {
        Term::FuncApp(builtin_registry().symbol("sin").unwrap(), vec![e])
    }

    #[test]
    fn positive_occurrence_gets_existential() {
        let reg = builtin_registry();
        let phi = Formula::cmp(CompareOp::Ge, sin_of(Term::var("t")), Term::int(0));
        let out = expand_occurrence(&reg, &phi, 0).unwrap();
        let Formula::Exists(z, body) = &out else { panic!("{out}") };
        assert_eq!(z.as_str(), "z");
        let Formula::And(_, atom) = &**body else { panic!() };
        assert_eq!(**atom, Formula::cmp(CompareOp::Ge, Term::var("z"), Term::int(0)));
        assert_eq!(function_occurrences(&out).len(), 0);
    }

    #[test]
    fn negative_occurrence_gets_universal() {
        let reg = builtin_registry();
        let atom = Formula::cmp(CompareOp::Ge, sin_of(Term::var("t")), Term::int(0));
        let phi = atom.implies(Formula::True);
        let out = expand_occurrence(&reg, &phi, 0).unwrap();
        assert!(matches!(out, Formula::Implies(ref a, _) if matches!(**a, Formula::Forall(..))));
    }

    #[test]
    fn missing_occurrence() {
        let reg = builtin_registry();
        let phi = Formula::eq(Term::var("x"), Term::int(1));
        assert!(matches!(expand_occurrence(&reg, &phi, 0), Err(KernelError::PositionError(_))));
    }

    #[test]
    fn nested_occurrence_leaves_inner_one() {
        let reg = builtin_registry();
        let phi = Formula::eq(sin_of(sin_of(Term::var("x"))), Term::int(0));
        let out = expand_occurrence(&reg, &phi, 0).unwrap();
        assert_eq!(function_occurrences(&out).len(), 1);
    }
}
