use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Zero};

use super::DefinitionError;
use crate::syntax::{input_placeholder, Formula, FreeVars, Ident, OdeSystem, Program, Term, OUTPUT_PLACEHOLDER};

/// A simultaneous definition of `names.len()` functions of one argument as
/// the coordinates of the solution of `x' = rhs(x, t)` with `x(T) = X`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DefinedFamily {
    names: Vec<Ident>,
    rhs: Vec<Term>,
    time_var: Ident,
    init_values: Vec<Term>,
    init_time: Term,
}

impl DefinedFamily {
    pub fn new(
        names: Vec<Ident>,
        rhs: Vec<Term>,
        time_var: Ident,
        init_values: Vec<Term>,
        init_time: Term,
    ) -> Result<Self, DefinitionError> {
        let ill = |msg: String| Err(DefinitionError::IllFormedFamily(msg));
        if names.is_empty() {
            return ill("a family needs at least one function".into());
        }
        if names.len() != rhs.len() || names.len() != init_values.len() {
            return ill(format!(
                "{} names, {} right-hand sides and {} initial values",
                names.len(),
                rhs.len(),
                init_values.len()
            ));
        }
        for (i, x) in names.iter().enumerate() {
            if names[..i].contains(x) {
                return ill(format!("{x} is defined twice"));
            }
            if x.is_placeholder() {
                return ill(format!("{x} is a placeholder name"));
            }
        }
        if names.contains(&time_var) {
            return ill(format!("argument {time_var} is also a family member"));
        }
        for (x, f) in names.iter().zip(&rhs) {
            let mut bad = None;
            f.visit(&mut |t| match t {
                Term::FuncApp(s, _) => bad = Some(format!("{x}' mentions function {}", s.name)),
                Term::Differential(_) => bad = Some(format!("{x}' mentions a differential")),
                _ => {}
            });
            if let Some(msg) = bad {
                return ill(msg);
            }
            if let Some(v) = f.free_vars().into_iter().find(|v| !names.contains(v) && *v != time_var) {
                return ill(format!("{x}' mentions {v}, which is neither a family member nor {time_var}"));
            }
        }
        for (x, v) in names.iter().zip(&init_values) {
            if exact_value(v).is_none() {
                return ill(format!("initial value {v} of {x} is not an exact rational constant"));
            }
        }
        if exact_value(&init_time).is_none() {
            return ill(format!("initial time {init_time} is not an exact rational constant"));
        }
        Ok(DefinedFamily { names, rhs, time_var, init_values, init_time })
    }

    pub fn names(&self) -> &[Ident] {
        &self.names
    }

    pub fn rhs(&self) -> &[Term] {
        &self.rhs
    }

    pub fn time_var(&self) -> &Ident {
        &self.time_var
    }

    pub fn init_values(&self) -> &[Term] {
        &self.init_values
    }

    pub fn init_time(&self) -> &Term {
        &self.init_time
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n.as_str() == name)
    }

    pub fn init_values_exact(&self) -> Vec<Rational64> {
        self.init_values.iter().map(|v| exact_value(v).expect("checked at construction")).collect()
    }

    pub fn init_time_exact(&self) -> Rational64 {
        exact_value(&self.init_time).expect("checked at construction")
    }

    /// `{x'=-f, t'=-1}` (`forward == false`) or `{x'=f, t'=1}`.
    pub fn ode(&self, forward: bool) -> OdeSystem {
        let mut equations: Vec<(Ident, Term)> = self
            .names
            .iter()
            .zip(&self.rhs)
            .map(|(x, f)| (x.clone(), if forward { f.clone() } else { f.negated() }))
            .collect();
        equations.push((self.time_var.clone(), Term::int(if forward { 1 } else { -1 })));
        OdeSystem { equations, domain: Formula::True }
    }

    /// `x=X & t=T`
    pub fn initial_condition(&self) -> Formula {
        Formula::conjunction(
            self.names
                .iter()
                .zip(&self.init_values)
                .map(|(x, v)| Formula::eq(Term::Var(x.clone()), v.clone()))
                .chain(std::iter::once(Formula::eq(Term::Var(self.time_var.clone()), self.init_time.clone()))),
        )
    }
}

/// The characterization of coordinate `index`:
/// `<x_others:=*; x_i:=._0; t:=._1; {{x'=-f,t'=-1}++{x'=f,t'=1}}>(x=X & t=T)`.
pub fn build_interpretation(family: &DefinedFamily, index: usize) -> Result<Formula, DefinitionError> {
    if index >= family.len() {
        return Err(DefinitionError::IndexError { index, len: family.len() });
    }
    let mut steps: Vec<Program> = family
        .names
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != index)
        .map(|(_, x)| Program::AssignAny(x.clone()))
        .collect();
    steps.push(Program::Assign(family.names[index].clone(), Term::var(OUTPUT_PLACEHOLDER)));
    steps.push(Program::Assign(family.time_var.clone(), Term::Var(input_placeholder(1))));
    let prefix = Program::sequence(steps).expect("non-empty");
    let flow = Program::Ode(family.ode(false)).choice(Program::Ode(family.ode(true)));
    Ok(Formula::diamond(prefix.seq(flow), family.initial_condition()))
}

/// Exact value of a closed term over rational constants, if it has one.
pub fn exact_value(e: &Term) -> Option<Rational64> {
    Some(match e {
        Term::Const(c) => *c,
        Term::Plus(a, b) => exact_value(a)?.checked_add(&exact_value(b)?)?,
        Term::Minus(a, b) => exact_value(a)?.checked_sub(&exact_value(b)?)?,
        Term::Times(a, b) => exact_value(a)?.checked_mul(&exact_value(b)?)?,
        Term::Divide(a, b) => {
            let d = exact_value(b)?;
            if d.is_zero() {
                return None;
            }
            exact_value(a)?.checked_div(&d)?
        }
        Term::Power(a, n) => {
            let base = exact_value(a)?;
            let mut acc = Rational64::one();
            for _ in 0..*n {
                acc = acc.checked_mul(&base)?;
            }
            acc
        }
        Term::Negate(a) => -exact_value(a)?,
        Term::Var(_) | Term::FuncApp(..) | Term::Differential(_) => return None,
    })
}
