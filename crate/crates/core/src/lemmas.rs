//! Facts derived from differential definitions: initial values, differential
//! axioms, differential unfolding premises and function abstraction.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::definitions::{RegisteredFamily, Registry, SymbolInfo};
use crate::print::{Annotations, PrintOptions, Printer};
use crate::syntax::simplify::simplify_formula;
use crate::syntax::subst::substitute_renaming;
use crate::syntax::vars::{fresh_name, AllNames, FreeVars};
use crate::syntax::{
    substitute_term, CaptureError, CompareOp, Formula, Ident, OdeSystem, Program, Substitution, Term,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FactKind {
    InitialValue,
    DifferentialAxiom,
    UnfoldBase,
    UnfoldStep,
    Abstracted,
}

impl FactKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FactKind::InitialValue => "InitialValue",
            FactKind::DifferentialAxiom => "DifferentialAxiom",
            FactKind::UnfoldBase => "UnfoldBase",
            FactKind::UnfoldStep => "UnfoldStep",
            FactKind::Abstracted => "Abstracted",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Statement {
    Formula(Formula),
    Equation(Term, Term),
}

impl Statement {
    pub fn as_formula(&self) -> Formula {
        match self {
            Statement::Formula(f) => f.clone(),
            Statement::Equation(a, b) => Formula::eq(a.clone(), b.clone()),
        }
    }
}

impl Statement {
    /// Rendering with every function symbol printed by name.
    pub fn to_short_string(&self) -> String {
        let p = || Printer::new(PrintOptions { annotations: Annotations::Short, elide_ode_bodies: false });
        match self {
            Statement::Formula(f) => p().formula_str(f),
            Statement::Equation(a, b) => format!("{}={}", p().term_str(a), p().term_str(b)),
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Formula(p) => write!(f, "{p}"),
            Statement::Equation(a, b) => write!(f, "{a}={b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fact {
    pub name: String,
    pub kind: FactKind,
    pub statement: Statement,
    /// The family or symbols the fact was derived from.
    pub provenance: String,
    /// Derived from an assumed existence certificate.
    pub assumed: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LemmaError {
    #[error("no existence certificate for {family}: {reason}")]
    NoCertificate { family: String, reason: String },
    #[error("family member {0} has no registered symbol")]
    UnregisteredCoordinate(Ident),
    #[error("coordinate {index} out of range for a family of {len}")]
    IndexError { index: usize, len: usize },
    #[error("{0} is not free in the goal")]
    PivotNotFree(Ident),
    #[error("base value {0} is not closed")]
    BaseNotClosed(Term),
    #[error("{0} does not occur in the formula")]
    TargetNotFound(Term),
    #[error("bound {0} mentions more than the abstracted applications")]
    BoundNotAbstractable(Formula),
    #[error("{0} fresh names for {1} targets")]
    NameCount(usize, usize),
    #[error(transparent)]
    Capture(#[from] CaptureError),
}

fn provenance(family: &RegisteredFamily) -> String {
    family.family.names().iter().map(Ident::as_str).collect::<Vec<_>>().join(",")
}

fn certified(family: &RegisteredFamily) -> Result<bool, LemmaError> {
    match &family.existence {
        Ok(cert) => Ok(cert.is_assumed()),
        Err(e) => Err(LemmaError::NoCertificate { family: provenance(family), reason: e.to_string() }),
    }
}

fn check_index(family: &RegisteredFamily, index: usize) -> Result<(), LemmaError> {
    if index >= family.symbols.len() {
        return Err(LemmaError::IndexError { index, len: family.symbols.len() });
    }
    Ok(())
}

/// `h_i(T) = X_i`
pub fn initial_value_lemma(family: &RegisteredFamily, index: usize) -> Result<Fact, LemmaError> {
    check_index(family, index)?;
    let assumed = certified(family)?;
    let symbol = family.symbols[index].clone();
    let lhs = Term::FuncApp(symbol.clone(), vec![family.family.init_time().clone()]);
    Ok(Fact {
        name: format!("{}_init", symbol.name),
        kind: FactKind::InitialValue,
        statement: Statement::Equation(lhs, family.family.init_values()[index].clone()),
        provenance: provenance(family),
        assumed,
    })
}

/// `(h_i(e))' = rhs_i[h_1(e), ..., h_n(e), e] * (e)'`, where `e` stands for
/// an arbitrary term.
pub fn differential_axiom(registry: &Registry, family: &RegisteredFamily, index: usize) -> Result<Fact, LemmaError> {
    check_index(family, index)?;
    let assumed = certified(family)?;
    let fam = &family.family;
    for (name, symbol) in fam.names().iter().zip(&family.symbols) {
        match registry.get(name.as_str()) {
            Some(SymbolInfo::Family { family: f, index: j }) if f.symbols[*j] == *symbol => {}
            _ => return Err(LemmaError::UnregisteredCoordinate(name.clone())),
        }
    }
    let mut avoid: BTreeSet<Ident> = fam.names().iter().cloned().collect();
    avoid.insert(fam.time_var().clone());
    let e = Term::Var(fresh_name("e", &avoid));
    let mut sigma = Substitution::new();
    for (name, symbol) in fam.names().iter().zip(&family.symbols) {
        sigma.insert(name.clone(), Term::FuncApp(symbol.clone(), vec![e.clone()]));
    }
    sigma.insert(fam.time_var().clone(), e.clone());
    let rhs = substitute_term(&fam.rhs()[index], &sigma)?;
    let symbol = &family.symbols[index];
    let lhs = Term::FuncApp(symbol.clone(), vec![e.clone()]).differential();
    Ok(Fact {
        name: format!("{}_deriv", symbol.name),
        kind: FactKind::DifferentialAxiom,
        statement: Statement::Equation(lhs, rhs * e.differential()),
        provenance: provenance(family),
        assumed,
    })
}

/// Initial-value facts and differential axioms for every member of every
/// certified family of the registry, in registration order. Families whose
/// existence is unproven are reported as errors instead.
pub fn family_facts(registry: &Registry) -> Vec<(String, Result<Vec<Fact>, LemmaError>)> {
    registry
        .families()
        .iter()
        .map(|family| {
            let facts = (0..family.symbols.len())
                .map(|i| Ok(vec![initial_value_lemma(family, i)?, differential_axiom(registry, family, i)?]))
                .collect::<Result<Vec<_>, LemmaError>>()
                .map(|v| v.into_iter().flatten().collect());
            (provenance(family), facts)
        })
        .collect()
}

/// The two premises of differential unfolding of `goal` on `pivot` from
/// `base`: `P(v0)` and `P(v) -> [{v'=1 & v<=x} ++ {v'=-1 & v>=x}]P(v)`.
pub fn differential_unfold(goal: &Formula, pivot: &Ident, base: &Term) -> Result<(Fact, Fact), LemmaError> {
    if !goal.free_vars().contains(pivot) {
        return Err(LemmaError::PivotNotFree(pivot.clone()));
    }
    if !base.free_vars().is_empty() {
        return Err(LemmaError::BaseNotClosed(base.clone()));
    }
    let at = |value: Term| -> Result<Formula, LemmaError> {
        let sigma = Substitution::from([(pivot.clone(), value)]);
        Ok(substitute_renaming(goal, &sigma)?)
    };
    let mut avoid = goal.all_names();
    avoid.insert(pivot.clone());
    let v = fresh_name("v", &avoid);
    let x = Term::Var(pivot.clone());
    let vt = Term::Var(v.clone());
    let sweep = |rate: i64, op: CompareOp| {
        Program::Ode(OdeSystem {
            equations: vec![(v.clone(), Term::int(rate))],
            domain: Formula::cmp(op, vt.clone(), x.clone()),
        })
    };
    let p_v = at(vt.clone())?;
    let step = p_v.clone().implies(Formula::boxed(sweep(1, CompareOp::Le).choice(sweep(-1, CompareOp::Ge)), p_v));
    let fact = |kind, suffix: &str, statement| Fact {
        name: format!("unfold_{pivot}_{suffix}"),
        kind,
        statement: Statement::Formula(statement),
        provenance: format!("unfolding on {pivot}"),
        assumed: false,
    };
    Ok((
        fact(FactKind::UnfoldBase, "base", simplify_formula(&at(base.clone())?)),
        fact(FactKind::UnfoldStep, "step", step),
    ))
}

/// An abstraction together with the data needed to undo it.
#[derive(Clone, Debug, PartialEq)]
pub struct Abstraction {
    pub fact: Fact,
    /// Fresh variable and the application it replaces.
    pub replacements: Vec<(Ident, Term)>,
}

impl Abstraction {
    /// Substitutes the applications back for the fresh variables.
    pub fn back_substitute(&self) -> Formula {
        let f = self.fact.statement.as_formula();
        self.replacements.iter().fold(f, |f, (x, app)| f.map_terms(&mut |t| t.replace(&Term::Var(x.clone()), app)))
    }
}

/// Replaces each target application in `phi` by a fresh variable and adds the
/// abstracted `bounds` as hypotheses. Without explicit `names`, a target is
/// named `t_` followed by the variable that distinguishes its argument from
/// the other targets' arguments.
pub fn abstract_functions(
    phi: &Formula,
    targets: &[Term],
    bounds: &[Formula],
    names: &[Ident],
) -> Result<Abstraction, LemmaError> {
    if !names.is_empty() && names.len() != targets.len() {
        return Err(LemmaError::NameCount(names.len(), targets.len()));
    }
    let mut distinct: Vec<&Term> = Vec::new();
    for t in targets {
        if !occurs(phi, t) {
            return Err(LemmaError::TargetNotFound(t.clone()));
        }
        if !distinct.contains(&t) {
            distinct.push(t);
        }
    }
    let mut avoid = phi.all_names();
    for b in bounds {
        avoid.extend(b.all_names());
    }
    let mut replacements: Vec<(Ident, Term)> = Vec::new();
    for (i, t) in distinct.iter().enumerate() {
        let x = match names.get(targets.iter().position(|u| u == *t).unwrap_or(i)) {
            Some(n) => n.clone(),
            None => fresh_name(&format!("t_{}", distinguishing(t, &distinct)), &avoid),
        };
        avoid.insert(x.clone());
        replacements.push((x, (*t).clone()));
    }
    let abstract_formula = |f: &Formula| {
        replacements.iter().fold(f.clone(), |f, (x, app)| f.map_terms(&mut |t| t.replace(app, &Term::Var(x.clone()))))
    };
    let mut hypotheses = Vec::new();
    for b in bounds {
        let a = abstract_formula(b);
        let mut leftover = false;
        a.for_each_term(&mut |t| leftover |= t.has_func_app());
        let fresh: BTreeSet<Ident> = replacements.iter().map(|(x, _)| x.clone()).collect();
        if leftover || !a.free_vars().is_subset(&fresh) {
            return Err(LemmaError::BoundNotAbstractable(b.clone()));
        }
        hypotheses.push(a);
    }
    let body = abstract_formula(phi);
    let statement = if hypotheses.is_empty() { body } else { conjoin(hypotheses).implies(body) };
    let provenance = distinct.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",");
    Ok(Abstraction {
        fact: Fact {
            name: format!("abstract_{}", replacements.iter().map(|(x, _)| x.as_str()).collect::<Vec<_>>().join("_")),
            kind: FactKind::Abstracted,
            statement: Statement::Formula(statement),
            provenance,
            assumed: false,
        },
        replacements,
    })
}

/// Right-nested conjunction, matching how `a&b&c` parses.
fn conjoin(mut parts: Vec<Formula>) -> Formula {
    let last = parts.pop().expect("nonempty");
    parts.into_iter().rev().fold(last, |acc, p| p.and(acc))
}

fn occurs(phi: &Formula, target: &Term) -> bool {
    let mut found = false;
    phi.for_each_term(&mut |t| t.visit(&mut |s| found |= s == target));
    found
}

fn distinguishing(target: &Term, all: &[&Term]) -> String {
    let vars = |t: &Term| -> BTreeSet<Ident> { t.free_vars() };
    let mine = vars(target);
    let others: BTreeSet<Ident> =
        all.iter().filter(|t| **t != target).flat_map(|t| vars(t)).collect();
    let own: Vec<&Ident> = mine.iter().filter(|x| !others.contains(*x)).collect();
    match (own.as_slice(), mine.iter().next(), target) {
        ([x], _, _) => x.to_string(),
        (_, Some(x), _) if mine.len() == 1 => x.to_string(),
        (_, _, Term::FuncApp(s, _)) => s.name.to_string(),
        _ => "f".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definitions::builtin_registry;
    use crate::parse::{parse_formula, parse_term};

    fn family<'a>(reg: &'a Registry, name: &str) -> (&'a RegisteredFamily, usize) {
        match reg.get(name).unwrap() {
            SymbolInfo::Family { family, index } => (family.as_ref(), *index),
            _ => panic!("{name} is not a family member"),
        }
    }

    #[test]
    fn initial_values_of_builtins() {
        let reg = builtin_registry();
        for (name, expected) in [("sin", "sin(0)=0"), ("cos", "cos(0)=1"), ("tanh", "tanh(0)=0"), ("exp", "exp(0)=1")] {
            let (f, i) = family(&reg, name);
            assert_eq!(initial_value_lemma(f, i).unwrap().statement.to_string(), expected);
        }
    }

    #[test]
    fn differential_axioms_of_builtins() {
        let reg = builtin_registry();
        for (name, expected) in [
            ("sin", "(sin(e))'=cos(e)*(e)'"),
            ("cos", "(cos(e))'=-sin(e)*(e)'"),
            ("tanh", "(tanh(e))'=(1-tanh(e)^2)*(e)'"),
            ("exp", "(exp(e))'=exp(e)*(e)'"),
        ] {
            let (f, i) = family(&reg, name);
            assert_eq!(differential_axiom(&reg, f, i).unwrap().statement.to_string(), expected);
        }
    }

    #[test]
    fn unfolding_tanh_bound() {
        let goal = parse_formula("tanh(lambda*x)^2 < 1").unwrap();
        let (base, step) = differential_unfold(&goal, &"x".into(), &Term::int(0)).unwrap();
        assert_eq!(base.statement.to_string(), "tanh(0)^2<1");
        assert_eq!(
            step.statement.to_string(),
            "tanh(lambda*v)^2<1 -> [{v'=1 & v<=x}++{v'=-1 & v>=x}]tanh(lambda*v)^2<1"
        );
    }

    #[test]
    fn unfolding_needs_free_pivot() {
        let goal = parse_formula("x = x").unwrap();
        assert!(matches!(differential_unfold(&goal, &"y".into(), &Term::int(3)), Err(LemmaError::PivotNotFree(_))));
    }

    #[test]
    fn neuron_abstraction() {
        let phi = parse_formula(
            "x*(tanh(lambda*x)-tanh(lambda*y))+y*(tanh(lambda*x)+tanh(lambda*y)) <= 2*sqrt(x^2+y^2)",
        )
        .unwrap();
        let targets = [parse_term("tanh(lambda*x)").unwrap(), parse_term("tanh(lambda*y)").unwrap()];
        let bounds = [parse_formula("tanh(lambda*x)^2 < 1").unwrap(), parse_formula("tanh(lambda*y)^2 < 1").unwrap()];
        let a = abstract_functions(&phi, &targets, &bounds, &[]).unwrap();
        assert_eq!(
            a.fact.statement.to_string(),
            "t_x^2<1&t_y^2<1 -> x*(t_x-t_y)+y*(t_x+t_y)<=2*sqrt(x^2+y^2)"
        );
        let original = conjoin(bounds.to_vec()).implies(phi);
        assert_eq!(a.back_substitute(), original);
    }

    #[test]
    fn missing_target() {
        let phi = parse_formula("x > 0").unwrap();
        let r = abstract_functions(&phi, &[parse_term("cos(x)").unwrap()], &[], &[]);
        assert!(matches!(r, Err(LemmaError::TargetNotFound(_))));
    }
}
