//! Static semantics: free, bound and must-bound variables.

use std::collections::BTreeSet;

use super::{Formula, Ident, Program, Term};

pub type VarSet = BTreeSet<Ident>;

/// Variables whose value the semantics of an expression can depend on.
pub trait FreeVars {
    fn free_vars(&self) -> VarSet;
}

impl FreeVars for Term {
    fn free_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        // interpretations are closed up to their placeholders, so they do not
        // contribute free variables of the surrounding term
        self.visit(&mut |t| {
            if let Term::Var(x) = t {
                out.insert(x.clone());
            }
        });
        out
    }
}

impl FreeVars for Formula {
    fn free_vars(&self) -> VarSet {
        match self {
            Formula::True | Formula::False => VarSet::new(),
            Formula::Compare(_, a, b) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s
            }
            Formula::Not(p) => p.free_vars(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Equiv(a, b) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s
            }
            Formula::Forall(x, p) | Formula::Exists(x, p) => {
                let mut s = p.free_vars();
                s.remove(x);
                s
            }
            Formula::Boxed(a, p) | Formula::Diamond(a, p) => {
                let must = a.must_bound_vars();
                let mut s = a.free_vars();
                s.extend(p.free_vars().into_iter().filter(|v| !must.contains(v)));
                s
            }
        }
    }
}

impl FreeVars for Program {
    fn free_vars(&self) -> VarSet {
        match self {
            Program::Test(p) => p.free_vars(),
            Program::Assign(_, e) => e.free_vars(),
            Program::AssignAny(_) => VarSet::new(),
            Program::Ode(ode) => {
                let mut s: VarSet = ode.equations.iter().map(|(x, _)| x.clone()).collect();
                for (_, e) in &ode.equations {
                    s.extend(e.free_vars());
                }
                s.extend(ode.domain.free_vars());
                s
            }
            Program::Choice(a, b) => {
                let mut s = a.free_vars();
                s.extend(b.free_vars());
                s
            }
            Program::Sequence(a, b) => {
                let must = a.must_bound_vars();
                let mut s = a.free_vars();
                s.extend(b.free_vars().into_iter().filter(|v| !must.contains(v)));
                s
            }
            Program::Loop(a) => a.free_vars(),
            Program::IfThen(c, a) => {
                let mut s = c.free_vars();
                s.extend(a.free_vars());
                s
            }
        }
    }
}

impl Program {
    /// Variables that may be written by some run.
    pub fn bound_vars(&self) -> VarSet {
        match self {
            Program::Test(_) => VarSet::new(),
            Program::Assign(x, _) | Program::AssignAny(x) => VarSet::from([x.clone()]),
            Program::Ode(ode) => ode.equations.iter().map(|(x, _)| x.clone()).collect(),
            Program::Choice(a, b) | Program::Sequence(a, b) => {
                let mut s = a.bound_vars();
                s.extend(b.bound_vars());
                s
            }
            Program::Loop(a) | Program::IfThen(_, a) => a.bound_vars(),
        }
    }

    /// Variables written on every run.
    pub fn must_bound_vars(&self) -> VarSet {
        match self {
            Program::Test(_) | Program::Loop(_) | Program::IfThen(..) => VarSet::new(),
            Program::Assign(x, _) | Program::AssignAny(x) => VarSet::from([x.clone()]),
            Program::Ode(ode) => ode.equations.iter().map(|(x, _)| x.clone()).collect(),
            Program::Choice(a, b) => a.must_bound_vars().intersection(&b.must_bound_vars()).cloned().collect(),
            Program::Sequence(a, b) => {
                let mut s = a.must_bound_vars();
                s.extend(b.must_bound_vars());
                s
            }
        }
    }

    /// Bound variables in order of their first syntactic occurrence as a
    /// write target.
    pub fn bound_vars_in_order(&self) -> Vec<Ident> {
        let mut out: Vec<Ident> = Vec::new();
        self.push_bound_in_order(&mut out);
        out
    }

    fn push_bound_in_order(&self, out: &mut Vec<Ident>) {
        let mut push = |x: &Ident| {
            if !out.contains(x) {
                out.push(x.clone());
            }
        };
        match self {
            Program::Test(_) => {}
            Program::Assign(x, _) | Program::AssignAny(x) => push(x),
            Program::Ode(ode) => ode.equations.iter().for_each(|(x, _)| push(x)),
            Program::Choice(a, b) | Program::Sequence(a, b) => {
                a.push_bound_in_order(out);
                b.push_bound_in_order(out);
            }
            Program::Loop(a) | Program::IfThen(_, a) => a.push_bound_in_order(out),
        }
    }
}

/// Every identifier occurring anywhere (free, bound or as a write target),
/// excluding the insides of interpretation annotations.
pub trait AllNames {
    fn all_names(&self) -> VarSet;
}

impl AllNames for Term {
    fn all_names(&self) -> VarSet {
        self.free_vars()
    }
}

impl AllNames for Formula {
    fn all_names(&self) -> VarSet {
        let mut out = VarSet::new();
        collect_formula_names(self, &mut out);
        out
    }
}

impl AllNames for Program {
    fn all_names(&self) -> VarSet {
        let mut out = VarSet::new();
        collect_program_names(self, &mut out);
        out
    }
}

fn collect_formula_names(f: &Formula, out: &mut VarSet) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Compare(_, a, b) => {
            out.extend(a.free_vars());
            out.extend(b.free_vars());
        }
        Formula::Not(p) => collect_formula_names(p, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Equiv(a, b) => {
            collect_formula_names(a, out);
            collect_formula_names(b, out);
        }
        Formula::Forall(x, p) | Formula::Exists(x, p) => {
            out.insert(x.clone());
            collect_formula_names(p, out);
        }
        Formula::Boxed(a, p) | Formula::Diamond(a, p) => {
            collect_program_names(a, out);
            collect_formula_names(p, out);
        }
    }
}

fn collect_program_names(a: &Program, out: &mut VarSet) {
    match a {
        Program::Test(p) => collect_formula_names(p, out),
        Program::Assign(x, e) => {
            out.insert(x.clone());
            out.extend(e.free_vars());
        }
        Program::AssignAny(x) => {
            out.insert(x.clone());
        }
        Program::Ode(ode) => {
            for (x, e) in &ode.equations {
                out.insert(x.clone());
                out.extend(e.free_vars());
            }
            collect_formula_names(&ode.domain, out);
        }
        Program::Choice(p, q) | Program::Sequence(p, q) => {
            collect_program_names(p, out);
            collect_program_names(q, out);
        }
        Program::Loop(p) => collect_program_names(p, out),
        Program::IfThen(c, p) => {
            collect_formula_names(c, out);
            collect_program_names(p, out);
        }
    }
}

/// A name based on `base` that is not in `avoid`: `base`, then `base1`,
/// `base2`, ...
pub fn fresh_name(base: &str, avoid: &VarSet) -> Ident {
    let candidate = Ident::new(base);
    if !avoid.contains(&candidate) {
        return candidate;
    }
    (1..)
        .map(|i| Ident::new(format!("{base}{i}")))
        .find(|c| !avoid.contains(c))
        .expect("unbounded supply of names")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{CompareOp, OdeSystem};

    fn set(names: &[&str]) -> VarSet {
        names.iter().map(|n| Ident::new(*n)).collect()
    }

    #[test]
    fn term_free_vars() {
        let e = Term::var("x") + Term::int(2) * Term::var("y");
        assert_eq!(e.free_vars(), set(&["x", "y"]));
    }

    #[test]
    fn assignment_binds_in_postcondition() {
        let f = Formula::boxed(
            Program::assign("x", Term::int(1)),
            Formula::cmp(CompareOp::Ge, Term::var("x"), Term::int(0)),
        );
        assert!(f.free_vars().is_empty());
    }

    #[test]
    fn quantifier_removes_binder() {
        let f = Formula::Exists("x0".into(), Box::new(Formula::eq(Term::var("x0"), Term::var("t"))));
        assert_eq!(f.free_vars(), set(&["t"]));
    }

    #[test]
    fn ode_reads_its_own_variables() {
        let ode = OdeSystem::new(vec![("x".into(), Term::var("y"))], Formula::True).unwrap();
        let f = Formula::boxed(Program::Ode(ode), Formula::eq(Term::var("x"), Term::int(0)));
        assert_eq!(f.free_vars(), set(&["x", "y"]));
    }

    #[test]
    fn choice_must_bound_is_intersection() {
        let a = Program::assign("x", Term::int(1)).seq(Program::assign("y", Term::int(1)));
        let b = Program::assign("x", Term::int(2));
        let c = a.choice(b);
        assert_eq!(c.must_bound_vars(), set(&["x"]));
        assert_eq!(c.bound_vars(), set(&["x", "y"]));
        let post = Formula::eq(Term::var("x"), Term::var("y"));
        assert_eq!(Formula::boxed(c, post).free_vars(), set(&["y"]));
    }

    #[test]
    fn loop_binds_nothing_for_sure() {
        let l = Program::assign("x", Term::var("x") + Term::int(1)).repeat();
        let f = Formula::boxed(l, Formula::eq(Term::var("x"), Term::int(0)));
        assert_eq!(f.free_vars(), set(&["x"]));
    }

    #[test]
    fn fresh_name_bumps() {
        assert_eq!(fresh_name("z", &set(&["z", "z1"])), Ident::new("z2"));
        assert_eq!(fresh_name("z", &set(&["y"])), Ident::new("z"));
    }
}
