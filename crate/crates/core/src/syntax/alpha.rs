//! Alpha-equivalence: equality up to consistent renaming of bound variables.

use super::vars::FreeVars;
use super::{Formula, Ident, OdeSystem, Program, Term};

/// Whether `a` and `b` differ only in the names of bound variables.
pub fn alpha_equivalent(a: &Formula, b: &Formula) -> bool {
    alpha_equivalent_with(a, b, &[])
}

/// Alpha-equivalence where the free variables listed in `free_pairs` are
/// identified across the two formulas (left name, right name). Free variables
/// not listed must have identical names.
pub fn alpha_equivalent_with(a: &Formula, b: &Formula, free_pairs: &[(Ident, Ident)]) -> bool {
    let mut env = Env { pairs: free_pairs.to_vec() };
    env.formula(a, b)
}

struct Env {
    /// Stack of bindings; later entries shadow earlier ones.
    pairs: Vec<(Ident, Ident)>,
}

impl Env {
    fn lookup_left(&self, x: &Ident) -> Option<usize> {
        self.pairs.iter().rposition(|(l, _)| l == x)
    }

    fn lookup_right(&self, y: &Ident) -> Option<usize> {
        self.pairs.iter().rposition(|(_, r)| r == y)
    }

    fn same(&self, x: &Ident, y: &Ident) -> bool {
        match (self.lookup_left(x), self.lookup_right(y)) {
            (Some(i), Some(j)) => i == j,
            (None, None) => x == y,
            _ => false,
        }
    }

    fn term(&mut self, a: &Term, b: &Term) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => self.same(x, y),
            (Term::Const(c), Term::Const(d)) => c == d,
            (Term::Plus(a1, a2), Term::Plus(b1, b2))
            | (Term::Minus(a1, a2), Term::Minus(b1, b2))
            | (Term::Times(a1, a2), Term::Times(b1, b2))
            | (Term::Divide(a1, a2), Term::Divide(b1, b2)) => self.term(a1, b1) && self.term(a2, b2),
            (Term::Power(a1, n), Term::Power(b1, m)) => n == m && self.term(a1, b1),
            (Term::Negate(a1), Term::Negate(b1)) | (Term::Differential(a1), Term::Differential(b1)) => {
                self.term(a1, b1)
            }
            (Term::FuncApp(s, xs), Term::FuncApp(r, ys)) => {
                let symbols_match = s.name == r.name
                    && s.arity == r.arity
                    && match (&s.interpretation, &r.interpretation) {
                        (None, None) => true,
                        (Some(p), Some(q)) => p == q || alpha_equivalent(p, q),
                        _ => false,
                    };
                symbols_match && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| self.term(x, y))
            }
            _ => false,
        }
    }

    fn formula(&mut self, a: &Formula, b: &Formula) -> bool {
        match (a, b) {
            (Formula::True, Formula::True) | (Formula::False, Formula::False) => true,
            (Formula::Compare(o1, a1, a2), Formula::Compare(o2, b1, b2)) => {
                o1 == o2 && self.term(a1, b1) && self.term(a2, b2)
            }
            (Formula::Not(p), Formula::Not(q)) => self.formula(p, q),
            (Formula::And(a1, a2), Formula::And(b1, b2))
            | (Formula::Or(a1, a2), Formula::Or(b1, b2))
            | (Formula::Implies(a1, a2), Formula::Implies(b1, b2))
            | (Formula::Equiv(a1, a2), Formula::Equiv(b1, b2)) => self.formula(a1, b1) && self.formula(a2, b2),
            (Formula::Forall(x, p), Formula::Forall(y, q)) | (Formula::Exists(x, p), Formula::Exists(y, q)) => {
                self.pairs.push((x.clone(), y.clone()));
                let ok = self.formula(p, q);
                self.pairs.pop();
                ok
            }
            (Formula::Boxed(p, f), Formula::Boxed(q, g)) | (Formula::Diamond(p, f), Formula::Diamond(q, g)) => {
                self.modality(a, b, p, f, q, g)
            }
            _ => false,
        }
    }

    fn modality(&mut self, whole_a: &Formula, whole_b: &Formula, p: &Program, f: &Formula, q: &Program, g: &Formula) -> bool {
        let left = p.bound_vars_in_order();
        let right = q.bound_vars_in_order();
        if left.len() != right.len() {
            return false;
        }
        let free_a = whole_a.free_vars();
        let free_b = whole_b.free_vars();
        let mark = self.pairs.len();
        for (x, y) in left.iter().zip(&right) {
            match (free_a.contains(x), free_b.contains(y)) {
                // read before written: must already correspond
                (true, true) => {
                    if !self.same(x, y) {
                        self.pairs.truncate(mark);
                        return false;
                    }
                }
                (false, false) => self.pairs.push((x.clone(), y.clone())),
                _ => {
                    self.pairs.truncate(mark);
                    return false;
                }
            }
        }
        let ok = self.program(p, q) && self.formula(f, g);
        self.pairs.truncate(mark);
        ok
    }

    fn program(&mut self, a: &Program, b: &Program) -> bool {
        match (a, b) {
            (Program::Test(p), Program::Test(q)) => self.formula(p, q),
            (Program::Assign(x, e), Program::Assign(y, d)) => self.same(x, y) && self.term(e, d),
            (Program::AssignAny(x), Program::AssignAny(y)) => self.same(x, y),
            (Program::Ode(o), Program::Ode(r)) => self.ode(o, r),
            (Program::Choice(a1, a2), Program::Choice(b1, b2)) | (Program::Sequence(a1, a2), Program::Sequence(b1, b2)) => {
                self.program(a1, b1) && self.program(a2, b2)
            }
            (Program::Loop(p), Program::Loop(q)) => self.program(p, q),
            (Program::IfThen(c, p), Program::IfThen(d, q)) => self.formula(c, d) && self.program(p, q),
            _ => false,
        }
    }

    fn ode(&mut self, o: &OdeSystem, r: &OdeSystem) -> bool {
        o.equations.len() == r.equations.len()
            && o.equations.iter().zip(&r.equations).all(|((x, e), (y, d))| self.same(x, y) && self.term(e, d))
            && self.formula(&o.domain, &r.domain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::CompareOp;

    fn ge0(x: &str) -> Formula {
        Formula::cmp(CompareOp::Ge, Term::var(x), Term::int(0))
    }

    #[test]
    fn renamed_quantifier_is_equivalent() {
        let a = Formula::Forall("x".into(), Box::new(ge0("x")));
        let b = Formula::Forall("z".into(), Box::new(ge0("z")));
        assert!(alpha_equivalent(&a, &b));
    }

    #[test]
    fn free_names_must_agree() {
        assert!(!alpha_equivalent(&ge0("x"), &ge0("y")));
        assert!(alpha_equivalent_with(&ge0("x"), &ge0("y"), &[("x".into(), "y".into())]));
    }

    #[test]
    fn binder_cannot_capture_free_name() {
        // \forall x (x>=0 & y>=0) vs \forall y (y>=0 & y>=0)
        let a = Formula::Forall("x".into(), Box::new(ge0("x").and(ge0("y"))));
        let b = Formula::Forall("y".into(), Box::new(ge0("y").and(ge0("y"))));
        assert!(!alpha_equivalent(&a, &b));
    }

    #[test]
    fn program_bound_variables_rename() {
        let a = Formula::diamond(Program::assign_any("c"), Formula::eq(Term::var("c"), Term::var("s")));
        let b = Formula::diamond(Program::assign_any("k"), Formula::eq(Term::var("k"), Term::var("s")));
        assert!(alpha_equivalent(&a, &b));
        let c = Formula::diamond(Program::assign_any("k"), Formula::eq(Term::var("s"), Term::var("k")));
        assert!(!alpha_equivalent(&a, &c));
    }
}
