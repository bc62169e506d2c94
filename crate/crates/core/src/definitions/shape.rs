//! Recognition of differentially-defined characterizations.

use super::family::{build_interpretation, DefinedFamily};
use crate::syntax::{alpha_equivalent, input_placeholder, CompareOp, Formula, FreeVars, Ident, OdeSystem, Program, Term, OUTPUT_PLACEHOLDER};

/// A characterization `φ(e0, e1)` taken apart: the defining family, the
/// projected coordinate and the two argument terms.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphMatch {
    pub family: DefinedFamily,
    pub index: usize,
    pub output: Term,
    pub input: Term,
}

/// Recognizes an interpretation as built by [`build_interpretation`], up to
/// renaming of its bound variables.
pub fn recognize_shape(phi: &Formula) -> Option<(DefinedFamily, usize)> {
    let m = match_graph(phi)?;
    if m.output != Term::var(OUTPUT_PLACEHOLDER) || m.input != Term::Var(input_placeholder(1)) {
        return None;
    }
    let rebuilt = build_interpretation(&m.family, m.index).ok()?;
    alpha_equivalent(&rebuilt, phi).then_some((m.family, m.index))
}

/// Matches either an instance `<..; x_i:=e0; t:=e1; {..++..}>(x=X&t=T)` or
/// the direct form where `x_i` and `t` themselves are the free arguments.
pub fn match_graph(phi: &Formula) -> Option<GraphMatch> {
    let Formula::Diamond(program, post) = phi else {
        return None;
    };
    let stmts = program.flatten_sequence();
    let (last, prefix) = stmts.split_last()?;
    let Program::Choice(backward, forward) = last else {
        return None;
    };
    let (Program::Ode(backward), Program::Ode(forward)) = (&**backward, &**forward) else {
        return None;
    };
    let (time_var, names, rhs) = split_branches(backward, forward)?;

    let mut assigned_any: Vec<&Ident> = Vec::new();
    let mut rest = prefix;
    while let Some((Program::AssignAny(x), tail)) = rest.split_first() {
        assigned_any.push(x);
        rest = tail;
    }
    let others: Vec<&Ident> = names.iter().filter(|n| assigned_any.contains(n)).collect();
    if others.len() != names.len() - 1 || others != assigned_any {
        return None;
    }
    let index = names.iter().position(|n| !assigned_any.contains(&n))?;
    let target = &names[index];

    let (output, input) = match rest {
        [] => (Term::Var(target.clone()), Term::Var(time_var.clone())),
        [Program::Assign(x, e0), Program::Assign(t, e1)] if x == target && *t == time_var => {
            let e0_free = e0.free_vars();
            let e1_free = e1.free_vars();
            if assigned_any.iter().any(|v| e0_free.contains(*v) || e1_free.contains(*v)) || e1_free.contains(target) {
                return None;
            }
            (e0.clone(), e1.clone())
        }
        _ => return None,
    };

    let conjuncts = post.conjuncts();
    if conjuncts.len() != names.len() + 1 {
        return None;
    }
    let mut init_values = Vec::with_capacity(names.len());
    for (c, x) in conjuncts.iter().zip(names.iter().chain(std::iter::once(&time_var))) {
        match c {
            Formula::Compare(CompareOp::Eq, Term::Var(y), v) if y == x => init_values.push(v.clone()),
            _ => return None,
        }
    }
    let init_time = init_values.pop()?;
    let family = DefinedFamily::new(names, rhs, time_var, init_values, init_time).ok()?;
    Some(GraphMatch { family, index, output, input })
}

fn split_branches(backward: &OdeSystem, forward: &OdeSystem) -> Option<(Ident, Vec<Ident>, Vec<Term>)> {
    if backward.domain != Formula::True || forward.domain != Formula::True {
        return None;
    }
    let ((t_b, one_b), back) = backward.equations.split_last()?;
    let ((t_f, one_f), fwd) = forward.equations.split_last()?;
    if t_b != t_f || *one_b != Term::int(-1) || *one_f != Term::int(1) || back.len() != fwd.len() || fwd.is_empty() {
        return None;
    }
    let mut names = Vec::with_capacity(fwd.len());
    let mut rhs = Vec::with_capacity(fwd.len());
    for ((xb, fb), (xf, ff)) in back.iter().zip(fwd) {
        if xb != xf || *fb != ff.negated() {
            return None;
        }
        names.push(xf.clone());
        rhs.push(ff.clone());
    }
    Some((t_f.clone(), names, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tanh() -> DefinedFamily {
        DefinedFamily::new(
            vec!["tanh".into()],
            vec![Term::int(1) - Term::var("tanh").pow(2)],
            "t".into(),
            vec![Term::int(0)],
            Term::int(0),
        )
        .unwrap()
    }

    #[test]
    fn round_trip() {
        let f = tanh();
        let phi = build_interpretation(&f, 0).unwrap();
        assert_eq!(recognize_shape(&phi), Some((f, 0)));
    }

    #[test]
    fn plain_equation_is_not_shaped() {
        assert_eq!(recognize_shape(&Formula::eq(Term::var("x0"), Term::var("t"))), None);
    }

    #[test]
    fn instance_arguments_are_extracted() {
        let f = tanh();
        let phi = build_interpretation(&f, 0).unwrap();
        let sigma = [
            (Ident::new(OUTPUT_PLACEHOLDER), Term::var("z")),
            (input_placeholder(1), Term::var("lambda") * Term::var("x")),
        ]
        .into_iter()
        .collect();
        let inst = crate::syntax::substitute(&phi, &sigma).unwrap();
        let m = match_graph(&inst).unwrap();
        assert_eq!(m.output, Term::var("z"));
        assert_eq!(m.input, Term::var("lambda") * Term::var("x"));
        assert_eq!(recognize_shape(&inst), None);
    }
}
