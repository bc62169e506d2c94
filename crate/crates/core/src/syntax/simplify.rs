//! Exact constant folding with the 0/1 identities. Used to tidy generated
//! statements (for example an unfolding base after plugging in `v0`).

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Zero};

use super::{Formula, Term};

pub fn simplify_term(e: &Term) -> Term {
    e.map_bottom_up(&mut step)
}

pub fn simplify_formula(f: &Formula) -> Formula {
    f.map_terms(&mut simplify_term)
}

fn step(e: Term) -> Term {
    use Term::*;
    match e {
        Plus(a, b) => match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => checked(x.checked_add(&y)).unwrap_or(Plus(a, b)),
            (Some(x), _) if x.is_zero() => *b,
            (_, Some(y)) if y.is_zero() => *a,
            _ => Plus(a, b),
        },
        Minus(a, b) => match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => checked(x.checked_sub(&y)).unwrap_or(Minus(a, b)),
            (Some(x), _) if x.is_zero() => b.negated(),
            (_, Some(y)) if y.is_zero() => *a,
            _ => Minus(a, b),
        },
        Times(a, b) => match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => checked(x.checked_mul(&y)).unwrap_or(Times(a, b)),
            (Some(x), _) | (_, Some(x)) if x.is_zero() => Const(Rational64::zero()),
            (Some(x), _) if x.is_one() => *b,
            (_, Some(y)) if y.is_one() => *a,
            _ => Times(a, b),
        },
        Divide(a, b) => match (a.as_const(), b.as_const()) {
            (_, Some(y)) if y.is_zero() => Divide(a, b),
            (Some(x), Some(y)) => checked(x.checked_div(&y)).unwrap_or(Divide(a, b)),
            (Some(x), _) if x.is_zero() => Const(Rational64::zero()),
            (_, Some(y)) if y.is_one() => *a,
            _ => Divide(a, b),
        },
        Power(a, n) => match a.as_const() {
            _ if n == 0 => Const(Rational64::one()),
            _ if n == 1 => *a,
            Some(x) if x.is_zero() || x.is_one() => Const(x),
            Some(x) => checked(pow_checked(x, n)).unwrap_or(Power(a, n)),
            None => Power(a, n),
        },
        Negate(a) => match a.as_const() {
            Some(x) => Const(-x),
            None => Negate(a),
        },
        other => other,
    }
}

fn checked(r: Option<Rational64>) -> Option<Term> {
    r.map(Term::Const)
}

fn pow_checked(x: Rational64, n: u32) -> Option<Rational64> {
    let mut acc = Rational64::one();
    for _ in 0..n {
        acc = acc.checked_mul(&x)?;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn times_zero_collapses() {
        let e = Term::var("lambda") * Term::int(0);
        assert_eq!(simplify_term(&e), Term::int(0));
    }

    #[test]
    fn constants_fold_exactly() {
        let e = (Term::int(1) + Term::int(2)) / Term::int(6);
        assert_eq!(simplify_term(&e), Term::rational(1, 2));
    }

    #[test]
    fn variables_untouched() {
        let e = Term::var("x") + Term::var("y");
        assert_eq!(simplify_term(&e), e);
    }
}
