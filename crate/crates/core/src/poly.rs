//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::syntax::{Ident, Term};

/// Variables with positive exponents, sorted by name.
pub type Monomial = Vec<(Ident, u32)>;

#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("not a polynomial: {0}")]
pub struct NonPolynomial(pub String);

pub fn to_big(r: num_rational::Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn var(x: Ident) -> Self {
        let mut p = Poly::zero();
        p.terms.insert(vec![(x, 1)], BigRational::one());
        p
    }

    pub fn from_term(e: &Term) -> Result<Poly, NonPolynomial> {
        Ok(match e {
            Term::Var(x) => Poly::var(x.clone()),
            Term::Const(c) => Poly::constant(to_big(*c)),
            Term::Plus(a, b) => Poly::from_term(a)?.add(&Poly::from_term(b)?),
            Term::Minus(a, b) => Poly::from_term(a)?.add(&Poly::from_term(b)?.neg()),
            Term::Times(a, b) => Poly::from_term(a)?.mul(&Poly::from_term(b)?),
            Term::Divide(a, b) => {
                let den = Poly::from_term(b)?;
                match den.as_constant() {
                    Some(c) if !c.is_zero() => Poly::from_term(a)?.scale(&c.recip()),
                    _ => return Err(NonPolynomial(format!("division by {b}"))),
                }
            }
            Term::Power(a, n) => Poly::from_term(a)?.pow(*n),
            Term::Negate(a) => Poly::from_term(a)?.neg(),
            Term::FuncApp(..) | Term::Differential(_) => return Err(NonPolynomial(e.to_string())),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            let entry = out.terms.entry(m.clone()).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                out.terms.remove(m);
            }
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let single = Poly { terms: BTreeMap::from([(mul_monomials(m1, m2), c1 * c2)]) };
                out = out.add(&single);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::constant(BigRational::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Highest total degree in the given variables over all monomials.
    pub fn degree_in(&self, vars: &[Ident]) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().filter(|(x, _)| vars.contains(x)).map(|(_, k)| *k).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn variables(&self) -> Vec<Ident> {
        let mut vs: Vec<Ident> = self.terms.keys().flat_map(|m| m.iter().map(|(x, _)| x.clone())).collect();
        vs.sort();
        vs.dedup();
        vs
    }

    /// Splits off the part that is linear in `x`: `self = x*a + b` where
    /// neither `a` nor `b` mentions `x`. Fails if `x` occurs nonlinearly.
    pub fn linear_split(&self, x: &Ident) -> Option<(Poly, Poly)> {
        let mut a = Poly::zero();
        let mut b = Poly::zero();
        for (m, c) in &self.terms {
            match m.iter().find(|(y, _)| y == x).map(|(_, k)| *k) {
                None => b.terms.insert(m.clone(), c.clone()),
                Some(1) => a.terms.insert(m.iter().filter(|(y, _)| y != x).cloned().collect(), c.clone()),
                Some(_) => return None,
            };
        }
        Some((a, b))
    }

    pub fn eval(&self, env: &dyn Fn(&Ident) -> Option<BigRational>) -> Option<BigRational> {
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (x, k) in m {
                let base = env(x)?;
                for _ in 0..*k {
                    v *= &base;
                }
            }
            total += v;
        }
        Some(total)
    }

    /// Coefficients `[c0, c1, ..]` of a polynomial in the single variable `x`.
    pub fn univariate_coefficients(&self, x: &Ident) -> Option<Vec<BigRational>> {
        let mut coeffs: Vec<BigRational> = Vec::new();
        for (m, c) in &self.terms {
            let k = match m.as_slice() {
                [] => 0,
                [(y, k)] if y == x => *k as usize,
                _ => return None,
            };
            if coeffs.len() <= k {
                coeffs.resize(k + 1, BigRational::zero());
            }
            coeffs[k] = c.clone();
        }
        Some(coeffs)
    }

    pub fn to_term(&self) -> Term {
        let mut parts: Vec<Term> = Vec::new();
        for (m, c) in &self.terms {
            let factors: Vec<Term> = m
                .iter()
                .map(|(x, k)| if *k == 1 { Term::Var(x.clone()) } else { Term::Var(x.clone()).pow(*k) })
                .collect();
            let coeff = big_to_term(c);
            let term = match (factors.is_empty(), c.is_one()) {
                (true, _) => coeff,
                (false, true) => product(factors),
                (false, false) => coeff * product(factors),
            };
            parts.push(term);
        }
        let mut iter = parts.into_iter();
        match iter.next() {
            None => Term::int(0),
            Some(first) => iter.fold(first, |acc, t| acc + t),
        }
    }
}

fn product(mut factors: Vec<Term>) -> Term {
    let first = factors.remove(0);
    factors.into_iter().fold(first, |acc, f| acc * f)
}

fn big_to_term(c: &BigRational) -> Term {
    match (c.numer().to_i64(), c.denom().to_i64()) {
        (Some(n), Some(1)) => Term::int(n),
        (Some(n), Some(d)) => Term::int(n) / Term::int(d),
        _ => Term::var(c.to_string()),
    }
}

fn mul_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out: BTreeMap<Ident, u32> = a.iter().cloned().collect();
    for (x, k) in b {
        *out.entry(x.clone()).or_insert(0) += k;
    }
    out.into_iter().collect()
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

/// Horner evaluation of `c0 + c1 x + ...`.
pub fn eval_univariate(coeffs: &[BigRational], x: &BigRational) -> BigRational {
    coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

/// Rational roots of a univariate polynomial with small integer-scaled
/// coefficients (both end coefficients at most `10^6` in magnitude after
/// scaling). Larger inputs return only the obvious root zero.
pub fn rational_roots(coeffs: &[BigRational]) -> Vec<BigRational> {
    let mut coeffs: Vec<BigRational> = coeffs.to_vec();
    while coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
    let mut roots = Vec::new();
    if coeffs.len() <= 1 {
        return roots;
    }
    if coeffs[0].is_zero() {
        roots.push(BigRational::zero());
        while coeffs.first().is_some_and(|c| c.is_zero()) {
            coeffs.remove(0);
        }
        if coeffs.len() <= 1 {
            return roots;
        }
    }
    let lcm = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = coeffs.iter().map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let (a0, an) = (ints[0].abs(), ints[ints.len() - 1].abs());
    let limit = BigInt::from(1_000_000);
    if a0 > limit || an > limit {
        return roots;
    }
    let ps = divisors(a0.to_u64().unwrap_or(1));
    let qs = divisors(an.to_u64().unwrap_or(1));
    for p in &ps {
        for q in &qs {
            for sign in [1i64, -1] {
                let r = BigRational::new(BigInt::from(sign) * BigInt::from(*p), BigInt::from(*q));
                if eval_univariate(&coeffs, &r).is_zero() && !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
    }
    roots.sort();
    roots
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).take_while(|d| d * d <= n).filter(|d| n % d == 0).flat_map(|d| [d, n / d]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn expands_products() {
        let e = (Term::var("x") + Term::int(1)) * (Term::var("x") - Term::int(1));
        let p = Poly::from_term(&e).unwrap();
        assert_eq!(p.univariate_coefficients(&"x".into()), Some(vec![q(-1), q(0), q(1)]));
    }

    #[test]
    fn linear_split_detects_nonlinearity() {
        let p = Poly::from_term(&(Term::var("t") * Term::var("x") + Term::int(3))).unwrap();
        let (a, b) = p.linear_split(&"x".into()).unwrap();
        assert_eq!(a, Poly::var("t".into()));
        assert_eq!(b.as_constant(), Some(q(3)));
        let sq = Poly::from_term(&Term::var("x").pow(2)).unwrap();
        assert!(sq.linear_split(&"x".into()).is_none());
    }

    #[test]
    fn roots_of_one_minus_square() {
        let p = Poly::from_term(&(Term::int(1) - Term::var("x").pow(2))).unwrap();
        let roots = rational_roots(&p.univariate_coefficients(&"x".into()).unwrap());
        assert_eq!(roots, vec![q(-1), q(1)]);
    }

    #[test]
    fn function_application_is_not_polynomial() {
        let sym = crate::syntax::InterpretedSymbol::uninterpreted("f", 1);
        assert!(Poly::from_term(&Term::FuncApp(sym, vec![Term::var("x")])).is_err());
    }
}
