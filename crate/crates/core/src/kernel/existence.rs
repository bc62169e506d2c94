//! Global existence of solutions for defining ODEs, the side condition that
//! makes the FI axiom sound for a differentially-defined family.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::KernelError;
use crate::definitions::DefinedFamily;
use crate::poly::{eval_univariate, rational_roots, to_big, Poly};
use crate::syntax::{CompareOp, Formula, Ident, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExistenceMethod {
    AffineODE,
    UnivariateBoundedInvariant,
    UserAssumed,
}

impl ExistenceMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ExistenceMethod::AffineODE => "AffineODE",
            ExistenceMethod::UnivariateBoundedInvariant => "UnivariateBoundedInvariant",
            ExistenceMethod::UserAssumed => "UserAssumed",
        }
    }
}

/// Whether unproven existence may be assumed. Assumptions taint every fact
/// derived from the family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ExistenceMode {
    #[default]
    Sound,
    AssumeExistence,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Evidence {
    /// Per coordinate: coefficient of every family member, then the
    /// inhomogeneous part; all polynomials in the time variable.
    Affine { rows: Vec<(Ident, Vec<(Ident, Term)>, Term)> },
    /// `[lo, hi]` is invariant forward in time and `[back_lo, back_hi]`
    /// backward, both containing the initial value.
    Interval { invariant: Formula, backward_invariant: Formula, sign_checks: Vec<String> },
    Assumed { reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExistenceCertificate {
    family: DefinedFamily,
    method: ExistenceMethod,
    evidence: Evidence,
}

impl ExistenceCertificate {
    pub fn family(&self) -> &DefinedFamily {
        &self.family
    }

    pub fn method(&self) -> ExistenceMethod {
        self.method
    }

    pub fn evidence(&self) -> &Evidence {
        &self.evidence
    }

    pub fn is_assumed(&self) -> bool {
        self.method == ExistenceMethod::UserAssumed
    }

    pub fn describe(&self) -> String {
        match &self.evidence {
            Evidence::Affine { rows } => rows
                .iter()
                .map(|(x, coeffs, rest)| {
                    let lin: Vec<String> = coeffs.iter().map(|(y, c)| format!("({c})*{y}")).collect();
                    format!("{x}'={}+({rest})", lin.join("+"))
                })
                .collect::<Vec<_>>()
                .join("; "),
            Evidence::Interval { invariant, backward_invariant, sign_checks } => {
                format!("forward {invariant}; backward {backward_invariant}; {}", sign_checks.join(", "))
            }
            Evidence::Assumed { reason } => format!("assumed: {reason}"),
        }
    }
}

/// Certifies that the defining ODE has a global solution, by one of two
/// automated arguments, or by assumption in `AssumeExistence` mode.
pub fn check_existence(family: &DefinedFamily, mode: ExistenceMode) -> Result<ExistenceCertificate, KernelError> {
    let cert = |method, evidence| ExistenceCertificate { family: family.clone(), method, evidence };
    if let Some(rows) = affine_rows(family) {
        return Ok(cert(ExistenceMethod::AffineODE, Evidence::Affine { rows }));
    }
    let bounded = bounded_interval(family);
    match (bounded, mode) {
        (Ok(evidence), _) => Ok(cert(ExistenceMethod::UnivariateBoundedInvariant, evidence)),
        (Err(reason), ExistenceMode::AssumeExistence) => {
            Ok(cert(ExistenceMethod::UserAssumed, Evidence::Assumed { reason }))
        }
        (Err(reason), ExistenceMode::Sound) => {
            Err(KernelError::ExistenceUnproven { family: family.names().to_vec(), reason })
        }
    }
}

type AffineRow = (Ident, Vec<(Ident, Term)>, Term);

/// Linear ODEs with polynomial-in-time coefficients have solutions on the
/// whole real line.
fn affine_rows(family: &DefinedFamily) -> Option<Vec<AffineRow>> {
    let mut rows = Vec::with_capacity(family.len());
    for (x, f) in family.names().iter().zip(family.rhs()) {
        let mut rest = Poly::from_term(f).ok()?;
        let mut coeffs = Vec::with_capacity(family.len());
        for y in family.names() {
            let (a, b) = rest.linear_split(y)?;
            if a.degree_in(family.names()) > 0 {
                return None;
            }
            coeffs.push((y.clone(), a.to_term()));
            rest = b;
        }
        rows.push((x.clone(), coeffs, rest.to_term()));
    }
    Some(rows)
}

fn bounded_interval(family: &DefinedFamily) -> Result<Evidence, String> {
    if family.len() != 1 {
        return Err(format!("{}-dimensional nonlinear system", family.len()));
    }
    let x = &family.names()[0];
    let poly = Poly::from_term(&family.rhs()[0]).map_err(|e| e.to_string())?;
    if poly.variables().iter().any(|v| v != x) {
        return Err(format!("{x}' depends on {}", family.time_var()));
    }
    let coeffs = poly.univariate_coefficients(x).ok_or("not univariate")?;
    let x0 = to_big(family.init_values_exact()[0]);
    let f = |v: &BigRational| eval_univariate(&coeffs, v);

    let candidates = candidate_points(&coeffs, &x0);
    let below: Vec<&BigRational> = candidates.iter().filter(|c| **c <= x0).collect();
    let above: Vec<&BigRational> = candidates.iter().filter(|c| **c >= x0).collect();
    // nearest qualifying endpoints on each side
    let pick = |side: &[&BigRational], want_nonneg: bool, nearest_first: bool| -> Option<BigRational> {
        let mut pts: Vec<&BigRational> = side.to_vec();
        pts.sort();
        if nearest_first {
            pts.reverse();
        }
        pts.into_iter().find(|p| if want_nonneg { !f(p).is_negative() } else { !f(p).is_positive() }).cloned()
    };
    // equilibria enclosing the initial value block both directions at once
    let roots = rational_roots(&coeffs);
    let root_lo = roots.iter().filter(|r| **r <= x0).max().cloned();
    let root_hi = roots.iter().filter(|r| **r >= x0).min().cloned();
    let (forward, backward) = match root_lo.zip(root_hi) {
        Some(pair) => (Some(pair.clone()), Some(pair)),
        None => (
            pick(&below, true, true).zip(pick(&above, false, false)),
            pick(&below, false, true).zip(pick(&above, true, false)),
        ),
    };
    let (Some((lo, hi)), Some((blo, bhi))) = (forward, backward) else {
        return Err(format!("no bounded invariant interval around {x}={x0} found"));
    };
    let interval = |a: &BigRational, b: &BigRational| {
        Formula::cmp(CompareOp::Le, big_term(a), Term::Var(x.clone()))
            .and(Formula::cmp(CompareOp::Le, Term::Var(x.clone()), big_term(b)))
    };
    let sign_checks = vec![
        format!("f({lo})={}>=0", f(&lo)),
        format!("f({hi})={}<=0", f(&hi)),
        format!("f({blo})={}<=0", f(&blo)),
        format!("f({bhi})={}>=0", f(&bhi)),
    ];
    Ok(Evidence::Interval { invariant: interval(&lo, &hi), backward_invariant: interval(&blo, &bhi), sign_checks })
}

fn candidate_points(coeffs: &[BigRational], x0: &BigRational) -> Vec<BigRational> {
    let mut pts = vec![x0.clone()];
    pts.extend(rational_roots(coeffs));
    let sixteenth = BigRational::new(BigInt::one(), BigInt::from(16));
    for j in 1..=1024i64 {
        let d = &sixteenth * BigRational::from_integer(BigInt::from(j));
        pts.push(x0 + &d);
        pts.push(x0 - &d);
    }
    let mut p = BigRational::one();
    for _ in 0..63 {
        pts.push(x0 + &p);
        pts.push(x0 - &p);
        p *= BigRational::from_integer(BigInt::from(2));
    }
    pts.sort();
    pts.dedup();
    pts
}

fn big_term(v: &BigRational) -> Term {
    use num_traits::ToPrimitive;
    match (v.numer().to_i64(), v.denom().to_i64()) {
        (Some(n), Some(d)) => Term::Const(num_rational::Rational64::new(n, d)),
        _ => Term::int(if v.is_positive() { i64::MAX } else { i64::MIN + 1 }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(rhs: Term, x0: i64) -> DefinedFamily {
        DefinedFamily::new(vec!["x".into()], vec![rhs], "t".into(), vec![Term::int(x0)], Term::int(0)).unwrap()
    }

    #[test]
    fn time_dependent_linear_is_affine() {
        let f = single(Term::var("t").pow(2) * Term::var("x") + Term::var("t"), 1);
        assert_eq!(check_existence(&f, ExistenceMode::Sound).unwrap().method(), ExistenceMethod::AffineODE);
    }

    #[test]
    fn logistic_is_bounded() {
        let f = single(Term::int(1) - Term::var("x").pow(2), 0);
        let c = check_existence(&f, ExistenceMode::Sound).unwrap();
        assert_eq!(c.method(), ExistenceMethod::UnivariateBoundedInvariant);
        match c.evidence() {
            Evidence::Interval { invariant, .. } => assert_eq!(invariant.to_string(), "-1<=x&x<=1"),
            other => panic!("unexpected evidence {other:?}"),
        }
    }

    #[test]
    fn blow_up_refused_unless_assumed() {
        let f = single(Term::var("x").pow(2), 1);
        assert!(matches!(check_existence(&f, ExistenceMode::Sound), Err(KernelError::ExistenceUnproven { .. })));
        let c = check_existence(&f, ExistenceMode::AssumeExistence).unwrap();
        assert!(c.is_assumed());
    }

    #[test]
    fn cubic_damping_blows_up_backward() {
        let f = single(-Term::var("x").pow(3), 2);
        // forward decays, but backward blows up: no certificate
        assert!(check_existence(&f, ExistenceMode::Sound).is_err());
    }
}
