//! Immutable syntax trees for terms, formulas and hybrid programs.
//!
//! Trees are plain values: cloning is cheap for symbols (interpretations are
//! reference counted) and structural equality is derived. Binding structure
//! is analysed in [`vars`], substitution and renaming live in [`subst`], and
//! alpha-equivalence in [`alpha`].

pub mod alpha;
pub mod simplify;
pub mod subst;
pub mod vars;

use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

use num_rational::Rational64;
use thiserror::Error;

pub use alpha::{alpha_equivalent, alpha_equivalent_with};
pub use subst::{alpha_rename, substitute, substitute_term, CaptureError, FreshnessError, Substitution};
pub use vars::FreeVars;

/// Placeholder for the output of an interpreted function (`._0`).
pub const OUTPUT_PLACEHOLDER: &str = "._0";

/// Placeholder for the `i`-th input (1-based) of an interpreted function.
pub fn input_placeholder(i: usize) -> Ident {
    Ident::new(format!("._{i}"))
}

/// An identifier: variable, function symbol or placeholder name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ident(Arc<str>);

impl Ident {
    pub fn new(name: impl AsRef<str>) -> Self {
        Ident(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Placeholders are the `._N` names used inside interpretation annotations.
    pub fn is_placeholder(&self) -> bool {
        self.0.starts_with("._")
    }
}

impl fmt::Debug for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Ident {
    fn from(s: &str) -> Self {
        Ident::new(s)
    }
}

impl From<String> for Ident {
    fn from(s: String) -> Self {
        Ident(Arc::from(s))
    }
}

impl Borrow<str> for Ident {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl PartialEq<str> for Ident {
    fn eq(&self, other: &str) -> bool {
        &*self.0 == other
    }
}

impl PartialEq<&str> for Ident {
    fn eq(&self, other: &&str) -> bool {
        &*self.0 == *other
    }
}

/// A function symbol, optionally carrying the formula that characterizes its
/// graph (`h<<φ>>`). Symbols without interpretation are either unresolved
/// names straight from the parser or numeric-only builtins (`pi`, `sqrt`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct InterpretedSymbol {
    pub name: Ident,
    pub arity: usize,
    pub interpretation: Option<Arc<Formula>>,
}

impl InterpretedSymbol {
    pub fn uninterpreted(name: impl Into<Ident>, arity: usize) -> Self {
        InterpretedSymbol { name: name.into(), arity, interpretation: None }
    }

    /// Builds an interpreted symbol. The interpretation may only mention the
    /// output placeholder `._0` and the input placeholders `._1 .. ._arity`.
    pub fn interpreted(
        name: impl Into<Ident>,
        arity: usize,
        interpretation: Formula,
    ) -> Result<Self, SyntaxTreeError> {
        let name = name.into();
        let allowed: Vec<Ident> = std::iter::once(Ident::new(OUTPUT_PLACEHOLDER))
            .chain((1..=arity).map(input_placeholder))
            .collect();
        if let Some(stray) = interpretation.free_vars().into_iter().find(|v| !allowed.contains(v)) {
            return Err(SyntaxTreeError::StrayFreeVariable { symbol: name, var: stray });
        }
        Ok(InterpretedSymbol { name, arity, interpretation: Some(Arc::new(interpretation)) })
    }
}

impl fmt::Debug for InterpretedSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.interpretation {
            Some(_) => write!(f, "{}<<..>>/{}", self.name, self.arity),
            None => write!(f, "{}/{}", self.name, self.arity),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxTreeError {
    #[error("function {symbol} expects {expected} argument(s), got {found}")]
    Arity { symbol: Ident, expected: usize, found: usize },
    #[error("interpretation of {symbol} mentions free variable {var}")]
    StrayFreeVariable { symbol: Ident, var: Ident },
    #[error("differential equation for {0} is given twice")]
    DuplicateOdeVariable(Ident),
    #[error("division by the constant zero")]
    ZeroDenominator,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Ident),
    /// Exact rational constant.
    Const(Rational64),
    Plus(Box<Term>, Box<Term>),
    Minus(Box<Term>, Box<Term>),
    Times(Box<Term>, Box<Term>),
    Divide(Box<Term>, Box<Term>),
    /// Natural-number power.
    Power(Box<Term>, u32),
    Negate(Box<Term>),
    FuncApp(InterpretedSymbol, Vec<Term>),
    /// The differential `(e)'`.
    Differential(Box<Term>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Eq,
    Ne,
    Ge,
    Gt,
    Le,
    Lt,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
            CompareOp::Ge => ">=",
            CompareOp::Gt => ">",
            CompareOp::Le => "<=",
            CompareOp::Lt => "<",
        }
    }

    /// The operator with its operands swapped (`a<b` iff `b>a`).
    pub fn flipped(self) -> CompareOp {
        match self {
            CompareOp::Eq => CompareOp::Eq,
            CompareOp::Ne => CompareOp::Ne,
            CompareOp::Ge => CompareOp::Le,
            CompareOp::Gt => CompareOp::Lt,
            CompareOp::Le => CompareOp::Ge,
            CompareOp::Lt => CompareOp::Gt,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Compare(CompareOp, Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Equiv(Box<Formula>, Box<Formula>),
    Forall(Ident, Box<Formula>),
    Exists(Ident, Box<Formula>),
    /// `[α]φ`
    Boxed(Box<Program>, Box<Formula>),
    /// `<α>φ`
    Diamond(Box<Program>, Box<Formula>),
}

/// `{x1'=f1, ..., xn'=fn & Q}`
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OdeSystem {
    pub equations: Vec<(Ident, Term)>,
    pub domain: Formula,
}

impl OdeSystem {
    pub fn new(equations: Vec<(Ident, Term)>, domain: Formula) -> Result<Self, SyntaxTreeError> {
        for (i, (x, _)) in equations.iter().enumerate() {
            if equations[..i].iter().any(|(y, _)| y == x) {
                return Err(SyntaxTreeError::DuplicateOdeVariable(x.clone()));
            }
        }
        Ok(OdeSystem { equations, domain })
    }

    pub fn rhs_of(&self, x: &str) -> Option<&Term> {
        self.equations.iter().find(|(y, _)| y.as_str() == x).map(|(_, e)| e)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Program {
    Test(Formula),
    Assign(Ident, Term),
    AssignAny(Ident),
    Ode(OdeSystem),
    Choice(Box<Program>, Box<Program>),
    Sequence(Box<Program>, Box<Program>),
    Loop(Box<Program>),
    IfThen(Formula, Box<Program>),
}

impl Term {
    pub fn var(name: impl Into<Ident>) -> Term {
        Term::Var(name.into())
    }

    pub fn int(n: i64) -> Term {
        Term::Const(Rational64::from_integer(n))
    }

    pub fn rational(num: i64, den: i64) -> Term {
        Term::Const(Rational64::new(num, den))
    }

    pub fn pow(self, n: u32) -> Term {
        Term::Power(Box::new(self), n)
    }

    pub fn differential(self) -> Term {
        Term::Differential(Box::new(self))
    }

    /// Function application with an arity check.
    pub fn apply(symbol: InterpretedSymbol, args: Vec<Term>) -> Result<Term, SyntaxTreeError> {
        if symbol.arity != args.len() {
            return Err(SyntaxTreeError::Arity {
                symbol: symbol.name.clone(),
                expected: symbol.arity,
                found: args.len(),
            });
        }
        Ok(Term::FuncApp(symbol, args))
    }

    /// Division that rejects a syntactically zero constant denominator.
    pub fn checked_div(self, den: Term) -> Result<Term, SyntaxTreeError> {
        if matches!(&den, Term::Const(c) if *c == Rational64::from_integer(0)) {
            return Err(SyntaxTreeError::ZeroDenominator);
        }
        Ok(Term::Divide(Box::new(self), Box::new(den)))
    }

    /// Syntactic negation that cancels double negation and folds constants.
    /// An involution: `t.negated().negated() == t`.
    pub fn negated(&self) -> Term {
        match self {
            Term::Negate(e) => (**e).clone(),
            Term::Const(c) if *c != Rational64::from_integer(0) => Term::Const(-c),
            other => Term::Negate(Box::new(other.clone())),
        }
    }

    pub fn as_const(&self) -> Option<Rational64> {
        match self {
            Term::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Visits every subterm in pre-order, not descending into annotations.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        match self {
            Term::Var(_) | Term::Const(_) => {}
            Term::Plus(a, b) | Term::Minus(a, b) | Term::Times(a, b) | Term::Divide(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Term::Power(a, _) | Term::Negate(a) | Term::Differential(a) => a.visit(f),
            Term::FuncApp(_, args) => args.iter().for_each(|a| a.visit(f)),
        }
    }

    /// Rebuilds the term bottom-up, giving `f` the chance to replace each node
    /// after its children were mapped.
    pub fn map_bottom_up(&self, f: &mut impl FnMut(Term) -> Term) -> Term {
        let rebuilt = match self {
            Term::Var(_) | Term::Const(_) => self.clone(),
            Term::Plus(a, b) => Term::Plus(Box::new(a.map_bottom_up(f)), Box::new(b.map_bottom_up(f))),
            Term::Minus(a, b) => Term::Minus(Box::new(a.map_bottom_up(f)), Box::new(b.map_bottom_up(f))),
            Term::Times(a, b) => Term::Times(Box::new(a.map_bottom_up(f)), Box::new(b.map_bottom_up(f))),
            Term::Divide(a, b) => Term::Divide(Box::new(a.map_bottom_up(f)), Box::new(b.map_bottom_up(f))),
            Term::Power(a, n) => Term::Power(Box::new(a.map_bottom_up(f)), *n),
            Term::Negate(a) => Term::Negate(Box::new(a.map_bottom_up(f))),
            Term::Differential(a) => Term::Differential(Box::new(a.map_bottom_up(f))),
            Term::FuncApp(s, args) => {
                Term::FuncApp(s.clone(), args.iter().map(|a| a.map_bottom_up(f)).collect())
            }
        };
        f(rebuilt)
    }

    /// Replaces every occurrence of the subterm `from` by `to`.
    pub fn replace(&self, from: &Term, to: &Term) -> Term {
        if self == from {
            return to.clone();
        }
        match self {
            Term::Var(_) | Term::Const(_) => self.clone(),
            Term::Plus(a, b) => Term::Plus(Box::new(a.replace(from, to)), Box::new(b.replace(from, to))),
            Term::Minus(a, b) => Term::Minus(Box::new(a.replace(from, to)), Box::new(b.replace(from, to))),
            Term::Times(a, b) => Term::Times(Box::new(a.replace(from, to)), Box::new(b.replace(from, to))),
            Term::Divide(a, b) => Term::Divide(Box::new(a.replace(from, to)), Box::new(b.replace(from, to))),
            Term::Power(a, n) => Term::Power(Box::new(a.replace(from, to)), *n),
            Term::Negate(a) => Term::Negate(Box::new(a.replace(from, to))),
            Term::Differential(a) => Term::Differential(Box::new(a.replace(from, to))),
            Term::FuncApp(s, args) => Term::FuncApp(s.clone(), args.iter().map(|a| a.replace(from, to)).collect()),
        }
    }

    /// Whether the term contains any function application.
    pub fn has_func_app(&self) -> bool {
        let mut found = false;
        self.visit(&mut |t| found |= matches!(t, Term::FuncApp(..)));
        found
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $ctor:ident) => {
        impl std::ops::$tr for Term {
            type Output = Term;
            fn $method(self, rhs: Term) -> Term {
                Term::$ctor(Box::new(self), Box::new(rhs))
            }
        }
    };
}

binop!(Add, add, Plus);
binop!(Sub, sub, Minus);
binop!(Mul, mul, Times);
binop!(Div, div, Divide);

impl std::ops::Neg for Term {
    type Output = Term;
    fn neg(self) -> Term {
        Term::Negate(Box::new(self))
    }
}

impl Formula {
    pub fn cmp(op: CompareOp, lhs: Term, rhs: Term) -> Formula {
        Formula::Compare(op, lhs, rhs)
    }

    pub fn eq(lhs: Term, rhs: Term) -> Formula {
        Formula::Compare(CompareOp::Eq, lhs, rhs)
    }

    pub fn and(self, rhs: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(rhs))
    }

    pub fn implies(self, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(self), Box::new(rhs))
    }

    pub fn equiv(self, rhs: Formula) -> Formula {
        Formula::Equiv(Box::new(self), Box::new(rhs))
    }

    pub fn negate(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    pub fn boxed(program: Program, post: Formula) -> Formula {
        Formula::Boxed(Box::new(program), Box::new(post))
    }

    pub fn diamond(program: Program, post: Formula) -> Formula {
        Formula::Diamond(Box::new(program), Box::new(post))
    }

    /// Right-nested conjunction; `true` for an empty list.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut parts: Vec<Formula> = parts.into_iter().collect();
        let Some(mut acc) = parts.pop() else {
            return Formula::True;
        };
        while let Some(p) = parts.pop() {
            acc = p.and(acc);
        }
        acc
    }

    /// Splits a right-nested conjunction into its conjuncts.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Formula::And(a, b) = cur {
            out.extend(a.conjuncts());
            cur = b;
        }
        out.push(cur);
        out
    }

    /// Maps every term position of the formula (including terms inside
    /// programs) through `f`.
    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Compare(op, a, b) => Formula::Compare(*op, f(a), f(b)),
            Formula::Not(p) => Formula::Not(Box::new(p.map_terms(f))),
            Formula::And(a, b) => Formula::And(Box::new(a.map_terms(f)), Box::new(b.map_terms(f))),
            Formula::Or(a, b) => Formula::Or(Box::new(a.map_terms(f)), Box::new(b.map_terms(f))),
            Formula::Implies(a, b) => Formula::Implies(Box::new(a.map_terms(f)), Box::new(b.map_terms(f))),
            Formula::Equiv(a, b) => Formula::Equiv(Box::new(a.map_terms(f)), Box::new(b.map_terms(f))),
            Formula::Forall(x, p) => Formula::Forall(x.clone(), Box::new(p.map_terms(f))),
            Formula::Exists(x, p) => Formula::Exists(x.clone(), Box::new(p.map_terms(f))),
            Formula::Boxed(a, p) => Formula::Boxed(Box::new(a.map_terms(f)), Box::new(p.map_terms(f))),
            Formula::Diamond(a, p) => Formula::Diamond(Box::new(a.map_terms(f)), Box::new(p.map_terms(f))),
        }
    }

    /// Visits every term position (top-level terms only; use
    /// [`Term::visit`] to descend).
    pub fn for_each_term<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Compare(_, a, b) => {
                f(a);
                f(b);
            }
            Formula::Not(p) | Formula::Forall(_, p) | Formula::Exists(_, p) => p.for_each_term(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Equiv(a, b) => {
                a.for_each_term(f);
                b.for_each_term(f);
            }
            Formula::Boxed(a, p) | Formula::Diamond(a, p) => {
                a.for_each_term(f);
                p.for_each_term(f);
            }
        }
    }

    /// Whether the formula contains no modalities and no quantifiers.
    pub fn is_first_order_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Compare(..) => true,
            Formula::Not(p) => p.is_first_order_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Equiv(a, b) => {
                a.is_first_order_free() && b.is_first_order_free()
            }
            _ => false,
        }
    }
}

impl Program {
    pub fn seq(self, next: Program) -> Program {
        Program::Sequence(Box::new(self), Box::new(next))
    }

    pub fn choice(self, other: Program) -> Program {
        Program::Choice(Box::new(self), Box::new(other))
    }

    pub fn repeat(self) -> Program {
        Program::Loop(Box::new(self))
    }

    pub fn assign(x: impl Into<Ident>, e: Term) -> Program {
        Program::Assign(x.into(), e)
    }

    pub fn assign_any(x: impl Into<Ident>) -> Program {
        Program::AssignAny(x.into())
    }

    /// Right-nested sequential composition of the statements.
    pub fn sequence(parts: impl IntoIterator<Item = Program>) -> Option<Program> {
        let mut parts: Vec<Program> = parts.into_iter().collect();
        let mut acc = parts.pop()?;
        while let Some(p) = parts.pop() {
            acc = p.seq(acc);
        }
        Some(acc)
    }

    /// Flattens nested sequential compositions into a statement list.
    pub fn flatten_sequence(&self) -> Vec<&Program> {
        match self {
            Program::Sequence(a, b) => {
                let mut out = a.flatten_sequence();
                out.extend(b.flatten_sequence());
                out
            }
            other => vec![other],
        }
    }

    /// `if (φ) {α}` as `{?φ; α} ++ ?!φ`.
    pub fn desugar_if(&self) -> Program {
        match self {
            Program::IfThen(cond, body) => Program::Test(cond.clone())
                .seq(body.desugar_if())
                .choice(Program::Test(cond.clone().negate())),
            Program::Choice(a, b) => a.desugar_if().choice(b.desugar_if()),
            Program::Sequence(a, b) => a.desugar_if().seq(b.desugar_if()),
            Program::Loop(a) => a.desugar_if().repeat(),
            other => other.clone(),
        }
    }

    pub fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Program {
        match self {
            Program::Test(p) => Program::Test(p.map_terms(f)),
            Program::Assign(x, e) => Program::Assign(x.clone(), f(e)),
            Program::AssignAny(x) => Program::AssignAny(x.clone()),
            Program::Ode(ode) => Program::Ode(OdeSystem {
                equations: ode.equations.iter().map(|(x, e)| (x.clone(), f(e))).collect(),
                domain: ode.domain.map_terms(f),
            }),
            Program::Choice(a, b) => a.map_terms(f).choice(b.map_terms(f)),
            Program::Sequence(a, b) => a.map_terms(f).seq(b.map_terms(f)),
            Program::Loop(a) => a.map_terms(f).repeat(),
            Program::IfThen(c, a) => Program::IfThen(c.map_terms(f), Box::new(a.map_terms(f))),
        }
    }

    pub fn for_each_term<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        match self {
            Program::Test(p) => p.for_each_term(f),
            Program::Assign(_, e) => f(e),
            Program::AssignAny(_) => {}
            Program::Ode(ode) => {
                ode.equations.iter().for_each(|(_, e)| f(e));
                ode.domain.for_each_term(f);
            }
            Program::Choice(a, b) | Program::Sequence(a, b) => {
                a.for_each_term(f);
                b.for_each_term(f);
            }
            Program::Loop(a) => a.for_each_term(f),
            Program::IfThen(c, a) => {
                c.for_each_term(f);
                a.for_each_term(f);
            }
        }
    }

    /// Every ODE system in the program, in syntactic order.
    pub fn odes(&self) -> Vec<&OdeSystem> {
        let mut out = Vec::new();
        self.collect_odes(&mut out);
        out
    }

    fn collect_odes<'a>(&'a self, out: &mut Vec<&'a OdeSystem>) {
        match self {
            Program::Ode(o) => out.push(o),
            Program::Choice(a, b) | Program::Sequence(a, b) => {
                a.collect_odes(out);
                b.collect_odes(out);
            }
            Program::Loop(a) | Program::IfThen(_, a) => a.collect_odes(out),
            Program::Test(_) | Program::Assign(..) | Program::AssignAny(_) => {}
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::print::term_to_string(self))
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::print::formula_to_string(self))
    }
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::print::program_to_string(self))
    }
}

impl fmt::Debug for OdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::print::program_to_string(&Program::Ode(self.clone())))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::print::term_to_string(self))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::print::formula_to_string(self))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::print::program_to_string(self))
    }
}
