#![allow(dead_code)]

use std::path::PathBuf;

use ddef_core::definitions::registry::builtin_symbol;
use ddef_core::parse_model;
use ddef_core::syntax::{CompareOp, Formula, Ident, InterpretedSymbol, OdeSystem, Program, Term};
use num_rational::Rational64;
use proptest::prelude::*;

pub const BUNDLED: [&str; 6] =
    ["pendulum.dlm", "neuron.dlm", "flight.dlm", "bouncing_ball.dlm", "robot.dlm", "prop1.dlm"];

pub fn model_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name)
}

pub fn read_model(name: &str) -> String {
    std::fs::read_to_string(model_path(name)).unwrap()
}

const VARS: [&str; 5] = ["x", "y", "z", "v", "w"];

fn var() -> impl Strategy<Value = Ident> {
    prop::sample::select(&VARS[..]).prop_map(Ident::new)
}

/// Literal constants: integers and terminating decimals, the values numerals
/// denote.
fn constant() -> impl Strategy<Value = Rational64> {
    prop_oneof![
        (-20i64..20).prop_map(Rational64::from_integer),
        (-999i64..999, prop::sample::select(&[10i64, 100, 4, 8][..])).prop_map(|(n, d)| Rational64::new(n, d)),
    ]
}

fn unary_builtin() -> impl Strategy<Value = InterpretedSymbol> {
    prop::sample::select(&["sin", "cos", "exp", "tanh", "sqrt"][..]).prop_map(|n| builtin_symbol(n).unwrap().clone())
}

/// The user-declared family `sinh, cosh`, printed with full annotations.
pub fn hyperbolic_symbols() -> Vec<InterpretedSymbol> {
    parse_model(&read_model("hyperbolic.dlm")).unwrap().declared_symbols().unwrap()
}

fn leaf_term() -> BoxedStrategy<Term> {
    prop_oneof![
        3 => var().prop_map(Term::Var),
        2 => constant().prop_map(Term::Const),
        1 => Just(Term::FuncApp(builtin_symbol("pi").unwrap().clone(), vec![])),
    ]
    .boxed()
}

/// Denominators that are not the literal zero, which the parser rejects.
fn nonzero(t: Term) -> Term {
    match t {
        Term::Const(c) if c == Rational64::from_integer(0) => Term::Const(Rational64::from_integer(1)),
        t => t,
    }
}

/// Terms of depth at most `d`, optionally containing differentials.
pub fn term(d: u32, differentials: bool) -> BoxedStrategy<Term> {
    if d == 0 {
        return leaf_term();
    }
    let sub = term(d - 1, differentials);
    let hyper = hyperbolic_symbols();
    let mut options: Vec<(u32, BoxedStrategy<Term>)> = vec![
        (4, leaf_term()),
        (2, (sub.clone(), sub.clone()).prop_map(|(a, b)| a + b).boxed()),
        (1, (sub.clone(), sub.clone()).prop_map(|(a, b)| a - b).boxed()),
        (2, (sub.clone(), sub.clone()).prop_map(|(a, b)| a * b).boxed()),
        (1, (sub.clone(), sub.clone()).prop_map(|(a, b)| Term::Divide(Box::new(a), Box::new(nonzero(b)))).boxed()),
        (1, (sub.clone(), 0u32..5).prop_map(|(a, n)| Term::Power(Box::new(a), n)).boxed()),
        (1, sub.clone().prop_map(|a| Term::Negate(Box::new(a))).boxed()),
        (2, (unary_builtin(), sub.clone()).prop_map(|(h, a)| Term::FuncApp(h, vec![a])).boxed()),
        (1, (prop::sample::select(hyper), sub.clone()).prop_map(|(h, a)| Term::FuncApp(h, vec![a])).boxed()),
    ];
    if differentials {
        options.push((1, sub.prop_map(|a| Term::Differential(Box::new(a))).boxed()));
    }
    prop::strategy::Union::new_weighted(options).boxed()
}

fn compare_op() -> impl Strategy<Value = CompareOp> {
    prop::sample::select(&[CompareOp::Eq, CompareOp::Ne, CompareOp::Ge, CompareOp::Gt, CompareOp::Le, CompareOp::Lt][..])
}

fn comparison(d: u32) -> BoxedStrategy<Formula> {
    let t = term(d, true);
    (compare_op(), t.clone(), t).prop_map(|(op, a, b)| Formula::Compare(op, a, b)).boxed()
}

/// Modality-free formulas for ODE domains.
fn domain(d: u32) -> BoxedStrategy<Formula> {
    let cmp = term(d.min(2), false);
    let atom = (compare_op(), cmp.clone(), cmp).prop_map(|(op, a, b)| Formula::Compare(op, a, b)).boxed();
    prop_oneof![
        2 => Just(Formula::True),
        2 => atom.clone(),
        1 => (atom.clone(), atom).prop_map(|(a, b)| a.and(b)),
    ]
    .boxed()
}

pub fn formula(d: u32) -> BoxedStrategy<Formula> {
    if d == 0 {
        return prop_oneof![Just(Formula::True), Just(Formula::False)].boxed();
    }
    let sub = formula(d - 1);
    let prog = program(d - 1);
    prop_oneof![
        4 => comparison(d - 1),
        1 => Just(Formula::True),
        1 => sub.clone().prop_map(|p| Formula::Not(Box::new(p))),
        2 => (sub.clone(), sub.clone()).prop_map(|(a, b)| a.and(b)),
        1 => (sub.clone(), sub.clone()).prop_map(|(a, b)| a.or(b)),
        1 => (sub.clone(), sub.clone()).prop_map(|(a, b)| a.implies(b)),
        1 => (sub.clone(), sub.clone()).prop_map(|(a, b)| a.equiv(b)),
        1 => (var(), sub.clone()).prop_map(|(x, p)| Formula::Forall(x, Box::new(p))),
        1 => (var(), sub.clone()).prop_map(|(x, p)| Formula::Exists(x, Box::new(p))),
        1 => (prog.clone(), sub.clone()).prop_map(|(a, p)| Formula::Boxed(Box::new(a), Box::new(p))),
        1 => (prog, sub).prop_map(|(a, p)| Formula::Diamond(Box::new(a), Box::new(p))),
    ]
    .boxed()
}

fn ode(d: u32) -> BoxedStrategy<OdeSystem> {
    (prop::collection::btree_map(var(), term(d.min(3), false), 1..4), domain(d))
        .prop_map(|(eqs, dom)| OdeSystem::new(eqs.into_iter().collect(), dom).unwrap())
        .boxed()
}

pub fn program(d: u32) -> BoxedStrategy<Program> {
    let atomic = prop_oneof![
        (var(), term(d.min(3), false)).prop_map(|(x, e)| Program::Assign(x, e)),
        var().prop_map(Program::AssignAny),
    ]
    .boxed();
    if d == 0 {
        return atomic;
    }
    let sub = program(d - 1);
    let f = formula(d - 1);
    prop_oneof![
        3 => atomic,
        1 => f.clone().prop_map(Program::Test),
        2 => ode(d - 1).prop_map(Program::Ode),
        2 => (sub.clone(), sub.clone()).prop_map(|(a, b)| a.seq(b)),
        2 => (sub.clone(), sub.clone()).prop_map(|(a, b)| a.choice(b)),
        1 => sub.clone().prop_map(|a| a.repeat()),
        1 => (f, sub).prop_map(|(c, a)| Program::IfThen(c, Box::new(a))),
    ]
    .boxed()
}
