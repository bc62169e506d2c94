use ddef_core::definitions::registry::builtin_symbol;
use ddef_core::definitions::{build_interpretation, builtin_registry, recognize_shape, DefinedFamily};
use ddef_core::oracle::{Policy, State};
use ddef_core::syntax::{alpha_equivalent, alpha_rename, substitute, FreeVars, Substitution};
use ddef_core::{parse_formula, CompareOp, Evaluator, Formula, Ident, OracleConfig, Program, Term, Truth};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const VARS: [&str; 3] = ["x", "y", "z"];

/// Division-free terms with bounded growth, so evaluation never fails.
fn term(d: u32) -> BoxedStrategy<Term> {
    let leaf = prop_oneof![
        prop::sample::select(&VARS[..]).prop_map(Term::var),
        (-5i64..5).prop_map(Term::int),
    ];
    if d == 0 {
        return leaf.boxed();
    }
    let sub = term(d - 1);
    prop_oneof![
        2 => leaf,
        1 => (sub.clone(), sub.clone()).prop_map(|(a, b)| Term::Plus(Box::new(a), Box::new(b))),
        1 => (sub.clone(), sub.clone()).prop_map(|(a, b)| Term::Times(Box::new(a), Box::new(b))),
        1 => sub.clone().prop_map(|a| -a),
        1 => (prop::sample::select(&["sin", "cos", "tanh"][..]), sub)
            .prop_map(|(f, a)| Term::FuncApp(builtin_symbol(f).unwrap().clone(), vec![a])),
    ]
    .boxed()
}

fn op() -> impl Strategy<Value = CompareOp> {
    prop::sample::select(&[CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge, CompareOp::Ne][..])
}

fn formula(d: u32) -> BoxedStrategy<Formula> {
    let atom = (op(), term(2), term(2)).prop_map(|(o, a, b)| Formula::cmp(o, a, b));
    if d == 0 {
        return atom.boxed();
    }
    let sub = formula(d - 1);
    prop_oneof![
        2 => atom,
        1 => sub.clone().prop_map(Formula::negate),
        1 => (sub.clone(), sub.clone()).prop_map(|(a, b)| a.and(b)),
        1 => (sub.clone(), sub).prop_map(|(a, b)| a.implies(b)),
    ]
    .boxed()
}

fn state(values: &[f64]) -> State {
    VARS.iter().zip(values).map(|(k, v)| (Ident::new(*k), *v)).collect()
}

fn ev() -> Evaluator {
    Evaluator::new(builtin_registry(), OracleConfig::default())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn substitution_agrees_with_evaluation(
        phi in formula(2),
        e in term(2),
        values in prop::collection::vec(-3.0f64..3.0, 3),
    ) {
        let ev = ev();
        let s = state(&values);
        let sigma = Substitution::from([(Ident::new("x"), e.clone())]);
        let direct = ev.eval_formula(&substitute(&phi, &sigma).unwrap(), &s).unwrap();
        let mut shifted = s.clone();
        shifted.insert(Ident::new("x"), ev.eval_term(&e, &s).unwrap());
        let indirect = ev.eval_formula(&phi, &shifted).unwrap();
        if direct != Truth::Unknown && indirect != Truth::Unknown {
            prop_assert_eq!(direct, indirect);
        }
    }

    #[test]
    fn renaming_a_binder_keeps_the_meaning(body in formula(2)) {
        let phi = Formula::Forall(Ident::new("x"), Box::new(body));
        let renamed = alpha_rename(&phi, &Ident::new("x"), &Ident::new("fresh")).unwrap();
        prop_assert!(alpha_equivalent(&phi, &renamed));
        prop_assert_eq!(phi.free_vars(), renamed.free_vars());
    }

    #[test]
    fn shapes_are_recognized(
        n in 1usize..4,
        coeffs in prop::collection::vec(-3i64..4, 12),
        init in prop::collection::vec(-2i64..3, 4),
        index in 0usize..3,
    ) {
        let names: Vec<Ident> = ["p", "q", "r"][..n].iter().map(|s| Ident::new(*s)).collect();
        let t = Term::var("t");
        // x_i' = a*x_{i+1} + b*t + c
        let rhs: Vec<Term> = (0..n)
            .map(|i| {
                let next = Term::Var(names[(i + 1) % n].clone());
                Term::int(coeffs[3 * i]) * next + Term::int(coeffs[3 * i + 1]) * t.clone() + Term::int(coeffs[3 * i + 2])
            })
            .collect();
        let family = DefinedFamily::new(
            names,
            rhs,
            Ident::new("t"),
            init[..n].iter().map(|&v| Term::int(v)).collect(),
            Term::int(init[3]),
        )
        .unwrap();
        let index = index % n;
        let phi = build_interpretation(&family, index).unwrap();
        prop_assert_eq!(recognize_shape(&phi), Some((family, index)));
    }
}

#[test]
fn boxed_assignment_ignores_the_state() {
    let phi = parse_formula("[x:=1;]x>=0").unwrap();
    assert!(phi.free_vars().is_empty());
    let Formula::Boxed(a, post) = &phi else { unreachable!() };
    let ev = ev();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..100 {
        let x = -50.0 + i as f64;
        let trace = ev.run_once(a, &state(&[x, 0.0, 0.0]), &Policy::default(), &mut rng).unwrap();
        assert_eq!(ev.eval_formula(post, &trace.final_state()).unwrap(), Truth::True);
    }
    assert!(matches!(**a, Program::Assign(..)));
}
