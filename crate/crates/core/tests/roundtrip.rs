mod common;

use ddef_core::print::{formula_to_string, program_to_string, term_to_string};
use ddef_core::{parse_formula, parse_model, parse_program, parse_term};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn terms_round_trip(t in common::term(6, true)) {
        let printed = term_to_string(&t);
        prop_assert_eq!(parse_term(&printed).map_err(|e| TestCaseError::fail(format!("{printed}: {e}")))?, t);
    }

    #[test]
    fn formulas_round_trip(f in common::formula(8)) {
        let printed = formula_to_string(&f);
        prop_assert_eq!(parse_formula(&printed).map_err(|e| TestCaseError::fail(format!("{printed}: {e}")))?, f);
    }

    #[test]
    fn programs_round_trip(a in common::program(8)) {
        let printed = program_to_string(&a);
        prop_assert_eq!(parse_program(&printed).map_err(|e| TestCaseError::fail(format!("{printed}: {e}")))?, a);
    }

    #[test]
    fn printing_is_idempotent(f in common::formula(6)) {
        let once = formula_to_string(&f);
        prop_assert_eq!(formula_to_string(&parse_formula(&once).unwrap()), once);
    }
}

#[test]
fn bundled_models_round_trip() {
    for name in common::BUNDLED.iter().chain(&["tanh.dlm", "hyperbolic.dlm", "blowup.dlm"]) {
        let m = parse_model(&common::read_model(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let printed = m.to_string();
        assert_eq!(parse_model(&printed).unwrap_or_else(|e| panic!("{name}: {e}\n{printed}")), m, "{name}");
    }
}
