//! End-to-end acceptance run. Prints one line per criterion and exits with a
//! failure status if any criterion fails or exceeds its time budget.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ddef_core::check::{lemma_section, run_checks, run_model, CheckOptions, RunSettings, Status};
use ddef_core::definitions::desugar_implicit;
use ddef_core::definitions::registry::{builtin_registry, builtin_symbol};
use ddef_core::kernel::{instantiate_fi, ExistenceMethod};
use ddef_core::lemmas::{abstract_functions, differential_unfold, family_facts, FactKind};
use ddef_core::oracle::{monitor, Policy, State};
use ddef_core::parse::{CheckItem, Definition};
use ddef_core::print::{formula_to_string, program_to_string, term_to_string, Annotations, PrintOptions, Printer};
use ddef_core::syntax::alpha_equivalent_with;
use ddef_core::{
    parse_formula, parse_model, parse_program, parse_term, Evaluator, ExistenceMode, Formula, Ident,
    InterpretedSymbol, ModelFile, OracleConfig, Program, Term, Truth,
};
use num_rational::Rational64;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn model(name: &str) -> ModelFile {
    parse_model(&common::read_model(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn evaluator(m: &ModelFile) -> Evaluator {
    Evaluator::new(m.registry(ExistenceMode::Sound).expect("registry"), OracleConfig::default())
}

fn squash(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fn state(pairs: &[(&str, f64)]) -> State {
    pairs.iter().map(|(k, v)| (Ident::new(*k), *v)).collect()
}

fn sym(name: &str) -> InterpretedSymbol {
    builtin_symbol(name).unwrap_or_else(|| panic!("no builtin {name}")).clone()
}

/// Drops the placeholder assignments `x:=._0; t:=._1;` from a desugared
/// interpretation, leaving the formula over the output and argument names.
fn strip_placeholders(phi: &Formula) -> Formula {
    fn strip(a: &Program) -> Option<Program> {
        match a {
            Program::Assign(_, Term::Var(v)) if v.is_placeholder() => None,
            Program::Sequence(l, r) => match (strip(l), strip(r)) {
                (Some(l), Some(r)) => Some(l.seq(r)),
                (l, r) => l.or(r),
            },
            other => Some(other.clone()),
        }
    }
    match phi {
        Formula::Diamond(a, post) => Formula::Diamond(Box::new(strip(a).expect("program")), post.clone()),
        other => other.clone(),
    }
}

fn desugaring() -> Outcome {
    let m = model("pendulum.dlm");
    let decl = m
        .definitions
        .iter()
        .find_map(|d| match d {
            Definition::Implicit(decl) => Some(decl.clone()),
            _ => None,
        })
        .ok_or("no implicit declaration")?;
    let symbols = desugar_implicit(&decl).map_err(|e| e.to_string())?;
    let reference = [
        ("sin", "s", "<c:=*; {{s'=-c, c'=s, t'=-1} ++ {s'=c, c'=-s, t'=1}}>(s=0 & c=1 & t=0)"),
        ("cos", "c", "<s:=*; {{s'=-c, c'=s, t'=-1} ++ {s'=c, c'=-s, t'=1}}>(s=0 & c=1 & t=0)"),
    ];
    let text = common::read_model("pendulum.dlm");
    for (name, out, eq) in reference {
        let s = symbols.iter().find(|s| s.name.as_str() == name).ok_or(format!("{name} missing"))?;
        let phi = strip_placeholders(s.interpretation.as_ref().ok_or("no interpretation")?);
        let expected = parse_formula(eq).map_err(|e| e.to_string())?;
        let pairs = [(Ident::new(name), Ident::new(out)), (Ident::new("t"), Ident::new("t"))];
        ensure(alpha_equivalent_with(&phi, &expected, &pairs), || format!("{name}: {phi} is not alpha-equivalent to {eq}"))?;

        let printed = Printer::new(PrintOptions { annotations: Annotations::Full, elide_ode_bodies: true })
            .annotated_symbol(s);
        let listing = text
            .lines()
            .find(|l| l.contains(&format!("{name} ~>")))
            .ok_or(format!("listing has no line for {name}"))?;
        let listing = listing.trim().trim_start_matches("/*").trim_start_matches('*').trim_end_matches("*/");
        let listing = listing.trim().trim_end_matches('*');
        let want = listing.split_once("~>").map(|(_, r)| r).unwrap_or_default();
        ensure(squash(&printed) == squash(want), || format!("{name}: printed {printed}, listing {want}"))?;
    }
    Ok("sin, cos alpha-equivalent and printed as listed".into())
}

fn round_trip() -> Outcome {
    for name in common::BUNDLED {
        let m = model(name);
        let printed = m.to_string();
        let again = parse_model(&printed).map_err(|e| format!("{name}: {e}"))?;
        ensure(again == m, || format!("{name} changed after printing"))?;
    }
    let mut runner = TestRunner::deterministic();
    let terms = common::term(8, true);
    let formulas = common::formula(8);
    let programs = common::program(8);
    for i in 0..500 {
        let (printed, ok) = match i % 3 {
            0 => {
                let t = terms.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
                let p = term_to_string(&t);
                let ok = parse_term(&p).is_ok_and(|u| u == t);
                (p, ok)
            }
            1 => {
                let f = formulas.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
                let p = formula_to_string(&f);
                let ok = parse_formula(&p).is_ok_and(|g| g == f);
                (p, ok)
            }
            _ => {
                let a = programs.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
                let p = program_to_string(&a);
                let ok = parse_program(&p).is_ok_and(|b| b == a);
                (p, ok)
            }
        };
        ensure(ok, || format!("case {i} does not round trip: {printed}"))?;
    }
    Ok(format!("{} models, 500 generated trees", common::BUNDLED.len()))
}

/// Power series with argument reduction, independent of the library.
mod series {
    use std::f64::consts::{LN_2, PI};

    fn reduce(x: f64) -> f64 {
        let k = (x / (2.0 * PI)).round();
        x - k * 2.0 * PI
    }

    pub fn sin(x: f64) -> f64 {
        let r = reduce(x);
        let (mut term, mut sum, mut n) = (r, r, 1.0);
        while term.abs() > 1e-18 {
            term *= -r * r / ((n + 1.0) * (n + 2.0));
            sum += term;
            n += 2.0;
        }
        sum
    }

    pub fn cos(x: f64) -> f64 {
        let r = reduce(x);
        let (mut term, mut sum, mut n) = (1.0f64, 1.0, 0.0);
        while term.abs() > 1e-18 {
            term *= -r * r / ((n + 1.0) * (n + 2.0));
            sum += term;
            n += 2.0;
        }
        sum
    }

    pub fn exp(x: f64) -> f64 {
        let k = (x / LN_2).round();
        let r = x - k * LN_2;
        let (mut term, mut sum, mut n) = (1.0f64, 1.0, 0.0);
        while term.abs() > 1e-18 {
            n += 1.0;
            term *= r / n;
            sum += term;
        }
        sum * 2f64.powi(k as i32)
    }

    pub fn tanh(x: f64) -> f64 {
        let e = exp(-2.0 * x.abs());
        x.signum() * (1.0 - e) / (1.0 + e)
    }
}

fn builtin_accuracy() -> Outcome {
    let ev = Evaluator::new(builtin_registry(), OracleConfig::default());
    let oracles: [(&str, fn(f64) -> f64); 4] =
        [("sin", series::sin), ("cos", series::cos), ("exp", series::exp), ("tanh", series::tanh)];
    let mut worst = 0f64;
    for i in 0..=2000 {
        let x = -10.0 + 20.0 * i as f64 / 2000.0;
        for (name, f) in oracles {
            let got = ev.eval_named(name, x).map_err(|e| format!("{name}({x}): {e}"))?;
            let err = (got - f(x)).abs();
            worst = worst.max(err);
            ensure(err <= 1e-6, || format!("{name}({x}) = {got}, series {}", f(x)))?;
        }
        let (s, c) = (ev.eval_named("sin", x).unwrap(), ev.eval_named("cos", x).unwrap());
        ensure((s * s + c * c - 1.0).abs() <= 1e-8, || format!("sin^2+cos^2 at {x} is {}", s * s + c * c))?;
    }
    Ok(format!("max error {worst:.2e}"))
}

fn generated_lemmas() -> Outcome {
    let hyper = model("hyperbolic.dlm");
    let ev = evaluator(&hyper);
    let (_, facts) = lemma_section(&ev, None);
    for want in ["sin(0)=0", "cos(0)=1", "tanh(0)=0", "exp(0)=1", "sinh(0)=0", "cosh(0)=1"] {
        ensure(facts.iter().any(|f| squash(&f.statement) == want), || format!("no fact {want}"))?;
    }
    let axioms = facts.iter().filter(|f| f.kind == FactKind::DifferentialAxiom.as_str()).count();
    ensure(axioms == 6, || format!("{axioms} differential axioms, expected 6"))?;
    for f in &facts {
        ensure(f.verdict == Status::Pass, || format!("{} {}: {:?} {:?}", f.name, f.statement, f.max_error, f.detail))?;
    }
    Ok(format!("{} facts verified, {axioms} axioms", facts.len()))
}

fn existence_gate() -> Outcome {
    let reg = builtin_registry();
    let method = |name: &str| {
        reg.families()
            .iter()
            .find(|f| f.family.names().iter().any(|n| n.as_str() == name))
            .and_then(|f| f.existence.as_ref().ok())
            .map(|c| c.method())
    };
    ensure(method("sin") == Some(ExistenceMethod::AffineODE), || format!("sin: {:?}", method("sin")))?;
    ensure(method("tanh") == Some(ExistenceMethod::UnivariateBoundedInvariant), || format!("tanh: {:?}", method("tanh")))?;

    let blowup = model("blowup.dlm");
    let sound = blowup.registry(ExistenceMode::Sound).map_err(|e| e.to_string())?;
    let recip = sound.symbol("recip").ok_or("recip not registered")?;
    ensure(sound.families().iter().any(|f| f.existence.is_err()), || "x'=x^2 was certified".into())?;
    ensure(instantiate_fi(&sound, &recip, Term::var("y"), vec![Term::var("x")]).is_err(), || "FI instance without certificate".into())?;
    ensure(
        family_facts(&sound).iter().any(|(n, r)| n == "recip" && r.is_err()),
        || "lemmas generated for a refused family".into(),
    )?;
    let refused = run_model(&blowup, "blowup", &RunSettings::default(), false).map_err(|e| e.to_string())?;
    ensure(refused.status == Status::Fail, || format!("refused model reports {:?}", refused.status))?;

    let assumed = blowup.registry(ExistenceMode::AssumeExistence).map_err(|e| e.to_string())?;
    let recip = assumed.symbol("recip").ok_or("recip not registered")?;
    let fi = instantiate_fi(&assumed, &recip, Term::var("y"), vec![Term::var("x")]).map_err(|e| e.to_string())?;
    ensure(fi.assumed, || "assumed instance not marked".into())?;
    ensure(
        family_facts(&assumed).iter().any(|(n, r)| n == "recip" && r.as_ref().is_ok_and(|fs| fs.iter().all(|f| f.assumed))),
        || "assumed lemmas missing or unmarked".into(),
    )?;
    let settings = RunSettings { assume_existence: true, ..RunSettings::default() };
    let report = run_model(&blowup, "blowup", &settings, false).map_err(|e| e.to_string())?;
    ensure(report.tainted, || "assumed report is not tainted".into())?;
    Ok("sin/cos AffineODE, tanh UnivariateBoundedInvariant, recip refused".into())
}

fn fi_equivalence() -> Outcome {
    let reg = builtin_registry();
    let ev = Evaluator::new(reg.clone(), OracleConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    for name in ["sin", "cos", "exp", "tanh"] {
        let h = sym(name);
        for i in 0..100 {
            let e1 = Rational64::new(rng.gen_range(-5000..=5000), 1000);
            let arg = Term::Const(e1);
            let e0 = if i % 2 == 0 {
                Term::FuncApp(h.clone(), vec![arg.clone()])
            } else {
                let at = ev.eval_function(&h, *e1.numer() as f64 / 1000.0).map_err(|e| e.to_string())?;
                let away = rng.gen_range(100..3000) * if rng.gen_bool(0.5) { 1 } else { -1 };
                Term::Const(Rational64::new((at * 1000.0).round() as i64 + away, 1000))
            };
            let inst = instantiate_fi(&reg, &h, e0.clone(), vec![arg]).map_err(|e| e.to_string())?;
            let Formula::Equiv(lhs, rhs) = &inst.equivalence else { return Err("not an equivalence".into()) };
            let l = ev.eval_formula(&**lhs, &State::new()).map_err(|e| e.to_string())?;
            let r = ev.eval_formula(&**rhs, &State::new()).map_err(|e| e.to_string())?;
            ensure(l == r && l != Truth::Unknown, || format!("{name}: e0={e0}, e1={e1}: {l} vs {r}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} pairs agree"))
}

fn unfolding() -> Outcome {
    let goal = parse_formula("tanh(lambda*x)^2 < 1").map_err(|e| e.to_string())?;
    let (base, step) = differential_unfold(&goal, &Ident::new("x"), &Term::int(0)).map_err(|e| e.to_string())?;
    let (base, step) = (base.statement.as_formula(), step.statement.as_formula());
    let want_base = "tanh(0)^2<1";
    let want_step = "tanh(lambda*v)^2<1 -> [{v'=1 & v<=x}++{v'=-1 & v>=x}]tanh(lambda*v)^2<1";
    ensure(squash(&base.to_string()) == squash(want_base), || format!("base premise {base}"))?;
    ensure(squash(&step.to_string()) == squash(want_step), || format!("step premise {step}"))?;

    let Formula::Implies(hyp, boxed) = &step else { return Err("step is not an implication".into()) };
    let Formula::Boxed(sweep, _) = &**boxed else { return Err("step has no box".into()) };
    let Program::Choice(up, down) = &**sweep else { return Err("sweep is not a choice".into()) };
    let ev = Evaluator::new(builtin_registry(), OracleConfig { horizon: 50.0, ..OracleConfig::default() });
    let policy = Policy { duration: (50.0, 50.0), retries: 1, ..Policy::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut samples, mut unknown) = (0, 0);
    for lambda in [0.5, 1.0, 2.0] {
        for i in 0..=80 {
            let x = -20.0 + 0.5 * i as f64;
            let s = state(&[("lambda", lambda), ("x", x), ("v", 0.0)]);
            let b = ev.eval_formula(&base, &s).map_err(|e| e.to_string())?;
            ensure(b != Truth::False, || format!("base false at lambda={lambda}"))?;
            for branch in [up, down] {
                let trace = ev.run_once(branch, &s, &policy, &mut rng).map_err(|e| e.to_string())?;
                if trace.discarded {
                    continue;
                }
                let report = monitor(&ev, &trace, hyp);
                samples += report.samples;
                unknown += usize::from(report.verdict == Truth::Unknown);
                ensure(report.verdict != Truth::False, || {
                    format!("P(v) false at lambda={lambda}, x={x}, t={:?}", report.first_violation)
                })?;
            }
        }
    }
    Ok(format!("premises as displayed, {samples} samples, {unknown} traces with knife-edge unknowns"))
}

fn abstraction() -> Outcome {
    let neuron = model("neuron.dlm");
    let ball = model("bouncing_ball.dlm");
    let abstract_item = |m: &ModelFile| {
        m.checks.as_ref().and_then(|c| {
            c.items.iter().find_map(|i| match i {
                CheckItem::Abstract { formula, targets, names, bounds, .. } => {
                    Some((formula.clone(), targets.clone(), names.clone(), bounds.clone()))
                }
                _ => None,
            })
        })
    };
    let cases = [
        (&neuron, "t_x^2<1 & t_y^2<1 -> x*(t_x-t_y)+y*(t_x+t_y) <= 2*sqrt(x^2+y^2)"),
        (
            &ball,
            "0<=k & k<=1 -> (((1-k*c^2)*vx+(1+k)*c*vy)/(1+c^2))^2+(((1+k)*c*vx+(c^2-k)*vy)/(1+c^2))^2 <= vx^2+vy^2",
        ),
    ];
    let mut ball_statement = None;
    for (m, want) in cases {
        let (phi, targets, names, bounds) = abstract_item(m).ok_or("no abstract check")?;
        let a = abstract_functions(&phi, &targets, &bounds, &names).map_err(|e| e.to_string())?;
        let got = a.fact.statement.as_formula();
        let want = parse_formula(want).map_err(|e| e.to_string())?;
        ensure(formula_to_string(&got) == formula_to_string(&want), || format!("abstracted {got}, expected {want}"))?;
        let back = a.back_substitute();
        let restored = match &back {
            _ if bounds.is_empty() => back == phi,
            Formula::Implies(hyp, body) => {
                **body == phi && hyp.conjuncts().into_iter().cloned().collect::<Vec<_>>() == bounds
            }
            _ => false,
        };
        ensure(restored, || format!("back-substitution gives {back}, original {phi}"))?;
        if m == &ball {
            ball_statement = Some(got);
        }
    }

    let f = ball_statement.expect("ball case ran");
    let ev = Evaluator::new(builtin_registry(), OracleConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut unknown = 0;
    for _ in 0..100_000 {
        let s = state(&[
            ("k", rng.gen_range(0.0..=1.0)),
            ("c", rng.gen_range(-1.0..=1.0)),
            ("vx", rng.gen_range(-10.0..=10.0)),
            ("vy", rng.gen_range(-10.0..=10.0)),
        ]);
        match ev.eval_formula(&f, &s).map_err(|e| e.to_string())? {
            Truth::False => return Err(format!("violated at {s:?}")),
            Truth::Unknown => unknown += 1,
            Truth::True => {}
        }
    }
    Ok(format!("both statements as displayed, 100000 samples, {unknown} unknown"))
}

fn checks_pass(name: &str, opts: &CheckOptions) -> Outcome {
    let m = model(name);
    let ev = evaluator(&m);
    let reports = run_checks(&ev, &m, opts);
    ensure(!reports.is_empty(), || format!("{name} has no checks"))?;
    let mut parts = Vec::new();
    for r in &reports {
        ensure(r.verdict == Status::Pass, || {
            format!("{} {}: {} failures, {} unknowns, {}", r.kind, r.name, r.failures, r.unknowns, r.detail.clone().unwrap_or_default())
        })?;
        if let Some(res) = r.max_residual {
            ensure(res <= opts.residual_tol, || format!("{}: residual {res:.2e}", r.name))?;
            parts.push(format!("{}={res:.1e}", r.name));
        }
    }
    Ok(format!("{} checks over {} runs {}", reports.len(), opts.runs, parts.join(" ")).trim_end().to_string())
}

fn flight() -> Outcome {
    checks_pass("flight.dlm", &CheckOptions { runs: 1000, residual_tol: 1e-5, ..CheckOptions::default() })
}

fn pendulum() -> Outcome {
    let summary = checks_pass("pendulum.dlm", &CheckOptions { runs: 200, ..CheckOptions::default() })?;
    let m = model("pendulum.dlm");
    let ev = evaluator(&m);
    let ode = ddef_core::check::first_box_program(&m.problem).ok_or("no program")?.odes()[0].clone();
    let inv = parse_term("g/L*(1-cos(theta)) + 1/2*w^2").map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0f64;
    for _ in 0..1000 {
        let (k, w) = (rng.gen_range(0.05..=1.0), rng.gen_range(-10.0..=10.0));
        let s = state(&[
            ("g", rng.gen_range(1.0..=20.0)),
            ("L", rng.gen_range(0.5..=3.0)),
            ("k", k),
            ("w", w),
            ("theta", rng.gen_range(-1.5..=1.5)),
            ("push", 0.0),
        ]);
        let d = ev.lie_derivative_residual(&ode, &inv, &s).map_err(|e| e.to_string())?;
        worst = worst.max((d + k * w * w).abs());
    }
    ensure(worst <= 1e-9, || format!("Lie derivative off by {worst:.2e}"))?;
    Ok(format!("{summary}, Lie derivative within {worst:.1e}"))
}

fn explicit_solution() -> Outcome {
    let ev = Evaluator::new(builtin_registry(), OracleConfig::default());
    let ode = parse_program("{x'=x*(2*t-1), t'=1}").map_err(|e| e.to_string())?;
    let inv = parse_formula("x <= exp(t^2-t)").map_err(|e| e.to_string())?;
    let policy = Policy { duration: (2.0, 2.0), ..Policy::default() };
    let mut worst = 0f64;
    for x0 in [-1.0, 0.0, 0.5, 1.0] {
        let trace = ev.simulate(&ode, &state(&[("x", x0), ("t", 0.0)]), &policy, 11).map_err(|e| e.to_string())?;
        let last = trace.final_state();
        ensure((last["t"] - 2.0).abs() < 1e-9, || format!("stopped at t={}", last["t"]))?;
        for i in 0..trace.samples.len() {
            let s = trace.state_at(i);
            let exact = x0 * (s["t"] * s["t"] - s["t"]).exp();
            let err = (s["x"] - exact).abs();
            let rel = if exact == 0.0 { err } else { err / exact.abs() };
            worst = worst.max(rel);
            ensure(rel <= 1e-6, || format!("x0={x0}, t={}: {} vs {exact}", s["t"], s["x"]))?;
        }
        let report = monitor(&ev, &trace, &inv);
        ensure(report.verdict != Truth::False, || format!("invariant violated for x0={x0} at {:?}", report.first_violation))?;
    }
    Ok(format!("max relative error {worst:.1e}"))
}

fn neuron() -> Outcome {
    checks_pass("neuron.dlm", &CheckOptions { runs: 50, ..CheckOptions::default() })
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let criteria = [
        Criterion { id: 1, title: "desugaring fidelity", budget: s(1), run: desugaring },
        Criterion { id: 2, title: "round trip", budget: s(10), run: round_trip },
        Criterion { id: 3, title: "builtin accuracy", budget: s(5), run: builtin_accuracy },
        Criterion { id: 4, title: "generated lemmas", budget: s(10), run: generated_lemmas },
        Criterion { id: 5, title: "existence gate", budget: s(1), run: existence_gate },
        Criterion { id: 6, title: "FI equivalence", budget: s(10), run: fi_equivalence },
        Criterion { id: 7, title: "differential unfolding", budget: s(10), run: unfolding },
        Criterion { id: 8, title: "abstraction", budget: s(30), run: abstraction },
        Criterion { id: 9, title: "flight invariants", budget: s(60), run: flight },
        Criterion { id: 10, title: "pendulum safety", budget: s(60), run: pendulum },
        Criterion { id: 11, title: "explicit solution", budget: s(5), run: explicit_solution },
        Criterion { id: 12, title: "neuron bound", budget: s(60), run: neuron },
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| filter.is_empty() || filter.contains(&c.id)) {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(c.run).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(_) if took > c.budget => Err(format!("took longer than {:?}", c.budget)),
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += usize::from(outcome.is_err());
        println!("{tag} {:>2} {:<24} {:>8.3}s  {detail}", c.id, c.title, took.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
