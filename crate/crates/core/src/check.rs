//! Validation runs over a model: generated facts checked numerically and
//! the declared checks executed over seeded simulations.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::definitions::{DefinitionError, RegisteredFamily, Registry, SymbolInfo};
use crate::derivative::lie_derivative;
use crate::lemmas::{abstract_functions, family_facts, Fact, FactKind, Statement};
use crate::kernel::ExistenceMode;
use crate::oracle::{combine, monitor, Evaluator, OracleConfig, OracleError, Policy, State, Trace, Truth};
use crate::parse::{CheckItem, ModelFile, Sampling};
use crate::syntax::{Formula, Ident, OdeSystem, Program, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Fail,
    Unknown,
    Pass,
}

impl From<Truth> for Status {
    fn from(t: Truth) -> Status {
        match t {
            Truth::True => Status::Pass,
            Truth::False => Status::Fail,
            Truth::Unknown => Status::Unknown,
        }
    }
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Unknown => "unknown",
        }
    }

    /// Worst status; `Pass` for none.
    pub fn combine(all: impl IntoIterator<Item = Status>) -> Status {
        all.into_iter().min().unwrap_or(Status::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub symbols: Vec<String>,
    pub builtin: bool,
    /// Existence method, when certified.
    pub certificate: Option<String>,
    pub evidence: Option<String>,
    pub error: Option<String>,
    pub assumed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactReport {
    pub name: String,
    pub kind: String,
    pub statement: String,
    pub provenance: String,
    pub assumed: bool,
    pub verdict: Status,
    pub max_error: Option<f64>,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub kind: String,
    pub verdict: Status,
    pub runs: usize,
    pub failures: usize,
    pub unknowns: usize,
    pub max_residual: Option<f64>,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub runs: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub strict_margin: f64,
    pub residual_tol: f64,
    pub horizon: f64,
    pub assume_existence: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: String,
    pub registry: Vec<FamilyReport>,
    pub facts: Vec<FactReport>,
    pub checks: Vec<CheckReport>,
    pub config: ConfigEcho,
    pub tainted: bool,
    pub status: Status,
}

impl RunReport {
    /// Overall status from the parts: fail iff anything failed, unknown iff
    /// nothing failed and something is unknown.
    pub fn assemble(
        model: String,
        registry: Vec<FamilyReport>,
        facts: Vec<FactReport>,
        mut checks: Vec<CheckReport>,
        config: ConfigEcho,
    ) -> RunReport {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let refused = registry.iter().filter(|f| f.error.is_some()).map(|_| Status::Fail);
        let status = Status::combine(
            refused.chain(facts.iter().map(|f| f.verdict)).chain(checks.iter().map(|c| c.verdict)),
        );
        let tainted = registry.iter().any(|f| f.assumed) || facts.iter().any(|f| f.assumed);
        RunReport { model, registry, facts, checks, config, tainted, status }
    }

    /// Line-oriented rendering.
    pub fn to_text(&self) -> String {
        let mut out = format!("model {}\n", self.model);
        for f in &self.registry {
            let cert = match (&f.certificate, &f.error) {
                (Some(c), _) => c.clone(),
                (None, Some(e)) => format!("refused: {e}"),
                (None, None) => "none".into(),
            };
            let taint = if f.assumed { " tainted" } else { "" };
            out.push_str(&format!("family {} {cert}{taint}\n", f.symbols.join(",")));
        }
        for f in &self.facts {
            let err = f.max_error.map(|e| format!(" max_error={e:.3e}")).unwrap_or_default();
            out.push_str(&format!("fact {} {} {} {}{err}\n", f.verdict.as_str(), f.kind, f.name, f.statement));
        }
        for c in &self.checks {
            let res = c.max_residual.map(|e| format!(" max_residual={e:.3e}")).unwrap_or_default();
            out.push_str(&format!(
                "check {} {} {} runs={} failures={} unknowns={}{res}\n",
                c.verdict.as_str(),
                c.kind,
                c.name,
                c.runs,
                c.failures,
                c.unknowns
            ));
            if let Some(d) = &c.detail {
                out.push_str(&format!("  {d}\n"));
            }
        }
        let c = &self.config;
        out.push_str(&format!(
            "config seed={} runs={} abs_tol={:e} rel_tol={:e} strict_margin={:e} residual_tol={:e}\n",
            c.seed, c.runs, c.abs_tol, c.rel_tol, c.strict_margin, c.residual_tol
        ));
        out.push_str(&format!("status {}{}\n", self.status.as_str(), if self.tainted { " tainted" } else { "" }));
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOptions {
    pub runs: usize,
    pub seed: u64,
    pub residual_tol: f64,
    /// Replaces the horizon of every run.
    pub horizon: Option<f64>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { runs: 20, seed: 0, residual_tol: 1e-6, horizon: None }
    }
}

pub fn family_report(family: &RegisteredFamily) -> FamilyReport {
    let (certificate, evidence, error) = match &family.existence {
        Ok(c) => (Some(c.method().as_str().to_string()), Some(c.describe()), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    FamilyReport {
        symbols: family.symbols.iter().map(|s| s.name.to_string()).collect(),
        builtin: family.builtin,
        certificate,
        evidence,
        error,
        assumed: family.is_assumed(),
    }
}

/// Function names applied anywhere in the model.
fn used_functions(model: &ModelFile) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    let mut visit = |t: &Term| {
        t.visit(&mut |s| {
            if let Term::FuncApp(sym, _) = s {
                out.insert(sym.name.clone());
            }
        })
    };
    model.problem.for_each_term(&mut visit);
    if let Some(checks) = &model.checks {
        for item in &checks.items {
            item_terms(item, &mut visit);
        }
    }
    out
}

fn item_terms(item: &CheckItem, f: &mut impl FnMut(&Term)) {
    match item {
        CheckItem::Sample { sampling: Sampling::Range(a, b), .. }
        | CheckItem::Choose { lo: a, hi: b, .. }
        | CheckItem::Duration { lo: a, hi: b }
        | CheckItem::Lie { term: a, expected: b, .. } => {
            f(a);
            f(b);
        }
        CheckItem::Sample { sampling: Sampling::OneOf(vs), .. } => vs.iter().for_each(f),
        CheckItem::Let { value: e, .. } | CheckItem::Horizon(e) | CheckItem::Residual { term: e, .. } => f(e),
        CheckItem::Simulate(a) => a.for_each_term(f),
        CheckItem::Invariant { formula, .. } | CheckItem::Identity { formula, .. } => formula.for_each_term(f),
        CheckItem::Abstract { formula, targets, bounds, .. } => {
            formula.for_each_term(f);
            targets.iter().for_each(&mut *f);
            bounds.iter().for_each(|b| b.for_each_term(f));
        }
        CheckItem::Loops { .. } => {}
    }
}

/// The families a model relies on: its own declarations and the builtins it
/// applies.
pub fn relevant_families(model: &ModelFile, registry: &Registry) -> Vec<String> {
    let used = used_functions(model);
    let declared: BTreeSet<Ident> = model.implicit_decls().flat_map(|d| d.names.iter().cloned()).collect();
    registry
        .families()
        .iter()
        .filter(|f| f.family.names().iter().any(|n| used.contains(n) || declared.contains(n)))
        .map(|f| f.family.names().iter().map(Ident::as_str).collect::<Vec<_>>().join(","))
        .collect()
}

/// Grid of the differential-axiom check.
pub const AXIOM_POINTS: usize = 100;
pub const AXIOM_RANGE: (f64, f64) = (-5.0, 5.0);
pub const AXIOM_STEP: f64 = 1e-4;
pub const AXIOM_TOL: f64 = 1e-5;
pub const INITIAL_TOL: f64 = 1e-9;

/// Numerically validates an initial-value fact or differential axiom.
pub fn validate_fact(ev: &Evaluator, fact: &Fact) -> FactReport {
    let outcome = match (fact.kind, &fact.statement) {
        (FactKind::InitialValue, Statement::Equation(lhs, rhs)) => (|| {
            let d = (ev.eval_term(lhs, &State::new())? - ev.eval_term(rhs, &State::new())?).abs();
            Ok::<_, OracleError>((Truth::from_bool(d <= INITIAL_TOL), d))
        })(),
        (FactKind::DifferentialAxiom, Statement::Equation(Term::Differential(app), rhs)) => {
            check_axiom(ev, app, rhs)
        }
        _ => Ok((Truth::Unknown, f64::NAN)),
    };
    let (verdict, max_error, detail) = match outcome {
        Ok((v, d)) => (v, d.is_finite().then_some(d), None),
        Err(e) => (Truth::Unknown, None, Some(e.to_string())),
    };
    FactReport {
        name: fact.name.clone(),
        kind: fact.kind.as_str().to_string(),
        statement: fact.statement.to_short_string(),
        provenance: fact.provenance.clone(),
        assumed: fact.assumed,
        verdict: verdict.into(),
        max_error,
        detail,
    }
}

/// Central differences of `h(e)` against the axiom's right-hand side with
/// `(e)' = 1`.
fn check_axiom(ev: &Evaluator, app: &Term, rhs: &Term) -> Result<(Truth, f64), OracleError> {
    let Term::FuncApp(_, args) = app else { return Ok((Truth::Unknown, f64::NAN)) };
    let Term::Var(e) = &args[0] else { return Ok((Truth::Unknown, f64::NAN)) };
    let rhs = rhs.replace(&Term::Var(e.clone()).differential(), &Term::int(1));
    let (lo, hi) = AXIOM_RANGE;
    let mut worst: f64 = 0.0;
    for i in 0..AXIOM_POINTS {
        let t = lo + (hi - lo) * i as f64 / (AXIOM_POINTS - 1) as f64;
        let at = |x: f64| -> State { [(e.clone(), x)].into_iter().collect() };
        let fd = (ev.eval_term(app, &at(t + AXIOM_STEP))? - ev.eval_term(app, &at(t - AXIOM_STEP))?) / (2.0 * AXIOM_STEP);
        worst = worst.max((fd - ev.eval_term(&rhs, &at(t))?).abs());
    }
    Ok((Truth::from_bool(worst <= AXIOM_TOL), worst))
}

/// Registry summary and validated facts for the given families (all when
/// `only` is `None`).
pub fn lemma_section(ev: &Evaluator, only: Option<&[String]>) -> (Vec<FamilyReport>, Vec<FactReport>) {
    let registry = ev.registry();
    let wanted = |name: &str| only.is_none_or(|o| o.iter().any(|n| n == name));
    let families: Vec<FamilyReport> = registry
        .families()
        .iter()
        .filter(|f| wanted(&f.family.names().iter().map(Ident::as_str).collect::<Vec<_>>().join(",")))
        .map(|f| family_report(f))
        .collect();
    let mut facts = Vec::new();
    for (name, generated) in family_facts(registry) {
        if !wanted(&name) {
            continue;
        }
        if let Ok(list) = generated {
            facts.extend(list.iter().map(|f| validate_fact(ev, f)));
        }
    }
    (families, facts)
}

/// The program of the first box modality in `f`.
pub fn first_box_program(f: &Formula) -> Option<&Program> {
    match f {
        Formula::Boxed(a, _) => Some(a),
        Formula::Diamond(_, p) | Formula::Not(p) | Formula::Forall(_, p) | Formula::Exists(_, p) => first_box_program(p),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Equiv(a, b) => {
            first_box_program(a).or_else(|| first_box_program(b))
        }
        _ => None,
    }
}

/// Hypotheses of `pre -> [α]post`. Sampled initial states on which they are
/// definitely false are redrawn.
fn precondition(f: &Formula) -> Option<&Formula> {
    match f {
        Formula::Implies(pre, _) if pre.is_first_order_free() => Some(pre),
        Formula::Forall(_, p) => precondition(p),
        _ => None,
    }
}

struct Setup {
    state: State,
    policy: Policy,
}

fn draw(ev: &Evaluator, rng: &mut ChaCha8Rng, s: &State, sampling: &Sampling) -> Result<f64, OracleError> {
    Ok(match sampling {
        Sampling::Range(lo, hi) => {
            let (a, b) = (ev.eval_term(lo, s)?, ev.eval_term(hi, s)?);
            if b > a {
                rng.gen_range(a..=b)
            } else {
                a
            }
        }
        Sampling::OneOf(vs) => ev.eval_term(&vs[rng.gen_range(0..vs.len())], s)?,
    })
}

fn setup(ev: &Evaluator, model: &ModelFile, items: &[CheckItem], rng: &mut ChaCha8Rng) -> Result<Setup, OracleError> {
    let mut state = State::new();
    for x in model.constants().into_iter().chain(model.program_variables.iter().cloned()) {
        state.insert(x, 0.0);
    }
    let mut policy = Policy::default();
    for item in items {
        match item {
            CheckItem::Sample { var, sampling } => {
                let v = draw(ev, rng, &state, sampling)?;
                state.insert(var.clone(), v);
            }
            CheckItem::Let { var, value } => {
                let v = ev.eval_term(value, &state)?;
                state.insert(var.clone(), v);
            }
            CheckItem::Choose { var, lo, hi } => {
                policy.assign_any.insert(var.clone(), (ev.eval_term(lo, &state)?, ev.eval_term(hi, &state)?));
            }
            CheckItem::Loops { lo, hi } => policy.loops = (*lo, *hi),
            CheckItem::Duration { lo, hi } => policy.duration = (ev.eval_term(lo, &state)?, ev.eval_term(hi, &state)?),
            CheckItem::Horizon(e) => policy.horizon = Some(ev.eval_term(e, &state)?),
            _ => {}
        }
    }
    Ok(Setup { state, policy })
}

const SETUP_ATTEMPTS: usize = 1000;

/// Per-run outcome of one check: verdict and the residual it measured.
type Outcome = Result<(Truth, Option<f64>), OracleError>;

struct Tally {
    name: String,
    kind: &'static str,
    verdicts: Vec<Truth>,
    max_residual: Option<f64>,
    detail: Option<String>,
}

impl Tally {
    fn record(&mut self, outcome: Outcome) {
        match outcome {
            Ok((v, r)) => {
                self.verdicts.push(v);
                if let Some(r) = r {
                    self.max_residual = Some(self.max_residual.map_or(r, |m| m.max(r)));
                }
            }
            Err(e) => {
                self.verdicts.push(Truth::Unknown);
                self.detail.get_or_insert_with(|| e.to_string());
            }
        }
    }

    fn report(self) -> CheckReport {
        CheckReport {
            verdict: combine(self.verdicts.iter().copied()).into(),
            runs: self.verdicts.len(),
            failures: self.verdicts.iter().filter(|v| **v == Truth::False).count(),
            unknowns: self.verdicts.iter().filter(|v| **v == Truth::Unknown).count(),
            name: self.name,
            kind: self.kind.to_string(),
            max_residual: self.max_residual,
            detail: self.detail,
        }
    }
}

fn kind_of(item: &CheckItem) -> &'static str {
    match item {
        CheckItem::Invariant { .. } => "invariant",
        CheckItem::Residual { .. } => "residual",
        CheckItem::Lie { .. } => "lie",
        CheckItem::Identity { .. } => "identity",
        CheckItem::Abstract { .. } => "abstract",
        _ => "setup",
    }
}

fn lie_outcome(ev: &Evaluator, ode: Option<&OdeSystem>, term: &Term, expected: &Term, trace: &Trace) -> Outcome {
    let ode = ode.ok_or_else(|| OracleError::UnsupportedProgram(Program::Test(Formula::True)))?;
    let d = lie_derivative(ev.registry(), ode, term)?;
    let mut worst: f64 = 0.0;
    let mut verdict = Truth::True;
    for i in 0..trace.samples.len() {
        let s = trace.state_at(i);
        let want = ev.eval_term(expected, &s)?;
        let r = (ev.eval_term(&d, &s)? - want).abs();
        worst = worst.max(r);
        if r > ev.config().abs_tol * 1f64.max(want.abs()) {
            verdict = Truth::False;
        }
    }
    Ok((verdict, Some(worst)))
}

/// Runs the model's `Checks` block. Returns no reports for a model without
/// one.
pub fn run_checks(ev: &Evaluator, model: &ModelFile, opts: &CheckOptions) -> Vec<CheckReport> {
    let Some(checks) = &model.checks else { return Vec::new() };
    let items = &checks.items;
    let program = items
        .iter()
        .find_map(|i| match i {
            CheckItem::Simulate(a) => Some(a),
            _ => None,
        })
        .or_else(|| first_box_program(&model.problem));
    let ode = program.and_then(|a| a.odes().into_iter().next());
    let pre = precondition(&model.problem);
    let mut tallies: Vec<(usize, Tally)> = items
        .iter()
        .enumerate()
        .filter_map(|(i, item)| {
            item.name().map(|n| {
                (i, Tally { name: n.to_string(), kind: kind_of(item), verdicts: Vec::new(), max_residual: None, detail: None })
            })
        })
        .collect();
    // back-substitution is syntactic and independent of the runs
    let mut abstractions = Vec::new();
    for (i, tally) in tallies.iter_mut() {
        if let CheckItem::Abstract { formula, targets, names, bounds, .. } = &items[*i] {
            match abstract_functions(formula, targets, bounds, names) {
                Ok(a) => {
                    let original = if bounds.is_empty() {
                        formula.clone()
                    } else {
                        let mut parts = bounds.clone();
                        let last = parts.pop().expect("nonempty");
                        parts.into_iter().rev().fold(last, |acc, p| p.and(acc)).implies(formula.clone())
                    };
                    if a.back_substitute() != original {
                        tally.verdicts.push(Truth::False);
                        tally.detail = Some("back-substitution does not reproduce the original".into());
                    } else {
                        tally.detail = Some(a.fact.statement.to_short_string());
                    }
                    abstractions.push((*i, Some(a)));
                }
                Err(e) => {
                    tally.verdicts.push(Truth::False);
                    tally.detail = Some(e.to_string());
                    abstractions.push((*i, None));
                }
            }
        }
    }
    for run in 0..opts.runs {
        let seed = opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(run as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut chosen = None;
        let mut failure = None;
        for _ in 0..SETUP_ATTEMPTS {
            match setup(ev, model, items, &mut rng) {
                Ok(mut s) => {
                    if let Some(h) = opts.horizon {
                        s.policy.horizon = Some(h);
                    }
                    let ok = match pre {
                        Some(p) => ev.eval_formula(p, &s.state).map(|v| v != Truth::False).unwrap_or(false),
                        None => true,
                    };
                    if ok {
                        chosen = Some(s);
                        break;
                    }
                }
                Err(e) => failure = Some(e),
            }
        }
        let Some(setup) = chosen else {
            let e = failure.unwrap_or(OracleError::PolicyExhausted(SETUP_ATTEMPTS));
            for (_, t) in tallies.iter_mut() {
                t.record(Err(e.clone()));
            }
            continue;
        };
        let trace = match program {
            Some(a) => ev.simulate(a, &setup.state, &setup.policy, rng.gen()),
            None => Err(OracleError::UnsupportedFormula(model.problem.clone())),
        };
        for (i, tally) in tallies.iter_mut() {
            let outcome: Outcome = match (&items[*i], &trace) {
                (CheckItem::Identity { formula, .. }, _) => ev.eval_formula(formula, &setup.state).map(|v| (v, None)),
                (CheckItem::Abstract { targets, .. }, _) => {
                    match abstractions.iter().find(|(j, _)| j == i).and_then(|(_, a)| a.as_ref()) {
                        Some(a) => (|| {
                            let mut s = setup.state.clone();
                            for ((x, app), _) in a.replacements.iter().zip(targets) {
                                if !s.contains_key(x) {
                                    let v = ev.eval_term(app, &setup.state)?;
                                    s.insert(x.clone(), v);
                                }
                            }
                            Ok((ev.eval_formula(&a.fact.statement.as_formula(), &s)?, None))
                        })(),
                        None => continue,
                    }
                }
                (CheckItem::Residual { term, .. }, _) if program.is_none() => ev
                    .eval_term(term, &setup.state)
                    .map(|r| (Truth::from_bool(r.abs() <= opts.residual_tol), Some(r.abs()))),
                (_, Err(e)) => Err(e.clone()),
                (CheckItem::Invariant { formula, .. }, Ok(tr)) => Ok((monitor(ev, tr, formula).verdict, None)),
                (CheckItem::Residual { term, .. }, Ok(tr)) => {
                    ev.max_abs(tr, term).map(|r| (Truth::from_bool(r <= opts.residual_tol), Some(r)))
                }
                (CheckItem::Lie { term, expected, .. }, Ok(tr)) => lie_outcome(ev, ode, term, expected, tr),
                _ => continue,
            };
            tally.record(outcome);
        }
    }
    tallies.into_iter().map(|(_, t)| t.report()).collect()
}

/// Which registered family a symbol name belongs to, as a display string.
pub fn family_of(registry: &Registry, name: &str) -> Option<String> {
    match registry.get(name)? {
        SymbolInfo::Family { family, .. } => {
            Some(family.family.names().iter().map(Ident::as_str).collect::<Vec<_>>().join(","))
        }
        SymbolInfo::Numeric(_) => None,
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunSettings {
    pub check: CheckOptions,
    pub oracle: OracleConfig,
    pub assume_existence: bool,
}

/// Lemma validation for the families the model uses, followed by its checks
/// when `with_checks` is set.
pub fn run_model(
    model: &ModelFile,
    name: &str,
    settings: &RunSettings,
    with_checks: bool,
) -> Result<RunReport, DefinitionError> {
    let mode = if settings.assume_existence { ExistenceMode::AssumeExistence } else { ExistenceMode::Sound };
    let ev = Evaluator::new(model.registry(mode)?, settings.oracle.clone());
    let relevant = relevant_families(model, ev.registry());
    let (registry, facts) = lemma_section(&ev, Some(&relevant));
    let checks = if with_checks { run_checks(&ev, model, &settings.check) } else { Vec::new() };
    let o = &settings.oracle;
    let config = ConfigEcho {
        seed: settings.check.seed,
        runs: if with_checks { settings.check.runs } else { 0 },
        abs_tol: o.abs_tol,
        rel_tol: o.rel_tol,
        strict_margin: o.strict_margin,
        residual_tol: settings.check.residual_tol,
        horizon: settings.check.horizon.unwrap_or(o.horizon),
        assume_existence: settings.assume_existence,
    };
    let mut report = RunReport::assemble(name.to_string(), registry, facts, checks, config);
    report.tainted |= ev.tainted();
    Ok(report)
}
