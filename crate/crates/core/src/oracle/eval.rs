use std::cell::{Cell, RefCell};
use std::collections::HashMap;

use super::integrate::{Stepper, System, Tolerances};
use super::{OracleConfig, OracleError, State, Truth};
use crate::definitions::registry::NumericBuiltin;
use crate::definitions::{match_graph, DefinedFamily, Registry, SymbolInfo};
use crate::derivative::lie_derivative;
use crate::syntax::{CompareOp, Formula, Ident, InterpretedSymbol, OdeSystem, Term};

/// A term with variables resolved to slots and functions to callees.
#[derive(Clone, Debug)]
pub(crate) enum Code {
    Const(f64),
    Slot(usize),
    Add(Box<Code>, Box<Code>),
    Sub(Box<Code>, Box<Code>),
    Mul(Box<Code>, Box<Code>),
    Div(Box<Code>, Box<Code>),
    Pow(Box<Code>, i32),
    Neg(Box<Code>),
    Call(Callee, Box<Code>),
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Callee {
    Member { family: usize, index: usize },
    Sqrt,
    /// Refused existence in zero-fallback mode.
    Zero,
}

/// Integration state of one direction away from the initial time.
#[derive(Default)]
struct Sweep {
    /// `(distance from the initial time, state, next step size)`
    points: Vec<(f64, Vec<f64>, f64)>,
    failure: Option<(f64, OracleError)>,
}

struct FamilySolver {
    rhs: Vec<Code>,
    t0: f64,
    forward: Sweep,
    backward: Sweep,
}

/// `dy/ds = sign * f(y, t0 + sign * s)`: the defining ODE forward
/// (`sign = 1`) or its time reversal.
struct Branch<'a> {
    ev: &'a Evaluator,
    rhs: &'a [Code],
    t0: f64,
    sign: f64,
}

impl System for Branch<'_> {
    fn dim(&self) -> usize {
        self.rhs.len()
    }

    fn eval(&self, s: f64, y: &[f64], dy: &mut [f64]) -> Result<(), OracleError> {
        let mut slots = y.to_vec();
        slots.push(self.t0 + self.sign * s);
        for (d, f) in dy.iter_mut().zip(self.rhs) {
            *d = self.sign * self.ev.run(f, &slots)?;
        }
        Ok(())
    }
}

/// Numeric evaluation against a registry. Function values are cached for
/// the lifetime of the evaluator.
pub struct Evaluator {
    registry: Registry,
    cfg: OracleConfig,
    solvers: RefCell<Vec<FamilySolver>>,
    index: RefCell<HashMap<DefinedFamily, usize>>,
    memo: RefCell<HashMap<(usize, u64), Vec<f64>>>,
    tainted: Cell<bool>,
}

impl Evaluator {
    pub fn new(registry: Registry, cfg: OracleConfig) -> Self {
        Evaluator {
            registry,
            cfg,
            solvers: RefCell::new(Vec::new()),
            index: RefCell::new(HashMap::new()),
            memo: RefCell::new(HashMap::new()),
            tainted: Cell::new(false),
        }
    }

    pub fn config(&self) -> &OracleConfig {
        &self.cfg
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    /// Whether some value so far came from the zero fallback.
    pub fn tainted(&self) -> bool {
        self.tainted.get()
    }

    fn family_tolerances(&self) -> Tolerances {
        Tolerances { abs: 1e-13, rel: 1e-13, max_step: self.cfg.max_step }
    }

    fn solver_id(&self, family: &DefinedFamily) -> Result<usize, OracleError> {
        if let Some(&id) = self.index.borrow().get(family) {
            return Ok(id);
        }
        let n = family.len();
        let mut slot = |x: &Ident| {
            family.index_of(x.as_str()).or_else(|| (x == family.time_var()).then_some(n))
        };
        let rhs = family.rhs().iter().map(|f| self.compile_with(f, &mut slot)).collect::<Result<Vec<_>, _>>()?;
        let to_f64 = |r: num_rational::Rational64| *r.numer() as f64 / *r.denom() as f64;
        let y0: Vec<f64> = family.init_values_exact().into_iter().map(to_f64).collect();
        let t0 = to_f64(family.init_time_exact());
        let mut solvers = self.solvers.borrow_mut();
        let id = solvers.len();
        let start = |h: f64| Sweep { points: vec![(0.0, y0.clone(), h)], failure: None };
        solvers.push(FamilySolver {
            rhs,
            t0,
            forward: start(0.0),
            backward: start(0.0),
        });
        self.index.borrow_mut().insert(family.clone(), id);
        Ok(id)
    }

    /// All coordinates of the family solution at time `t`.
    fn family_state(&self, id: usize, t: f64) -> Result<Vec<f64>, OracleError> {
        if let Some(v) = self.memo.borrow().get(&(id, t.to_bits())) {
            return Ok(v.clone());
        }
        let tol = self.family_tolerances();
        let mut solvers = self.solvers.borrow_mut();
        let solver = &mut solvers[id];
        let forward = t >= solver.t0;
        let s = (t - solver.t0).abs();
        let (sweep, sign) = if forward { (&mut solver.forward, 1.0) } else { (&mut solver.backward, -1.0) };
        let sys = Branch { ev: self, rhs: &solver.rhs, t0: solver.t0, sign };
        // extend the sweep with natural (unclipped) steps so that the
        // checkpoints do not depend on the order of requests
        while sweep.points.last().expect("initial point").0 < s {
            if let Some((at, e)) = &sweep.failure {
                if s >= *at {
                    return Err(e.clone());
                }
                break;
            }
            let (s0, y0, h0) = sweep.points.last().expect("initial point").clone();
            let h0 = (h0 > 0.0).then_some(h0);
            let taken = Stepper::new(&sys, s0, y0, true, tol, h0).and_then(|mut st| {
                st.step(None)?;
                Ok((st.t, st.y, st.h))
            });
            match taken {
                Ok(p) => sweep.points.push(p),
                Err(e) => {
                    let at = match e {
                        OracleError::BlowUp { t } | OracleError::StepUnderflow { t } => t,
                        _ => s0,
                    };
                    sweep.failure = Some((at.max(s0), e.clone()));
                    if s >= at.max(s0) {
                        return Err(e);
                    }
                }
            }
        }
        let k = sweep.points.partition_point(|p| p.0 <= s) - 1;
        let (sk, yk, hk) = sweep.points[k].clone();
        let y = if sk == s {
            yk
        } else {
            let mut st = Stepper::new(&sys, sk, yk, true, tol, (hk > 0.0).then_some(hk))?;
            while st.t < s {
                st.step(Some(s))?;
            }
            st.y
        };
        drop(solvers);
        let mut memo = self.memo.borrow_mut();
        if memo.len() > 1 << 20 {
            memo.clear();
        }
        memo.insert((id, t.to_bits()), y.clone());
        Ok(y)
    }

    fn resolve(&self, symbol: &InterpretedSymbol) -> Result<Callee, OracleError> {
        let unknown = |why: &str| OracleError::UnknownFunction(symbol.name.clone(), why.to_string());
        match self.registry.resolve(symbol) {
            Some(SymbolInfo::Numeric(NumericBuiltin::Sqrt)) => Ok(Callee::Sqrt),
            Some(SymbolInfo::Numeric(NumericBuiltin::Pi)) => Err(unknown("pi takes no argument")),
            Some(SymbolInfo::Family { family, index }) => match &family.existence {
                Ok(_) => Ok(Callee::Member { family: self.solver_id(&family.family)?, index }),
                Err(_) if self.cfg.zero_fallback => Ok(Callee::Zero),
                Err(e) => Err(unknown(&e.to_string())),
            },
            None => Err(unknown("not a differentially-defined function")),
        }
    }

    pub(crate) fn compile_with(
        &self,
        e: &Term,
        slot: &mut dyn FnMut(&Ident) -> Option<usize>,
    ) -> Result<Code, OracleError> {
        let bin = |a: Code, b: Code| (Box::new(a), Box::new(b));
        Ok(match e {
            Term::Var(x) => Code::Slot(slot(x).ok_or_else(|| OracleError::UnboundVariable(x.clone()))?),
            Term::Const(c) => Code::Const(*c.numer() as f64 / *c.denom() as f64),
            Term::Plus(a, b) => {
                let (a, b) = bin(self.compile_with(a, slot)?, self.compile_with(b, slot)?);
                Code::Add(a, b)
            }
            Term::Minus(a, b) => {
                let (a, b) = bin(self.compile_with(a, slot)?, self.compile_with(b, slot)?);
                Code::Sub(a, b)
            }
            Term::Times(a, b) => {
                let (a, b) = bin(self.compile_with(a, slot)?, self.compile_with(b, slot)?);
                Code::Mul(a, b)
            }
            Term::Divide(a, b) => {
                let (a, b) = bin(self.compile_with(a, slot)?, self.compile_with(b, slot)?);
                Code::Div(a, b)
            }
            Term::Power(a, n) => Code::Pow(Box::new(self.compile_with(a, slot)?), *n as i32),
            Term::Negate(a) => Code::Neg(Box::new(self.compile_with(a, slot)?)),
            Term::Differential(_) => {
                return Err(OracleError::UnknownFunction(Ident::new("'"), format!("differential {e} has no value")))
            }
            Term::FuncApp(s, args) => {
                if NumericBuiltin::of(s) == Some(NumericBuiltin::Pi) {
                    return Ok(Code::Const(std::f64::consts::PI));
                }
                if args.len() != 1 {
                    return Err(OracleError::UnknownFunction(s.name.clone(), "only unary functions evaluate".into()));
                }
                let callee = self.resolve(s)?;
                Code::Call(callee, Box::new(self.compile_with(&args[0], slot)?))
            }
        })
    }

    pub(crate) fn compile(&self, e: &Term, vars: &State) -> Result<Code, OracleError> {
        self.compile_with(e, &mut |x| vars.get_index_of(x))
    }

    pub(crate) fn run(&self, code: &Code, slots: &[f64]) -> Result<f64, OracleError> {
        Ok(match code {
            Code::Const(c) => *c,
            Code::Slot(i) => slots[*i],
            Code::Add(a, b) => self.run(a, slots)? + self.run(b, slots)?,
            Code::Sub(a, b) => self.run(a, slots)? - self.run(b, slots)?,
            Code::Mul(a, b) => self.run(a, slots)? * self.run(b, slots)?,
            Code::Div(a, b) => {
                let den = self.run(b, slots)?;
                if den.abs() <= self.cfg.strict_margin {
                    return Err(OracleError::DivisionByZero);
                }
                self.run(a, slots)? / den
            }
            Code::Pow(a, n) => self.run(a, slots)?.powi(*n),
            Code::Neg(a) => -self.run(a, slots)?,
            Code::Call(callee, arg) => {
                let x = self.run(arg, slots)?;
                match *callee {
                    Callee::Member { family, index } => self.family_state(family, x)?[index],
                    Callee::Sqrt if x >= 0.0 => x.sqrt(),
                    Callee::Sqrt if x >= -self.cfg.strict_margin => 0.0,
                    Callee::Sqrt => return Err(OracleError::Domain),
                    Callee::Zero => {
                        self.tainted.set(true);
                        0.0
                    }
                }
            }
        })
    }

    /// The value of a unary function symbol at `t`.
    pub fn eval_function(&self, symbol: &InterpretedSymbol, t: f64) -> Result<f64, OracleError> {
        match self.resolve(symbol)? {
            Callee::Member { family, index } => Ok(self.family_state(family, t)?[index]),
            Callee::Sqrt if t >= 0.0 => Ok(t.sqrt()),
            Callee::Sqrt => Err(OracleError::Domain),
            Callee::Zero => {
                self.tainted.set(true);
                Ok(0.0)
            }
        }
    }

    /// The value of the registered function called `name` at `t`.
    pub fn eval_named(&self, name: &str, t: f64) -> Result<f64, OracleError> {
        let symbol = self
            .registry
            .symbol(name)
            .ok_or_else(|| OracleError::UnknownFunction(Ident::new(name), "not registered".into()))?;
        self.eval_function(&symbol, t)
    }

    pub fn eval_term(&self, e: &Term, state: &State) -> Result<f64, OracleError> {
        let code = self.compile(e, state)?;
        let slots: Vec<f64> = state.values().copied().collect();
        self.run(&code, &slots)
    }

    /// Compares two values. A difference within the (magnitude-scaled) strict
    /// margin is unknown, a zero difference included: it may be rounding.
    pub fn compare(&self, op: CompareOp, a: f64, b: f64) -> Truth {
        let d = a - b;
        if d.is_nan() {
            return Truth::Unknown;
        }
        if d.abs() <= self.cfg.strict_margin * 1f64.max(a.abs()).max(b.abs()) {
            return Truth::Unknown;
        }
        Truth::from_bool(match op {
            CompareOp::Eq => false,
            CompareOp::Ne => true,
            CompareOp::Lt | CompareOp::Le => d < 0.0,
            CompareOp::Gt | CompareOp::Ge => d > 0.0,
        })
    }

    pub fn eval_formula(&self, f: &Formula, state: &State) -> Result<Truth, OracleError> {
        Ok(match f {
            Formula::True => Truth::True,
            Formula::False => Truth::False,
            Formula::Compare(op, a, b) => {
                let (x, y) = (self.eval_term(a, state)?, self.eval_term(b, state)?);
                // function values carry integration error, plain arithmetic on
                // the state only rounding
                if x == y && (a == b || !(a.has_func_app() || b.has_func_app())) {
                    Truth::from_bool(matches!(op, CompareOp::Eq | CompareOp::Le | CompareOp::Ge))
                } else {
                    self.compare(*op, x, y)
                }
            }
            Formula::Not(p) => self.eval_formula(p, state)?.not(),
            Formula::And(a, b) => self.eval_formula(a, state)?.and(self.eval_formula(b, state)?),
            Formula::Or(a, b) => self.eval_formula(a, state)?.or(self.eval_formula(b, state)?),
            Formula::Implies(a, b) => self.eval_formula(a, state)?.implies(self.eval_formula(b, state)?),
            Formula::Equiv(a, b) => {
                let (x, y) = (self.eval_formula(a, state)?, self.eval_formula(b, state)?);
                if x == Truth::Unknown || y == Truth::Unknown {
                    Truth::Unknown
                } else {
                    Truth::from_bool(x == y)
                }
            }
            Formula::Diamond(..) => self.graph_membership(f, state)?,
            Formula::Boxed(..) | Formula::Forall(..) | Formula::Exists(..) => {
                return Err(OracleError::UnsupportedFormula(f.clone()))
            }
        })
    }

    /// A differential-definition diamond holds iff the output equals the
    /// solution coordinate at the input time.
    fn graph_membership(&self, f: &Formula, state: &State) -> Result<Truth, OracleError> {
        let m = match_graph(f).ok_or_else(|| OracleError::UnsupportedFormula(f.clone()))?;
        let x0 = self.eval_term(&m.output, state)?;
        let t = self.eval_term(&m.input, state)?;
        let id = self.solver_id(&m.family)?;
        let phi = match self.family_state(id, t) {
            Ok(y) => y[m.index],
            // no solution reaches t
            Err(OracleError::BlowUp { .. } | OracleError::StepUnderflow { .. }) => return Ok(Truth::False),
            Err(e) => return Err(e),
        };
        let d = (x0 - phi).abs();
        Ok(if d <= self.cfg.abs_tol {
            Truth::True
        } else if d <= self.cfg.strict_margin * 1f64.max(phi.abs()) {
            Truth::Unknown
        } else {
            Truth::False
        })
    }

    /// The Lie derivative of `j` along `ode` evaluated at `state`.
    pub fn lie_derivative_residual(&self, ode: &OdeSystem, j: &Term, state: &State) -> Result<f64, OracleError> {
        let d = lie_derivative(&self.registry, ode, j)?;
        self.eval_term(&d, state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::definitions::builtin_registry;
    use crate::parse::{parse_formula, parse_term};

    fn ev() -> Evaluator {
        Evaluator::new(builtin_registry(), OracleConfig::default())
    }

    fn state(pairs: &[(&str, f64)]) -> State {
        pairs.iter().map(|(k, v)| (Ident::new(*k), *v)).collect()
    }

    #[test]
    fn initial_values_are_exact() {
        let e = ev();
        assert_eq!(e.eval_named("sin", 0.0).unwrap(), 0.0);
        assert_eq!(e.eval_named("cos", 0.0).unwrap(), 1.0);
    }

    #[test]
    fn exp_at_one() {
        let e = ev();
        assert!((e.eval_named("exp", 1.0).unwrap() - std::f64::consts::E).abs() < 1e-9);
        assert!((e.eval_named("exp", -1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn sin_at_half_pi() {
        let e = ev();
        assert!((e.eval_named("sin", std::f64::consts::FRAC_PI_2).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn order_of_requests_does_not_matter() {
        let (a, b) = (ev(), ev());
        let x = a.eval_named("tanh", 3.3).unwrap();
        b.eval_named("tanh", 7.0).unwrap();
        b.eval_named("tanh", 1.0).unwrap();
        assert_eq!(x.to_bits(), b.eval_named("tanh", 3.3).unwrap().to_bits());
    }

    #[test]
    fn pythagoras() {
        let e = ev();
        let v = e.eval_term(&parse_term("sin(t)^2+cos(t)^2").unwrap(), &state(&[("t", 1.3)])).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn division_by_zero() {
        let e = ev();
        assert_eq!(e.eval_term(&parse_term("1/x").unwrap(), &state(&[("x", 0.0)])), Err(OracleError::DivisionByZero));
    }

    #[test]
    fn three_valued_comparisons() {
        let e = ev();
        let s = state(&[("x", 2.0), ("t", 1e-10)]);
        assert_eq!(e.eval_formula(&parse_formula("x < x").unwrap(), &s).unwrap(), Truth::False);
        assert_eq!(e.eval_formula(&parse_formula("x <= x").unwrap(), &s).unwrap(), Truth::True);
        assert_eq!(e.eval_formula(&parse_formula("x <= 2").unwrap(), &s).unwrap(), Truth::True);
        assert_eq!(e.eval_formula(&parse_formula("sin(x) <= sin(2)").unwrap(), &s).unwrap(), Truth::Unknown);
        assert_eq!(e.eval_formula(&parse_formula("sin(x) < sin(2)").unwrap(), &s).unwrap(), Truth::Unknown);
        assert_eq!(e.eval_formula(&parse_formula("tanh(20*x)^2 < 1").unwrap(), &s).unwrap(), Truth::Unknown);
        assert_eq!(e.eval_formula(&parse_formula("sin(t) = 0").unwrap(), &s).unwrap(), Truth::Unknown);
        assert_eq!(e.eval_formula(&parse_formula("x > 1").unwrap(), &s).unwrap(), Truth::True);
    }

    #[test]
    fn graph_of_sin_at_origin() {
        let e = ev();
        let sin = builtin_registry().symbol("sin").unwrap();
        let phi = crate::kernel::instantiate_fi(&builtin_registry(), &sin, Term::int(0), vec![Term::int(0)])
            .unwrap()
            .characterization()
            .clone();
        assert_eq!(e.eval_formula(&phi, &State::new()).unwrap(), Truth::True);
    }

    #[test]
    fn pendulum_energy_derivative() {
        let e = ev();
        let ode = match crate::parse::parse_program("{theta'=w, w'=-g/L*sin(theta)-k*w}").unwrap() {
            crate::syntax::Program::Ode(o) => o,
            _ => unreachable!(),
        };
        let inv = parse_term("g/L*(1-cos(theta))+1/2*w^2").unwrap();
        let s = state(&[("g", 9.8), ("L", 2.0), ("k", 0.3), ("theta", 0.7), ("w", -1.1)]);
        let r = e.lie_derivative_residual(&ode, &inv, &s).unwrap();
        assert!((r - (-0.3 * 1.1 * 1.1)).abs() < 1e-9, "{r}");
    }
}
