use std::fmt::Write as _;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::integrate::{Stepper, System, Tolerances};
use super::{Evaluator, OracleError, State, Truth};
use crate::oracle::eval::Code;
use crate::syntax::{Formula, Ident, OdeSystem, Program, Term};

/// How nondeterminism is resolved. All draws come from the run's seeded
/// generator.
#[derive(Clone, Debug, PartialEq)]
pub struct Policy {
    /// Range for `x:=*` per variable.
    pub assign_any: IndexMap<Ident, (f64, f64)>,
    pub default_range: (f64, f64),
    /// Inclusive range of loop iteration counts.
    pub loops: (u32, u32),
    pub duration: (f64, f64),
    /// Attempts before giving up on runs that fail a test.
    pub retries: usize,
    /// Replaces the configured horizon.
    pub horizon: Option<f64>,
}

impl Default for Policy {
    fn default() -> Self {
        Policy { assign_any: IndexMap::new(), default_range: (-1.0, 1.0), loops: (0, 10), duration: (0.0, 1.0), retries: 100, horizon: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Assign,
    Test,
    Choice,
    OdeStart,
    OdeEnd,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEvent {
    pub time: f64,
    pub kind: EventKind,
    pub detail: String,
    pub outcome: Option<Truth>,
}

/// Samples are in order of execution: the initial state, every integration
/// step, and the state at the end of each discrete segment (before an ODE,
/// after a loop iteration and at the end of the run). States in the middle
/// of a discrete block are not observable and are not sampled. Time is the
/// accumulated duration of continuous evolution.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub vars: Vec<Ident>,
    pub samples: Vec<(f64, Vec<f64>)>,
    pub events: Vec<TraceEvent>,
    /// A test failed or an ODE could not start.
    pub discarded: bool,
    /// The run was cut off at the horizon.
    pub truncated: bool,
}

impl Trace {
    pub fn state_at(&self, i: usize) -> State {
        self.vars.iter().cloned().zip(self.samples[i].1.iter().copied()).collect()
    }

    pub fn final_state(&self) -> State {
        self.state_at(self.samples.len() - 1)
    }

    /// One line per sample: time, then the variables in declared order.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# time");
        for v in &self.vars {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
        for (t, values) in &self.samples {
            let _ = write!(out, "{t:e}");
            for v in values {
                let _ = write!(out, " {v:e}");
            }
            out.push('\n');
        }
        out
    }
}

enum Flow {
    Continue,
    Stop,
}

struct Runner<'a> {
    ev: &'a Evaluator,
    policy: &'a Policy,
    rng: &'a mut ChaCha8Rng,
    state: State,
    time: f64,
    trace: Trace,
    /// Discrete steps changed the state since the last sample.
    pending: bool,
}

/// `y' = f(y)` over the ODE variables, all other variables fixed.
struct Flow_<'a> {
    ev: &'a Evaluator,
    rhs: &'a [Code],
    indices: &'a [usize],
    frame: &'a [f64],
}

impl System for Flow_<'_> {
    fn dim(&self) -> usize {
        self.indices.len()
    }

    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), OracleError> {
        let mut slots = self.frame.to_vec();
        for (&i, &v) in self.indices.iter().zip(y) {
            slots[i] = v;
        }
        for (d, f) in dy.iter_mut().zip(self.rhs) {
            *d = self.ev.run(f, &slots)?;
        }
        Ok(())
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..=hi)
    } else {
        lo
    }
}

impl Runner<'_> {
    fn sample(&mut self) {
        self.trace.samples.push((self.time, self.state.values().copied().collect()));
        self.pending = false;
    }

    fn flush(&mut self) {
        if self.pending {
            self.sample();
        }
    }

    fn event(&mut self, kind: EventKind, detail: String, outcome: Option<Truth>) {
        self.trace.events.push(TraceEvent { time: self.time, kind, detail, outcome });
    }

    fn horizon(&self) -> f64 {
        self.policy.horizon.unwrap_or(self.ev.config().horizon)
    }

    fn at_horizon(&self) -> bool {
        self.time >= self.horizon()
    }

    fn exec(&mut self, a: &Program) -> Result<Flow, OracleError> {
        if self.at_horizon() {
            self.trace.truncated = true;
            return Ok(Flow::Stop);
        }
        match a {
            Program::Test(f) => {
                let v = self.ev.eval_formula(f, &self.state)?;
                self.event(EventKind::Test, f.to_string(), Some(v));
                if v == Truth::False {
                    self.trace.discarded = true;
                    return Ok(Flow::Stop);
                }
            }
            Program::Assign(x, e) => {
                let v = self.ev.eval_term(e, &self.state)?;
                self.state.insert(x.clone(), v);
                self.event(EventKind::Assign, x.to_string(), None);
                self.pending = true;
            }
            Program::AssignAny(x) => {
                let range = self.policy.assign_any.get(x).copied().unwrap_or(self.policy.default_range);
                let v = uniform(self.rng, range);
                self.state.insert(x.clone(), v);
                self.event(EventKind::Assign, x.to_string(), None);
                self.pending = true;
            }
            Program::Choice(..) => {
                let mut options = Vec::new();
                collect_choices(a, &mut options);
                let k = self.rng.gen_range(0..options.len());
                self.event(EventKind::Choice, k.to_string(), None);
                return self.exec(options[k]);
            }
            Program::Sequence(p, q) => {
                if let Flow::Stop = self.exec(p)? {
                    return Ok(Flow::Stop);
                }
                return self.exec(q);
            }
            Program::Loop(p) => {
                let (lo, hi) = self.policy.loops;
                let n = if hi > lo { self.rng.gen_range(lo..=hi) } else { lo };
                for _ in 0..n {
                    if let Flow::Stop = self.exec(p)? {
                        return Ok(Flow::Stop);
                    }
                    self.flush();
                }
            }
            Program::IfThen(c, p) => {
                // knife-edge guards (such as an impact located within
                // tolerance) take the branch
                let v = self.ev.eval_formula(c, &self.state)?;
                self.event(EventKind::Test, c.to_string(), Some(v));
                if v != Truth::False {
                    return self.exec(p);
                }
            }
            Program::Ode(ode) => return self.evolve(ode),
        }
        Ok(Flow::Continue)
    }

    fn evolve(&mut self, ode: &OdeSystem) -> Result<Flow, OracleError> {
        let has_domain = ode.domain != Formula::True;
        if has_domain && self.ev.eval_formula(&ode.domain, &self.state)? == Truth::False {
            self.event(EventKind::OdeStart, "domain violated initially".into(), Some(Truth::False));
            self.trace.discarded = true;
            return Ok(Flow::Stop);
        }
        for (x, _) in &ode.equations {
            if !self.state.contains_key(x) {
                self.state.insert(x.clone(), 0.0);
            }
        }
        self.flush();
        let cfg = self.ev.config().clone();
        let wanted = uniform(self.rng, self.policy.duration);
        let duration = wanted.min(self.horizon() - self.time).max(0.0);
        self.event(EventKind::OdeStart, format!("duration {duration}"), None);
        let rhs: Vec<Code> =
            ode.equations.iter().map(|(_, f)| self.ev.compile(f, &self.state)).collect::<Result<_, _>>()?;
        let indices: Vec<usize> =
            ode.equations.iter().map(|(x, _)| self.state.get_index_of(x).expect("inserted above")).collect();
        let frame: Vec<f64> = self.state.values().copied().collect();
        let sys = Flow_ { ev: self.ev, rhs: &rhs, indices: &indices, frame: &frame };
        let tol = Tolerances { abs: cfg.abs_tol, rel: cfg.rel_tol, max_step: cfg.max_step };
        let y0: Vec<f64> = indices.iter().map(|&i| frame[i]).collect();
        let start = self.time;
        let mut boundary = false;
        if duration > 0.0 {
            let mut st = Stepper::new(&sys, 0.0, y0, true, tol, None)?;
            while st.t < duration {
                let step = st.step(Some(duration))?;
                self.write(&indices, &step.y1);
                if has_domain && self.ev.eval_formula(&ode.domain, &self.state)? == Truth::False {
                    let (t, y) = self.locate(&ode.domain, &indices, &step)?;
                    self.write(&indices, &y);
                    self.time = start + t;
                    self.sample();
                    boundary = true;
                    break;
                }
                self.time = start + step.t1;
                self.sample();
            }
        }
        let why = if boundary { "domain boundary" } else { "duration" };
        self.event(EventKind::OdeEnd, why.into(), None);
        if duration < wanted {
            self.trace.truncated = true;
            return Ok(Flow::Stop);
        }
        Ok(Flow::Continue)
    }

    fn write(&mut self, indices: &[usize], y: &[f64]) {
        for (&i, &v) in indices.iter().zip(y) {
            *self.state.get_index_mut(i).expect("slot").1 = v;
        }
    }

    /// Bisects the step's dense output for the last time at which the
    /// domain is not definitely false, so evolution stops inside the margin
    /// band around the boundary where guards on it are unknown.
    fn locate(&mut self, domain: &Formula, indices: &[usize], step: &super::integrate::Step) -> Result<(f64, Vec<f64>), OracleError> {
        let (mut lo, mut hi) = (step.t0, step.t1);
        let tol = self.ev.config().abs_tol.max(1e-15 * hi.abs());
        let mut y_lo = step.interpolate(lo);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            let y = step.interpolate(mid);
            self.write(indices, &y);
            if self.ev.eval_formula(domain, &self.state)? != Truth::False {
                lo = mid;
                y_lo = y;
            } else {
                hi = mid;
            }
        }
        Ok((lo, y_lo))
    }
}

fn collect_choices<'a>(a: &'a Program, out: &mut Vec<&'a Program>) {
    match a {
        Program::Choice(p, q) => {
            collect_choices(p, out);
            collect_choices(q, out);
        }
        other => out.push(other),
    }
}

impl Evaluator {
    /// One run of `program` from `s0`, possibly discarded.
    pub fn run_once(&self, program: &Program, s0: &State, policy: &Policy, rng: &mut ChaCha8Rng) -> Result<Trace, OracleError> {
        let mut state = s0.clone();
        for x in program.bound_vars() {
            state.entry(x).or_insert(0.0);
        }
        let vars = state.keys().cloned().collect();
        let trace = Trace { vars, samples: Vec::new(), events: Vec::new(), discarded: false, truncated: false };
        let mut runner = Runner { ev: self, policy, rng, state, time: 0.0, trace, pending: false };
        runner.sample();
        runner.exec(program)?;
        if !runner.trace.discarded {
            runner.flush();
        }
        Ok(runner.trace)
    }

    /// A completed (not discarded) run, retrying with fresh draws.
    pub fn simulate(&self, program: &Program, s0: &State, policy: &Policy, seed: u64) -> Result<Trace, OracleError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..policy.retries.max(1) {
            let trace = self.run_once(program, s0, policy, &mut rng)?;
            if !trace.discarded {
                return Ok(trace);
            }
        }
        Err(OracleError::PolicyExhausted(policy.retries.max(1)))
    }

    /// Largest magnitude of `e` over the trace.
    pub fn max_abs(&self, trace: &Trace, e: &Term) -> Result<f64, OracleError> {
        let state = trace.state_at(0);
        let code = self.compile(e, &state)?;
        let mut worst: f64 = 0.0;
        for (_, values) in &trace.samples {
            worst = worst.max(self.run(&code, values)?.abs());
        }
        Ok(worst)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonitorReport {
    pub verdict: Truth,
    pub samples: usize,
    pub first_violation: Option<f64>,
    pub first_unknown: Option<f64>,
    /// Samples at which evaluation failed; they count as unknown.
    pub errors: usize,
}

/// Evaluates `psi` at every sample of the trace.
pub fn monitor(ev: &Evaluator, trace: &Trace, psi: &Formula) -> MonitorReport {
    let mut report =
        MonitorReport { verdict: Truth::True, samples: trace.samples.len(), first_violation: None, first_unknown: None, errors: 0 };
    for i in 0..trace.samples.len() {
        let t = trace.samples[i].0;
        let v = ev.eval_formula(psi, &trace.state_at(i)).unwrap_or_else(|_| {
            report.errors += 1;
            Truth::Unknown
        });
        match v {
            Truth::False if report.first_violation.is_none() => report.first_violation = Some(t),
            Truth::Unknown if report.first_unknown.is_none() => report.first_unknown = Some(t),
            _ => {}
        }
        report.verdict = report.verdict.and(v);
    }
    report
}
