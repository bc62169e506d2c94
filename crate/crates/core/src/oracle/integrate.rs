//! Dormand-Prince 5(4) with PI step-size control and the standard
//! continuous extension.

use super::OracleError;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Magnitude beyond which a solution counts as blowing up.
pub const BLOW_UP: f64 = 1e150;

/// `y' = f(t, y)`
pub trait System {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), OracleError>;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
    pub max_step: f64,
}

/// One accepted step with its dense output.
#[derive(Clone, Debug)]
pub struct Step {
    pub t0: f64,
    pub t1: f64,
    pub y1: Vec<f64>,
    rcont: [Vec<f64>; 5],
}

impl Step {
    /// The interpolated state at `t` within the step.
    pub fn interpolate(&self, t: f64) -> Vec<f64> {
        let h = self.t1 - self.t0;
        if h == 0.0 {
            return self.y1.clone();
        }
        let th = (t - self.t0) / h;
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = &self.rcont;
        (0..r1.len()).map(|i| r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])))).collect()
    }
}

pub struct Stepper<'a, S: System + ?Sized> {
    sys: &'a S,
    tol: Tolerances,
    pub t: f64,
    pub y: Vec<f64>,
    k1: Vec<f64>,
    /// Signed size of the next attempted step.
    pub h: f64,
    facold: f64,
}

fn norm(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len().max(1) as f64).sqrt()
}

impl<'a, S: System + ?Sized> Stepper<'a, S> {
    /// Starts at `(t0, y0)` heading towards increasing time when `forward`.
    /// `h0` overrides the initial step guess.
    pub fn new(sys: &'a S, t0: f64, y0: Vec<f64>, forward: bool, tol: Tolerances, h0: Option<f64>) -> Result<Self, OracleError> {
        let mut k1 = vec![0.0; sys.dim()];
        sys.eval(t0, &y0, &mut k1)?;
        let dir = if forward { 1.0 } else { -1.0 };
        let h = match h0 {
            Some(h) => h.abs().min(tol.max_step) * dir,
            None => {
                let scale: Vec<f64> = y0.iter().map(|y| tol.abs + tol.rel * y.abs()).collect();
                let d0 = norm(&y0.iter().zip(&scale).map(|(y, s)| y / s).collect::<Vec<_>>());
                let d1 = norm(&k1.iter().zip(&scale).map(|(k, s)| k / s).collect::<Vec<_>>());
                let guess = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
                guess.min(tol.max_step) * dir
            }
        };
        Ok(Stepper { sys, tol, t: t0, y: y0, k1, h, facold: 1e-4 })
    }

    /// Takes one accepted step, never passing `limit` when given.
    pub fn step(&mut self, limit: Option<f64>) -> Result<Step, OracleError> {
        let n = self.y.len();
        let dir = self.h.signum();
        let mut rejected = false;
        let mut tries = 0;
        loop {
            tries += 1;
            let mut h = self.h;
            let mut clipped = false;
            if let Some(lim) = limit {
                if (self.t + h - lim) * dir > 0.0 {
                    h = lim - self.t;
                    clipped = true;
                }
            }
            if h.abs() < 1e-14 * self.t.abs().max(1.0) && !clipped || tries > 100 {
                return Err(OracleError::StepUnderflow { t: self.t });
            }
            let (t, y, k1) = (self.t, &self.y, &self.k1);
            let stage = |coeffs: &[(f64, &Vec<f64>)]| -> Vec<f64> {
                (0..n).map(|i| y[i] + h * coeffs.iter().map(|(a, k)| a * k[i]).sum::<f64>()).collect()
            };
            let mut k2 = vec![0.0; n];
            let mut k3 = vec![0.0; n];
            let mut k4 = vec![0.0; n];
            let mut k5 = vec![0.0; n];
            let mut k6 = vec![0.0; n];
            let mut k7 = vec![0.0; n];
            self.sys.eval(t + C2 * h, &stage(&[(A21, k1)]), &mut k2)?;
            self.sys.eval(t + C3 * h, &stage(&[(A31, k1), (A32, &k2)]), &mut k3)?;
            self.sys.eval(t + C4 * h, &stage(&[(A41, k1), (A42, &k2), (A43, &k3)]), &mut k4)?;
            self.sys.eval(t + C5 * h, &stage(&[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]), &mut k5)?;
            self.sys.eval(t + h, &stage(&[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]), &mut k6)?;
            let y1 = stage(&[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let t1 = if clipped { limit.expect("clipped against a limit") } else { t + h };
            self.sys.eval(t1, &y1, &mut k7)?;
            let err = norm(
                &(0..n)
                    .map(|i| {
                        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                        e / (self.tol.abs + self.tol.rel * y[i].abs().max(y1[i].abs()))
                    })
                    .collect::<Vec<_>>(),
            );
            if !err.is_finite() {
                self.h = h / 10.0;
                rejected = true;
                continue;
            }
            let fac11 = err.powf(0.17);
            if err <= 1.0 {
                let fac = (fac11 / self.facold.powf(0.04) / 0.9).clamp(0.2, 10.0);
                self.facold = err.max(1e-4);
                let mut hnew = (h / fac).abs().min(self.tol.max_step);
                if rejected {
                    hnew = hnew.min(h.abs());
                }
                let ydiff: Vec<f64> = (0..n).map(|i| y1[i] - y[i]).collect();
                let bspl: Vec<f64> = (0..n).map(|i| h * k1[i] - ydiff[i]).collect();
                let r4: Vec<f64> = (0..n).map(|i| ydiff[i] - h * k7[i] - bspl[i]).collect();
                let r5: Vec<f64> = (0..n)
                    .map(|i| h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]))
                    .collect();
                let step = Step { t0: t, t1, y1: y1.clone(), rcont: [y.clone(), ydiff, bspl, r4, r5] };
                if y1.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP) {
                    return Err(OracleError::BlowUp { t: t1 });
                }
                // a clipped step says nothing about the natural step size
                if !clipped || hnew < self.h.abs() {
                    self.h = hnew * dir;
                }
                self.t = t1;
                self.y = y1;
                self.k1 = k7;
                return Ok(step);
            }
            self.h = h / (fac11 / 0.9).min(5.0);
            rejected = true;
        }
    }
}

/// Integrates from `(t0, y0)` to `t1` and returns the final state.
pub fn integrate<S: System + ?Sized>(sys: &S, t0: f64, y0: Vec<f64>, t1: f64, tol: Tolerances) -> Result<Vec<f64>, OracleError> {
    if t1 == t0 {
        return Ok(y0);
    }
    let mut st = Stepper::new(sys, t0, y0, t1 > t0, tol, None)?;
    let mut steps = 0usize;
    while st.t != t1 {
        st.step(Some(t1))?;
        steps += 1;
        if steps > 10_000_000 {
            return Err(OracleError::StepUnderflow { t: st.t });
        }
    }
    Ok(st.y)
}
