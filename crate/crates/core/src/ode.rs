//! Adaptive Dormand-Prince 5(4) integrator for small autonomous-in-form systems.

use crate::error::{MtError, Result};

pub type State = [f64; 2];

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, max_steps: 200_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integration {
    Reached(State),
    /// The event predicate fired after an accepted step ending at `t`.
    Stopped { t: f64, y: State },
}

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

impl Dopri5 {
    pub fn with_tol(rtol: f64) -> Self {
        Self { rtol, atol: rtol * 1e-2, ..Self::default() }
    }

    /// Integrate from `t0` to `t1 > t0`. `h` carries the step size between calls.
    pub fn integrate<F, E>(&self, f: &F, t0: f64, y0: State, t1: f64, h: &mut f64, event: &E) -> Result<Integration>
    where
        F: Fn(f64, &State) -> State,
        E: Fn(f64, &State) -> bool,
    {
        let mut t = t0;
        let mut y = y0;
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(Integration::Reached(y));
        }
        if !(*h > 0.0) {
            *h = span.min(1e-3);
        }
        let mut k1 = f(t, &y);
        let mut steps = 0;
        while t < t1 {
            steps += 1;
            if steps > self.max_steps {
                return Err(MtError::Solver(format!("step budget exhausted at t={t}")));
            }
            let last = t + *h >= t1;
            let hs = if last { t1 - t } else { *h };
            let k2 = f(t + C2 * hs, &axpy(&y, &[(A21, &k1)], hs));
            let k3 = f(t + C3 * hs, &axpy(&y, &[(A31, &k1), (A32, &k2)], hs));
            let k4 = f(t + C4 * hs, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hs));
            let k5 = f(t + C5 * hs, &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hs));
            let k6 = f(
                t + hs,
                &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], hs),
            );
            let yn = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], hs);
            let k7 = f(t + hs, &yn);
            let mut err = 0.0f64;
            for i in 0..2 {
                let e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(yn[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() || yn.iter().any(|v| !v.is_finite()) {
                *h = hs * 0.25;
            } else if err <= 1.0 {
                t = if last { t1 } else { t + hs };
                y = yn;
                k1 = k7;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || fac < 1.0 {
                    *h = hs * fac;
                }
                if event(t, &y) {
                    return Ok(Integration::Stopped { t, y });
                }
                continue;
            } else {
                *h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
            if *h < 1e-14 * t.abs().max(1.0) {
                return Err(MtError::Solver(format!("step size underflow at t={t}")));
            }
        }
        Ok(Integration::Reached(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let f = |_t: f64, y: &State| [y[1], -y[0]];
        let mut h = 0.0;
        let r = Dopri5::default().integrate(&f, 0.0, [1.0, 0.0], 10.0, &mut h, &|_, _| false).unwrap();
        match r {
            Integration::Reached(y) => {
                assert!((y[0] - 10f64.cos()).abs() < 1e-10);
                assert!((y[1] + 10f64.sin()).abs() < 1e-10);
            }
            _ => panic!("unexpected stop"),
        }
    }

    #[test]
    fn event_stops() {
        let f = |_t: f64, _y: &State| [-1.0, 0.0];
        let mut h = 0.1;
        let r = Dopri5::default().integrate(&f, 0.0, [1.0, 0.0], 5.0, &mut h, &|_, y| y[0] < 0.0).unwrap();
        match r {
            Integration::Stopped { t, y } => {
                assert!(y[0] < 0.0);
                assert!(t > 1.0 && t < 5.0);
            }
            _ => panic!("event missed"),
        }
    }
}
