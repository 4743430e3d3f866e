//! Explicit adaptive Runge-Kutta integration (Dormand-Prince 5(4)) with a
//! PI step-size controller.
//!
//! Both the full master equation and the secular trap-basis equations use
//! this stepper; the state is a fixed-size array of reals.

use crate::error::{Error, Result};

/// A first-order system `dy/dt = f(t, y)` of `N` real unknowns.
pub trait OdeSystem<const N: usize> {
    fn eval(&self, t: f64, y: &[f64; N], dydt: &mut [f64; N]);
}

impl<const N: usize, F> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N], &mut [f64; N]),
{
    fn eval(&self, t: f64, y: &[f64; N], dydt: &mut [f64; N]) {
        self(t, y, dydt)
    }
}

/// Which states to report.
#[derive(Debug, Clone, Copy)]
pub enum Output<'a> {
    /// Initial state plus every accepted step.
    Steps,
    /// Exactly these times (ascending, within the integration span). Steps
    /// are shortened to land on each one.
    At(&'a [f64]),
}

/// Integrator settings.
#[derive(Debug, Clone, Copy)]
pub struct DormandPrince {
    pub atol: f64,
    pub rtol: f64,
    /// Step sizes below this abort with [`Error::StepSizeUnderflow`].
    pub min_step: f64,
    pub max_step: f64,
}

impl Default for DormandPrince {
    fn default() -> Self {
        Self { atol: 1e-11, rtol: 1e-10, min_step: 1e-12, max_step: f64::INFINITY }
    }
}

// Butcher tableau.
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
// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// PI controller constants.
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

impl DormandPrince {
    /// Integrate from `(t0, y0)` to `t_end`, starting with step `h0`.
    pub fn integrate<const N: usize, S: OdeSystem<N>>(
        &self,
        system: &S,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        h0: f64,
        output: Output<'_>,
    ) -> Result<Vec<(f64, [f64; N])>> {
        if !(t_end > t0) {
            return Err(Error::InvalidArgument(format!(
                "integration end {t_end} must exceed start {t0}"
            )));
        }
        if !(h0 > 0.0) {
            return Err(Error::InvalidArgument(format!("initial step must be positive, got {h0}")));
        }
        let stops: &[f64] = match output {
            Output::Steps => &[],
            Output::At(times) => times,
        };
        if stops.windows(2).any(|w| w[1] < w[0]) || stops.iter().any(|&s| s < t0 || s > t_end) {
            return Err(Error::InvalidArgument(
                "output times must be ascending and inside the integration span".into(),
            ));
        }

        let mut out = Vec::new();
        let mut next_stop = 0;
        while next_stop < stops.len() && stops[next_stop] == t0 {
            out.push((t0, y0));
            next_stop += 1;
        }
        if matches!(output, Output::Steps) {
            out.push((t0, y0));
        }

        let mut t = t0;
        let mut y = y0;
        let mut h = h0.min(self.max_step).min(t_end - t0);
        let mut err_prev = 1e-4_f64;
        let mut k1 = [0.0; N];
        system.eval(t, &y, &mut k1);
        let mut k = [[0.0; N]; 6];

        while t < t_end {
            let target = stops.get(next_stop).copied().unwrap_or(t_end);
            let mut hits_target = false;
            if t + h >= target {
                h = target - t;
                hits_target = true;
            }
            if h < self.min_step {
                return Err(Error::StepSizeUnderflow { t, dt: h });
            }

            let y2 = axpy(&y, h, &[(A21, &k1)]);
            system.eval(t + C2 * h, &y2, &mut k[0]);
            let y3 = axpy(&y, h, &[(A31, &k1), (A32, &k[0])]);
            system.eval(t + C3 * h, &y3, &mut k[1]);
            let y4 = axpy(&y, h, &[(A41, &k1), (A42, &k[0]), (A43, &k[1])]);
            system.eval(t + C4 * h, &y4, &mut k[2]);
            let y5 = axpy(&y, h, &[(A51, &k1), (A52, &k[0]), (A53, &k[1]), (A54, &k[2])]);
            system.eval(t + C5 * h, &y5, &mut k[3]);
            let y6 = axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k[0]), (A63, &k[1]), (A64, &k[2]), (A65, &k[3])],
            );
            system.eval(t + h, &y6, &mut k[4]);
            let y_new = axpy(
                &y,
                h,
                &[(B1, &k1), (B3, &k[1]), (B4, &k[2]), (B5, &k[3]), (B6, &k[4])],
            );
            let t_new = if hits_target { target } else { t + h };
            system.eval(t_new, &y_new, &mut k[5]);

            let mut err = 0.0;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k[1][i] + E4 * k[2][i] + E5 * k[3][i] + E6 * k[4][i]
                        + E7 * k[5][i]);
                let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / scale).powi(2);
            }
            let err = (err / N as f64).sqrt();

            if err <= 1.0 {
                t = t_new;
                y = y_new;
                k1 = k[5];
                if hits_target && next_stop < stops.len() {
                    out.push((t, y));
                    next_stop += 1;
                } else if matches!(output, Output::Steps) {
                    out.push((t, y));
                }
                let fac = (err.max(1e-16).powf(EXPO) / err_prev.powf(BETA) / SAFETY)
                    .clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                err_prev = err.max(1e-4);
                h = (h / fac).min(self.max_step);
            } else {
                let fac = if err.is_finite() {
                    (err.powf(EXPO) / SAFETY).min(1.0 / FAC_MIN)
                } else {
                    1.0 / FAC_MIN
                };
                h /= fac;
            }
        }
        Ok(out)
    }
}
