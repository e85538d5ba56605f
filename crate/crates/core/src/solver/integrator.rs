//! Embedded Dormand-Prince 5(4) with PI step-size control.
//!
//! With rates `r` supplied, the leading components are integrated in the
//! Lawson frame `v = e^{r τ} y`, which removes the stiff linear decay
//! `y' = −r y + N(y)` from the stability limit.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
/// Largest `r h` allowed in the Lawson frame.
const MAX_EXPONENT: f64 = 500.0;

pub struct Dopri5 {
    rtol: f64,
    atol: f64,
    /// Leading components entering the error norm.
    controlled: usize,
    rates: Option<Vec<f64>>,
    h: f64,
    h_max: f64,
    facold: f64,
    k: [Vec<f64>; 7],
    stage: Vec<f64>,
    raw: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl Dopri5 {
    pub fn new(
        dim: usize,
        controlled: usize,
        rtol: f64,
        atol: f64,
        h_init: f64,
        h_max: f64,
        rates: Option<Vec<f64>>,
    ) -> Self {
        let mut h_max = h_max;
        if let Some(r) = &rates {
            let rmax = r.iter().copied().fold(0.0, f64::max);
            if rmax > 0.0 {
                h_max = h_max.min(MAX_EXPONENT / rmax);
            }
        }
        Self {
            rtol,
            atol,
            controlled,
            rates,
            h: h_init.min(h_max),
            h_max,
            facold: 1e-4,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            stage: vec![0.0; dim],
            raw: vec![0.0; dim],
            accepted: 0,
            rejected: 0,
            evaluations: 0,
        }
    }

    /// Suggested size of the next step.
    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Advances `(t, y)` by one accepted step, never past `t_limit`.
    ///
    /// `fy` holds `f(t, y)` on entry and `f(t_new, y_new)` on exit. A failing
    /// stage evaluation counts as a rejection; the error surfaces only once
    /// the step size underflows.
    pub fn step<F>(&mut self, f: &mut F, t: f64, y: &mut [f64], fy: &mut [f64], t_limit: f64) -> Result<f64>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    {
        let dim = y.len();
        let mut last_error: Option<Error> = None;
        let mut h = self.h;
        loop {
            let remaining = t_limit - t;
            let landing = h >= remaining * (1.0 - 1e-12);
            if landing {
                h = remaining;
            }
            let min_h = 1e-14 * t.abs().max(1.0);
            if h < min_h && !(landing && h > 0.0) {
                return Err(last_error.unwrap_or(Error::StepSizeUnderflow { t, h }));
            }

            // stage 1 in the transformed frame
            self.k[0].copy_from_slice(fy);
            if let Some(r) = &self.rates {
                for (i, &ri) in r.iter().enumerate() {
                    self.k[0][i] += ri * y[i];
                }
            }

            let mut failed = false;
            for s in 1..7 {
                for i in 0..dim {
                    let mut acc = 0.0;
                    for (j, a) in A[s][..s].iter().enumerate() {
                        acc += a * self.k[j][i];
                    }
                    self.stage[i] = y[i] + h * acc;
                }
                let tau = C[s] * h;
                if let Some(r) = &self.rates {
                    for (i, &ri) in r.iter().enumerate() {
                        self.stage[i] *= (-ri * tau).exp();
                    }
                }
                self.evaluations += 1;
                if let Err(e) = f(t + tau, &self.stage, &mut self.raw) {
                    last_error = Some(e);
                    failed = true;
                    break;
                }
                self.k[s].copy_from_slice(&self.raw);
                if let Some(r) = &self.rates {
                    for (i, &ri) in r.iter().enumerate() {
                        self.k[s][i] = (ri * tau).exp() * (self.raw[i] + ri * self.stage[i]);
                    }
                }
            }
            if failed {
                self.rejected += 1;
                h *= FAC_MIN;
                self.h = h;
                continue;
            }

            // stage[] now holds y_{n+1} in the physical frame, raw[] its derivative
            let mut err = 0.0;
            for i in 0..self.controlled {
                let mut e = 0.0;
                for (j, ej) in E.iter().enumerate() {
                    e += ej * self.k[j][i];
                }
                e *= h;
                if let Some(r) = &self.rates {
                    if i < r.len() {
                        e *= (-r[i] * h).exp();
                    }
                }
                let sk = self.atol + self.rtol * y[i].abs().max(self.stage[i].abs());
                err += (e / sk).powi(2);
            }
            let err = (err / self.controlled.max(1) as f64).sqrt();
            if !err.is_finite() {
                self.rejected += 1;
                h *= FAC_MIN;
                self.h = h;
                continue;
            }

            let expo = 0.2 - 0.75 * BETA;
            let fac11 = err.powf(expo);
            if err <= 1.0 {
                let fac = (fac11 / self.facold.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                self.facold = err.max(1e-4);
                y.copy_from_slice(&self.stage);
                fy.copy_from_slice(&self.raw);
                self.accepted += 1;
                let h_new = (h / fac).min(self.h_max);
                // a step shortened to hit a checkpoint does not shrink the next one
                self.h = if landing { h_new.max(self.h) } else { h_new };
                return Ok(if landing { t_limit } else { t + h });
            }
            self.rejected += 1;
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
            self.h = h;
        }
    }
}
