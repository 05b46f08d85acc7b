//! Dormand-Prince 5(4) integrator with adaptive step control.

#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Dopri5Options { rtol: 1e-10, atol: 1e-12, h_init: 1e-3, max_steps: 2_000_000 }
    }
}

/// Adaptive stepper for `y' = f(y)` (autonomous systems only).
pub struct Dopri5<F> {
    f: F,
    pub t: f64,
    pub y: Vec<f64>,
    h: f64,
    k: [Vec<f64>; 7],
    opts: Dopri5Options,
    pub accepted: usize,
    pub rejected: usize,
}

impl<F: FnMut(&[f64], &mut [f64])> Dopri5<F> {
    pub fn new(mut f: F, y0: &[f64], opts: Dopri5Options) -> Self {
        let n = y0.len();
        let mut k: [Vec<f64>; 7] = Default::default();
        for slot in &mut k {
            *slot = vec![0.0; n];
        }
        f(y0, &mut k[0]);
        Dopri5 { f, t: 0.0, y: y0.to_vec(), h: opts.h_init, k, opts, accepted: 0, rejected: 0 }
    }

    /// Replaces the current state (after a projection, say).
    pub fn reset_state(&mut self, y: &[f64]) {
        self.y.copy_from_slice(y);
        (self.f)(&self.y, &mut self.k[0]);
    }

    /// Current derivative `f(y)`.
    pub fn derivative(&self) -> &[f64] {
        &self.k[0]
    }

    /// Takes one accepted step, never passing `t_stop`.
    pub fn step(&mut self, t_stop: f64) -> Result<()> {
        let n = self.y.len();
        let mut stage = vec![0.0; n];
        let mut y_new = vec![0.0; n];
        loop {
            if self.accepted + self.rejected >= self.opts.max_steps {
                return Err(Error::StepUnderflow { t: self.t });
            }
            let remaining = t_stop - self.t;
            let clipped = self.h >= remaining;
            let h = if clipped { remaining } else { self.h };
            if h <= 1e-14 * self.t.abs().max(1.0) && !clipped {
                return Err(Error::StepUnderflow { t: self.t });
            }

            let rows: [&[f64]; 5] = [&A2, &A3, &A4, &A5, &A6];
            for (s, row) in rows.iter().enumerate() {
                for i in 0..n {
                    let mut acc = 0.0;
                    for (j, a) in row.iter().enumerate() {
                        acc += a * self.k[j][i];
                    }
                    stage[i] = self.y[i] + h * acc;
                }
                (self.f)(&stage, &mut self.k[s + 1]);
            }
            for i in 0..n {
                let mut acc = 0.0;
                for (j, b) in B.iter().enumerate() {
                    acc += b * self.k[j][i];
                }
                y_new[i] = self.y[i] + h * acc;
            }
            (self.f)(&y_new, &mut self.k[6]);

            let mut err = 0.0;
            for i in 0..n {
                let mut e = 0.0;
                for (j, c) in E.iter().enumerate() {
                    e += c * self.k[j][i];
                }
                let scale = self.opts.atol + self.opts.rtol * self.y[i].abs().max(y_new[i].abs());
                err += (h * e / scale).powi(2);
            }
            let err = (err / n as f64).sqrt();
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };

            if err <= 1.0 {
                self.t = if clipped { t_stop } else { self.t + h };
                self.y.copy_from_slice(&y_new);
                self.k.swap(0, 6);
                self.accepted += 1;
                // A clipped step says nothing about the natural step size.
                if !clipped || factor < 1.0 {
                    self.h = h * factor;
                }
                return Ok(());
            }
            self.rejected += 1;
            self.h = h * factor.min(1.0);
        }
    }

    /// Integrates up to `t_end`.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        while self.t < t_end {
            self.step(t_end)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let mut s = Dopri5::new(
            |y: &[f64], d: &mut [f64]| {
                d[0] = -y[1];
                d[1] = y[0];
            },
            &[1.0, 0.0],
            Dopri5Options::default(),
        );
        s.advance_to(std::f64::consts::TAU).unwrap();
        assert!((s.y[0] - 1.0).abs() < 1e-9 && s.y[1].abs() < 1e-9, "{:?}", s.y);
    }

    #[test]
    fn exponential_growth() {
        let mut s = Dopri5::new(|y: &[f64], d: &mut [f64]| d[0] = y[0], &[1.0], Dopri5Options::default());
        s.advance_to(2.0).unwrap();
        assert!((s.y[0] - 2f64.exp()).abs() < 1e-8 * 2f64.exp());
        assert!(s.accepted > 10);
    }

    #[test]
    fn stops_exactly_at_target() {
        let mut s = Dopri5::new(|_: &[f64], d: &mut [f64]| d[0] = 1.0, &[0.0], Dopri5Options::default());
        s.advance_to(0.123).unwrap();
        assert_eq!(s.t, 0.123);
        assert!((s.y[0] - 0.123).abs() < 1e-15);
    }
}
