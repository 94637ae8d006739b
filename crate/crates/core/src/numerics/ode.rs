//! Scalar Dormand–Prince 5(4) integrator with step-size control.

use crate::{Error, Result};

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

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step magnitude.
    pub h_max: f64,
    /// Steps below this magnitude are treated as a stall.
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-14,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

/// One accepted step of an integration.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub t: f64,
    pub y: f64,
}

impl Dopri5 {
    /// One explicit step of size `h`; returns (y_new, error estimate, f(t+h, y_new)).
    #[inline]
    fn step<F: Fn(f64, f64) -> f64>(&self, f: &F, t: f64, y: f64, k1: f64, h: f64) -> (f64, f64, f64) {
        let k2 = f(t + C2 * h, y + h * A21 * k1);
        let k3 = f(t + C3 * h, y + h * (A31 * k1 + A32 * k2));
        let k4 = f(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = f(t + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = f(t + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = f(t + h, y_new);
        let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        (y_new, err, k7)
    }

    fn error_norm(&self, y: f64, y_new: f64, err: f64) -> f64 {
        let sc = self.atol + self.rtol * y.abs().max(y_new.abs());
        (err / sc).abs()
    }

    fn initial_step(&self, span: f64) -> f64 {
        (span.abs() * 1e-3).clamp(self.h_min * 10.0, self.h_max.min(0.1).max(self.h_min * 10.0))
    }

    /// Integrates `y' = f(t, y)` from `(t0, y0)` and returns the solution at
    /// every point of `ts`, which must be monotone in the direction of
    /// integration (either direction is allowed).
    pub fn solve_at<F: Fn(f64, f64) -> f64>(&self, f: F, t0: f64, y0: f64, ts: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(ts.len());
        if ts.is_empty() {
            return Ok(out);
        }
        let dir = if ts[ts.len() - 1] >= t0 { 1.0 } else { -1.0 };
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, y);
        let mut h = self.initial_step(ts[ts.len() - 1] - t0);
        let mut steps = 0usize;
        for &target in ts {
            if (target - t) * dir < 0.0 {
                return Err(Error::InvalidParameter("output times must be monotone".into()));
            }
            while (target - t) * dir > 0.0 {
                steps += 1;
                if steps > self.max_steps {
                    return Err(Error::IntegrationStall {
                        t,
                        reason: "step budget exhausted".into(),
                    });
                }
                let remaining = (target - t).abs();
                let hs = h.min(remaining).min(self.h_max);
                let last = hs >= remaining;
                let (y_new, err, k7) = self.step(&f, t, y, k1, dir * hs);
                let en = self.error_norm(y, y_new, err);
                if !y_new.is_finite() || !en.is_finite() {
                    h = hs * 0.25;
                } else if en <= 1.0 {
                    t = if last { target } else { t + dir * hs };
                    y = y_new;
                    k1 = k7;
                    let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
                    // Do not let the clipped final step shrink the running step.
                    h = if last { h.max(hs * fac) } else { hs * fac };
                    continue;
                } else {
                    h = hs * (0.9 * en.powf(-0.2)).clamp(0.1, 0.9);
                }
                if h < self.h_min {
                    return Err(Error::IntegrationStall {
                        t,
                        reason: format!("step size fell below {:e} near y = {y}", self.h_min),
                    });
                }
            }
            out.push(y);
        }
        Ok(out)
    }

    /// Integrates a solution that is monotone in `t` until it reaches `level`,
    /// returning the accepted steps; the final entry lies on the level (to
    /// within `level_tol`). Fails if `t_limit` is reached first.
    pub fn solve_to_level<F: Fn(f64, f64) -> f64>(
        &self,
        f: F,
        t0: f64,
        y0: f64,
        level: f64,
        t_limit: f64,
        level_tol: f64,
    ) -> Result<Vec<Step>> {
        let dir = if t_limit >= t0 { 1.0 } else { -1.0 };
        let up = level >= y0;
        let crossed = |y: f64| if up { y >= level } else { y <= level };
        let mut steps = vec![Step { t: t0, y: y0 }];
        if crossed(y0) {
            return Ok(steps);
        }
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, y);
        let mut h = self.initial_step(t_limit - t0);
        let mut count = 0usize;
        loop {
            count += 1;
            if count > self.max_steps {
                return Err(Error::IntegrationStall {
                    t,
                    reason: "step budget exhausted before reaching level".into(),
                });
            }
            let remaining = (t_limit - t).abs();
            if remaining <= 0.0 {
                return Err(Error::IntegrationStall {
                    t,
                    reason: format!("level {level} not reached before t = {t_limit}"),
                });
            }
            let hs = h.min(remaining).min(self.h_max);
            let (y_new, err, k7) = self.step(&f, t, y, k1, dir * hs);
            let en = self.error_norm(y, y_new, err);
            if y_new.is_finite() && en <= 1.0 {
                if crossed(y_new) {
                    // Locate the crossing by bisection on the step length;
                    // each trial is a full step from the last accepted point.
                    let (mut lo, mut hi) = (0.0f64, hs);
                    let mut best = (hs, y_new);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        let (ym, _, _) = self.step(&f, t, y, k1, dir * mid);
                        if crossed(ym) {
                            hi = mid;
                            best = (mid, ym);
                        } else {
                            lo = mid;
                        }
                        if (best.1 - level).abs() <= level_tol || hi - lo <= 1e-16 * (1.0 + t.abs()) {
                            break;
                        }
                    }
                    steps.push(Step { t: t + dir * best.0, y: level });
                    return Ok(steps);
                }
                t += dir * hs;
                y = y_new;
                k1 = k7;
                steps.push(Step { t, y });
                let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
                h = hs * fac;
            } else {
                h = hs * if en.is_finite() { (0.9 * en.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
                if h < self.h_min {
                    return Err(Error::IntegrationStall {
                        t,
                        reason: format!("step size fell below {:e} near y = {y}", self.h_min),
                    });
                }
            }
        }
    }
}
