//! Dormand–Prince 5(4) with Hairer's fourth-order continuous extension,
//! for complex-valued state vectors.

use crate::error::{Error, Result};
use crate::numerics::C64;

#[derive(Clone, Copy, Debug)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Upper bound on the step size; infinite by default.
    pub max_step: f64,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 50_000_000, max_step: f64::INFINITY }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
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

fn scaled_norm(v: &[C64], y0: &[C64], y1: &[C64], opts: &Dopri5Options) -> f64 {
    let sum: f64 = v
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = opts.atol + opts.rtol * a.norm().max(b.norm());
            (e.norm() / sc).powi(2)
        })
        .sum();
    (sum / v.len() as f64).sqrt()
}

/// Integrates y' = f(t, y) from `t0` and reports the solution at every time
/// in `t_out` (non-decreasing, ≥ t0) through `emit(index, t, y)`.
pub fn dopri5<F, E>(
    mut f: F,
    t0: f64,
    y0: &[C64],
    t_out: &[f64],
    opts: &Dopri5Options,
    mut emit: E,
) -> Result<IntegrationStats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    E: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    let n = y0.len();
    let mut stats = IntegrationStats::default();
    if let Some(bad) = t_out.windows(2).find(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidArgument(format!("output times must be increasing ({} then {})", bad[0], bad[1])));
    }
    if let Some(&first) = t_out.first() {
        if first < t0 || !first.is_finite() {
            return Err(Error::InvalidArgument(format!("output time {first} precedes start {t0}")));
        }
    }
    if t_out.last().is_some_and(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("output times must be finite".into()));
    }

    let mut next_out = 0;
    while next_out < t_out.len() && t_out[next_out] == t0 {
        emit(next_out, t0, y0)?;
        next_out += 1;
    }
    if next_out == t_out.len() {
        return Ok(stats);
    }
    let t_end = *t_out.last().unwrap();

    let mut y = y0.to_vec();
    let mut k1 = vec![C64::default(); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut k5 = k1.clone();
    let mut k6 = k1.clone();
    let mut k7 = k1.clone();
    let mut tmp = k1.clone();
    let mut y_new = k1.clone();
    let mut err = k1.clone();

    let mut t = t0;
    f(t, &y, &mut k1);
    stats.evaluations += 1;

    // Starting step from the local derivative scale.
    let mut h = {
        let zeros = vec![C64::default(); n];
        let d0 = scaled_norm(&y, &y, &y, opts);
        let d1 = scaled_norm(&k1, &y, &y, opts);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        for i in 0..n {
            tmp[i] = y[i] + k1[i] * h0;
        }
        f(t + h0, &tmp, &mut k2);
        stats.evaluations += 1;
        for i in 0..n {
            err[i] = k2[i] - k1[i];
        }
        let d2 = scaled_norm(&err, &y, &zeros, opts) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 5.0)
        };
        (100.0 * h0).min(h1).min(opts.max_step).min(t_end - t0)
    };

    let mut last_rejected = false;
    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::IntegrationFailure(format!("exceeded {} steps at t = {t}", opts.max_steps)));
        }
        if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::Stiff { t, h });
        }
        let mut last = false;
        if t + h >= t_end {
            h = t_end - t;
            last = true;
        }

        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (h * A21);
        }
        f(t + C2 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
        }
        f(t + C3 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
        }
        f(t + C4 * h, &tmp, &mut k4);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
        }
        f(t + C5 * h, &tmp, &mut k5);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
        }
        f(t + h, &tmp, &mut k6);
        for i in 0..n {
            y_new[i] = y[i] + (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * h;
        }
        f(t + h, &y_new, &mut k7);
        stats.evaluations += 6;
        for i in 0..n {
            err[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
        }
        let err_norm = scaled_norm(&err, &y, &y_new, opts);
        if !err_norm.is_finite() {
            return Err(Error::IntegrationFailure(format!("non-finite error estimate at t = {t}")));
        }

        if err_norm <= 1.0 {
            stats.accepted += 1;
            let t_new = if last { t_end } else { t + h };

            if next_out < t_out.len() && t_out[next_out] <= t_new {
                // continuous extension coefficients for this step
                let mut r2 = vec![C64::default(); n];
                let mut r3 = r2.clone();
                let mut r4 = r2.clone();
                let mut r5 = r2.clone();
                for i in 0..n {
                    let ydiff = y_new[i] - y[i];
                    let bspl = k1[i] * h - ydiff;
                    r2[i] = ydiff;
                    r3[i] = bspl;
                    r4[i] = ydiff - k7[i] * h - bspl;
                    r5[i] = (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h;
                }
                while next_out < t_out.len() && t_out[next_out] <= t_new {
                    let to = t_out[next_out];
                    if to == t_new {
                        emit(next_out, to, &y_new)?;
                    } else {
                        let th = (to - t) / h;
                        let th1 = 1.0 - th;
                        for i in 0..n {
                            tmp[i] = y[i] + (r2[i] + (r3[i] + (r4[i] + r5[i] * th1) * th) * th1) * th;
                        }
                        emit(next_out, to, &tmp)?;
                    }
                    next_out += 1;
                }
            }

            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);

            let mut fac = 0.9 * err_norm.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h = (h * fac).min(opts.max_step);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            let fac = (0.9 * err_norm.powf(-0.2)).max(0.2);
            h *= fac;
            last_rejected = true;
        }
    }
    Ok(stats)
}
