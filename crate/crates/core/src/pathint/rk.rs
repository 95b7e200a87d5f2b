//! Dormand–Prince 5(4) with PI step-size control over complex state vectors.

use std::fmt::Display;

use super::{IntegrationError, ToleranceSpec};
use crate::numcore::Complex;

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

/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

pub(crate) struct Outcome {
    pub y: Vec<Complex>,
    pub accepted: usize,
    pub rejected: usize,
    pub error_estimate: f64,
}

fn call<F, E>(f: &mut F, t: f64, y: &[Complex], out: &mut [Complex]) -> Result<(), IntegrationError>
where
    F: FnMut(f64, &[Complex], &mut [Complex]) -> Result<(), E>,
    E: Display,
{
    f(t, y, out).map_err(|e| IntegrationError::Rhs { at: t, message: e.to_string() })?;
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(IntegrationError::NonFinite { at: t });
    }
    Ok(())
}

fn scaled_norm(v: &[Complex], y: &[Complex], tol: &ToleranceSpec) -> f64 {
    let n = v.len().max(1) as f64;
    (v.iter()
        .zip(y)
        .map(|(d, yi)| {
            let sc = tol.abs + tol.rel * yi.norm();
            (d.norm() / sc).powi(2)
        })
        .sum::<f64>()
        / n)
        .sqrt()
}

fn initial_step<F, E>(
    f: &mut F,
    t0: f64,
    y0: &[Complex],
    f0: &[Complex],
    span: f64,
    tol: &ToleranceSpec,
) -> Result<f64, IntegrationError>
where
    F: FnMut(f64, &[Complex], &mut [Complex]) -> Result<(), E>,
    E: Display,
{
    let d0 = scaled_norm(y0, y0, tol);
    let d1 = scaled_norm(f0, y0, tol);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    let y1: Vec<Complex> = y0.iter().zip(f0).map(|(y, k)| y + k * h0).collect();
    let mut f1 = vec![Complex::new(0.0, 0.0); y0.len()];
    call(f, t0 + h0, &y1, &mut f1)?;
    let diff: Vec<Complex> = f1.iter().zip(f0).map(|(a, b)| (a - b) / h0).collect();
    let d2 = scaled_norm(&diff, y0, tol);
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    Ok((100.0 * h0).min(h1).min(span))
}

/// Integrates y' = f(t, y) from t0 to t1 (either direction).
pub(crate) fn integrate<F, E>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: Vec<Complex>,
    tol: &ToleranceSpec,
) -> Result<Outcome, IntegrationError>
where
    F: FnMut(f64, &[Complex], &mut [Complex]) -> Result<(), E>,
    E: Display,
{
    tol.validate()?;
    let n = y0.len();
    let zero = Complex::new(0.0, 0.0);
    let span = (t1 - t0).abs();
    if span == 0.0 || n == 0 {
        return Ok(Outcome { y: y0, accepted: 0, rejected: 0, error_estimate: 0.0 });
    }
    let dir = (t1 - t0).signum();
    let mut k: Vec<Vec<Complex>> = vec![vec![zero; n]; 7];
    call(&mut f, t0, &y0, &mut k[0])?;
    let mut h = initial_step(&mut f, t0, &y0, &k[0], span, tol)?;
    let mut t = t0;
    let mut y = y0;
    let mut stage = vec![zero; n];
    let mut y_new = vec![zero; n];
    let mut err_vec = vec![zero; n];
    let mut err_old = 1e-4f64;
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut error_estimate = 0.0;
    let mut last_rejected = false;

    loop {
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        if accepted + rejected >= tol.max_steps {
            return Err(IntegrationError::MaxSteps { at: t, steps: accepted + rejected });
        }
        if h < tol.min_step && remaining > tol.min_step {
            return Err(IntegrationError::StepUnderflow { at: t, step: h });
        }
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        let hs = step * dir;

        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += kj[i] * (a * hs);
                    }
                }
                stage[i] = acc;
            }
            call(&mut f, t + C[s] * hs, &stage, &mut k[s])?;
        }
        // stage 6 is the fifth-order solution (FSAL)
        y_new.copy_from_slice(&stage);
        let mut local_max = 0.0f64;
        for i in 0..n {
            let mut e = zero;
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += kj[i] * (E[j] * hs);
                }
            }
            err_vec[i] = e;
            local_max = local_max.max(e.norm());
        }
        let err = {
            let nn = n as f64;
            (err_vec
                .iter()
                .zip(y.iter().zip(&y_new))
                .map(|(e, (a, b))| {
                    let sc = tol.abs + tol.rel * a.norm().max(b.norm());
                    (e.norm() / sc).powi(2)
                })
                .sum::<f64>()
                / nn)
                .sqrt()
        };
        if !err.is_finite() {
            return Err(IntegrationError::NonFinite { at: t });
        }

        if err <= 1.0 {
            accepted += 1;
            error_estimate += local_max;
            t = if last { t1 } else { t + hs };
            std::mem::swap(&mut y, &mut y_new);
            let (first, rest) = k.split_at_mut(1);
            first[0].copy_from_slice(&rest[5]);
            let err_c = err.max(1e-10);
            let mut fac = SAFETY * err_c.powf(-(0.2 - 0.75 * BETA)) * err_old.powf(BETA);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if last_rejected {
                fac = fac.min(1.0);
            }
            err_old = err.max(1e-4);
            h = step * fac;
            last_rejected = false;
            if last {
                break;
            }
        } else {
            rejected += 1;
            let fac = (SAFETY * err.powf(-0.2)).max(FAC_MIN);
            h = step * fac;
            last_rejected = true;
        }
    }
    Ok(Outcome { y, accepted, rejected, error_estimate })
}
