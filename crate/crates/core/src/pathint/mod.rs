//! Adaptive integration of linear systems along complex paths, of
//! real-parameter flows, and scalar quadrature.

mod path;
mod rk;

use std::fmt::Display;

use thiserror::Error;

use crate::numcore::{Complex, ComplexMatrix, NumError};

pub use path::{Path, PathSegment, JOIN_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("line segment has coincident endpoints")]
    DegenerateLine,
    #[error("arc radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("arc sweep {0} exceeds a full turn")]
    SweepTooLarge(f64),
    #[error("segment {index} starts {gap:e} away from the end of the previous one")]
    Discontinuous { index: usize, gap: f64 },
    #[error("path has no segments")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("step size {step:e} fell below the minimum at parameter {at}")]
    StepUnderflow { at: f64, step: f64 },
    #[error("step budget of {steps} exhausted at parameter {at}")]
    MaxSteps { at: f64, steps: usize },
    #[error("non-finite state or derivative at parameter {at}")]
    NonFinite { at: f64 },
    #[error("right-hand side failed at parameter {at}: {message}")]
    Rhs { at: f64, message: String },
    #[error("invalid tolerance specification: {0}")]
    InvalidTolerance(String),
    #[error("{0}")]
    Matrix(#[from] NumError),
}

/// Error-control settings for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceSpec {
    pub rel: f64,
    pub abs: f64,
    pub max_steps: usize,
    pub min_step: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self { rel: 1e-10, abs: 1e-12, max_steps: 1_000_000, min_step: 1e-13 }
    }
}

impl ToleranceSpec {
    pub fn new(rel: f64, abs: f64) -> Self {
        Self { rel, abs, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), IntegrationError> {
        if !(self.rel > 0.0 && self.abs > 0.0) {
            return Err(IntegrationError::InvalidTolerance(format!(
                "rel and abs must be positive (rel={}, abs={})",
                self.rel, self.abs
            )));
        }
        if self.max_steps == 0 {
            return Err(IntegrationError::InvalidTolerance("max_steps must be at least 1".into()));
        }
        if !(self.min_step >= 0.0) {
            return Err(IntegrationError::InvalidTolerance("min_step must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Integrated value with step diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationResult<T> {
    pub value: T,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    /// Sum of the absolute local error estimates over accepted steps.
    pub error_estimate: f64,
}

/// Transports Y along `path` for dY/dx = A(x)·Y, starting from `y0` at `path.start()`.
pub fn integrate_linear<F, E>(
    coeff: F,
    path: &Path,
    y0: &ComplexMatrix,
    tol: &ToleranceSpec,
) -> Result<IntegrationResult<ComplexMatrix>, IntegrationError>
where
    F: Fn(Complex) -> Result<ComplexMatrix, E>,
    E: Display,
{
    let n = y0.dim();
    let mut y = y0.as_slice().to_vec();
    let mut accepted = 0;
    let mut rejected = 0;
    let mut error_estimate = 0.0;
    for seg in path.segments() {
        let rhs = |s: f64, state: &[Complex], out: &mut [Complex]| -> Result<(), String> {
            let a = coeff(seg.point(s)).map_err(|e| e.to_string())?;
            if a.dim() != n {
                return Err(format!("coefficient has dimension {} but state has {}", a.dim(), n));
            }
            let g = seg.tangent(s);
            // out = γ'(s)·A·Y, Y row-major n×n
            for r in 0..n {
                for c in 0..n {
                    let mut acc = Complex::new(0.0, 0.0);
                    for k in 0..n {
                        acc += a[(r, k)] * state[k * n + c];
                    }
                    out[r * n + c] = g * acc;
                }
            }
            Ok(())
        };
        let out = rk::integrate(rhs, 0.0, 1.0, y, tol)?;
        y = out.y;
        accepted += out.accepted;
        rejected += out.rejected;
        error_estimate += out.error_estimate;
    }
    Ok(IntegrationResult {
        value: ComplexMatrix::from_flat(n, &y)?,
        steps_accepted: accepted,
        steps_rejected: rejected,
        error_estimate,
    })
}

/// Integrates s' = rhs(t, s) over the real interval [t0, t1].
pub fn integrate_flow<F, E>(
    mut rhs: F,
    t0: f64,
    t1: f64,
    s0: &[Complex],
    tol: &ToleranceSpec,
) -> Result<IntegrationResult<Vec<Complex>>, IntegrationError>
where
    F: FnMut(f64, &[Complex]) -> Result<Vec<Complex>, E>,
    E: Display,
{
    let n = s0.len();
    let f = |t: f64, y: &[Complex], out: &mut [Complex]| -> Result<(), String> {
        let v = rhs(t, y).map_err(|e| e.to_string())?;
        if v.len() != n {
            return Err(format!("rhs returned {} components, expected {n}", v.len()));
        }
        out.copy_from_slice(&v);
        Ok(())
    };
    let out = rk::integrate(f, t0, t1, s0.to_vec(), tol)?;
    Ok(IntegrationResult {
        value: out.y,
        steps_accepted: out.accepted,
        steps_rejected: out.rejected,
        error_estimate: out.error_estimate,
    })
}

/// ∫_{t0}^{t1} f(t) dt, computed as a flow on a scalar accumulator.
pub fn quadrature<F, E>(mut f: F, t0: f64, t1: f64, tol: &ToleranceSpec) -> Result<Complex, IntegrationError>
where
    F: FnMut(f64) -> Result<Complex, E>,
    E: Display,
{
    let r = integrate_flow(|t, _s: &[Complex]| f(t).map(|v| vec![v]), t0, t1, &[Complex::new(0.0, 0.0)], tol)?;
    Ok(r.value[0])
}
