//! Parameterized families of Fuchsian systems, the Schlesinger flow, and
//! invariant-based isomonodromy verdicts.

mod family;
mod profile;
mod schlesinger;

use thiserror::Error;

use crate::expr::EvalError;
use crate::fuchsian::{FuchsianError, FuchsianSystem};
use crate::numcore::NumError;
use crate::pathint::IntegrationError;

pub use family::{scalar_twist, twist_samples, ParameterizedFamily, TwistSpec};
pub use profile::{
    check_isomonodromic, check_projectively_isomonodromic, invariant_profile, InvariantProfile, Quantity, Verdict,
    VerdictKind, Witness, DEFAULT_SAMPLES, DEFAULT_THRESHOLD, EPISTEMIC_NOTE,
};
pub use schlesinger::{integrate_schlesinger, schlesinger_rhs, SchlesingerTrajectory, COLLISION_GUARD};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeformationError {
    #[error("{0}")]
    Invalid(String),
    #[error("parameter {t} outside [{lo}, {hi}]")]
    ParameterOutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("cannot evaluate {what} at t = {t}: {source}")]
    Eval { what: String, t: f64, source: EvalError },
    #[error("system at t = {t} is invalid: {source}")]
    System { t: f64, source: FuchsianError },
    #[error("poles {i} and {j} coincide")]
    PositionCollision { i: usize, j: usize },
    #[error("poles {i} and {j} come within {guard:e} of each other at t = {t}")]
    CollisionAhead { i: usize, j: usize, t: f64, guard: f64 },
    #[error("profile needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("monodromy at t = {t} failed: {source}")]
    Monodromy { t: f64, source: FuchsianError },
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// A concrete member of a family together with its parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationSample {
    pub t: f64,
    pub system: FuchsianSystem,
}
