//! Darboux–Halphen V and Halphen II flows, their Lax x-equation, and an
//! end-to-end check that the Lax monodromy evolves by scalar factors.

mod flows;
mod lax;
mod prop0;

use thiserror::Error;

use crate::fuchsian::FuchsianError;
use crate::numcore::NumError;
use crate::pathint::IntegrationError;

pub use flows::{
    alpha_residues, b_scalars, dhv_rhs, halphen_q, hii_rhs, hii_trajectory, integrate_dhv, DHVState, HIIState,
    HalphenParams, HII_SEPARATION_GUARD, PARAM_TOL,
};
pub use lax::{lax_coefficient, lax_system, LaxParams};
pub use prop0::{verify_prop0, Prop0Config, Prop0Report, Prop0Sample, SignConvention};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HalphenError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("non-finite state component")]
    NonFinite,
    #[error("x{i} and x{j} are {separation:e} apart, below the collision guard")]
    Collision { i: usize, j: usize, separation: f64 },
    #[error("x = {x} coincides with x{pole}")]
    AtPole { x: crate::numcore::Complex, pole: usize },
    #[error("invalid time grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Fuchsian(#[from] FuchsianError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Num(#[from] NumError),
}
