//! Numerical monodromy laboratory for parameterized Fuchsian systems.

pub mod expr;
pub mod fuchsian;
pub mod halphen;
pub mod cli;
pub mod deformation;
pub mod numcore;
pub mod pathint;

pub use numcore::{Complex, ComplexMatrix};
