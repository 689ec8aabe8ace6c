//! Potentials, the coupling function, problem data and the structural-assumption checks.

mod coupling;
pub mod expr;
mod polynomial;
mod potential;
mod spec;
pub mod validate;

pub use coupling::Coupling;
pub use expr::{ExprError, Expression};
pub use polynomial::Polynomial;
pub use potential::{ConvexSplit, Potential, SplitPart};
pub use spec::{InitialDatum, ProblemSpec};
pub use validate::{validate, Check, Location, ValidationReport};

use thiserror::Error;

use crate::grid::GridError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("r = {r} lies outside the open domain of the potential")]
    Domain { r: f64 },
    #[error("{0}")]
    InvalidParameter(String),
    #[error("polynomial potential has no declared convex part")]
    MissingSplit,
    #[error("initial data: {0}")]
    InitialData(String),
    #[error(transparent)]
    Expression(#[from] ExprError),
    #[error(transparent)]
    Grid(#[from] GridError),
}
