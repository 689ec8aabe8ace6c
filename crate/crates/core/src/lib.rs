//! Numerical solver for a phase-field system with a degenerate chemical-potential equation.
//!
//! The chemical potential `μ ≥ 0` and the order parameter `ρ ∈ [ρ_min, ρ_max]` satisfy
//!
//! ```text
//! (1 + 2g(ρ)) ∂tμ + μ g'(ρ) ∂tρ − Δμ = 0,      ∂ν μ = 0 on the boundary,
//! ∂tρ − σΔρ + f'(ρ) = μ g'(ρ),                 ∂ν ρ = 0 when σ > 0,
//! ```
//!
//! on a box. [`model`] holds the data, [`grid`] the discretization, [`solver`] the time
//! integration and [`verify`] the numerical studies built on top of it.

pub mod grid;
pub mod model;
pub mod solver;
pub mod verify;
