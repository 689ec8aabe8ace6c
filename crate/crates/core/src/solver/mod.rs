//! Time integration of the coupled system.
//!
//! Each step first updates the order parameter by convex splitting (implicit `f1'`,
//! explicit `f2'` and `μ g'(ρ)`), then solves a linear, M-matrix system for the chemical
//! potential. Both substeps share one time step, which is halved when either fails.

pub mod cg;
mod frozen;
mod run;
pub mod scalar;
mod scheme;
mod stepper;

pub use frozen::{solve_frozen_linear, FrozenCoefficients};
pub use run::{run, run_with, Forcing, RunOptions, RunReport, Snapshot, Trajectory};
pub use scheme::{RhoStep, Scheme, State, StepFailure};
pub use stepper::{advance, energy, StepReport, Stepper};

use thiserror::Error;

use crate::model::{ModelError, ValidationReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("no convergence at t = {t}: {reason}")]
    NonConvergence { t: f64, reason: String },
    #[error("time step fell below tau_min = {tau_min} at t = {t}: {reason}")]
    TauUnderflow { t: f64, tau_min: f64, reason: String },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("problem data failed validation:\n{0}")]
    Invalid(ValidationReport),
    #[error("frozen coefficients: {0}")]
    Frozen(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Tolerances and limits for the time stepper.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tau: f64,
    pub newton_tol: f64,
    pub newton_max: usize,
    /// Relative residual target of the conjugate-gradient solves.
    pub linear_tol: f64,
    /// Iteration cap of the conjugate-gradient solves; `None` means 10 × cell count.
    pub linear_max: Option<usize>,
    pub gs_sweep_max: usize,
    pub tau_min: f64,
    /// Distance kept from the endpoints of a bounded potential domain.
    pub interior_margin: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tau: 1e-3,
            newton_tol: 1e-12,
            newton_max: 50,
            linear_tol: 1e-10,
            linear_max: None,
            gs_sweep_max: 200,
            tau_min: 1e-9,
            interior_margin: 1e-14,
        }
    }
}

impl SolverConfig {
    pub fn with_tau(tau: f64) -> Self {
        Self { tau, ..Self::default() }
    }

    pub fn linear_max_for(&self, cells: usize) -> usize {
        self.linear_max.unwrap_or(10 * cells)
    }

    pub fn check(&self) -> Result<(), SolverError> {
        let positive = [
            ("tau", self.tau),
            ("newton_tol", self.newton_tol),
            ("linear_tol", self.linear_tol),
            ("tau_min", self.tau_min),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(SolverError::Config(format!("{name} must be positive (got {v})")));
            }
        }
        if !(self.interior_margin.is_finite() && self.interior_margin >= 0.0) {
            return Err(SolverError::Config("interior_margin must be nonnegative".into()));
        }
        if self.tau <= self.tau_min {
            return Err(SolverError::Config(format!(
                "tau = {} must exceed tau_min = {}",
                self.tau, self.tau_min
            )));
        }
        if self.newton_max == 0 || self.gs_sweep_max == 0 || self.linear_max == Some(0) {
            return Err(SolverError::Config("iteration limits must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let cfg = SolverConfig::default();
        cfg.check().unwrap();
        assert_eq!(cfg.linear_max_for(128), 1280);
    }

    #[test]
    fn config_rejections() {
        assert!(SolverConfig { tau: 0.0, ..Default::default() }.check().is_err());
        assert!(SolverConfig { tau_min: 1.0, ..Default::default() }.check().is_err());
        assert!(SolverConfig { newton_max: 0, ..Default::default() }.check().is_err());
        assert!(SolverConfig { linear_tol: f64::NAN, ..Default::default() }.check().is_err());
    }
}
