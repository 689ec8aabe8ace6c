//! Numerical studies: manufactured-solution convergence, stabilization of regularity norms,
//! the vanishing-diffusion limit, continuous dependence on the data and the frozen-coefficient
//! replay.
//!
//! Each study fans its independent runs out over the rayon pool and returns a [`StudyResult`].

mod dependence;
mod diffusion;
mod frozen;
mod mms;
mod regularity;

pub use dependence::{continuous_dependence_study, perturbed_spec};
pub use diffusion::vanishing_diffusion_study;
pub use frozen::frozen_linear_consistency;
pub use mms::{mms_convergence, mms_convergence_from, mms_equilibrium_error, Manufactured};
pub use regularity::{regularity_norm_study, REGULARITY_NORMS};

use std::fmt;
use std::io::Write;

use thiserror::Error;

use crate::grid::{Field, SpaceTimeNorm};
use crate::model::{ModelError, ValidationReport};
use crate::solver::SolverError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("{0}")]
    Precondition(String),
    #[error("data rejected by validation ({what}):\n{report}")]
    Rejected { what: String, report: ValidationReport },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Measurements for one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub parameter: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub study: &'static str,
    pub parameter_name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<StudyRow>,
    /// Fitted convergence orders; empty unless at least three levels were measured.
    pub orders: Vec<(String, f64)>,
    pub checks: Vec<StudyCheck>,
    pub passed: bool,
}

impl StudyResult {
    fn new(study: &'static str, parameter_name: &'static str, columns: Vec<&'static str>) -> Self {
        Self {
            study,
            parameter_name,
            columns,
            rows: Vec::new(),
            orders: Vec::new(),
            checks: Vec::new(),
            passed: true,
        }
    }

    fn push_row(&mut self, parameter: f64, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(StudyRow { parameter, values });
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.passed &= passed;
        self.checks.push(StudyCheck { name: name.into(), passed, detail: detail.into() });
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r.values[k]).collect())
    }

    pub fn order(&self, name: &str) -> Option<f64> {
        self.orders.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn find_check(&self, name: &str) -> Option<&StudyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Header `parameter_name, columns..., passed`; one line per row.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![self.parameter_name];
        header.extend(&self.columns);
        header.push("passed");
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.parameter.to_string()];
            rec.extend(row.values.iter().map(f64::to_string));
            rec.push(self.passed.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

impl fmt::Display for StudyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "study: {}", self.study)?;
        for (name, order) in &self.orders {
            writeln!(f, "order {name}: {order:.4}")?;
        }
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag} {}: {}", c.name, c.detail)?;
        }
        write!(f, "overall: {}", if self.passed { "PASS" } else { "FAIL" })
    }
}

/// Least-squares slope of `log(errors)` against `log(sizes)`.
pub fn fitted_order(sizes: &[f64], errors: &[f64]) -> f64 {
    let n = sizes.len() as f64;
    let xs: Vec<f64> = sizes.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `‖a − b‖_{L²(Q)}` over matching series, right-endpoint rule in time.
pub(crate) fn spacetime_l2_distance(times: &[f64], a: &[Field], b: &[Field]) -> f64 {
    let mut acc = SpaceTimeNorm::new(2.0).expect("valid exponent");
    for n in 1..times.len() {
        let diff = a[n].zip_map(&b[n], |x, y| x - y).expect("same grid");
        acc.accumulate(&diff, times[n] - times[n - 1]);
    }
    acc.value()
}

fn relative_change(coarse: f64, fine: f64) -> f64 {
    if fine == 0.0 && coarse == 0.0 {
        0.0
    } else {
        (fine - coarse).abs() / fine.abs().max(coarse.abs())
    }
}
