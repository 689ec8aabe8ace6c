use crate::grid::{Field, Grid};

use super::cg::solve_shifted_laplacian;
use super::{SolverConfig, SolverError};

/// Coefficients of the linear problem `a ∂t z + (∂t a) z − Δz = b`, sampled per step.
///
/// `a[0]` belongs to the initial time; `dt_a[n]`, `b[n]` and `a[n + 1]` to the end of step `n`.
/// `dt_a` is the backward difference `(aⁿ⁺¹ − aⁿ)/τ`, and `b` is chosen so that the chemical
/// potential of the run that produced the coefficients solves the replay exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenCoefficients {
    pub times: Vec<f64>,
    pub steps: Vec<f64>,
    pub a: Vec<Field>,
    pub dt_a: Vec<Field>,
    pub b: Vec<Field>,
}

impl FrozenCoefficients {
    pub fn new(a0: Field) -> Self {
        Self { times: vec![0.0], steps: Vec::new(), a: vec![a0], dt_a: Vec::new(), b: Vec::new() }
    }

    pub fn push(&mut self, t: f64, tau: f64, a: Field, b: Field) {
        let prev = self.a.last().expect("initial coefficient present");
        let dt_a = a.zip_map(prev, |new, old| (new - old) / tau).expect("coefficients share a grid");
        self.times.push(t);
        self.steps.push(tau);
        self.a.push(a);
        self.dt_a.push(dt_a);
        self.b.push(b);
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn grid(&self) -> &Grid {
        self.a[0].grid()
    }

    /// Adds `delta` to every value of `b`.
    pub fn perturb_b(&mut self, delta: f64) {
        for b in &mut self.b {
            b.values_mut().iter_mut().for_each(|v| *v += delta);
        }
    }

    fn check(&self) -> Result<(), SolverError> {
        let n = self.steps.len();
        if self.times.len() != n + 1 || self.a.len() != n + 1 || self.dt_a.len() != n || self.b.len() != n {
            return Err(SolverError::Frozen("series lengths disagree".into()));
        }
        let grid = self.grid();
        let fields = self.a.iter().chain(&self.dt_a).chain(&self.b);
        if fields.clone().any(|f| f.grid() != grid) {
            return Err(SolverError::Frozen("series live on different grids".into()));
        }
        for (k, a) in self.a.iter().enumerate() {
            if a.min() < 1.0 - 1e-12 {
                return Err(SolverError::Frozen(format!(
                    "a >= 1 violated at record {k} (min a = {})",
                    a.min()
                )));
            }
        }
        Ok(())
    }
}

/// Integrates the frozen-coefficient problem from `z(0) = mu0` with the same semi-implicit step
/// as the chemical-potential update, `D = aⁿ⁺¹ + τ (∂t a)ⁿ⁺¹`. Returns `z` at every record.
pub fn solve_frozen_linear(
    coeffs: &FrozenCoefficients,
    mu0: &Field,
    cfg: &SolverConfig,
) -> Result<Vec<Field>, SolverError> {
    coeffs.check()?;
    let grid = *coeffs.grid();
    if mu0.grid() != &grid {
        return Err(SolverError::Frozen("initial datum lives on a different grid".into()));
    }
    let max_iter = cfg.linear_max_for(grid.cell_count());
    let mut out = vec![mu0.clone()];
    for n in 0..coeffs.step_count() {
        let tau = coeffs.steps[n];
        let a = coeffs.a[n + 1].values();
        let d: Vec<f64> = a.iter().zip(coeffs.dt_a[n].values()).map(|(a, da)| a + tau * da).collect();
        let min_d = d.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min_d > 0.5) {
            return Err(SolverError::Frozen(format!(
                "diagonal coefficient min D = {min_d} <= 1/2 in step {n} (t = {})",
                coeffs.times[n]
            )));
        }
        let z = out.last().expect("nonempty").values();
        let shift: Vec<f64> = d.iter().map(|d| d / tau).collect();
        let rhs: Vec<f64> = (0..z.len()).map(|i| a[i] / tau * z[i] + coeffs.b[n].values()[i]).collect();
        let mut x = z.to_vec();
        solve_shifted_laplacian(&grid, &shift, &rhs, &mut x, cfg.linear_tol, max_iter).map_err(|o| {
            SolverError::NonConvergence {
                t: coeffs.times[n],
                reason: format!(
                    "frozen replay: conjugate gradients stopped after {} iterations at relative residual {:e}",
                    o.iterations, o.relative_residual
                ),
            }
        })?;
        out.push(Field::new(grid, x).expect("same grid"));
    }
    Ok(out)
}
