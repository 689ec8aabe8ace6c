use std::fmt;

use crate::grid::{Field, Grid};
use crate::model::{ConvexSplit, Coupling, ModelError, ProblemSpec};

use super::cg::{solve_shifted_laplacian, CgOutcome};
use super::scalar::{solve_monotone, ScalarFailure};
use super::{SolverConfig, SolverError};

/// Time level of the discrete solution together with `u = (1 + 2g(ρ)) μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    mu: Field,
    rho: Field,
    u: Field,
}

impl State {
    pub fn new(t: f64, mu: Field, rho: Field, coupling: &Coupling) -> Result<Self, ModelError> {
        let u = rho.zip_map(&mu, |r, m| (1.0 + 2.0 * coupling.value(r)) * m)?;
        Ok(Self { t, mu, rho, u })
    }

    pub fn mu(&self) -> &Field {
        &self.mu
    }

    pub fn rho(&self) -> &Field {
        &self.rho
    }

    pub fn u(&self) -> &Field {
        &self.u
    }

    pub fn grid(&self) -> &Grid {
        self.mu.grid()
    }

    pub fn into_fields(self) -> (Field, Field) {
        (self.mu, self.rho)
    }
}

/// Why a single attempt at a time step failed; the stepper reacts by halving `tau`.
#[derive(Debug, Clone, PartialEq)]
pub enum StepFailure {
    Newton { cell: usize, failure: ScalarFailure },
    GaussSeidel { sweeps: usize, change: f64 },
    SmallCoefficient { min_d: f64 },
    Linear(CgOutcome),
    Model(ModelError),
}

impl fmt::Display for StepFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepFailure::Newton { cell, failure } => {
                write!(f, "order-parameter Newton solve failed in cell {cell}: {failure:?}")
            }
            StepFailure::GaussSeidel { sweeps, change } => {
                write!(f, "Gauss-Seidel stalled after {sweeps} sweeps (last change {change:e})")
            }
            StepFailure::SmallCoefficient { min_d } => {
                write!(f, "chemical-potential diagonal coefficient min D = {min_d} <= 1/2")
            }
            StepFailure::Linear(out) => write!(
                f,
                "conjugate gradients stopped after {} iterations at relative residual {:e}",
                out.iterations, out.relative_residual
            ),
            StepFailure::Model(e) => write!(f, "{e}"),
        }
    }
}

/// Work counters of one order-parameter update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RhoStep {
    /// Largest Newton iteration count over all cells (and sweeps).
    pub newton_iterations: usize,
    pub sweeps: usize,
}

/// The discrete operators of one problem instance.
#[derive(Debug, Clone)]
pub struct Scheme<'a> {
    spec: &'a ProblemSpec,
    split: ConvexSplit,
    grid: Grid,
}

impl<'a> Scheme<'a> {
    pub fn new(spec: &'a ProblemSpec) -> Result<Self, SolverError> {
        let split = spec.potential.split()?;
        let grid = spec.grid()?;
        Ok(Self { spec, split, grid })
    }

    pub fn spec(&self) -> &ProblemSpec {
        self.spec
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn initial_state(&self) -> Result<State, SolverError> {
        let (mu, rho) = self.spec.initial_fields()?;
        Ok(State::new(0.0, mu, rho, &self.spec.coupling)?)
    }

    pub fn state(&self, t: f64, mu: Field, rho: Field) -> Result<State, SolverError> {
        Ok(State::new(t, mu, rho, &self.spec.coupling)?)
    }

    /// Explicit part `ρⁿ − τ f2'(ρⁿ) + τ μⁿ g'(ρⁿ) (+ τ source)` of the order-parameter update.
    fn rho_rhs(
        &self,
        mu: &Field,
        rho: &Field,
        tau: f64,
        source: Option<&[f64]>,
    ) -> Result<Vec<f64>, StepFailure> {
        let concave = self.split.remainder();
        let g = &self.spec.coupling;
        rho.values()
            .iter()
            .zip(mu.values())
            .enumerate()
            .map(|(i, (&r, &m))| {
                let df2 = concave.first(r).map_err(StepFailure::Model)?;
                let s = source.map_or(0.0, |s| s[i]);
                Ok(r - tau * df2 + tau * m * g.first(r) + tau * s)
            })
            .collect()
    }

    /// Solves `ρⁿ⁺¹ + τ f1'(ρⁿ⁺¹) − τσ Δρⁿ⁺¹ = ρⁿ − τ f2'(ρⁿ) + τ μⁿ g'(ρⁿ)` cell by cell
    /// (σ = 0) or by nonlinear Gauss–Seidel sweeps (σ > 0).
    pub fn step_rho(
        &self,
        mu: &Field,
        rho: &Field,
        tau: f64,
        cfg: &SolverConfig,
        source: Option<&[f64]>,
    ) -> Result<(Field, RhoStep), StepFailure> {
        let rhs = self.rho_rhs(mu, rho, tau, source)?;
        let convex = self.split.convex();
        let dconvex = |r: f64| {
            (
                convex.first(r).unwrap_or(f64::NAN),
                convex.second(r).unwrap_or(f64::NAN),
            )
        };
        let domain = self.split.domain();
        let solve = |alpha: f64, beta: f64, guess: f64, cell: usize| {
            solve_monotone(
                alpha,
                tau,
                beta,
                dconvex,
                domain,
                cfg.interior_margin,
                guess,
                cfg.newton_tol,
                cfg.newton_max,
            )
            .map_err(|failure| StepFailure::Newton { cell, failure })
        };

        let mut report = RhoStep::default();
        let mut next = rho.values().to_vec();
        let sigma = self.spec.sigma;
        if sigma == 0.0 {
            for (i, r) in next.iter_mut().enumerate() {
                let root = solve(1.0, rhs[i], *r, i)?;
                report.newton_iterations = report.newton_iterations.max(root.iterations);
                *r = root.root;
            }
            return Ok((Field::new(self.grid, next).expect("same grid"), report));
        }

        let ts = tau * sigma;
        let mut change = f64::INFINITY;
        for sweep in 1..=cfg.gs_sweep_max {
            change = 0.0;
            for i in 0..next.len() {
                let mut coupling = 0.0;
                self.grid.for_each_neighbour(i, |j, w| coupling += w * next[j]);
                let alpha = 1.0 + ts * self.grid.laplacian_diagonal(i);
                let root = solve(alpha, rhs[i] + ts * coupling, next[i], i)?;
                report.newton_iterations = report.newton_iterations.max(root.iterations);
                change = f64::max(change, (root.root - next[i]).abs());
                next[i] = root.root;
            }
            report.sweeps = sweep;
            if change <= cfg.newton_tol {
                return Ok((Field::new(self.grid, next).expect("same grid"), report));
            }
        }
        Err(StepFailure::GaussSeidel { sweeps: cfg.gs_sweep_max, change })
    }

    /// Pointwise `a = 1 + 2g(ρⁿ⁺¹)` and `D = a + g'(ρⁿ⁺¹)(ρⁿ⁺¹ − ρⁿ)`.
    pub fn mu_coefficients(&self, rho_old: &Field, rho_new: &Field) -> (Vec<f64>, Vec<f64>) {
        let g = &self.spec.coupling;
        rho_new
            .values()
            .iter()
            .zip(rho_old.values())
            .map(|(&r1, &r0)| {
                let a = 1.0 + 2.0 * g.value(r1);
                (a, a + g.first(r1) * (r1 - r0))
            })
            .unzip()
    }

    /// Solves `(D/τ) μⁿ⁺¹ − Δμⁿ⁺¹ = (a/τ) μⁿ (+ source)` by conjugate gradients.
    ///
    /// Fails when `min D ≤ 1/2`, which keeps the matrix an M-matrix with margin.
    pub fn step_mu(
        &self,
        mu: &Field,
        rho_old: &Field,
        rho_new: &Field,
        tau: f64,
        cfg: &SolverConfig,
        source: Option<&[f64]>,
    ) -> Result<(Field, CgOutcome), StepFailure> {
        let (a, d) = self.mu_coefficients(rho_old, rho_new);
        let min_d = d.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min_d > 0.5) {
            return Err(StepFailure::SmallCoefficient { min_d });
        }
        let shift: Vec<f64> = d.iter().map(|d| d / tau).collect();
        let rhs: Vec<f64> = a
            .iter()
            .zip(mu.values())
            .enumerate()
            .map(|(i, (a, m))| (a / tau) * m + source.map_or(0.0, |s| s[i]))
            .collect();
        let mut x = mu.values().to_vec();
        let max_iter = cfg.linear_max_for(self.grid.cell_count());
        let out = solve_shifted_laplacian(&self.grid, &shift, &rhs, &mut x, cfg.linear_tol, max_iter)
            .map_err(StepFailure::Linear)?;
        Ok((Field::new(self.grid, x).expect("same grid"), out))
    }
}
