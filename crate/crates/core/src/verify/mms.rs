use std::f64::consts::PI;

use rayon::prelude::*;

use crate::grid::SpaceTimeNorm;
use crate::model::{validate, Coupling, InitialDatum, Potential, ProblemSpec};
use crate::solver::{run_with, Forcing, RunOptions, SolverConfig, Stepper};

use super::{fitted_order, StudyResult, VerifyError};

/// Manufactured pair `μ* = e^{−t}(1 + ½cos(πx₁/L₁))`, `ρ* = ρ_mid + ρ_amp cos(πx₁/L₁) e^{−t}`
/// together with the source terms that make it an exact solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Manufactured {
    /// Problem data apart from the grid and the initial data.
    pub base: ProblemSpec,
    pub rho_mid: f64,
    pub rho_amp: f64,
}

impl Manufactured {
    /// Unit box, logarithmic potential (1, 3), `g = r(1 − r)`, `ρ ∈ [0.1, 0.9]`, `T = 0.5`.
    pub fn new(dim: usize) -> Self {
        let base = ProblemSpec {
            lengths: vec![1.0; dim],
            cells: vec![16; dim],
            final_time: 0.5,
            ..ProblemSpec::benchmark()
        };
        Self { base, rho_mid: 0.5, rho_amp: 0.2 }
    }

    fn wave(&self, x: &[f64]) -> f64 {
        (PI * x[0] / self.base.lengths[0]).cos()
    }

    pub fn mu(&self, x: &[f64], t: f64) -> f64 {
        (-t).exp() * (1.0 + 0.5 * self.wave(x))
    }

    pub fn rho(&self, x: &[f64], t: f64) -> f64 {
        self.rho_mid + self.rho_amp * self.wave(x) * (-t).exp()
    }

    /// The manufactured order parameter must stay in `[ρ_min, ρ_max]` for all times.
    pub fn check(&self) -> Result<(), VerifyError> {
        let (lo, hi) = (self.rho_mid - self.rho_amp.abs(), self.rho_mid + self.rho_amp.abs());
        if lo < self.base.rho_min || hi > self.base.rho_max {
            return Err(VerifyError::Precondition(format!(
                "manufactured rho ranges over [{lo}, {hi}], outside [{}, {}]",
                self.base.rho_min, self.base.rho_max
            )));
        }
        Ok(())
    }

    pub fn spec(&self, cells_per_axis: usize) -> Result<ProblemSpec, VerifyError> {
        let l = self.base.lengths[0];
        Ok(ProblemSpec {
            cells: vec![cells_per_axis; self.base.dimension()],
            mu0: InitialDatum::expression(&format!("1 + 0.5*cos(pi*x/{l:?})"))?,
            rho0: InitialDatum::expression(&format!(
                "{:?} + {:?}*cos(pi*x/{l:?})",
                self.rho_mid, self.rho_amp
            ))?,
            ..self.base.clone()
        })
    }

    /// `(L²(Q) error of μ, L²(Q) error of ρ)` on `cells_per_axis` cells with `steps` uniform steps.
    pub fn errors(
        &self,
        cells_per_axis: usize,
        steps: usize,
        cfg: &SolverConfig,
    ) -> Result<(f64, f64), VerifyError> {
        self.check()?;
        let spec = self.spec(cells_per_axis)?;
        let report = validate(&spec);
        if !report.passed {
            return Err(VerifyError::Rejected { what: "manufactured data".into(), report });
        }
        let t_end = spec.final_time;
        let cfg = SolverConfig { tau: t_end / steps as f64, ..cfg.clone() };
        let mut stepper = Stepper::new(&spec, cfg)?.with_forcing(self);
        let mut state = stepper.scheme().initial_state()?;
        let grid = *stepper.scheme().grid();
        let dim = grid.dimension();
        let mut e_mu = SpaceTimeNorm::new(2.0).expect("valid exponent");
        let mut e_rho = e_mu;
        while state.t < t_end {
            let (mut next, rep) = stepper.advance(&state, t_end - state.t)?;
            if (t_end - next.t).abs() <= 1e-9 * rep.tau {
                next.t = t_end;
            }
            let t = next.t;
            let mut sq = (0.0, 0.0);
            for i in 0..grid.cell_count() {
                let x = &grid.center(i)[..dim];
                sq.0 += (next.mu().values()[i] - self.mu(x, t)).powi(2);
                sq.1 += (next.rho().values()[i] - self.rho(x, t)).powi(2);
            }
            e_mu.accumulate_integral(sq.0 * grid.cell_volume(), rep.tau);
            e_rho.accumulate_integral(sq.1 * grid.cell_volume(), rep.tau);
            state = next;
        }
        Ok((e_mu.value(), e_rho.value()))
    }
}

impl Forcing for Manufactured {
    fn rho_source(&self, x: &[f64], t: f64) -> f64 {
        let k = PI / self.base.lengths[0];
        let r = self.rho(x, t);
        let dt_r = -(r - self.rho_mid);
        let lap_r = -k * k * (r - self.rho_mid);
        let df = self.base.potential.first(r).unwrap_or(f64::NAN);
        dt_r - self.base.sigma * lap_r + df - self.mu(x, t) * self.base.coupling.first(r)
    }

    fn mu_source(&self, x: &[f64], t: f64) -> f64 {
        let k = PI / self.base.lengths[0];
        let (m, r) = (self.mu(x, t), self.rho(x, t));
        let dt_m = -m;
        let dt_r = -(r - self.rho_mid);
        let lap_m = -k * k * 0.5 * (-t).exp() * self.wave(x);
        let g = &self.base.coupling;
        (1.0 + 2.0 * g.value(r)) * dt_m + m * g.first(r) * dt_r - lap_m
    }
}

const SPACE_BASE_CELLS: usize = 16;
const TIME_BASE_STEPS: usize = 25;

/// Cells per axis of the fixed mesh used for the temporal ladder.
fn temporal_cells(dim: usize) -> usize {
    [256, 64, 32][dim - 1]
}

/// [`mms_convergence_from`] starting at level 0.
pub fn mms_convergence(dim: usize, levels: usize) -> Result<StudyResult, VerifyError> {
    mms_convergence_from(dim, levels, 0)
}

/// Manufactured-solution convergence on two ladders.
///
/// Level `k` of the space-time ladder uses `16·2^k` cells per axis and `τ = h²`, so the error
/// behaves like `h²`; the temporal ladder keeps a fine mesh and uses `τ = T/(25·2^k)`.
/// Orders are least-squares fits of the `L²(Q)` error of `(μ, ρ)`.
pub fn mms_convergence_from(dim: usize, levels: usize, base_level: usize) -> Result<StudyResult, VerifyError> {
    if !(1..=3).contains(&dim) {
        return Err(VerifyError::Precondition(format!("dimension must be 1, 2 or 3 (got {dim})")));
    }
    if levels < 3 {
        return Err(VerifyError::Precondition(format!("need >= 3 levels (got {levels})")));
    }
    let m = Manufactured::new(dim);
    m.check()?;
    let t_end = m.base.final_time;
    let cfg = SolverConfig::default();
    // (ladder, level, cells, steps)
    let mut jobs = Vec::new();
    for k in base_level..base_level + levels {
        let n = SPACE_BASE_CELLS << k;
        let steps = (t_end * (n * n) as f64).round() as usize;
        jobs.push((0usize, k, n, steps));
    }
    for k in base_level..base_level + levels {
        jobs.push((1, k, temporal_cells(dim), TIME_BASE_STEPS << k));
    }
    let errors: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(_, _, n, steps)| m.errors(n, steps, &cfg))
        .collect::<Result<_, _>>()?;

    let mut out = StudyResult::new(
        "mms_convergence",
        "level",
        vec!["ladder", "h", "tau", "error_mu", "error_rho", "error"],
    );
    let mut ladders: [(Vec<f64>, Vec<f64>, Vec<f64>); 2] = Default::default();
    for (&(ladder, k, n, steps), &(em, er)) in jobs.iter().zip(&errors) {
        let h = m.base.lengths[0] / n as f64;
        let tau = t_end / steps as f64;
        let e = em.hypot(er);
        out.push_row(k as f64, vec![ladder as f64, h, tau, em, er, e]);
        ladders[ladder].0.push(h);
        ladders[ladder].1.push(tau);
        ladders[ladder].2.push(e);
    }
    let spatial = fitted_order(&ladders[0].0, &ladders[0].2);
    let temporal = fitted_order(&ladders[1].1, &ladders[1].2);
    out.orders.push(("spatial".into(), spatial));
    out.orders.push(("temporal".into(), temporal));
    out.check(
        "spatial order in [1.8, 2.2]",
        (1.8..=2.2).contains(&spatial),
        format!("fitted {spatial:.4} with tau = h^2"),
    );
    out.check(
        "temporal order in [0.8, 1.2]",
        (0.8..=1.2).contains(&temporal),
        format!("fitted {temporal:.4} on {} cells per axis", temporal_cells(dim)),
    );
    let decreasing = ladders.iter().all(|l| l.2.windows(2).all(|w| w[1] < w[0]));
    out.check("errors decrease under refinement", decreasing, format!("{:?}", errors));
    let eq = mms_equilibrium_error(dim)?;
    out.check(
        "equilibrium data reproduced without forcing",
        eq <= 1e-12,
        format!("max deviation {eq:e}"),
    );
    Ok(out)
}

/// Largest pointwise deviation from the stationary pair `μ ≡ 1`, `ρ ≡ 1/2` (where
/// `f'(ρ) = μ g'(ρ) = 0`) over an unforced run.
pub fn mms_equilibrium_error(dim: usize) -> Result<f64, VerifyError> {
    let spec = ProblemSpec {
        lengths: vec![1.0; dim],
        cells: vec![16; dim],
        final_time: 0.5,
        potential: Potential::Logarithmic { c1: 1.0, c2: 3.0 },
        coupling: Coupling::ConcaveQuadratic,
        mu0: InitialDatum::constant(1.0),
        rho0: InitialDatum::constant(0.5),
        ..ProblemSpec::benchmark()
    };
    let opts = RunOptions { record_trajectory: true, ..Default::default() };
    let rep = run_with(&spec, &SolverConfig::with_tau(0.01), &opts)?;
    let tr = rep.trajectory.expect("trajectory requested");
    let dev = tr
        .mu
        .iter()
        .zip(&tr.rho)
        .map(|(m, r)| m.map(|v| v - 1.0).norm_linf() + r.map(|v| v - 0.5).norm_linf())
        .fold(0.0, f64::max);
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forcing_vanishes_for_exact_time_derivative_consistency() {
        // Residual of the ρ-equation evaluated by finite differences in time.
        let m = Manufactured::new(1);
        let (x, t, e) = ([0.3], 0.2, 1e-6);
        let dt_r = (m.rho(&x, t + e) - m.rho(&x, t - e)) / (2.0 * e);
        let k = PI;
        let lap = -k * k * (m.rho(&x, t) - 0.5);
        let expect = dt_r - 0.0 * lap + m.base.potential.first(m.rho(&x, t)).unwrap()
            - m.mu(&x, t) * m.base.coupling.first(m.rho(&x, t));
        assert!((m.rho_source(&x, t) - expect).abs() < 1e-8);
        let dt_m = (m.mu(&x, t + e) - m.mu(&x, t - e)) / (2.0 * e);
        let lap_m = (m.mu(&[0.3 + 1e-4], t) - 2.0 * m.mu(&x, t) + m.mu(&[0.3 - 1e-4], t)) / 1e-8;
        let r = m.rho(&x, t);
        let g = &m.base.coupling;
        let expect = (1.0 + 2.0 * g.value(r)) * dt_m + m.mu(&x, t) * g.first(r) * dt_r - lap_m;
        assert!((m.mu_source(&x, t) - expect).abs() < 1e-5);
    }

    #[test]
    fn rejects_manufactured_rho_outside_bounds() {
        let m = Manufactured { rho_amp: 0.45, ..Manufactured::new(1) };
        assert!(matches!(m.errors(16, 8, &SolverConfig::default()), Err(VerifyError::Precondition(_))));
    }

    #[test]
    fn requires_three_levels() {
        assert!(mms_convergence(1, 2).is_err());
    }

    #[test]
    fn equilibrium_is_exact() {
        assert_eq!(mms_equilibrium_error(1).unwrap(), 0.0);
    }
}
