use crate::model::ProblemSpec;

use super::run::Forcing;
use super::scheme::{Scheme, State, StepFailure};
use super::{SolverConfig, SolverError};

/// Diagnostics of one accepted time step (or of the initial state, with zero counters).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    pub t: f64,
    /// Length of the accepted step; zero for the initial record.
    pub tau: f64,
    pub newton_iterations: usize,
    pub gs_sweeps: usize,
    pub linear_iterations: usize,
    pub halvings: usize,
    /// `max(0, ρ − ρ_max)`.
    pub rho_above: f64,
    /// `max(0, ρ_min − ρ)`.
    pub rho_below: f64,
    /// `max(0, −μ)`.
    pub mu_negative: f64,
    pub energy: f64,
    /// `(Eⁿ⁺¹ − Eⁿ)/τ + ∫|∇μⁿ⁺¹|²`.
    pub dissipation_residual: f64,
    /// Discrete balance of `∫u`, which vanishes up to the linear-solver tolerance.
    pub mass_residual: f64,
}

impl StepReport {
    pub(crate) fn initial(spec: &ProblemSpec, state: &State) -> Self {
        let mut r = StepReport { t: state.t, energy: energy(state), ..Default::default() };
        r.set_violations(spec, state);
        r
    }

    fn set_violations(&mut self, spec: &ProblemSpec, state: &State) {
        self.rho_above = (state.rho().max() - spec.rho_max).max(0.0);
        self.rho_below = (spec.rho_min - state.rho().min()).max(0.0);
        self.mu_negative = (-state.mu().min()).max(0.0);
    }

    /// Largest of the three bound-violation magnitudes.
    pub fn max_violation(&self) -> f64 {
        self.rho_above.max(self.rho_below).max(self.mu_negative)
    }
}

/// `E = ½ ∫ (1 + 2g(ρ)) μ²`.
pub fn energy(state: &State) -> f64 {
    0.5 * state.u().integrate_product(state.mu()).expect("state fields share a grid")
}

/// Advances states with a step size that starts at `cfg.tau` and is only ever halved.
pub struct Stepper<'a> {
    scheme: Scheme<'a>,
    cfg: SolverConfig,
    tau: f64,
    forcing: Option<&'a dyn Forcing>,
}

struct Attempt {
    state: State,
    newton_iterations: usize,
    gs_sweeps: usize,
    linear_iterations: usize,
    mu_source: Option<Vec<f64>>,
}

impl<'a> Stepper<'a> {
    pub fn new(spec: &'a ProblemSpec, cfg: SolverConfig) -> Result<Self, SolverError> {
        cfg.check()?;
        let tau = cfg.tau;
        Ok(Self { scheme: Scheme::new(spec)?, cfg, tau, forcing: None })
    }

    pub fn with_forcing(mut self, forcing: &'a dyn Forcing) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn scheme(&self) -> &Scheme<'a> {
        &self.scheme
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Current step size, after any halvings so far.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    fn sample(&self, t: f64, f: impl Fn(&dyn Forcing, &[f64], f64) -> f64) -> Option<Vec<f64>> {
        let forcing = self.forcing?;
        let grid = self.scheme.grid();
        Some(
            (0..grid.cell_count())
                .map(|i| f(forcing, &grid.center(i)[..grid.dimension()], t))
                .collect(),
        )
    }

    /// Forcing of the chemical-potential equation at time `t`, if any.
    pub fn mu_source(&self, t: f64) -> Option<Vec<f64>> {
        self.sample(t, |f, x, t| f.mu_source(x, t))
    }

    fn attempt(&self, state: &State, dt: f64) -> Result<Attempt, StepFailure> {
        let t_new = state.t + dt;
        let rho_source = self.sample(t_new, |f, x, t| f.rho_source(x, t));
        let mu_source = self.mu_source(t_new);
        let (rho, rs) =
            self.scheme.step_rho(state.mu(), state.rho(), dt, &self.cfg, rho_source.as_deref())?;
        let (mu, cg) =
            self.scheme.step_mu(state.mu(), state.rho(), &rho, dt, &self.cfg, mu_source.as_deref())?;
        let state = State::new(t_new, mu, rho, &self.scheme.spec().coupling).map_err(StepFailure::Model)?;
        Ok(Attempt {
            state,
            newton_iterations: rs.newton_iterations,
            gs_sweeps: rs.sweeps,
            linear_iterations: cg.iterations,
            mu_source,
        })
    }

    /// One step of length `min(tau, dt_limit)`, halving on failure of either substep.
    pub fn advance(&mut self, state: &State, dt_limit: f64) -> Result<(State, StepReport), SolverError> {
        let mut dt = self.tau.min(dt_limit);
        let mut halvings = 0;
        let attempt = loop {
            match self.attempt(state, dt) {
                Ok(a) => break a,
                Err(StepFailure::Model(e)) => return Err(e.into()),
                Err(failure) => {
                    dt *= 0.5;
                    halvings += 1;
                    self.tau = self.tau.min(dt);
                    if dt < self.cfg.tau_min {
                        let reason = failure.to_string();
                        return Err(match failure {
                            StepFailure::SmallCoefficient { .. } => SolverError::TauUnderflow {
                                t: state.t,
                                tau_min: self.cfg.tau_min,
                                reason,
                            },
                            _ => SolverError::NonConvergence { t: state.t, reason },
                        });
                    }
                }
            }
        };
        let report = self.report(state, &attempt, dt, halvings);
        Ok((attempt.state, report))
    }

    fn report(&self, old: &State, a: &Attempt, dt: f64, halvings: usize) -> StepReport {
        let new = &a.state;
        let spec = self.scheme.spec();
        let e_new = energy(new);
        let grad = new.mu().gradient_norm_sq();
        let g = &spec.coupling;
        // ∫[(aⁿ⁺¹ − aⁿ) μⁿ − g'(ρⁿ⁺¹) δρ μⁿ⁺¹] / τ
        let exchange: f64 = (0..new.mu().len())
            .map(|i| {
                let (r0, r1) = (old.rho().values()[i], new.rho().values()[i]);
                let (m0, m1) = (old.mu().values()[i], new.mu().values()[i]);
                let da = 2.0 * (g.value(r1) - g.value(r0));
                da * m0 - g.first(r1) * (r1 - r0) * m1
            })
            .sum::<f64>()
            * self.scheme.grid().cell_volume()
            / dt;
        let source = a
            .mu_source
            .as_ref()
            .map_or(0.0, |s| s.iter().sum::<f64>() * self.scheme.grid().cell_volume());
        let mass = (new.u().integrate() - old.u().integrate()) / dt - exchange - source;
        let mut r = StepReport {
            t: new.t,
            tau: dt,
            newton_iterations: a.newton_iterations,
            gs_sweeps: a.gs_sweeps,
            linear_iterations: a.linear_iterations,
            halvings,
            energy: e_new,
            dissipation_residual: (e_new - energy(old)) / dt + grad,
            mass_residual: mass,
            ..Default::default()
        };
        r.set_violations(spec, new);
        r
    }
}

/// One step of `cfg.tau` (halved as needed) from `state`.
pub fn advance(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    state: &State,
) -> Result<(State, StepReport), SolverError> {
    let mut stepper = Stepper::new(spec, cfg.clone())?;
    stepper.advance(state, cfg.tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Coupling, InitialDatum, Potential};

    #[test]
    fn zero_mu_stays_zero_and_rho_follows_gradient_flow() {
        let spec = ProblemSpec {
            cells: vec![16],
            mu0: InitialDatum::constant(0.0),
            ..ProblemSpec::benchmark()
        };
        let cfg = SolverConfig::with_tau(1e-2);
        let mut stepper = Stepper::new(&spec, cfg).unwrap();
        let mut s = stepper.scheme().initial_state().unwrap();
        for _ in 0..20 {
            let (next, rep) = stepper.advance(&s, 1.0).unwrap();
            assert!(next.mu().values().iter().all(|&m| m == 0.0));
            assert_eq!(rep.energy, 0.0);
            // ρ moves toward the nearest well of f.
            for (r1, r0) in next.rho().values().iter().zip(s.rho().values()) {
                let f1 = spec.potential.first(*r0).unwrap();
                assert!((r1 - r0) * f1 <= 0.0);
            }
            s = next;
        }
    }

    #[test]
    fn report_fields_on_benchmark_step() {
        let spec = ProblemSpec { cells: vec![32], ..ProblemSpec::benchmark() };
        let cfg = SolverConfig::default();
        let s = Scheme::new(&spec).unwrap().initial_state().unwrap();
        let (next, rep) = advance(&spec, &cfg, &s).unwrap();
        assert_eq!(rep.t, 1e-3);
        assert_eq!(rep.tau, 1e-3);
        assert_eq!(rep.halvings, 0);
        assert!(rep.max_violation() == 0.0);
        assert!(rep.linear_iterations > 0);
        assert!(rep.mass_residual.abs() < 1e-6, "{}", rep.mass_residual);
        assert!(rep.energy <= energy(&s) + 1e-12);
        assert_eq!(next.t, 1e-3);
    }

    #[test]
    fn halving_recovers_from_small_coefficient() {
        // Huge mu drives ρ far in one step; D dips below ½ and the step is retried.
        let spec = ProblemSpec {
            cells: vec![8],
            rho_min: -1.0,
            rho_max: 1.0,
            potential: Potential::Quartic,
            coupling: Coupling::polynomial(vec![1.0, 0.0, -1.0]),
            mu0: InitialDatum::constant(50.0),
            rho0: InitialDatum::constant(0.5),
            ..ProblemSpec::benchmark()
        };
        let cfg = SolverConfig::with_tau(0.5);
        let mut stepper = Stepper::new(&spec, cfg).unwrap();
        let s = stepper.scheme().initial_state().unwrap();
        let (_, rep) = stepper.advance(&s, 0.5).unwrap();
        assert!(rep.halvings > 0);
        assert_eq!(stepper.tau(), rep.tau);
        assert!(rep.tau < 0.5);
    }

    #[test]
    fn underflow_reported_with_time() {
        let spec = ProblemSpec {
            cells: vec![8],
            rho_min: -1.0,
            rho_max: 1.0,
            potential: Potential::Quartic,
            coupling: Coupling::polynomial(vec![1.0, 0.0, -1.0]),
            mu0: InitialDatum::constant(50.0),
            rho0: InitialDatum::constant(0.5),
            ..ProblemSpec::benchmark()
        };
        let cfg = SolverConfig { tau: 0.5, tau_min: 0.3, ..Default::default() };
        let err = advance(&spec, &cfg, &Scheme::new(&spec).unwrap().initial_state().unwrap())
            .unwrap_err();
        assert!(matches!(err, SolverError::TauUnderflow { t, .. } if t == 0.0), "{err}");
    }
}
