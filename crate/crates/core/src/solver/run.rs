use std::io::Write;

use crate::grid::{write_columns_csv, Field, TrajectoryNorms};
use crate::model::{validate, ProblemSpec};

use super::frozen::FrozenCoefficients;
use super::scheme::State;
use super::stepper::{StepReport, Stepper};
use super::{SolverConfig, SolverError};

/// Space-time source terms added to the right-hand sides of the order-parameter and
/// chemical-potential equations; sampled at cell centers at the end of each step.
pub trait Forcing: Sync {
    fn rho_source(&self, x: &[f64], t: f64) -> f64;
    fn mu_source(&self, x: &[f64], t: f64) -> f64;
}

#[derive(Clone, Default)]
pub struct RunOptions<'a> {
    /// Times in `[0, T]` at which the state is stored; steps land on them exactly.
    pub snapshot_times: Vec<f64>,
    /// Keep every intermediate state.
    pub record_trajectory: bool,
    /// Record the frozen coefficients of the linear auxiliary problem.
    pub record_frozen: bool,
    pub forcing: Option<&'a dyn Forcing>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub mu: Field,
    pub rho: Field,
}

impl Snapshot {
    /// Columns `i[,j,k], x[,y,z], mu, rho`.
    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        write_columns_csv(self.mu.grid(), &[("mu", &self.mu), ("rho", &self.rho)], writer)
    }
}

/// Every accepted state of a run, including the initial one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub mu: Vec<Field>,
    pub rho: Vec<Field>,
}

impl Trajectory {
    fn push(&mut self, state: &State) {
        self.times.push(state.t);
        self.mu.push(state.mu().clone());
        self.rho.push(state.rho().clone());
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// One record per accepted step, preceded by the initial-state record.
    pub records: Vec<StepReport>,
    pub snapshots: Vec<Snapshot>,
    pub norms: TrajectoryNorms,
    pub frozen: Option<FrozenCoefficients>,
    pub trajectory: Option<Trajectory>,
    pub final_state: State,
}

impl RunReport {
    pub fn steps(&self) -> usize {
        self.records.len() - 1
    }

    /// Largest bound violation over all records.
    pub fn max_violation(&self) -> f64 {
        self.records.iter().map(StepReport::max_violation).fold(0.0, f64::max)
    }

    pub fn max_abs_dissipation_residual(&self) -> f64 {
        self.records[1..].iter().map(|r| r.dissipation_residual.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_mass_residual(&self) -> f64 {
        self.records[1..].iter().map(|r| r.mass_residual.abs()).fold(0.0, f64::max)
    }
}

/// Integrates from `0` to `spec.final_time`, recording the frozen coefficients.
pub fn run(spec: &ProblemSpec, cfg: &SolverConfig, snapshot_times: &[f64]) -> Result<RunReport, SolverError> {
    let opts = RunOptions {
        snapshot_times: snapshot_times.to_vec(),
        record_frozen: true,
        ..Default::default()
    };
    run_with(spec, cfg, &opts)
}

fn stops(spec: &ProblemSpec, requested: &[f64]) -> Result<Vec<f64>, SolverError> {
    let t_end = spec.final_time;
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(SolverError::Config(format!("final time must be finite and >= 0 (got {t_end})")));
    }
    if let Some(&t) = requested.iter().find(|&&t| !(t >= 0.0 && t <= t_end)) {
        return Err(SolverError::Config(format!("snapshot time {t} outside [0, {t_end}]")));
    }
    let mut out: Vec<f64> = requested.iter().copied().filter(|&t| t > 0.0).collect();
    out.push(t_end);
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

pub fn run_with(spec: &ProblemSpec, cfg: &SolverConfig, opts: &RunOptions<'_>) -> Result<RunReport, SolverError> {
    let report = validate(spec);
    if !report.passed {
        return Err(SolverError::Invalid(report));
    }
    let stops = stops(spec, &opts.snapshot_times)?;
    let mut stepper = Stepper::new(spec, cfg.clone())?;
    if let Some(f) = opts.forcing {
        stepper = stepper.with_forcing(f);
    }
    let coupling = &spec.coupling;
    let a_of = |rho: &Field| rho.map(|r| 1.0 + 2.0 * coupling.value(r));

    let mut state = stepper.scheme().initial_state()?;
    let mut records = vec![StepReport::initial(spec, &state)];
    let mut norms = TrajectoryNorms::default();
    norms.record_state(0.0, state.mu(), state.rho());
    let mut snapshots = Vec::new();
    let wants_snapshot = |t: f64| opts.snapshot_times.contains(&t);
    let snap = |s: &State| Snapshot { t: s.t, mu: s.mu().clone(), rho: s.rho().clone() };
    if wants_snapshot(0.0) {
        snapshots.push(snap(&state));
    }
    let mut trajectory = opts.record_trajectory.then(Trajectory::default);
    if let Some(tr) = trajectory.as_mut() {
        tr.push(&state);
    }
    let mut frozen = opts.record_frozen.then(|| FrozenCoefficients::new(a_of(state.rho())));

    // Times are labelled as anchor + k·τ since the last change of step size, which keeps them
    // free of accumulated rounding.
    let (mut anchor, mut since, mut anchor_tau) = (0.0, 0usize, f64::NAN);
    for &stop in stops.iter().filter(|&&t| t > 0.0) {
        while state.t < stop {
            let remaining = stop - state.t;
            let tau = stepper.tau();
            let limit = if remaining >= tau * (1.0 - 1e-9) { tau } else { remaining };
            let (mut next, mut rep) = stepper.advance(&state, limit)?;
            if rep.tau == anchor_tau {
                since += 1;
            } else {
                (anchor, since, anchor_tau) = (state.t, 1, rep.tau);
            }
            next.t = anchor + since as f64 * anchor_tau;
            if (stop - next.t).abs() <= 1e-9 * rep.tau {
                next.t = stop;
            }
            rep.t = next.t;
            norms.record_step(next.t, rep.tau, state.mu(), next.mu(), next.rho());
            if let Some(fc) = frozen.as_mut() {
                let a_new = a_of(next.rho());
                let a_old = fc.a.last().expect("initial coefficient present");
                let src = stepper.mu_source(next.t);
                let b = (0..a_new.len())
                    .map(|i| {
                        let (r0, r1) = (state.rho().values()[i], next.rho().values()[i]);
                        let jump = a_new.values()[i] - a_old.values()[i];
                        let exchange = next.mu().values()[i] * (jump - coupling.first(r1) * (r1 - r0));
                        exchange / rep.tau + src.as_ref().map_or(0.0, |s| s[i])
                    })
                    .collect();
                let b = Field::new(*a_new.grid(), b).expect("same grid");
                fc.push(next.t, rep.tau, a_new, b);
            }
            if let Some(tr) = trajectory.as_mut() {
                tr.push(&next);
            }
            records.push(rep);
            state = next;
        }
        if wants_snapshot(stop) {
            snapshots.push(snap(&state));
        }
    }
    Ok(RunReport { records, snapshots, norms, frozen, trajectory, final_state: state })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_final_time_reports_initial_state_only() {
        let spec = ProblemSpec { final_time: 0.0, cells: vec![16], ..ProblemSpec::benchmark() };
        let rep = run(&spec, &SolverConfig::default(), &[0.0]).unwrap();
        assert_eq!(rep.records.len(), 1);
        assert_eq!(rep.steps(), 0);
        assert_eq!(rep.snapshots.len(), 1);
        assert_eq!(rep.norms.dt_mu_l2.value(), 0.0);
        assert_eq!(rep.final_state.t, 0.0);
    }

    #[test]
    fn lands_on_snapshot_times_and_final_time() {
        let spec = ProblemSpec { final_time: 0.05, cells: vec![16], ..ProblemSpec::benchmark() };
        let cfg = SolverConfig::with_tau(0.01);
        let rep = run(&spec, &cfg, &[0.025, 0.05]).unwrap();
        let times: Vec<f64> = rep.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(times, vec![0.025, 0.05]);
        assert_eq!(rep.final_state.t, 0.05);
        assert_eq!(rep.steps(), 6);
        assert_eq!(rep.frozen.as_ref().unwrap().step_count(), 6);
    }

    #[test]
    fn rejects_snapshot_outside_horizon() {
        let spec = ProblemSpec { final_time: 0.1, cells: vec![8], ..ProblemSpec::benchmark() };
        assert!(matches!(
            run(&spec, &SolverConfig::default(), &[0.2]),
            Err(SolverError::Config(_))
        ));
    }

    #[test]
    fn invalid_spec_is_not_run() {
        let spec = ProblemSpec { rho_min: 0.6, rho_max: 0.4, ..ProblemSpec::benchmark() };
        assert!(matches!(run(&spec, &SolverConfig::default(), &[]), Err(SolverError::Invalid(_))));
    }

    #[test]
    fn snapshot_csv_layout() {
        let spec = ProblemSpec { final_time: 0.0, cells: vec![4], ..ProblemSpec::benchmark() };
        let rep = run(&spec, &SolverConfig::default(), &[0.0]).unwrap();
        let mut buf = Vec::new();
        rep.snapshots[0].write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("i,x,mu,rho\n0,0.125,"));
        assert_eq!(text.lines().count(), 5);
    }
}
