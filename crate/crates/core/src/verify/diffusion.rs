use rayon::prelude::*;

use crate::model::ProblemSpec;
use crate::solver::{run_with, RunOptions, SolverConfig, Trajectory};

use super::{spacetime_l2_distance, StudyResult, VerifyError};

fn trajectory(spec: &ProblemSpec, cfg: &SolverConfig, sigma: f64) -> Result<Trajectory, VerifyError> {
    let spec = ProblemSpec { sigma, ..spec.clone() };
    let opts = RunOptions { record_trajectory: true, ..Default::default() };
    Ok(run_with(&spec, cfg, &opts)?.trajectory.expect("trajectory requested"))
}

/// `‖ρ_a − ρ_b‖_{L²(Q)} + ‖μ_a − μ_b‖_{L²(Q)}`; both runs must share their time grid.
fn distance(a: &Trajectory, b: &Trajectory) -> Result<f64, VerifyError> {
    if a.times != b.times {
        return Err(VerifyError::Precondition(
            "runs took different time steps; lower tau so that no step is halved".into(),
        ));
    }
    Ok(spacetime_l2_distance(&a.times, &a.rho, &b.rho) + spacetime_l2_distance(&a.times, &a.mu, &b.mu))
}

/// Compares the σ-system for each σ in `sigmas` (strictly decreasing, positive) with the
/// limit system σ = 0 on one grid and time step.
///
/// Passes when the distance `d(σ)` decreases strictly along the list and the last value is at
/// most a fifth of the first.
pub fn vanishing_diffusion_study(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    sigmas: &[f64],
) -> Result<StudyResult, VerifyError> {
    if sigmas.len() < 2 {
        return Err(VerifyError::Precondition("need ≥ 2 sigma values".into()));
    }
    if sigmas.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
        return Err(VerifyError::Precondition("sigma values must be positive".into()));
    }
    if sigmas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(VerifyError::Precondition("sigma values must be strictly decreasing".into()));
    }
    let mut all = vec![0.0];
    all.extend_from_slice(sigmas);
    let runs: Vec<Trajectory> =
        all.par_iter().map(|&s| trajectory(spec, cfg, s)).collect::<Result<_, _>>()?;
    let limit = &runs[0];
    let d: Vec<f64> = runs[1..].iter().map(|r| distance(r, limit)).collect::<Result<_, _>>()?;

    let mut out = StudyResult::new("vanishing_diffusion_study", "sigma", vec!["d"]);
    for (&s, &v) in sigmas.iter().zip(&d) {
        out.push_row(s, vec![v]);
    }
    let decreasing = d.windows(2).all(|w| w[1] < w[0]);
    out.check("d(sigma) strictly decreasing as sigma -> 0", decreasing, format!("{d:?}"));
    let (first, last) = (d[0], d[d.len() - 1]);
    out.check(
        "d(smallest sigma) <= d(largest sigma) / 5",
        last <= first / 5.0,
        format!("{last:.6e} vs {first:.6e} / 5 = {:.6e}", first / 5.0),
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::InitialDatum;

    #[test]
    fn rejects_bad_sigma_lists() {
        let spec = ProblemSpec::benchmark();
        let cfg = SolverConfig::default();
        assert!(vanishing_diffusion_study(&spec, &cfg, &[0.1]).is_err());
        assert!(vanishing_diffusion_study(&spec, &cfg, &[0.01, 0.1]).is_err());
        assert!(vanishing_diffusion_study(&spec, &cfg, &[0.1, 0.0]).is_err());
    }

    #[test]
    fn limit_compared_with_itself_is_zero() {
        let spec = ProblemSpec { cells: vec![16], final_time: 0.05, ..ProblemSpec::benchmark() };
        let t = trajectory(&spec, &SolverConfig::default(), 0.0).unwrap();
        assert_eq!(distance(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn spatially_constant_data_makes_diffusion_inactive() {
        let spec = ProblemSpec {
            cells: vec![16],
            final_time: 0.1,
            mu0: InitialDatum::constant(1.0),
            rho0: InitialDatum::constant(0.3),
            ..ProblemSpec::benchmark()
        };
        let r = vanishing_diffusion_study(&spec, &SolverConfig::default(), &[0.1, 0.01]).unwrap();
        assert!(r.column("d").unwrap().iter().all(|&d| d <= 1e-10), "{:?}", r.rows);
    }
}
