use crate::grid::Field;
use crate::model::ProblemSpec;
use crate::solver::{run_with, solve_frozen_linear, RunOptions, SolverConfig};

use super::{StudyResult, VerifyError};

fn max_relative_deviation(z: &[Field], mu: &[Field]) -> f64 {
    z.iter()
        .zip(mu)
        .map(|(z, m)| {
            let err = z.zip_map(m, |a, b| a - b).expect("same grid").norm_l2();
            let scale = m.norm_l2();
            if scale == 0.0 { err } else { err / scale }
        })
        .fold(0.0, f64::max)
}

/// Runs the nonlinear solver, freezes `a = 1 + 2g(ρ)`, `∂t a` and `b`, replays the linear problem
/// from `μ0` and reports the largest relative `L²` deviation of the replay from `μ`.
///
/// With a nonzero `b_perturbation`, `b` is also shifted by that amount and the replay repeated;
/// the perturbed deviation must exceed a tenth of the perturbation.
pub fn frozen_linear_consistency(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    b_perturbation: f64,
) -> Result<StudyResult, VerifyError> {
    let opts = RunOptions { record_trajectory: true, record_frozen: true, ..Default::default() };
    let rep = run_with(spec, cfg, &opts)?;
    let coeffs = rep.frozen.expect("frozen coefficients requested");
    let tr = rep.trajectory.expect("trajectory requested");
    let z = solve_frozen_linear(&coeffs, &tr.mu[0], cfg)?;
    let dev = max_relative_deviation(&z, &tr.mu);

    let mut out = StudyResult::new("frozen_linear_consistency", "b_perturbation", vec!["deviation"]);
    out.push_row(0.0, vec![dev]);
    let limit = 10.0 * cfg.linear_tol;
    out.check(
        "frozen-coefficient replay reproduces mu (<= 10 x linear_tol)",
        dev <= limit,
        format!("max relative L2 deviation {dev:.3e}, limit {limit:.1e}"),
    );
    if b_perturbation != 0.0 {
        let mut perturbed = coeffs.clone();
        perturbed.perturb_b(b_perturbation);
        let zp = solve_frozen_linear(&perturbed, &tr.mu[0], cfg)?;
        let dev_p = max_relative_deviation(&zp, &tr.mu);
        out.push_row(b_perturbation, vec![dev_p]);
        let power = 0.1 * b_perturbation.abs();
        out.check(
            "perturbed coefficients are detected",
            dev_p > power,
            format!("deviation {dev_p:.3e} after shifting b by {b_perturbation:e}, needs > {power:.1e}"),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Coupling, InitialDatum, Potential};

    #[test]
    fn heat_reduction_replay_is_tight() {
        let spec = ProblemSpec {
            cells: vec![32],
            final_time: 0.05,
            rho_min: -1.0,
            rho_max: 1.0,
            potential: Potential::polynomial(vec![0.0], Some(vec![0.0])).unwrap(),
            coupling: Coupling::zero(),
            mu0: InitialDatum::expression("1 + cos(pi*x)").unwrap(),
            rho0: InitialDatum::constant(0.0),
            ..ProblemSpec::benchmark()
        };
        let cfg = SolverConfig::default();
        let r = frozen_linear_consistency(&spec, &cfg, 0.0).unwrap();
        assert!(r.rows[0].values[0] <= cfg.linear_tol, "{}", r.rows[0].values[0]);
        assert!(r.passed);
    }
}
