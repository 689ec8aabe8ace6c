use rayon::prelude::*;

use crate::grid::TrajectoryNorms;
use crate::model::ProblemSpec;
use crate::solver::{run_with, RunOptions, SolverConfig};

use super::{relative_change, StudyResult, VerifyError};

/// Column names of [`regularity_norm_study`], in order.
pub const REGULARITY_NORMS: [&str; 5] = [
    "dt_mu_L2Q",
    "lap_mu_L2Q",
    "dt_mu_LinfL2",
    "grad_dt_mu_L2Q",
    "dt_mu_L10/3Q",
];

const THRESHOLD: f64 = 0.05;

fn norm_values(n: &TrajectoryNorms) -> Vec<f64> {
    vec![
        n.dt_mu_l2.value(),
        n.lap_mu_l2.value(),
        n.sup_dt_mu_l2,
        n.grad_dt_mu_l2.value(),
        n.dt_mu_l10_3.value(),
    ]
}

/// Runs `spec` at `levels` resolutions (level `k`: cells × 2^k, `τ / 2^k`) and checks that each
/// norm of `∂tμ` and `Δμ` changes by at most 5 % between the two finest levels.
pub fn regularity_norm_study(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    levels: usize,
) -> Result<StudyResult, VerifyError> {
    if levels < 2 {
        return Err(VerifyError::Precondition(format!("need >= 2 levels (got {levels})")));
    }
    let jobs: Vec<(ProblemSpec, SolverConfig)> = (0..levels)
        .map(|k| {
            let factor = 1usize << k;
            let spec = spec.refined(factor)?;
            let cfg = SolverConfig { tau: cfg.tau / factor as f64, ..cfg.clone() };
            Ok((spec, cfg))
        })
        .collect::<Result<_, VerifyError>>()?;
    let norms: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|(s, c)| Ok(norm_values(&run_with(s, c, &RunOptions::default())?.norms)))
        .collect::<Result<_, VerifyError>>()?;

    let mut out = StudyResult::new("regularity_norm_study", "level", {
        let mut cols = vec!["cells", "tau"];
        cols.extend(REGULARITY_NORMS);
        cols
    });
    for (k, ((s, c), vals)) in jobs.iter().zip(&norms).enumerate() {
        let mut row = vec![s.cells[0] as f64, c.tau];
        row.extend(vals);
        out.push_row(k as f64, row);
    }
    let (coarse, fine) = (&norms[levels - 2], &norms[levels - 1]);
    for (j, name) in REGULARITY_NORMS.iter().enumerate() {
        let change = relative_change(coarse[j], fine[j]);
        out.check(
            format!("{name} bounded under refinement (change <= 5%)"),
            change <= THRESHOLD && fine[j].is_finite(),
            format!("{:.6e} -> {:.6e}, relative change {:.3}%", coarse[j], fine[j], 100.0 * change),
        );
    }
    if levels >= 3 {
        // Self-convergence: successive differences shrink.
        let diffs: Vec<f64> = norms.windows(2).map(|w| (w[1][0] - w[0][0]).abs()).collect();
        out.orders.push(("dt_mu_L2Q self-convergence".into(), (diffs[diffs.len() - 2] / diffs[diffs.len() - 1]).log2()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_final_time_gives_zero_norms() {
        let spec = ProblemSpec { final_time: 0.0, cells: vec![16], ..ProblemSpec::benchmark() };
        let r = regularity_norm_study(&spec, &SolverConfig::default(), 2).unwrap();
        for name in REGULARITY_NORMS {
            assert!(r.column(name).unwrap().iter().all(|&v| v == 0.0));
        }
        assert!(r.passed);
    }

    #[test]
    fn needs_two_levels() {
        assert!(regularity_norm_study(&ProblemSpec::benchmark(), &SolverConfig::default(), 1).is_err());
    }
}
