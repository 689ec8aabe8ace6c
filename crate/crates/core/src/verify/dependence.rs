use rayon::prelude::*;

use crate::grid::SpaceTimeNorm;
use crate::model::{validate, InitialDatum, ModelError, ProblemSpec};
use crate::solver::{run_with, RunOptions, SolverConfig, Trajectory};

use super::{StudyResult, VerifyError};

/// Amplitude of the order-parameter perturbation relative to the chemical-potential one.
const RHO_AMPLITUDE: f64 = 0.3;

fn perturb(datum: &InitialDatum, amount: f64, spec: &ProblemSpec) -> Result<InitialDatum, ModelError> {
    let l = spec.lengths[0];
    match datum {
        InitialDatum::Expression(e) => {
            InitialDatum::expression(&format!("({}) + {amount:?}*cos(pi*x/{l:?})", e.source()))
        }
        InitialDatum::Values(v) => {
            let grid = spec.grid()?;
            let vals = v
                .iter()
                .enumerate()
                .map(|(i, x)| x + amount * (std::f64::consts::PI * grid.center(i)[0] / l).cos())
                .collect();
            Ok(InitialDatum::Values(vals))
        }
    }
}

/// `spec` with `μ0 + δ cos(πx₁/L₁)` and `ρ0 + 0.3 δ cos(πx₁/L₁)`; rejected when the perturbed
/// data fail validation.
pub fn perturbed_spec(spec: &ProblemSpec, delta: f64) -> Result<ProblemSpec, VerifyError> {
    let out = ProblemSpec {
        mu0: perturb(&spec.mu0, delta, spec)?,
        rho0: perturb(&spec.rho0, RHO_AMPLITUDE * delta, spec)?,
        ..spec.clone()
    };
    let report = validate(&out);
    if !report.passed {
        return Err(VerifyError::Rejected { what: format!("perturbation delta = {delta}"), report });
    }
    Ok(out)
}

fn trajectory(spec: &ProblemSpec, cfg: &SolverConfig) -> Result<Trajectory, VerifyError> {
    let opts = RunOptions { record_trajectory: true, ..Default::default() };
    Ok(run_with(spec, cfg, &opts)?.trajectory.expect("trajectory requested"))
}

/// `sup_t ‖Δμ‖₂ + sup_t ‖Δρ‖₂ + ‖∇Δμ‖_{L²(Q)}` between two runs on a common time grid.
fn response(base: &Trajectory, other: &Trajectory) -> Result<f64, VerifyError> {
    if base.times != other.times {
        return Err(VerifyError::Precondition(
            "runs took different time steps; lower tau so that no step is halved".into(),
        ));
    }
    let diff = |a: &crate::grid::Field, b: &crate::grid::Field| a.zip_map(b, |x, y| x - y).expect("same grid");
    let mut sup_mu: f64 = 0.0;
    let mut sup_rho: f64 = 0.0;
    let mut grad = SpaceTimeNorm::new(2.0).expect("valid exponent");
    for n in 0..base.times.len() {
        let dm = diff(&other.mu[n], &base.mu[n]);
        sup_mu = sup_mu.max(dm.norm_l2());
        sup_rho = sup_rho.max(diff(&other.rho[n], &base.rho[n]).norm_l2());
        if n > 0 {
            grad.accumulate_integral(dm.gradient_norm_sq(), base.times[n] - base.times[n - 1]);
        }
    }
    Ok(sup_mu + sup_rho + grad.value())
}

/// Perturbs the initial data by each `δ` in `deltas` and measures the response `D(δ)`.
///
/// Passes when the ratios `D(δ)/δ` over the nonzero deltas lie within a factor 3 of each other
/// and every `δ = 0` entry reproduces the unperturbed trajectory bit for bit.
pub fn continuous_dependence_study(
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    deltas: &[f64],
) -> Result<StudyResult, VerifyError> {
    if deltas.is_empty() {
        return Err(VerifyError::Precondition("need at least one delta".into()));
    }
    if deltas.iter().any(|d| !d.is_finite()) {
        return Err(VerifyError::Precondition("delta values must be finite".into()));
    }
    let mut specs = vec![spec.clone()];
    for &d in deltas {
        specs.push(perturbed_spec(spec, d)?);
    }
    let runs: Vec<Trajectory> = specs.par_iter().map(|s| trajectory(s, cfg)).collect::<Result<_, _>>()?;
    let base = &runs[0];

    let mut out = StudyResult::new("continuous_dependence_study", "delta", vec!["D", "D_over_delta"]);
    let mut ratios = Vec::new();
    for (&d, run) in deltas.iter().zip(&runs[1..]) {
        let resp = response(base, run)?;
        let ratio = if d == 0.0 { f64::NAN } else { resp / d.abs() };
        out.push_row(d, vec![resp, ratio]);
        if d == 0.0 {
            out.check(
                "zero perturbation reproduces the trajectory bit-exactly",
                run == base,
                format!("D(0) = {resp:e}"),
            );
        } else {
            ratios.push(ratio);
        }
    }
    if ratios.len() >= 2 {
        let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        out.check(
            "D(delta)/delta within a factor 3 (linear response)",
            max <= 3.0 * min,
            format!("ratios {ratios:?}, spread {:.3}", max / min),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_delta_is_bit_exact() {
        let spec = ProblemSpec { cells: vec![16], final_time: 0.05, ..ProblemSpec::benchmark() };
        let r = continuous_dependence_study(&spec, &SolverConfig::default(), &[0.0]).unwrap();
        assert_eq!(r.rows[0].values[0], 0.0);
        assert!(r.passed);
    }

    #[test]
    fn large_perturbation_rejected_by_validation() {
        // μ0 + 2cos(πx) = 1 + 2.5cos(πx) turns negative.
        let err = perturbed_spec(&ProblemSpec::benchmark(), 2.0).unwrap_err();
        assert!(matches!(err, VerifyError::Rejected { .. }));
    }

    #[test]
    fn literal_values_are_perturbed_too() {
        let mut spec = ProblemSpec { cells: vec![4], ..ProblemSpec::benchmark() };
        spec.mu0 = InitialDatum::Values(vec![1.0; 4]);
        let p = perturbed_spec(&spec, 0.1).unwrap();
        let InitialDatum::Values(v) = &p.mu0 else { panic!() };
        assert!((v[0] - (1.0 + 0.1 * (std::f64::consts::PI / 8.0).cos())).abs() < 1e-15);
    }
}
