use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use phasefield::model::ValidationReport;
use phasefield::solver::{run_with, RunOptions, RunReport, SolverError};
use phasefield::verify::{
    continuous_dependence_study, frozen_linear_consistency, mms_convergence, regularity_norm_study,
    vanishing_diffusion_study, StudyResult, VerifyError,
};

use crate::config::{parse_config, read_config, Config, ConfigError};

/// Environment variable that overrides `[output] directory`.
pub const OUTPUT_ENV: &str = "PHASEFIELD_OUT";

/// Tolerance on bound violations reported by `run`.
const BOUND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    CheckFailed = 1,
    Usage = 2,
    NonConvergence = 3,
}

#[derive(Parser, Debug)]
#[command(name = "phasefield", version, about = "Phase-field solver and verification studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Do not echo the summary to stdout.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads for the studies (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Check the structural assumptions on the problem data.
    Validate,
    /// Integrate the problem and write per-step diagnostics.
    Run,
    /// Convergence orders against a manufactured solution.
    Mms,
    /// Stabilization of the regularity norms under refinement.
    Regularity,
    /// Distance to the sigma = 0 solution as sigma decreases.
    SweepSigma,
    /// Response of the solution to perturbed initial data.
    Perturb,
    /// Replay of the chemical-potential update as a frozen-coefficient linear problem.
    Frozen,
}

/// Failure that ends the command before a pass/fail verdict.
#[derive(Debug)]
struct Failure {
    status: ExitStatus,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { status: ExitStatus::Usage, message: message.into() }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::usage(format!("cannot write {}: {e}", path.display()))
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        let status = match e {
            SolverError::NonConvergence { .. } | SolverError::TauUnderflow { .. } | SolverError::Frozen(_) => {
                ExitStatus::NonConvergence
            }
            SolverError::Config(_) | SolverError::Invalid(_) | SolverError::Model(_) => ExitStatus::Usage,
        };
        Self { status, message: e.to_string() }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Solver(s) => s.into(),
            other => Self::usage(other.to_string()),
        }
    }
}

/// Output of a finished command: the summary text and whether every check passed.
struct Outcome {
    summary: String,
    passed: bool,
}

/// Parses `args` (including the program name), executes the subcommand and returns the exit code.
pub fn run_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::Usage as i32 } else { ExitStatus::Success as i32 };
        }
    };
    match execute(&cli) {
        Ok(status) => status as i32,
        Err(f) => {
            eprintln!("error: {}", f.message.trim_end());
            f.status as i32
        }
    }
}

fn execute(cli: &Cli) -> Result<ExitStatus, Failure> {
    let path = cli.config.as_deref().ok_or_else(|| Failure::usage("--config <PATH> is required"))?;
    let config = if cli.command == Command::Validate { read_config(path)? } else { parse_config(path)? };
    let dir = output_dir(&config);
    fs::create_dir_all(&dir).map_err(|e| Failure::io(&dir, e))?;

    let threads = cli.threads.unwrap_or(0);
    if cli.threads == Some(0) {
        return Err(Failure::usage("--threads must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::usage(format!("cannot start worker threads: {e}")))?;

    let result = pool.install(|| dispatch(cli.command, &config, &dir));
    let summary_path = dir.join("summary.txt");
    match result {
        Ok(outcome) => {
            fs::write(&summary_path, &outcome.summary).map_err(|e| Failure::io(&summary_path, e))?;
            if !cli.quiet {
                print!("{}", outcome.summary);
            }
            Ok(if outcome.passed { ExitStatus::Success } else { ExitStatus::CheckFailed })
        }
        Err(f) => {
            let text = format!("{}\nERROR {}\n", title(cli.command), f.message.trim_end());
            // The error itself is what gets reported; a failed summary write adds nothing.
            let _ = fs::write(&summary_path, text);
            Err(f)
        }
    }
}

fn output_dir(config: &Config) -> PathBuf {
    match std::env::var_os(OUTPUT_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => config.output.directory.clone(),
    }
}

fn title(command: Command) -> &'static str {
    match command {
        Command::Validate => "phasefield validate",
        Command::Run => "phasefield run",
        Command::Mms => "phasefield mms",
        Command::Regularity => "phasefield regularity",
        Command::SweepSigma => "phasefield sweep-sigma",
        Command::Perturb => "phasefield perturb",
        Command::Frozen => "phasefield frozen",
    }
}

fn dispatch(command: Command, config: &Config, dir: &Path) -> Result<Outcome, Failure> {
    let (spec, cfg, study) = (&config.problem, &config.solver, &config.study);
    let result = match command {
        Command::Validate => return validate_command(&config.validation(), dir),
        Command::Run => return run_command(config, dir),
        Command::Mms => mms_convergence(spec.dimension(), study.levels)?,
        Command::Regularity => regularity_norm_study(spec, cfg, study.levels)?,
        Command::SweepSigma => vanishing_diffusion_study(spec, cfg, &study.sigmas)?,
        Command::Perturb => continuous_dependence_study(spec, cfg, &study.deltas)?,
        Command::Frozen => frozen_linear_consistency(spec, cfg, study.b_perturbation)?,
    };
    study_outcome(command, &result, dir)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::io(path, e))
}

fn study_outcome(command: Command, result: &StudyResult, dir: &Path) -> Result<Outcome, Failure> {
    let path = dir.join("report.csv");
    result.write_csv(create(&path)?).map_err(|e| Failure::io(&path, e))?;
    Ok(Outcome { summary: format!("{}\n{result}", title(command)), passed: result.passed })
}

fn validate_command(report: &ValidationReport, dir: &Path) -> Result<Outcome, Failure> {
    let path = dir.join("report.csv");
    let write = || -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(create(&path).map_err(|f| io::Error::other(f.message))?);
        w.write_record(["check", "passed", "value", "location", "detail"])?;
        for c in &report.checks {
            let value = c.value.map(|v| v.to_string()).unwrap_or_default();
            let location = c.location.as_ref().map(|l| l.to_string()).unwrap_or_default();
            w.write_record([c.name, if c.passed { "true" } else { "false" }, &value, &location, &c.detail])?;
        }
        w.flush()?;
        Ok(())
    };
    write().map_err(|e| Failure::io(&path, e))?;
    let verdict = if report.passed { "all structural checks passed" } else { "structural checks failed" };
    Ok(Outcome { summary: format!("{}\n{report}overall: {verdict}\n", title(Command::Validate)), passed: report.passed })
}

const RUN_HEADER: [&str; 16] = [
    "t",
    "tau",
    "energy",
    "dissipation_residual",
    "mass_residual",
    "rho_above",
    "rho_below",
    "mu_negative",
    "newton_iterations",
    "gs_sweeps",
    "linear_iterations",
    "halvings",
    "mu_l2",
    "mu_h1",
    "mu_linf",
    "rho_l2",
];

fn write_run_csv(report: &RunReport, path: &Path) -> Result<(), Failure> {
    let write = || -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(create(path).map_err(|f| io::Error::other(f.message))?);
        w.write_record(RUN_HEADER)?;
        for (r, n) in report.records.iter().zip(&report.norms.records) {
            let floats = [r.t, r.tau, r.energy, r.dissipation_residual, r.mass_residual, r.rho_above, r.rho_below, r.mu_negative];
            let counts = [r.newton_iterations, r.gs_sweeps, r.linear_iterations, r.halvings];
            let norms = [n.mu_l2, n.mu_h1, n.mu_linf, n.rho_l2];
            let row: Vec<String> = floats
                .iter()
                .map(f64::to_string)
                .chain(counts.iter().map(usize::to_string))
                .chain(norms.iter().map(f64::to_string))
                .collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    };
    write().map_err(|e| Failure::io(path, e))
}

fn run_command(config: &Config, dir: &Path) -> Result<Outcome, Failure> {
    let spec = &config.problem;
    let opts = RunOptions { snapshot_times: config.output.snapshot_times.clone(), ..Default::default() };
    let report = run_with(spec, &config.solver, &opts)?;
    write_run_csv(&report, &dir.join("report.csv"))?;
    for snap in &report.snapshots {
        let path = dir.join(format!("snapshot_t{}.csv", snap.t));
        snap.write_csv(create(&path)?).map_err(|e| Failure::io(&path, e))?;
    }

    let worst = report.max_violation();
    let bounds_ok = worst <= BOUND_TOL;
    let energy_rise = report
        .records
        .windows(2)
        .map(|w| (w[1].energy - w[0].energy) / w[0].energy.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let last = report.records.last().expect("initial record present");
    let n = &report.norms;

    let mut s = String::new();
    let _ = writeln!(s, "{}", title(Command::Run));
    let _ = writeln!(s, "steps: {}, final time {}, cells {:?}", report.steps(), report.final_state.t, spec.cells);
    let _ = writeln!(
        s,
        "{} bound preservation (rho in [{}, {}], mu >= 0; discrete maximum principle): worst violation {worst:e}",
        if bounds_ok { "PASS" } else { "FAIL" },
        spec.rho_min,
        spec.rho_max
    );
    let _ = writeln!(
        s,
        "INFO energy E = (1/2) int u mu: {:e} -> {:e}, largest relative increase per step {energy_rise:e}",
        report.records[0].energy, last.energy
    );
    let _ = writeln!(
        s,
        "INFO energy identity (E' + |grad mu|^2 = 0): max |dissipation residual| {:e}",
        report.max_abs_dissipation_residual()
    );
    let _ = writeln!(s, "INFO balance of int u: max |mass residual| {:e}", report.max_abs_mass_residual());
    let _ = writeln!(
        s,
        "INFO regularity norms: |dt mu|_L2(Q) {:e}, |lap mu|_L2(Q) {:e}, sup |dt mu|_L2 {:e}, |grad dt mu|_L2(Q) {:e}, |dt mu|_L10/3(Q) {:e}",
        n.dt_mu_l2.value(),
        n.lap_mu_l2.value(),
        n.sup_dt_mu_l2,
        n.grad_dt_mu_l2.value(),
        n.dt_mu_l10_3.value()
    );
    let _ = writeln!(s, "INFO snapshots written: {}", report.snapshots.len());
    let _ = writeln!(s, "overall: {}", if bounds_ok { "PASS" } else { "FAIL" });
    Ok(Outcome { summary: s, passed: bounds_ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors() {
        use clap::error::ErrorKind;
        let kind = |args: &[&str]| Cli::try_parse_from(args).err().map(|e| e.kind());
        assert_eq!(kind(&["phasefield", "--help"]), Some(ErrorKind::DisplayHelp));
        assert_eq!(kind(&["phasefield", "explode"]), Some(ErrorKind::InvalidSubcommand));
        assert_eq!(kind(&["phasefield", "run", "--threads", "x"]), Some(ErrorKind::ValueValidation));
        assert_eq!(kind(&["phasefield", "sweep-sigma", "--quiet"]), None);
        assert_eq!(run_main(["phasefield", "run", "--quiet"]), 2);
        assert_eq!(run_main(["phasefield", "run", "--config", "/nonexistent/phasefield.cfg"]), 2);
    }

    #[test]
    fn solver_errors_map_to_exit_codes() {
        let f: Failure = SolverError::NonConvergence { t: 0.0, reason: String::new() }.into();
        assert_eq!(f.status, ExitStatus::NonConvergence);
        let f: Failure = SolverError::Config("x".into()).into();
        assert_eq!(f.status, ExitStatus::Usage);
        let f: Failure = VerifyError::Precondition("x".into()).into();
        assert_eq!(f.status, ExitStatus::Usage);
    }
}
