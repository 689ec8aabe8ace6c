//! Sectioned `key = value` configuration files.
//!
//! ```text
//! [problem]
//! lengths = 1
//! cells = 128
//! rho_min = 0.1
//! rho_max = 0.9
//! final_time = 1
//! potential = logarithmic
//! c1 = 1
//! c2 = 3
//! mu0 = 1 + 0.5*cos(pi*x)
//! rho0 = 0.5 + 0.3*cos(pi*x)
//!
//! [solver]
//! tau = 0.001
//! ```
//!
//! `[problem]` is required; `[solver]`, `[study]` and `[output]` fall back to defaults.
//! Lists are comma separated, optionally in brackets. Initial data are expressions in
//! `x, y, z` or a bracketed list of cell values. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use phasefield::model::{validate, Coupling, Expression, InitialDatum, Polynomial, Potential, ProblemSpec, ValidationReport};
use phasefield::solver::SolverConfig;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("problem data failed validation:\n{0}")]
    Validation(ValidationReport),
}

fn parse_err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse { line, message: message.into() }
}

/// Parameters of the numerical studies.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    /// Refinement levels of `mms` and `regularity`.
    pub levels: usize,
    /// Diffusion coefficients of `sweep-sigma`, strictly decreasing.
    pub sigmas: Vec<f64>,
    /// Perturbation sizes of `perturb`.
    pub deltas: Vec<f64>,
    /// Coefficient shift injected by `frozen`.
    pub b_perturbation: f64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            levels: 3,
            sigmas: vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3],
            deltas: vec![1e-2, 1e-3, 1e-4, 0.0],
            b_perturbation: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub snapshot_times: Vec<f64>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), snapshot_times: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub problem: ProblemSpec,
    pub solver: SolverConfig,
    pub study: StudyConfig,
    pub output: OutputConfig,
}

const PROBLEM_KEYS: &[&str] = &[
    "dimension",
    "lengths",
    "cells",
    "rho_min",
    "rho_max",
    "sigma",
    "final_time",
    "potential",
    "c1",
    "c2",
    "potential_coefficients",
    "potential_convex_coefficients",
    "coupling",
    "coupling_coefficients",
    "mu0",
    "rho0",
];
const SOLVER_KEYS: &[&str] = &[
    "tau",
    "newton_tol",
    "newton_max",
    "linear_tol",
    "linear_max",
    "gs_sweep_max",
    "tau_min",
    "interior_margin",
];
const STUDY_KEYS: &[&str] = &["levels", "sigmas", "deltas", "b_perturbation"];
const OUTPUT_KEYS: &[&str] = &["directory", "snapshot_times"];

fn known_keys(section: &str) -> Option<&'static [&'static str]> {
    match section {
        "problem" => Some(PROBLEM_KEYS),
        "solver" => Some(SOLVER_KEYS),
        "study" => Some(STUDY_KEYS),
        "output" => Some(OUTPUT_KEYS),
        _ => None,
    }
}

/// Key-value pairs of one section, with line numbers.
struct Section {
    line: usize,
    entries: BTreeMap<String, (usize, String)>,
}

impl Section {
    fn raw(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn get<T>(&mut self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => parse(&v).map(Some).map_err(|e| parse_err(line, format!("{key}: {e}"))),
        }
    }

    fn require<T>(&mut self, name: &str, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<T, ConfigError> {
        let line = self.line;
        self.get(key, parse)?
            .ok_or_else(|| parse_err(line, format!("[{name}] is missing required key `{key}`")))
    }

    fn reject(&mut self, key: &str, why: &str) -> Result<(), ConfigError> {
        match self.raw(key) {
            Some((line, _)) => Err(parse_err(line, format!("key `{key}` {why}"))),
            None => Ok(()),
        }
    }
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("expected a number, got `{}`", s.trim()))?;
    if v.is_finite() { Ok(v) } else { Err(format!("expected a finite number, got `{}`", s.trim())) }
}

fn count(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("expected a nonnegative integer, got `{}`", s.trim()))
}

fn strip_brackets(s: &str) -> &str {
    let s = s.trim();
    s.strip_prefix('[').and_then(|r| r.strip_suffix(']')).unwrap_or(s)
}

fn list<T>(s: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let inner = strip_brackets(s).trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(item).collect()
}

fn numbers(s: &str) -> Result<Vec<f64>, String> {
    list(s, number)
}

fn datum(s: &str) -> Result<InitialDatum, String> {
    let s = s.trim();
    if s.starts_with('[') {
        if !s.ends_with(']') {
            return Err("unterminated value list".into());
        }
        return numbers(s).map(InitialDatum::Values);
    }
    Expression::parse(s).map(InitialDatum::Expression).map_err(|e| e.to_string())
}

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>, ConfigError> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| parse_err(line, format!("malformed section header `{content}`")))?
                .trim();
            if known_keys(name).is_none() {
                return Err(parse_err(line, format!("unknown section [{name}]")));
            }
            if sections.contains_key(name) {
                return Err(parse_err(line, format!("section [{name}] appears twice")));
            }
            sections.insert(name.to_string(), Section { line, entries: BTreeMap::new() });
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| parse_err(line, format!("expected `key = value`, got `{content}`")))?;
        let key = key.trim();
        let name = current
            .as_deref()
            .ok_or_else(|| parse_err(line, format!("key `{key}` appears before any section header")))?;
        if !known_keys(name).is_some_and(|keys| keys.contains(&key)) {
            return Err(parse_err(line, format!("unknown key `{key}` in [{name}]")));
        }
        let section = sections.get_mut(name).expect("section registered");
        if let Some((first, _)) = section.entries.get(key) {
            return Err(parse_err(line, format!("key `{key}` already set on line {first}")));
        }
        section.entries.insert(key.to_string(), (line, value.trim().to_string()));
    }
    Ok(sections)
}

fn problem(mut s: Section) -> Result<ProblemSpec, ConfigError> {
    let p = "problem";
    let lengths = s.require(p, "lengths", numbers)?;
    if let Some((line, v)) = s.raw("dimension") {
        let dim = count(&v).map_err(|e| parse_err(line, format!("dimension: {e}")))?;
        if dim != lengths.len() {
            return Err(parse_err(line, format!("dimension = {dim} but {} lengths given", lengths.len())));
        }
    }
    let (cells_line, _) = s.entries.get("cells").cloned().unwrap_or((s.line, String::new()));
    let mut cells = s.require(p, "cells", |v| list(v, count))?;
    if cells.len() == 1 && lengths.len() > 1 {
        cells = vec![cells[0]; lengths.len()];
    }
    if cells.len() != lengths.len() {
        return Err(parse_err(cells_line, format!("{} cell counts for {} lengths", cells.len(), lengths.len())));
    }
    let rho_min = s.require(p, "rho_min", number)?;
    let rho_max = s.require(p, "rho_max", number)?;
    let sigma = s.get("sigma", number)?.unwrap_or(0.0);
    let final_time = s.require(p, "final_time", number)?;

    let (kind_line, kind) = s
        .raw("potential")
        .ok_or_else(|| parse_err(s.line, "[problem] is missing required key `potential`"))?;
    let potential = match kind.as_str() {
        "logarithmic" => {
            s.reject("potential_coefficients", "only applies to the polynomial potential")?;
            s.reject("potential_convex_coefficients", "only applies to the polynomial potential")?;
            // Admissibility of c1, c2 is left to validation so that it is reported as a check.
            Potential::Logarithmic { c1: s.require(p, "c1", number)?, c2: s.require(p, "c2", number)? }
        }
        "quartic" => {
            for key in ["c1", "c2", "potential_coefficients", "potential_convex_coefficients"] {
                s.reject(key, "does not apply to the quartic potential")?;
            }
            Potential::Quartic
        }
        "polynomial" => {
            s.reject("c1", "only applies to the logarithmic potential")?;
            s.reject("c2", "only applies to the logarithmic potential")?;
            Potential::CustomPolynomial {
                coefficients: Polynomial::new(s.require(p, "potential_coefficients", numbers)?),
                convex_part: s.get("potential_convex_coefficients", numbers)?.map(Polynomial::new),
            }
        }
        other => {
            return Err(parse_err(
                kind_line,
                format!("potential: expected logarithmic, quartic or polynomial, got `{other}`"),
            ))
        }
    };

    let coupling = match s.raw("coupling") {
        None => {
            s.reject("coupling_coefficients", "requires `coupling = polynomial`")?;
            Coupling::ConcaveQuadratic
        }
        Some((line, kind)) => match kind.as_str() {
            "concave_quadratic" => {
                s.reject("coupling_coefficients", "requires `coupling = polynomial`")?;
                Coupling::ConcaveQuadratic
            }
            "polynomial" => Coupling::polynomial(s.require(p, "coupling_coefficients", numbers)?),
            other => {
                return Err(parse_err(
                    line,
                    format!("coupling: expected concave_quadratic or polynomial, got `{other}`"),
                ))
            }
        },
    };
    let mu0 = s.require(p, "mu0", datum)?;
    let rho0 = s.require(p, "rho0", datum)?;
    Ok(ProblemSpec { lengths, cells, rho_min, rho_max, sigma, final_time, potential, coupling, mu0, rho0 })
}

fn solver(mut s: Section) -> Result<SolverConfig, ConfigError> {
    let d = SolverConfig::default();
    Ok(SolverConfig {
        tau: s.get("tau", number)?.unwrap_or(d.tau),
        newton_tol: s.get("newton_tol", number)?.unwrap_or(d.newton_tol),
        newton_max: s.get("newton_max", count)?.unwrap_or(d.newton_max),
        linear_tol: s.get("linear_tol", number)?.unwrap_or(d.linear_tol),
        linear_max: s.get("linear_max", count)?.or(d.linear_max),
        gs_sweep_max: s.get("gs_sweep_max", count)?.unwrap_or(d.gs_sweep_max),
        tau_min: s.get("tau_min", number)?.unwrap_or(d.tau_min),
        interior_margin: s.get("interior_margin", number)?.unwrap_or(d.interior_margin),
    })
}

fn study(mut s: Section) -> Result<StudyConfig, ConfigError> {
    let d = StudyConfig::default();
    Ok(StudyConfig {
        levels: s.get("levels", count)?.unwrap_or(d.levels),
        sigmas: s.get("sigmas", numbers)?.unwrap_or(d.sigmas),
        deltas: s.get("deltas", numbers)?.unwrap_or(d.deltas),
        b_perturbation: s.get("b_perturbation", number)?.unwrap_or(d.b_perturbation),
    })
}

fn output(mut s: Section) -> Result<OutputConfig, ConfigError> {
    let d = OutputConfig::default();
    let directory = match s.raw("directory") {
        Some((line, v)) if v.is_empty() => return Err(parse_err(line, "directory must not be empty")),
        Some((_, v)) => PathBuf::from(v),
        None => d.directory,
    };
    Ok(OutputConfig { directory, snapshot_times: s.get("snapshot_times", numbers)?.unwrap_or(d.snapshot_times) })
}

impl Config {
    /// Parses the text of a configuration file without running the problem checks.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut sections = split_sections(text)?;
        let empty = || Section { line: 0, entries: BTreeMap::new() };
        let p = sections
            .remove("problem")
            .ok_or_else(|| parse_err(1, "missing required section [problem]"))?;
        Ok(Self {
            problem: problem(p)?,
            solver: solver(sections.remove("solver").unwrap_or_else(empty))?,
            study: study(sections.remove("study").unwrap_or_else(empty))?,
            output: output(sections.remove("output").unwrap_or_else(empty))?,
        })
    }

    pub fn validation(&self) -> ValidationReport {
        validate(&self.problem)
    }
}

/// Reads and parses `path`, then requires the problem data to pass validation.
pub fn parse_config(path: &Path) -> Result<Config, ConfigError> {
    let config = read_config(path)?;
    let report = config.validation();
    if report.passed {
        Ok(config)
    } else {
        Err(ConfigError::Validation(report))
    }
}

/// Reads and parses `path` without validating the problem data.
pub fn read_config(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    Config::parse(&text)
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(", ")
}

fn datum_text(d: &InitialDatum) -> String {
    match d {
        InitialDatum::Expression(e) => e.source().to_string(),
        InitialDatum::Values(v) => format!("[{}]", join(v)),
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.problem;
        let mut out = String::from("[problem]\n");
        let cells: Vec<String> = p.cells.iter().map(usize::to_string).collect();
        writeln!(out, "dimension = {}", p.lengths.len())?;
        writeln!(out, "lengths = {}", join(&p.lengths))?;
        writeln!(out, "cells = {}", cells.join(", "))?;
        writeln!(out, "rho_min = {:?}", p.rho_min)?;
        writeln!(out, "rho_max = {:?}", p.rho_max)?;
        writeln!(out, "sigma = {:?}", p.sigma)?;
        writeln!(out, "final_time = {:?}", p.final_time)?;
        match &p.potential {
            Potential::Logarithmic { c1, c2 } => {
                writeln!(out, "potential = logarithmic\nc1 = {c1:?}\nc2 = {c2:?}")?;
            }
            Potential::Quartic => writeln!(out, "potential = quartic")?,
            Potential::CustomPolynomial { coefficients, convex_part } => {
                writeln!(out, "potential = polynomial")?;
                writeln!(out, "potential_coefficients = {}", join(coefficients.coefficients()))?;
                if let Some(c) = convex_part {
                    writeln!(out, "potential_convex_coefficients = {}", join(c.coefficients()))?;
                }
            }
        }
        match &p.coupling {
            Coupling::ConcaveQuadratic => writeln!(out, "coupling = concave_quadratic")?,
            Coupling::CustomPolynomial(c) => {
                writeln!(out, "coupling = polynomial\ncoupling_coefficients = {}", join(c.coefficients()))?;
            }
        }
        writeln!(out, "mu0 = {}", datum_text(&p.mu0))?;
        writeln!(out, "rho0 = {}", datum_text(&p.rho0))?;

        let s = &self.solver;
        writeln!(out, "\n[solver]")?;
        writeln!(out, "tau = {:?}", s.tau)?;
        writeln!(out, "newton_tol = {:?}", s.newton_tol)?;
        writeln!(out, "newton_max = {}", s.newton_max)?;
        writeln!(out, "linear_tol = {:?}", s.linear_tol)?;
        if let Some(m) = s.linear_max {
            writeln!(out, "linear_max = {m}")?;
        }
        writeln!(out, "gs_sweep_max = {}", s.gs_sweep_max)?;
        writeln!(out, "tau_min = {:?}", s.tau_min)?;
        writeln!(out, "interior_margin = {:?}", s.interior_margin)?;

        let st = &self.study;
        writeln!(out, "\n[study]")?;
        writeln!(out, "levels = {}", st.levels)?;
        writeln!(out, "sigmas = {}", join(&st.sigmas))?;
        writeln!(out, "deltas = {}", join(&st.deltas))?;
        writeln!(out, "b_perturbation = {:?}", st.b_perturbation)?;

        writeln!(out, "\n[output]")?;
        writeln!(out, "directory = {}", self.output.directory.display())?;
        writeln!(out, "snapshot_times = {}", join(&self.output.snapshot_times))?;
        f.write_str(&out)
    }
}
