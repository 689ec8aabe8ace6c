//! Numerical check of the structural assumptions on the data.

use std::fmt;

use super::{ModelError, ProblemSpec};

/// Number of equispaced samples (both endpoints included) for interval checks.
pub const INTERVAL_SAMPLES: usize = 1001;

/// Where a check was worst violated (or, for passing checks, closest to failing).
#[derive(Debug, Clone, PartialEq)]
pub enum Location {
    Point(f64),
    Cell { index: usize, center: Vec<f64> },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Point(r) => write!(f, "r = {r}"),
            Location::Cell { index, center } => write!(f, "cell {index} at {center:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub location: Option<Location>,
    pub value: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(f, "{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name)?;
            if let Some(v) = c.value {
                write!(f, " (value {v}")?;
                if let Some(loc) = &c.location {
                    write!(f, " at {loc}")?;
                }
                write!(f, ")")?;
            }
            if !c.detail.is_empty() {
                write!(f, ": {}", c.detail)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub const CHECK_POTENTIAL: &str = "potential parameters admissible";
pub const CHECK_INTERVAL: &str = "rho_min < rho_max";
pub const CHECK_SMOOTH: &str = "f, g twice differentiable on [rho_min, rho_max]";
pub const CHECK_CONVEX_SPLIT: &str = "f = f1 + f2 with f1 convex on [rho_min, rho_max]";
pub const CHECK_G_NONNEG: &str = "g >= 0";
pub const CHECK_G_CONCAVE: &str = "g'' <= 0";
pub const CHECK_SIGN_MIN: &str = "f'(rho_min) <= 0 <= g'(rho_min)";
pub const CHECK_SIGN_MAX: &str = "g'(rho_max) <= 0 <= f'(rho_max)";
pub const CHECK_MU0: &str = "mu0 >= 0 and bounded";
pub const CHECK_RHO0: &str = "rho_min <= rho0 <= rho_max";

fn samples(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    let n = INTERVAL_SAMPLES - 1;
    (0..=n).map(move |k| if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 })
}

fn pass(name: &'static str) -> Check {
    Check { name, passed: true, location: None, value: None, detail: String::new() }
}

fn fail(name: &'static str, detail: impl Into<String>) -> Check {
    Check { name, passed: false, location: None, value: None, detail: detail.into() }
}

/// Checks the structural assumptions on `[rho_min, rho_max]` and the initial data.
///
/// Failures are reported, never returned as errors.
pub fn validate(spec: &ProblemSpec) -> ValidationReport {
    validate_interval(spec, spec.rho_min, spec.rho_max, true)
}

/// Interval-only checks (parameters, smoothness, convex split, sign of `g` and `g''`) on `[lo, hi]`.
pub fn validate_on_interval(spec: &ProblemSpec, lo: f64, hi: f64) -> ValidationReport {
    validate_interval(spec, lo, hi, false)
}

fn validate_interval(spec: &ProblemSpec, lo: f64, hi: f64, full: bool) -> ValidationReport {
    let f = &spec.potential;
    let g = &spec.coupling;
    let mut checks = Vec::new();

    checks.push(match f.check_parameters() {
        Ok(()) => pass(CHECK_POTENTIAL),
        Err(e) => fail(CHECK_POTENTIAL, e.to_string()),
    });

    if full {
        let mut c = if lo < hi { pass(CHECK_INTERVAL) } else { fail(CHECK_INTERVAL, "") };
        c.value = Some(hi - lo);
        checks.push(c);
    }

    // Smoothness: every derivative finite at every sample.
    let mut smooth = pass(CHECK_SMOOTH);
    for r in samples(lo, hi) {
        let fv = [f.value(r), f.first(r), f.second(r)];
        let bad_f = fv.iter().find_map(|v| match v {
            Err(e) => Some(e.to_string()),
            Ok(v) if !v.is_finite() => Some("f is not finite".to_string()),
            _ => None,
        });
        let gv = [g.value(r), g.first(r), g.second(r)];
        let bad = bad_f.or_else(|| {
            gv.iter().any(|v| !v.is_finite()).then(|| "g is not finite".to_string())
        });
        if let Some(msg) = bad {
            smooth = fail(CHECK_SMOOTH, msg);
            smooth.location = Some(Location::Point(r));
            break;
        }
    }
    checks.push(smooth);

    let mut convex = match f.split() {
        Err(e) => fail(CHECK_CONVEX_SPLIT, e.to_string()),
        Ok(split) => {
            let mut worst = (f64::INFINITY, lo);
            let mut err = None;
            for r in samples(lo, hi) {
                match split.convex().second(r) {
                    Ok(v) if v < worst.0 => worst = (v, r),
                    Ok(_) => {}
                    Err(e) => {
                        err = Some((e.to_string(), r));
                        break;
                    }
                }
            }
            match err {
                Some((msg, r)) => {
                    let mut c = fail(CHECK_CONVEX_SPLIT, msg);
                    c.location = Some(Location::Point(r));
                    c
                }
                None => {
                    let mut c = if worst.0 >= -1e-12 {
                        pass(CHECK_CONVEX_SPLIT)
                    } else {
                        fail(CHECK_CONVEX_SPLIT, "f1'' < 0")
                    };
                    c.value = Some(worst.0);
                    c.location = Some(Location::Point(worst.1));
                    c
                }
            }
        }
    };
    if convex.detail.is_empty() && !convex.passed {
        convex.detail = "convex part not convex".into();
    }
    checks.push(convex);

    let (gmin, gmin_at) = samples(lo, hi)
        .map(|r| (g.value(r), r))
        .fold((f64::INFINITY, lo), |a, b| if b.0 < a.0 { b } else { a });
    let mut c = if gmin >= 0.0 { pass(CHECK_G_NONNEG) } else { fail(CHECK_G_NONNEG, "") };
    c.value = Some(gmin);
    c.location = Some(Location::Point(gmin_at));
    checks.push(c);

    let (g2max, g2max_at) = samples(lo, hi)
        .map(|r| (g.second(r), r))
        .fold((f64::NEG_INFINITY, lo), |a, b| if b.0 > a.0 { b } else { a });
    let mut c = if g2max <= 0.0 { pass(CHECK_G_CONCAVE) } else { fail(CHECK_G_CONCAVE, "") };
    c.value = Some(g2max);
    c.location = Some(Location::Point(g2max_at));
    checks.push(c);

    if full {
        checks.push(sign_check(CHECK_SIGN_MIN, f.first(lo), g.first(lo), lo, true));
        checks.push(sign_check(CHECK_SIGN_MAX, f.first(hi), g.first(hi), hi, false));
        let (mu_check, rho_check) = initial_data_checks(spec);
        checks.push(mu_check);
        checks.push(rho_check);
    }

    let passed = checks.iter().all(|c| c.passed);
    ValidationReport { passed, checks }
}

fn sign_check(
    name: &'static str,
    df: Result<f64, ModelError>,
    dg: f64,
    at: f64,
    lower: bool,
) -> Check {
    let df = match df {
        Ok(v) => v,
        Err(e) => {
            let mut c = fail(name, e.to_string());
            c.location = Some(Location::Point(at));
            return c;
        }
    };
    // Lower end: f' <= 0 <= g'. Upper end: g' <= 0 <= f'.
    let ok = if lower { df <= 0.0 && dg >= 0.0 } else { dg <= 0.0 && df >= 0.0 };
    let mut c = if ok { pass(name) } else { fail(name, "") };
    c.detail = format!("f' = {df}, g' = {dg}");
    c.value = Some(df);
    c.location = Some(Location::Point(at));
    c
}

fn initial_data_checks(spec: &ProblemSpec) -> (Check, Check) {
    let fields = spec.initial_fields();
    let (mu, rho) = match fields {
        Ok(v) => v,
        Err(e) => {
            let msg = e.to_string();
            return (fail(CHECK_MU0, msg.clone()), fail(CHECK_RHO0, msg));
        }
    };
    let grid = *mu.grid();
    let cell = |index: usize| Location::Cell {
        index,
        center: grid.center(index)[..grid.dimension()].to_vec(),
    };

    let mut mu_check = pass(CHECK_MU0);
    let mut worst = (f64::INFINITY, 0);
    for (i, &v) in mu.values().iter().enumerate() {
        if !v.is_finite() {
            worst = (v, i);
            break;
        }
        if v < worst.0 {
            worst = (v, i);
        }
    }
    if !(worst.0.is_finite() && worst.0 >= 0.0) {
        mu_check = fail(CHECK_MU0, "");
    }
    mu_check.value = Some(worst.0);
    mu_check.location = Some(cell(worst.1));

    // Signed distance outside [rho_min, rho_max]; positive means violation.
    let mut rho_check = pass(CHECK_RHO0);
    let mut worst = (f64::NEG_INFINITY, 0, f64::NAN);
    for (i, &v) in rho.values().iter().enumerate() {
        let excess = if v.is_finite() {
            (spec.rho_min - v).max(v - spec.rho_max)
        } else {
            f64::INFINITY
        };
        if excess > worst.0 {
            worst = (excess, i, v);
        }
    }
    if worst.0 > 0.0 {
        rho_check = fail(CHECK_RHO0, format!("exceeds the interval by {}", worst.0));
    }
    rho_check.value = Some(worst.2);
    rho_check.location = Some(cell(worst.1));

    (mu_check, rho_check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Coupling, InitialDatum, Potential};

    fn quartic_spec() -> ProblemSpec {
        ProblemSpec {
            rho_min: -1.0,
            rho_max: 1.0,
            potential: Potential::Quartic,
            coupling: Coupling::polynomial(vec![1.0, 0.0, -1.0]),
            rho0: InitialDatum::expression("0.5*cos(pi*x)").unwrap(),
            ..ProblemSpec::benchmark()
        }
    }

    #[test]
    fn benchmark_passes_with_expected_endpoint_slopes() {
        let report = validate(&ProblemSpec::benchmark());
        assert!(report.passed, "{report}");
        let lo = report.check(CHECK_SIGN_MIN).unwrap().value.unwrap();
        let hi = report.check(CHECK_SIGN_MAX).unwrap().value.unwrap();
        assert!((lo + 4.597).abs() < 1e-3);
        assert!((hi - 4.597).abs() < 1e-3);
    }

    #[test]
    fn quartic_with_parabolic_coupling_passes() {
        let report = validate(&quartic_spec());
        assert!(report.passed, "{report}");
        assert_eq!(report.check(CHECK_SIGN_MIN).unwrap().value, Some(0.0));
    }

    #[test]
    fn convex_coupling_fails_concavity() {
        let spec = ProblemSpec { coupling: Coupling::polynomial(vec![0.0, 0.0, 1.0]), ..quartic_spec() };
        let report = validate(&spec);
        assert!(!report.passed);
        let c = report.check(CHECK_G_CONCAVE).unwrap();
        assert!(!c.passed);
        assert_eq!(c.value, Some(2.0));
    }

    #[test]
    fn checks_come_in_documented_order() {
        let names: Vec<_> = validate(&ProblemSpec::benchmark()).checks.iter().map(|c| c.name).collect();
        assert_eq!(
            names,
            [
                CHECK_POTENTIAL,
                CHECK_INTERVAL,
                CHECK_SMOOTH,
                CHECK_CONVEX_SPLIT,
                CHECK_G_NONNEG,
                CHECK_G_CONCAVE,
                CHECK_SIGN_MIN,
                CHECK_SIGN_MAX,
                CHECK_MU0,
                CHECK_RHO0
            ]
        );
    }

    #[test]
    fn logarithmic_interval_must_sit_inside_unit_interval() {
        let spec = ProblemSpec { rho_min: 0.0, ..ProblemSpec::benchmark() };
        let report = validate(&spec);
        assert!(!report.check(CHECK_SMOOTH).unwrap().passed);
        assert_eq!(report.check(CHECK_SMOOTH).unwrap().location, Some(Location::Point(0.0)));
    }

    #[test]
    fn initial_data_violations_located() {
        let spec = ProblemSpec {
            mu0: InitialDatum::expression("x - 0.5").unwrap(),
            rho0: InitialDatum::expression("0.5 + 0.5*cos(pi*x)").unwrap(),
            ..ProblemSpec::benchmark()
        };
        let report = validate(&spec);
        let mu = report.check(CHECK_MU0).unwrap();
        assert!(!mu.passed);
        assert!(matches!(mu.location, Some(Location::Cell { index: 0, .. })));
        assert!(!report.check(CHECK_RHO0).unwrap().passed);
        let nan = ProblemSpec { mu0: InitialDatum::expression("1/(x-x)").unwrap(), ..ProblemSpec::benchmark() };
        assert!(!validate(&nan).check(CHECK_MU0).unwrap().passed);
    }

    #[test]
    fn reversed_interval_and_bad_parameters_reported() {
        let spec = ProblemSpec { rho_min: 0.9, rho_max: 0.1, ..ProblemSpec::benchmark() };
        assert!(!validate(&spec).check(CHECK_INTERVAL).unwrap().passed);
        let spec = ProblemSpec { potential: Potential::Logarithmic { c1: 1.0, c2: 1.5 }, ..ProblemSpec::benchmark() };
        let report = validate(&spec);
        let c = report.check(CHECK_POTENTIAL).unwrap();
        assert!(!c.passed && c.detail.contains("c2 > 2·c1"));
    }
}
