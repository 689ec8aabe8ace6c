use crate::grid::{Field, Grid};

use super::expr::Expression;
use super::{Coupling, ModelError, Potential};

/// Initial condition: a closed-form expression in `x, y, z` sampled at cell centers,
/// or a literal list of cell values.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDatum {
    Expression(Expression),
    Values(Vec<f64>),
}

impl InitialDatum {
    pub fn expression(source: &str) -> Result<Self, ModelError> {
        Ok(InitialDatum::Expression(Expression::parse(source)?))
    }

    pub fn constant(value: f64) -> Self {
        InitialDatum::Expression(
            Expression::parse(&format!("{value:?}")).expect("float literal parses"),
        )
    }

    pub fn sample(&self, grid: &Grid) -> Result<Field, ModelError> {
        match self {
            InitialDatum::Expression(e) => Ok(Field::from_fn(*grid, |x| e.eval(x))),
            InitialDatum::Values(v) => Ok(Field::new(*grid, v.clone())?),
        }
    }
}

/// Everything needed to pose one instance of the coupled problem on a box.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub lengths: Vec<f64>,
    pub cells: Vec<usize>,
    pub rho_min: f64,
    pub rho_max: f64,
    /// Diffusion coefficient of the order parameter; zero selects the limit system.
    pub sigma: f64,
    pub final_time: f64,
    pub potential: Potential,
    pub coupling: Coupling,
    pub mu0: InitialDatum,
    pub rho0: InitialDatum,
}

impl ProblemSpec {
    /// 1D unit interval, 128 cells, `T = 1`, logarithmic potential with `c1 = 1, c2 = 3`,
    /// `g(r) = r(1-r)`, `ρ ∈ [0.1, 0.9]`, `ρ0 = 0.5 + 0.3 cos(πx)`, `μ0 = 1 + cos(πx)/2`.
    pub fn benchmark() -> Self {
        ProblemSpec {
            lengths: vec![1.0],
            cells: vec![128],
            rho_min: 0.1,
            rho_max: 0.9,
            sigma: 0.0,
            final_time: 1.0,
            potential: Potential::Logarithmic { c1: 1.0, c2: 3.0 },
            coupling: Coupling::ConcaveQuadratic,
            mu0: InitialDatum::expression("1 + 0.5*cos(pi*x)").expect("valid expression"),
            rho0: InitialDatum::expression("0.5 + 0.3*cos(pi*x)").expect("valid expression"),
        }
    }

    pub fn dimension(&self) -> usize {
        self.lengths.len()
    }

    pub fn grid(&self) -> Result<Grid, ModelError> {
        Ok(Grid::new(&self.lengths, &self.cells)?)
    }

    pub fn initial_fields(&self) -> Result<(Field, Field), ModelError> {
        let grid = self.grid()?;
        Ok((self.mu0.sample(&grid)?, self.rho0.sample(&grid)?))
    }

    /// Same problem with every axis refined by `factor`. Literal initial data cannot be refined.
    pub fn refined(&self, factor: usize) -> Result<Self, ModelError> {
        if factor == 1 {
            return Ok(self.clone());
        }
        if matches!(self.mu0, InitialDatum::Values(_)) || matches!(self.rho0, InitialDatum::Values(_)) {
            return Err(ModelError::InitialData(
                "literal grid values cannot be resampled on a refined grid".into(),
            ));
        }
        let mut out = self.clone();
        out.cells = self.cells.iter().map(|n| n * factor).collect();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn benchmark_initial_data() {
        let spec = ProblemSpec::benchmark();
        let (mu, rho) = spec.initial_fields().unwrap();
        assert_eq!(mu.len(), 128);
        let x0 = mu.grid().center(0)[0];
        assert!((mu.values()[0] - (1.0 + 0.5 * (std::f64::consts::PI * x0).cos())).abs() < 1e-15);
        assert!(rho.min() > 0.2 - 1e-12 && rho.max() < 0.8 + 1e-12);
    }

    #[test]
    fn literal_values_must_match_grid() {
        let mut spec = ProblemSpec::benchmark();
        spec.cells = vec![4];
        spec.mu0 = InitialDatum::Values(vec![1.0, 1.0, 1.0]);
        assert!(spec.initial_fields().is_err());
        spec.mu0 = InitialDatum::Values(vec![1.0; 4]);
        assert!(spec.initial_fields().is_ok());
        assert!(spec.refined(2).is_err());
    }

    #[test]
    fn constant_datum_round_trips_value() {
        let d = InitialDatum::constant(0.1);
        let f = d.sample(&Grid::unit_interval(3).unwrap()).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.1));
    }
}
