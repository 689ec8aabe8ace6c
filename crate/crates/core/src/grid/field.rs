use std::io::Write;

use super::{Grid, GridError};

/// Cell-centered scalar values on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.cell_count() {
            return Err(GridError::FieldLength { expected: grid.cell_count(), got: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self { grid, values: vec![value; grid.cell_count()] }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f` at cell centers.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.cell_count())
            .map(|i| f(&grid.center(i)[..grid.dimension()]))
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field, GridError> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Field { grid: self.grid, values })
    }

    pub fn same_grid(&self, other: &Field) -> Result<(), GridError> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(GridError::GridMismatch)
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn laplacian_neumann(&self) -> Field {
        let mut out = vec![0.0; self.values.len()];
        self.grid.laplacian(&self.values, &mut out);
        Field { grid: self.grid, values: out }
    }

    /// Midpoint quadrature of the field over the box.
    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Midpoint quadrature of the pointwise product.
    pub fn integrate_product(&self, other: &Field) -> Result<f64, GridError> {
        self.same_grid(other)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(s * self.grid.cell_volume())
    }

    /// `∫|v|^p` for finite `p`.
    pub fn integral_abs_pow(&self, p: f64) -> f64 {
        let s: f64 = if p == 2.0 {
            self.values.iter().map(|v| v * v).sum()
        } else {
            self.values.iter().map(|v| v.abs().powf(p)).sum()
        };
        s * self.grid.cell_volume()
    }

    /// Discrete `L^p` norm; `p = f64::INFINITY` gives the max norm.
    pub fn norm_lp(&self, p: f64) -> Result<f64, GridError> {
        if p.is_nan() || p < 1.0 {
            return Err(GridError::Exponent(p));
        }
        if p.is_infinite() {
            return Ok(self.values.iter().fold(0.0, |m, v| m.max(v.abs())));
        }
        Ok(self.integral_abs_pow(p).powf(1.0 / p))
    }

    pub fn norm_l2(&self) -> f64 {
        self.integral_abs_pow(2.0).sqrt()
    }

    pub fn norm_linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn gradient_norm_sq(&self) -> f64 {
        self.grid.gradient_norm_sq(&self.values)
    }

    pub fn norm_h1(&self) -> f64 {
        (self.integral_abs_pow(2.0) + self.gradient_norm_sq()).sqrt()
    }

    /// Writes one row per cell: integer cell indices, center coordinates, value.
    pub fn write_csv<W: Write>(&self, writer: W, value_name: &str) -> csv::Result<()> {
        write_columns_csv(&self.grid, &[(value_name, self)], writer)
    }
}

/// Writes several fields sharing one grid as columns of a single CSV table.
pub(crate) fn write_columns_csv<W: Write>(
    grid: &Grid,
    columns: &[(&str, &Field)],
    writer: W,
) -> csv::Result<()> {
    const INDEX: [&str; 3] = ["i", "j", "k"];
    const COORD: [&str; 3] = ["x", "y", "z"];
    let d = grid.dimension();
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = INDEX[..d].to_vec();
    header.extend_from_slice(&COORD[..d]);
    header.extend(columns.iter().map(|(name, _)| *name));
    w.write_record(&header)?;
    for idx in 0..grid.cell_count() {
        let m = grid.multi_index(idx);
        let x = grid.center(idx);
        let mut row: Vec<String> = m[..d].iter().map(|v| v.to_string()).collect();
        row.extend(x[..d].iter().map(|v| v.to_string()));
        row.extend(columns.iter().map(|(_, f)| f.values[idx].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cos_field(n: usize, k: f64) -> Field {
        Field::from_fn(Grid::unit_interval(n).unwrap(), |x| (k * PI * x[0]).cos())
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let g = Grid::new(&[1.0, 2.0, 0.5], &[3, 4, 5]).unwrap();
        let f = Field::constant(g, 4.2);
        assert!(f.laplacian_neumann().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn laplacian_exact_on_quadratic_interior() {
        let g = Grid::unit_interval(16).unwrap();
        let f = Field::from_fn(g, |x| x[0] * x[0]);
        let lap = f.laplacian_neumann();
        for &v in &lap.values()[1..15] {
            assert!((v - 2.0).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn laplacian_second_order_on_cosine_mode() {
        let errs: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| {
                let f = cos_field(n, 1.0);
                let exact = f.map(|v| -PI * PI * v);
                let lap = f.laplacian_neumann();
                lap.zip_map(&exact, |a, b| a - b).unwrap().norm_linf()
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.6..=4.4).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn quadrature_examples() {
        let g = Grid::unit_interval(10).unwrap();
        assert!((Field::constant(g, 3.0).integrate() - 3.0).abs() < 1e-14);
        assert!(cos_field(37, 2.0).integrate().abs() < 1e-15);
        let g2 = Grid::new(&[1.0, 2.0], &[5, 7]).unwrap();
        assert!((Field::constant(g2, 1.0).integrate() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn norm_examples() {
        let g = Grid::new(&[1.0, 1.0], &[8, 8]).unwrap();
        let c = Field::constant(g, 2.0);
        assert!((c.norm_lp(2.0).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(c.norm_h1(), c.norm_l2());
        assert_eq!(c.norm_lp(f64::INFINITY).unwrap(), 2.0);
        assert!(matches!(c.norm_lp(0.5), Err(GridError::Exponent(_))));
        let f = cos_field(128, 1.0);
        assert!((f.norm_lp(2.0).unwrap() - 0.5_f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn csv_layout() {
        let g = Grid::new(&[1.0, 1.0], &[2, 2]).unwrap();
        let f = Field::new(g, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf, "mu").unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("i,j,x,y,mu"));
        assert_eq!(lines.next(), Some("0,0,0.25,0.25,1"));
        assert_eq!(lines.next(), Some("1,0,0.75,0.25,2"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn length_mismatch_rejected() {
        let g = Grid::unit_interval(4).unwrap();
        assert!(matches!(Field::new(g, vec![0.0; 3]), Err(GridError::FieldLength { .. })));
        let other = Field::zeros(Grid::unit_interval(5).unwrap());
        assert!(Field::zeros(g).zip_map(&other, |a, _| a).is_err());
    }
}
