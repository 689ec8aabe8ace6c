//! Cell-centered Cartesian grids on boxes, the zero-flux Laplacian, quadrature and norms.

mod field;
mod norms;

pub use field::Field;
pub(crate) use field::write_columns_csv;
pub use norms::{accumulate_spacetime, NormRecord, SpaceTimeNorm, TrajectoryNorms};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("dimension must be 1, 2 or 3 (got {0})")]
    Dimension(usize),
    #[error("expected {expected} entries per axis list, got {got}")]
    AxisCount { expected: usize, got: usize },
    #[error("axis {axis} needs at least 2 cells (got {cells})")]
    TooFewCells { axis: usize, cells: usize },
    #[error("axis {axis} length must be positive and finite (got {length})")]
    Length { axis: usize, length: f64 },
    #[error("field has {got} values but the grid has {expected} cells")]
    FieldLength { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("norm exponent must be at least 1 (got {0})")]
    Exponent(f64),
}

/// Uniform grid of `n_1 × … × n_d` cells on `[0, L_1] × … × [0, L_d]`.
///
/// Cells are numbered lexicographically with axis 0 fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    cells: [usize; 3],
    lengths: [f64; 3],
    spacing: [f64; 3],
}

impl Grid {
    pub fn new(lengths: &[f64], cells: &[usize]) -> Result<Self, GridError> {
        let dim = lengths.len();
        if !(1..=3).contains(&dim) {
            return Err(GridError::Dimension(dim));
        }
        if cells.len() != dim {
            return Err(GridError::AxisCount { expected: dim, got: cells.len() });
        }
        let mut grid = Grid { dim, cells: [1; 3], lengths: [1.0; 3], spacing: [1.0; 3] };
        for axis in 0..dim {
            let (l, n) = (lengths[axis], cells[axis]);
            if !(l.is_finite() && l > 0.0) {
                return Err(GridError::Length { axis, length: l });
            }
            if n < 2 {
                return Err(GridError::TooFewCells { axis, cells: n });
            }
            grid.cells[axis] = n;
            grid.lengths[axis] = l;
            grid.spacing[axis] = l / n as f64;
        }
        Ok(grid)
    }

    pub fn unit_interval(n: usize) -> Result<Self, GridError> {
        Grid::new(&[1.0], &[n])
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    pub fn cell_count(&self) -> usize {
        self.cells().iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths().iter().product()
    }

    /// Same box with every axis refined by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        let cells: Vec<usize> = self.cells().iter().map(|n| n * factor).collect();
        Grid::new(self.lengths(), &cells).expect("refinement of a valid grid is valid")
    }

    fn stride(&self, axis: usize) -> usize {
        self.cells[..axis].iter().product()
    }

    pub fn multi_index(&self, index: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut rest = index;
        for (axis, slot) in out.iter_mut().enumerate().take(self.dim) {
            *slot = rest % self.cells[axis];
            rest /= self.cells[axis];
        }
        out
    }

    /// Cell-center coordinates; unused axes are zero.
    pub fn center(&self, index: usize) -> [f64; 3] {
        let m = self.multi_index(index);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = (m[axis] as f64 + 0.5) * self.spacing[axis];
        }
        x
    }

    /// Discrete Laplacian with mirror ghost cells (zero flux through every boundary face).
    pub fn laplacian(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.cell_count());
        out.iter_mut().for_each(|o| *o = 0.0);
        for axis in 0..self.dim {
            let n = self.cells[axis];
            let s = self.stride(axis);
            let w = 1.0 / (self.spacing[axis] * self.spacing[axis]);
            for (idx, o) in out.iter_mut().enumerate() {
                let ia = (idx / s) % n;
                let mut acc = 0.0;
                if ia > 0 {
                    acc += v[idx - s] - v[idx];
                }
                if ia + 1 < n {
                    acc += v[idx + s] - v[idx];
                }
                *o += w * acc;
            }
        }
    }

    /// Number of interior neighbours of a cell weighted by `1/h^2`, i.e. the diagonal of `-Δ`.
    pub fn laplacian_diagonal(&self, index: usize) -> f64 {
        let m = self.multi_index(index);
        (0..self.dim)
            .map(|axis| {
                let n = self.cells[axis];
                let nbrs = usize::from(m[axis] > 0) + usize::from(m[axis] + 1 < n);
                nbrs as f64 / (self.spacing[axis] * self.spacing[axis])
            })
            .sum()
    }

    /// Visits each interior neighbour `j` of `index` with weight `1/h^2`.
    pub fn for_each_neighbour(&self, index: usize, mut visit: impl FnMut(usize, f64)) {
        let m = self.multi_index(index);
        for axis in 0..self.dim {
            let s = self.stride(axis);
            let w = 1.0 / (self.spacing[axis] * self.spacing[axis]);
            if m[axis] > 0 {
                visit(index - s, w);
            }
            if m[axis] + 1 < self.cells[axis] {
                visit(index + s, w);
            }
        }
    }

    /// `∫|∇v|²` from forward differences across interior faces; boundary faces carry no flux.
    pub fn gradient_norm_sq(&self, v: &[f64]) -> f64 {
        let vol = self.cell_volume();
        let mut total = 0.0;
        for axis in 0..self.dim {
            let n = self.cells[axis];
            let s = self.stride(axis);
            let h = self.spacing[axis];
            let mut sum = 0.0;
            for idx in 0..v.len() {
                if (idx / s) % n + 1 < n {
                    let d = (v[idx + s] - v[idx]) / h;
                    sum += d * d;
                }
            }
            total += sum * vol;
        }
        total
    }
}
