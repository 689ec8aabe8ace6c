//! Jacobi-preconditioned conjugate gradients for the SPD systems `diag(c) x − Δx = b`.

use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// `‖b − A x‖₂ / ‖b‖₂` at exit.
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned conjugate gradients for a matrix-free SPD operator.
///
/// `x` holds the initial guess on entry. Returns `Err` with the final state when
/// `max_iter` iterations do not reach `‖r‖ ≤ tol ‖b‖`.
pub fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    inv_diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome, CgOutcome> {
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome { iterations: 0, relative_residual: 0.0 });
    }
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut rel = dot(&r, &r).sqrt() / b_norm;
    if rel <= tol {
        return Ok(CgOutcome { iterations: 0, relative_residual: rel });
    }
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = ax;
    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(CgOutcome { iterations: it, relative_residual: rel });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = dot(&r, &r).sqrt() / b_norm;
        if rel <= tol {
            return Ok(CgOutcome { iterations: it, relative_residual: rel });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(CgOutcome { iterations: max_iter, relative_residual: rel })
}

/// Solves `c ⊙ x − Δx = b` with the zero-flux Laplacian of `grid`; requires `c > 0`.
pub fn solve_shifted_laplacian(
    grid: &Grid,
    shift: &[f64],
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome, CgOutcome> {
    let inv_diag: Vec<f64> = shift
        .iter()
        .enumerate()
        .map(|(i, c)| 1.0 / (c + grid.laplacian_diagonal(i)))
        .collect();
    let apply = |v: &[f64], out: &mut [f64]| {
        grid.laplacian(v, out);
        for i in 0..v.len() {
            out[i] = shift[i] * v[i] - out[i];
        }
    };
    pcg(apply, &inv_diag, b, x, tol, max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_system() {
        let d = [2.0, 3.0, 4.0];
        let b = [2.0, 6.0, 12.0];
        let mut x = [0.0; 3];
        let apply = |v: &[f64], out: &mut [f64]| {
            for i in 0..3 {
                out[i] = d[i] * v[i];
            }
        };
        let inv = [1.0; 3];
        let out = pcg(apply, &inv, &b, &mut x, 1e-12, 10).unwrap();
        assert!(out.iterations <= 3);
        for (xi, ei) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((xi - ei).abs() < 1e-10);
        }
    }

    #[test]
    fn shifted_laplacian_residual_below_tolerance() {
        let grid = Grid::new(&[1.0, 1.0], &[12, 9]).unwrap();
        let n = grid.cell_count();
        let shift: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64).collect();
        let b: Vec<f64> = (0..n).map(|i| ((i * 13) % 5) as f64 - 2.0).collect();
        let mut x = vec![0.0; n];
        let out = solve_shifted_laplacian(&grid, &shift, &b, &mut x, 1e-10, 10 * n).unwrap();
        let mut lap = vec![0.0; n];
        grid.laplacian(&x, &mut lap);
        let res: f64 = (0..n).map(|i| (b[i] - (shift[i] * x[i] - lap[i])).powi(2)).sum::<f64>().sqrt();
        let bn: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(res / bn <= 1e-10 * 1.01, "{}", res / bn);
        assert!(out.relative_residual <= 1e-10);
    }

    #[test]
    fn zero_rhs_gives_zero_solution() {
        let grid = Grid::unit_interval(8).unwrap();
        let mut x = vec![1.0; 8];
        let out = solve_shifted_laplacian(&grid, &[1.0; 8], &[0.0; 8], &mut x, 1e-10, 80).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn budget_exhaustion_reported() {
        let grid = Grid::unit_interval(64).unwrap();
        let b: Vec<f64> = (0..64).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; 64];
        assert!(solve_shifted_laplacian(&grid, &[1e-3; 64], &b, &mut x, 1e-14, 2).is_err());
    }
}
