//! Independent reference solutions shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use phasefield::model::{Coupling, InitialDatum, Potential, ProblemSpec};

/// Spatially constant data for the double-well potential with `g(r) = 1 − r²` on `[−1, 1]`.
pub fn homogeneous_spec(final_time: f64) -> ProblemSpec {
    ProblemSpec {
        cells: vec![8],
        rho_min: -1.0,
        rho_max: 1.0,
        final_time,
        potential: Potential::Quartic,
        coupling: Coupling::polynomial(vec![1.0, 0.0, -1.0]),
        mu0: InitialDatum::constant(1.0),
        rho0: InitialDatum::constant(0.5),
        ..ProblemSpec::benchmark()
    }
}

/// Right-hand side of the spatially homogeneous system
/// `ρ' = −f'(ρ) + μ g'(ρ)`, `(1 + 2g(ρ)) μ' = −μ g'(ρ) ρ'` for `f = ¼(r² − 1)²`, `g = 1 − r²`.
fn homogeneous_rhs(y: [f64; 2]) -> [f64; 2] {
    let [mu, rho] = y;
    let df = rho * rho * rho - rho;
    let g = 1.0 - rho * rho;
    let dg = -2.0 * rho;
    let drho = -df + mu * dg;
    let dmu = -mu * dg * drho / (1.0 + 2.0 * g);
    [dmu, drho]
}

/// Classical fourth-order Runge–Kutta for the homogeneous system; returns `[μ(T), ρ(T)]`.
pub fn rk4_homogeneous(mu0: f64, rho0: f64, t_end: f64, steps: usize) -> [f64; 2] {
    let h = t_end / steps as f64;
    let mut y = [mu0, rho0];
    let add = |y: [f64; 2], k: [f64; 2], s: f64| [y[0] + s * k[0], y[1] + s * k[1]];
    for _ in 0..steps {
        let k1 = homogeneous_rhs(y);
        let k2 = homogeneous_rhs(add(y, k1, h / 2.0));
        let k3 = homogeneous_rhs(add(y, k2, h / 2.0));
        let k4 = homogeneous_rhs(add(y, k3, h));
        for i in 0..2 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

/// Pure heat equation: no coupling, flat potential, `μ0 = 1 + cos(πx)` on the unit interval.
pub fn heat_spec(cells: usize, final_time: f64) -> ProblemSpec {
    ProblemSpec {
        cells: vec![cells],
        rho_min: -1.0,
        rho_max: 1.0,
        final_time,
        potential: Potential::polynomial(vec![0.0], Some(vec![0.0])).unwrap(),
        coupling: Coupling::zero(),
        mu0: InitialDatum::expression("1 + cos(pi*x)").unwrap(),
        rho0: InitialDatum::constant(0.0),
        ..ProblemSpec::benchmark()
    }
}

/// `1 + e^{−π² t} cos(πx)`.
pub fn heat_exact(x: f64, t: f64) -> f64 {
    1.0 + (-PI * PI * t).exp() * (PI * x).cos()
}

/// Closed-form space-time norms of `∂tμ` for the heat solution on `[0, 1] × (0, T)`:
/// `(‖∂tμ‖_{L²(Q)}, ‖Δμ‖_{L²(Q)}, sup_t ‖∂tμ‖₂, ‖∇∂tμ‖_{L²(Q)}, ‖∂tμ‖_{L^{10/3}(Q)})`.
pub fn heat_norms(t_end: f64) -> [f64; 5] {
    let p2 = PI * PI;
    let decay = 1.0 - (-2.0 * p2 * t_end).exp();
    let l2 = (p2 * p2 * decay / (4.0 * p2)).sqrt();
    let sup = p2 / 2f64.sqrt();
    let grad = (p2 * p2 * p2 * decay / (4.0 * p2)).sqrt();
    // ∫₀¹|cos(πx)|^p dx = Γ((p+1)/2) / (√π Γ(p/2 + 1)), evaluated by quadrature.
    let p = 10.0 / 3.0;
    let n = 200_000;
    let cos_p: f64 = (0..n).map(|i| ((i as f64 + 0.5) / n as f64 * PI).cos().abs().powf(p)).sum::<f64>() / n as f64;
    let time = (1.0 - (-p * p2 * t_end).exp()) / (p * p2);
    let l103 = (p2.powf(p) * cos_p * time).powf(1.0 / p);
    [l2, l2, sup, grad, l103]
}
