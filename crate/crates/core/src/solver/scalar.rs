//! Safeguarded Newton iteration for strictly increasing scalar equations.

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarFailure {
    /// The residual does not change sign on the admissible interval.
    NoBracket { lo: f64, hi: f64 },
    /// The iteration budget ran out.
    MaxIterations { x: f64, residual: f64 },
    /// The residual or its slope was not finite.
    NotFinite { x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarRoot {
    pub root: f64,
    pub iterations: usize,
}

/// Finds the root of an increasing function `phi` on `[lo, hi]`.
///
/// `phi` returns `(value, slope)`. Newton steps that leave the current bracket are
/// replaced by bisection, so iterates never leave `[lo, hi]`. Converges when the
/// update is below `tol · max(1, |x|)` or the residual is exactly zero.
pub fn safeguarded_newton(
    phi: impl Fn(f64) -> (f64, f64),
    mut lo: f64,
    mut hi: f64,
    guess: f64,
    tol: f64,
    max_iter: usize,
) -> Result<ScalarRoot, ScalarFailure> {
    let mut x = guess.clamp(lo, hi);
    let mut residual = f64::NAN;
    for it in 1..=max_iter {
        let (v, d) = phi(x);
        if !v.is_finite() || d.is_nan() {
            return Err(ScalarFailure::NotFinite { x });
        }
        residual = v;
        if v == 0.0 {
            return Ok(ScalarRoot { root: x, iterations: it - 1 });
        }
        if v < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - v / d;
        let next = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let scale = tol * x.abs().max(1.0);
        if (next - x).abs() <= scale || hi - lo <= scale {
            return Ok(ScalarRoot { root: next, iterations: it });
        }
        x = next;
    }
    Err(ScalarFailure::MaxIterations { x, residual })
}

/// Solves `alpha·r + tau·dconvex(r) = beta` for `r`, where `dconvex` is nondecreasing and
/// `alpha > 0`.
///
/// With `domain = Some((a, b))` the search starts on `[a + margin, b - margin]` and only moves
/// closer to an endpoint when the root lies there; iterates never reach `a` or `b`.
/// Without a domain, a bracket is grown geometrically around `guess`.
#[allow(clippy::too_many_arguments)]
pub fn solve_monotone(
    alpha: f64,
    tau: f64,
    beta: f64,
    dconvex: impl Fn(f64) -> (f64, f64),
    domain: Option<(f64, f64)>,
    margin: f64,
    guess: f64,
    tol: f64,
    max_iter: usize,
) -> Result<ScalarRoot, ScalarFailure> {
    let phi = |r: f64| {
        let (d1, d2) = dconvex(r);
        (alpha * r + tau * d1 - beta, alpha + tau * d2)
    };
    let (lo, hi) = match domain {
        Some((a, b)) => {
            let (mut lo, mut hi) = (a + margin, b - margin);
            // Roots closer to an endpoint than the margin are chased geometrically.
            while phi(lo).0 > 0.0 {
                let next = a + (lo - a) * 1e-3;
                if next <= a || next == lo {
                    return Err(ScalarFailure::NoBracket { lo, hi });
                }
                hi = lo;
                lo = next;
            }
            while phi(hi).0 < 0.0 {
                let next = b - (b - hi) * 1e-3;
                if next >= b || next == hi {
                    return Err(ScalarFailure::NoBracket { lo, hi });
                }
                lo = hi;
                hi = next;
            }
            (lo, hi)
        }
        None => {
            let g = if guess.is_finite() { guess } else { 0.0 };
            let (mut lo, mut hi) = (g - 1.0, g + 1.0);
            let mut width = 1.0;
            let mut grown = 0;
            while phi(lo).0 > 0.0 || phi(hi).0 < 0.0 {
                width *= 2.0;
                if phi(lo).0 > 0.0 {
                    lo = g - width;
                }
                if phi(hi).0 < 0.0 {
                    hi = g + width;
                }
                grown += 1;
                if grown > 200 {
                    return Err(ScalarFailure::NoBracket { lo, hi });
                }
            }
            (lo, hi)
        }
    };
    safeguarded_newton(phi, lo, hi, guess, tol, max_iter)
}
