use super::{Field, GridError};

/// Running `L^p(Q_t)` norm, accumulated as a right-endpoint rectangle rule in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeNorm {
    p: f64,
    sum: f64,
}

impl SpaceTimeNorm {
    pub fn new(p: f64) -> Result<Self, GridError> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(GridError::Exponent(p));
        }
        Ok(Self { p, sum: 0.0 })
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    /// Adds `dt · ‖f‖_p^p`.
    pub fn accumulate(&mut self, f: &Field, dt: f64) {
        self.sum += dt * f.integral_abs_pow(self.p);
    }

    /// Adds `dt · integral` where `integral` already is the spatial `∫|·|^p`.
    pub fn accumulate_integral(&mut self, integral: f64, dt: f64) {
        self.sum += dt * integral;
    }

    /// The accumulated `∫∫|·|^p`, before taking the root.
    pub fn accumulated(&self) -> f64 {
        self.sum
    }

    pub fn value(&self) -> f64 {
        self.sum.powf(1.0 / self.p)
    }
}

/// Spatial norms of the state at one output time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormRecord {
    pub t: f64,
    pub mu_l2: f64,
    pub mu_h1: f64,
    pub mu_linf: f64,
    pub rho_l2: f64,
}

/// Per-step spatial norms plus the space-time norms over `Q_t = Ω × (0, t)`.
///
/// The chemical-potential time derivative is the backward difference over each step.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryNorms {
    pub records: Vec<NormRecord>,
    pub dt_mu_l2: SpaceTimeNorm,
    pub dt_mu_l10_3: SpaceTimeNorm,
    pub lap_mu_l2: SpaceTimeNorm,
    pub grad_mu_l2: SpaceTimeNorm,
    pub grad_dt_mu_l2: SpaceTimeNorm,
    pub sup_dt_mu_l2: f64,
    pub sup_mu_h1: f64,
    pub sup_mu_linf: f64,
}

impl Default for TrajectoryNorms {
    fn default() -> Self {
        let l2 = SpaceTimeNorm { p: 2.0, sum: 0.0 };
        Self {
            records: Vec::new(),
            dt_mu_l2: l2,
            dt_mu_l10_3: SpaceTimeNorm { p: 10.0 / 3.0, sum: 0.0 },
            lap_mu_l2: l2,
            grad_mu_l2: l2,
            grad_dt_mu_l2: l2,
            sup_dt_mu_l2: 0.0,
            sup_mu_h1: 0.0,
            sup_mu_linf: 0.0,
        }
    }
}

impl TrajectoryNorms {
    pub fn record_state(&mut self, t: f64, mu: &Field, rho: &Field) {
        let rec = NormRecord {
            t,
            mu_l2: mu.norm_l2(),
            mu_h1: mu.norm_h1(),
            mu_linf: mu.norm_linf(),
            rho_l2: rho.norm_l2(),
        };
        self.sup_mu_h1 = self.sup_mu_h1.max(rec.mu_h1);
        self.sup_mu_linf = self.sup_mu_linf.max(rec.mu_linf);
        self.records.push(rec);
    }

    /// Accounts for one step of length `dt` from `mu_old` to `mu_new` (and records the new state).
    pub fn record_step(&mut self, t: f64, dt: f64, mu_old: &Field, mu_new: &Field, rho_new: &Field) {
        let dt_mu = mu_new
            .zip_map(mu_old, |a, b| (a - b) / dt)
            .expect("trajectory fields share a grid");
        self.dt_mu_l2.accumulate(&dt_mu, dt);
        self.dt_mu_l10_3.accumulate(&dt_mu, dt);
        self.grad_dt_mu_l2.accumulate_integral(dt_mu.gradient_norm_sq(), dt);
        self.sup_dt_mu_l2 = self.sup_dt_mu_l2.max(dt_mu.norm_l2());
        self.lap_mu_l2.accumulate(&mu_new.laplacian_neumann(), dt);
        self.grad_mu_l2.accumulate_integral(mu_new.gradient_norm_sq(), dt);
        self.record_state(t, mu_new, rho_new);
    }
}

/// Functional form of [`SpaceTimeNorm::accumulate`].
pub fn accumulate_spacetime(mut acc: SpaceTimeNorm, f: &Field, dt: f64) -> SpaceTimeNorm {
    acc.accumulate(f, dt);
    acc
}
