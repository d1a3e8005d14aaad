//! Ground-state preparation and moment evolution for two coupled oscillators
//!
//! H = ½(p₁² + p₂²) + ½(κ₀(x₁² + x₂²) + κ₁(x₁ − x₂)²)
//!
//! Phase-space vectors are ordered (x₁, x₂, p₁, p₂). Because the Hamiltonian
//! is quadratic the Heisenberg flow is linear, v̇ = A·v, so the first moments
//! obey the same equation and the covariance obeys Ċ = A·C + C·Aᵀ.

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};

/// Tolerance used when checking the uncertainty bound on symplectic eigenvalues.
pub const UNCERTAINTY_TOL: f64 = 1e-9;

/// Default integrator step.
pub const DEFAULT_DT: f64 = 1e-3;

/// Symplectic form Λ = [[0, 1], [−1, 0]] in (x₁, x₂, p₁, p₂) ordering.
pub fn symplectic_form() -> Matrix4<f64> {
    #[rustfmt::skip]
    let lambda = Matrix4::new(
         0.0,  0.0, 1.0, 0.0,
         0.0,  0.0, 0.0, 1.0,
        -1.0,  0.0, 0.0, 0.0,
         0.0, -1.0, 0.0, 0.0,
    );
    lambda
}

/// On-site stiffness κ₀ and coupling stiffness κ₁ (frequency² units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StiffnessParams {
    kappa0: f64,
    kappa1: f64,
}

impl StiffnessParams {
    pub fn new(kappa0: f64, kappa1: f64) -> Result<Self> {
        if !(kappa0.is_finite() && kappa1.is_finite()) {
            return Err(Error::domain("stiffness must be finite"));
        }
        if kappa0 <= 0.0 {
            return Err(Error::domain(format!("kappa0 = {kappa0} must be positive")));
        }
        if kappa0 + 2.0 * kappa1 <= 0.0 {
            return Err(Error::domain(format!(
                "kappa0 + 2 kappa1 = {} must be positive",
                kappa0 + 2.0 * kappa1
            )));
        }
        Ok(Self { kappa0, kappa1 })
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    /// Frequency of the center-of-mass mode, √κ₀.
    pub fn omega_p(&self) -> f64 {
        self.kappa0.sqrt()
    }

    /// Frequency of the relative mode, √(κ₀ + 2κ₁).
    pub fn omega_m(&self) -> f64 {
        (self.kappa0 + 2.0 * self.kappa1).sqrt()
    }
}

/// Inverts ω_p = √κ₀, ω_m = √(κ₀ + 2κ₁).
pub fn stiffness_from_frequencies(omega_p: f64, omega_m: f64) -> Result<StiffnessParams> {
    check_frequency("omega_p", omega_p)?;
    check_frequency("omega_m", omega_m)?;
    StiffnessParams::new(
        omega_p * omega_p,
        (omega_m * omega_m - omega_p * omega_p) / 2.0,
    )
}

pub(crate) fn check_frequency(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {value} must be a positive finite frequency")))
    }
}

/// Two-epoch frequency schedule: (ω_p0, ω_m0) at t = 0, (ω_p1, ω_m1) for t > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchSchedule {
    pub omega_p0: f64,
    pub omega_m0: f64,
    pub omega_p1: f64,
    pub omega_m1: f64,
}

impl QuenchSchedule {
    pub fn new(omega_p0: f64, omega_m0: f64, omega_p1: f64, omega_m1: f64) -> Result<Self> {
        check_frequency("omega_p0", omega_p0)?;
        check_frequency("omega_m0", omega_m0)?;
        check_frequency("omega_p1", omega_p1)?;
        check_frequency("omega_m1", omega_m1)?;
        Ok(Self {
            omega_p0,
            omega_m0,
            omega_p1,
            omega_m1,
        })
    }

    /// A schedule whose frequencies never change.
    pub fn constant(omega_p: f64, omega_m: f64) -> Result<Self> {
        Self::new(omega_p, omega_m, omega_p, omega_m)
    }

    pub fn pre_quench(&self) -> StiffnessParams {
        stiffness_from_frequencies(self.omega_p0, self.omega_m0)
            .expect("frequencies validated at construction")
    }

    pub fn post_quench(&self) -> StiffnessParams {
        stiffness_from_frequencies(self.omega_p1, self.omega_m1)
            .expect("frequencies validated at construction")
    }

    /// Shortest oscillation period 2π/ω over both epochs and both modes.
    pub fn shortest_period(&self) -> f64 {
        let fastest = self
            .omega_p0
            .max(self.omega_m0)
            .max(self.omega_p1)
            .max(self.omega_m1);
        std::f64::consts::TAU / fastest
    }
}

/// First moments and covariance matrix of a Gaussian state at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub t: f64,
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
}

impl GaussianState {
    /// Validates symmetry and positive definiteness of `cov`.
    pub fn new(t: f64, mean: Vector4<f64>, cov: Matrix4<f64>) -> Result<Self> {
        if !t.is_finite() || mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain("state contains non-finite entries"));
        }
        let scale = cov.amax().max(1.0);
        if (cov - cov.transpose()).amax() > 1e-12 * scale {
            return Err(Error::domain("covariance matrix is not symmetric"));
        }
        if cov.cholesky().is_none() {
            return Err(Error::domain("covariance matrix is not positive definite"));
        }
        Ok(Self { t, mean, cov })
    }

    /// Vacuum of two unit-frequency uncoupled oscillators: C = ½·𝟙.
    pub fn vacuum() -> Self {
        Self {
            t: 0.0,
            mean: Vector4::zeros(),
            cov: Matrix4::identity() * 0.5,
        }
    }

    fn is_finite(&self) -> bool {
        self.mean.iter().chain(self.cov.iter()).all(|v| v.is_finite())
    }
}

/// Ground state of H at fixed stiffness.
///
/// C = [[χ₊, χ₋], [χ₋, χ₊]] ⊕ [[ξ₊, ξ₋], [ξ₋, ξ₊]] with
/// χ± = ¼(1/ω_p ± 1/ω_m) and ξ± = ¼(ω_p ± ω_m).
pub fn build_initial_covariance(params: StiffnessParams) -> GaussianState {
    let (wp, wm) = (params.omega_p(), params.omega_m());
    let chi_plus = 0.25 * (1.0 / wp + 1.0 / wm);
    let chi_minus = 0.25 * (1.0 / wp - 1.0 / wm);
    let xi_plus = 0.25 * (wp + wm);
    let xi_minus = 0.25 * (wp - wm);

    #[rustfmt::skip]
    let cov = Matrix4::new(
        chi_plus,  chi_minus, 0.0,      0.0,
        chi_minus, chi_plus,  0.0,      0.0,
        0.0,       0.0,       xi_plus,  xi_minus,
        0.0,       0.0,       xi_minus, xi_plus,
    );
    GaussianState {
        t: 0.0,
        mean: Vector4::zeros(),
        cov,
    }
}

/// Generator of the linear Heisenberg flow v̇ = A·v.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix(pub Matrix4<f64>);

impl DriftMatrix {
    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }
}

pub fn drift_matrix(params: StiffnessParams) -> DriftMatrix {
    let on_site = -(params.kappa0 + params.kappa1);
    let coupling = params.kappa1;
    #[rustfmt::skip]
    let a = Matrix4::new(
        0.0,      0.0,      1.0, 0.0,
        0.0,      0.0,      0.0, 1.0,
        on_site,  coupling, 0.0, 0.0,
        coupling, on_site,  0.0, 0.0,
    );
    DriftMatrix(a)
}

/// Time derivatives of the first moments and of the covariance matrix.
pub fn moment_rhs(state: &GaussianState, params: StiffnessParams) -> (Vector4<f64>, Matrix4<f64>) {
    let a = drift_matrix(params).0;
    rhs_with(&a, &state.mean, &state.cov)
}

fn rhs_with(
    a: &Matrix4<f64>,
    mean: &Vector4<f64>,
    cov: &Matrix4<f64>,
) -> (Vector4<f64>, Matrix4<f64>) {
    let ac = a * cov;
    (a * mean, ac + ac.transpose())
}

/// One classical RK4 step of size `dt`, applied jointly to mean and covariance.
pub fn step_rk4(state: &GaussianState, params: StiffnessParams, dt: f64) -> GaussianState {
    let a = drift_matrix(params).0;
    let (m0, c0) = (&state.mean, &state.cov);
    let half = 0.5 * dt;

    let (km1, kc1) = rhs_with(&a, m0, c0);
    let (km2, kc2) = rhs_with(&a, &(m0 + km1 * half), &(c0 + kc1 * half));
    let (km3, kc3) = rhs_with(&a, &(m0 + km2 * half), &(c0 + kc2 * half));
    let (km4, kc4) = rhs_with(&a, &(m0 + km3 * dt), &(c0 + kc3 * dt));

    let sixth = dt / 6.0;
    let mean = m0 + (km1 + (km2 + km3) * 2.0 + km4) * sixth;
    let cov = c0 + (kc1 + (kc2 + kc3) * 2.0 + kc4) * sixth;
    GaussianState {
        t: state.t + dt,
        mean,
        cov: (cov + cov.transpose()) * 0.5,
    }
}

/// Integration settings for [`evolve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integration {
    pub dt: f64,
    pub t_max: f64,
    /// Keep every `record_every`-th state.
    pub record_every: usize,
    /// Integrate the first step with pre-quench stiffness, switching afterwards.
    pub first_step_prequench: bool,
}

impl Integration {
    pub fn new(dt: f64, t_max: f64, record_every: usize) -> Self {
        Self {
            dt,
            t_max,
            record_every,
            first_step_prequench: false,
        }
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::domain(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max > self.dt) {
            return Err(Error::domain(format!(
                "t_max = {} must exceed dt = {}",
                self.t_max, self.dt
            )));
        }
        if self.record_every == 0 {
            return Err(Error::domain("record_every must be at least 1"));
        }
        Ok(())
    }
}

/// Evolves the pre-quench ground state through the quench.
///
/// Returns the recorded states; the initial and final states are always
/// included. Sample times are computed as `n·dt` rather than accumulated.
pub fn evolve(schedule: &QuenchSchedule, cfg: &Integration) -> Result<Vec<GaussianState>> {
    cfg.validate()?;
    let pre = schedule.pre_quench();
    let post = schedule.post_quench();
    let steps = cfg.steps();

    let mut state = build_initial_covariance(pre);
    let mut recorded = Vec::with_capacity(steps / cfg.record_every + 2);
    recorded.push(state.clone());

    for n in 0..steps {
        let params = if n == 0 && cfg.first_step_prequench {
            pre
        } else {
            post
        };
        state = step_rk4(&state, params, cfg.dt);
        state.t = (n + 1) as f64 * cfg.dt;
        if !state.is_finite() {
            return Err(Error::Propagation {
                step: n + 1,
                t: state.t,
                reason: "non-finite moment".into(),
            });
        }
        if (n + 1) % cfg.record_every == 0 || n + 1 == steps {
            recorded.push(state.clone());
        }
    }
    Ok(recorded)
}
