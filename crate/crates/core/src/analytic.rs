//! Exact entanglement entropy of the coupled oscillators from the scale
//! factors γ of the two normal modes.
//!
//! Each normal mode evolves as a scaled copy of its initial Gaussian, with the
//! scale factor obeying the Ermakov equation
//!
//! γ̈ + ω²(t)·γ = ω₀²/γ³,  γ(0) = 1, γ̇(0) = 0.
//!
//! γ₁ belongs to the center-of-mass mode (ω_p) and γ₂ to the relative mode
//! (ω_m). For a sudden quench ω₀ → ω₁ the solution is
//! γ² = ε₊ + ε₋·cos(2ω₁t) with ε± = (ω₁² ± ω₀²)/(2ω₁²).

use crate::dynamics::{check_frequency, QuenchSchedule};
use crate::error::{Error, Result};
use crate::fitting::TimeSeries;

/// S(ζ) = ζ/(1−ζ)·ln(1/ζ) + ln(1/(1−ζ)), the entropy of the geometric
/// spectrum p_k = ζᵏ(1−ζ). S(0) = 0.
pub fn entropy_from_ratio(zeta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&zeta) {
        return Err(Error::domain(format!("spectral ratio {zeta} outside [0, 1)")));
    }
    if zeta == 0.0 {
        return Ok(0.0);
    }
    Ok(-zeta * zeta.ln() / (1.0 - zeta) - (-zeta).ln_1p())
}

/// ϑ₁/(ϑ₂ + √(ϑ₂² − ϑ₁²)) with the difference ϑ₂ − ϑ₁ supplied separately so
/// that nearly equal ϑ's do not cancel.
fn spectral_ratio(theta1: f64, theta2: f64, gap: f64) -> f64 {
    theta1 / (theta2 + (gap * (theta2 + theta1)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticEntropyResult {
    pub theta10: f64,
    pub theta20: f64,
    pub zeta: f64,
    pub entropy: f64,
}

/// Ground-state entanglement entropy of the coupled pair at fixed
/// normal-mode frequencies.
pub fn static_entropy(omega_p: f64, omega_m: f64) -> Result<StaticEntropyResult> {
    check_frequency("omega_p", omega_p)?;
    check_frequency("omega_m", omega_m)?;
    let sum = omega_m + omega_p;
    let theta10 = 0.25 * (omega_m - omega_p).powi(2) / sum;
    let theta20 = 0.25 * sum + omega_m * omega_p / sum;
    let gap = 2.0 * omega_m * omega_p / sum;
    let zeta = spectral_ratio(theta10, theta20, gap);
    Ok(StaticEntropyResult {
        theta10,
        theta20,
        zeta,
        entropy: entropy_from_ratio(zeta)?,
    })
}

/// ε± for one normal mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoefficients {
    pub plus: f64,
    pub minus: f64,
}

impl ModeCoefficients {
    pub fn new(omega0: f64, omega1: f64) -> Self {
        let (w0sq, w1sq) = (omega0 * omega0, omega1 * omega1);
        Self {
            plus: (w1sq + w0sq) / (2.0 * w1sq),
            minus: (w1sq - w0sq) / (2.0 * w1sq),
        }
    }
}

/// ε± of the center-of-mass mode and ϵ± of the relative mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchCoefficients {
    pub eps_plus: f64,
    pub eps_minus: f64,
    pub epsilon_plus: f64,
    pub epsilon_minus: f64,
}

impl QuenchCoefficients {
    pub fn p_mode(&self) -> ModeCoefficients {
        ModeCoefficients {
            plus: self.eps_plus,
            minus: self.eps_minus,
        }
    }

    pub fn m_mode(&self) -> ModeCoefficients {
        ModeCoefficients {
            plus: self.epsilon_plus,
            minus: self.epsilon_minus,
        }
    }
}

pub fn quench_coefficients(schedule: &QuenchSchedule) -> QuenchCoefficients {
    let p = ModeCoefficients::new(schedule.omega_p0, schedule.omega_p1);
    let m = ModeCoefficients::new(schedule.omega_m0, schedule.omega_m1);
    QuenchCoefficients {
        eps_plus: p.plus,
        eps_minus: p.minus,
        epsilon_plus: m.plus,
        epsilon_minus: m.minus,
    }
}

/// Closed-form (γ, γ̇) after a sudden quench to `omega1`.
pub fn quench_gamma(coeffs: ModeCoefficients, omega1: f64, t: f64) -> Result<(f64, f64)> {
    if coeffs.plus <= coeffs.minus.abs() {
        return Err(Error::DegenerateQuench {
            eps_plus: coeffs.plus,
            eps_minus_abs: coeffs.minus.abs(),
        });
    }
    if t < 0.0 {
        return Err(Error::domain(format!("t = {t} must be non-negative")));
    }
    let phase = 2.0 * omega1 * t;
    let gamma = (coeffs.minus * phase.cos() + coeffs.plus).sqrt();
    let gamma_dot = -omega1 * coeffs.minus * phase.sin() / gamma;
    Ok((gamma, gamma_dot))
}

/// A time-dependent mode frequency.
///
/// `omega(t)` is the right-continuous value ω(t⁺): a sudden quench at t = 0
/// reports the post-quench frequency at t = 0 itself.
pub trait FrequencyProfile {
    fn omega(&self, t: f64) -> f64;
}

impl<F: Fn(f64) -> f64> FrequencyProfile for F {
    fn omega(&self, t: f64) -> f64 {
        self(t)
    }
}

/// ω₀ for t < 0, ω₁ for t ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuddenQuench {
    pub omega0: f64,
    pub omega1: f64,
}

impl FrequencyProfile for SuddenQuench {
    fn omega(&self, t: f64) -> f64 {
        if t < 0.0 {
            self.omega0
        } else {
            self.omega1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErmakovSample {
    pub t: f64,
    pub gamma: f64,
    pub gamma_dot: f64,
}

/// RK4 solution of γ̈ = −ω²(t)·γ + ω₀²/γ³ from γ(0) = 1, γ̇(0) = 0.
pub fn ermakov_integrate<P: FrequencyProfile + ?Sized>(
    profile: &P,
    omega0: f64,
    dt: f64,
    t_max: f64,
) -> Result<Vec<ErmakovSample>> {
    check_frequency("omega0", omega0)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::domain(format!("dt = {dt} must be positive")));
    }
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::domain(format!("t_max = {t_max} must be non-negative")));
    }
    let w0sq = omega0 * omega0;
    let accel = |t: f64, g: f64| -> f64 {
        let w = profile.omega(t);
        -w * w * g + w0sq / (g * g * g)
    };

    let steps = (t_max / dt).round() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let (mut g, mut v) = (1.0_f64, 0.0_f64);
    out.push(ErmakovSample {
        t: 0.0,
        gamma: g,
        gamma_dot: v,
    });
    let half = 0.5 * dt;
    for n in 0..steps {
        let t = n as f64 * dt;
        let (g1, v1) = (v, accel(t, g));
        let (g2, v2) = (v + half * v1, accel(t + half, g + half * g1));
        let (g3, v3) = (v + half * v2, accel(t + half, g + half * g2));
        let (g4, v4) = (v + dt * v3, accel(t + dt, g + dt * g3));
        g += dt / 6.0 * (g1 + 2.0 * (g2 + g3) + g4);
        v += dt / 6.0 * (v1 + 2.0 * (v2 + v3) + v4);
        let t_next = (n + 1) as f64 * dt;
        if !(g.is_finite() && g > 0.0 && v.is_finite()) {
            return Err(Error::Singularity {
                t: t_next,
                gamma: g,
            });
        }
        out.push(ErmakovSample {
            t: t_next,
            gamma: g,
            gamma_dot: v,
        });
    }
    Ok(out)
}

/// Everything the entropy formula needs at a single time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticState {
    pub t: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma1_dot: f64,
    pub gamma2_dot: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub wp_plus: f64,
    pub wp_minus: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub pi_value: f64,
}

impl AnalyticState {
    /// Builds the state from scale factors of the ω_p mode (γ₁) and the ω_m
    /// mode (γ₂).
    pub fn from_scale_factors(
        t: f64,
        omega_p0: f64,
        omega_m0: f64,
        (gamma1, gamma1_dot): (f64, f64),
        (gamma2, gamma2_dot): (f64, f64),
    ) -> Result<Self> {
        if !(gamma1 > 0.0 && gamma2 > 0.0) {
            return Err(Error::Singularity {
                t,
                gamma: gamma1.min(gamma2),
            });
        }
        let delta1 = gamma1_dot / gamma1;
        let delta2 = gamma2_dot / gamma2;
        let a = omega_p0 / (gamma1 * gamma1);
        let b = omega_m0 / (gamma2 * gamma2);
        let wp_plus = a + b;
        let wp_minus = a - b;
        let chirp = (delta1 - delta2).powi(2);
        let theta1 = (wp_minus * wp_minus + chirp) / (4.0 * wp_plus);
        let theta2 = 0.5 * wp_plus - (wp_minus * wp_minus - chirp) / (4.0 * wp_plus);
        // ϑ₂ − ϑ₁ = (℘₊² − ℘₋²)/(2℘₊) = 2ab/℘₊
        let gap = 2.0 * a * b / wp_plus;
        let pi_value = spectral_ratio(theta1, theta2, gap);
        Ok(Self {
            t,
            gamma1,
            gamma2,
            gamma1_dot,
            gamma2_dot,
            delta1,
            delta2,
            wp_plus,
            wp_minus,
            theta1,
            theta2,
            pi_value,
        })
    }

    pub fn entropy(&self) -> Result<f64> {
        entropy_from_ratio(self.pi_value).map_err(|_| {
            Error::Numeric(format!(
                "spectral ratio {} at t = {} left [0, 1)",
                self.pi_value, self.t
            ))
        })
    }
}

pub fn analytic_state(schedule: &QuenchSchedule, t: f64) -> Result<AnalyticState> {
    let coeffs = quench_coefficients(schedule);
    let p = quench_gamma(coeffs.p_mode(), schedule.omega_p1, t)?;
    let m = quench_gamma(coeffs.m_mode(), schedule.omega_m1, t)?;
    AnalyticState::from_scale_factors(t, schedule.omega_p0, schedule.omega_m0, p, m)
}

pub fn analytic_entropy_at(schedule: &QuenchSchedule, t: f64) -> Result<f64> {
    analytic_state(schedule, t)?.entropy()
}

/// S_a(t) sampled at t = n·dt for n = 0..=round(t_max/dt).
pub fn analytic_entropy_series(schedule: &QuenchSchedule, dt: f64, t_max: f64) -> Result<TimeSeries> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::domain(format!("dt = {dt} must be positive")));
    }
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(Error::domain(format!("t_max = {t_max} must be non-negative")));
    }
    let steps = (t_max / dt).round() as usize;
    let samples = (0..=steps)
        .map(|n| {
            let t = n as f64 * dt;
            analytic_entropy_at(schedule, t).map(|s| (t, s))
        })
        .collect::<Result<Vec<_>>>()?;
    TimeSeries::new(samples)
}
