//! Post-processing of entropy trajectories: oscillation periods and the
//! logarithmic growth model Φ(t) = u·ln(w·t) + z.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};

/// Sampled scalar signal with strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<(f64, f64)>,
}

impl TimeSeries {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if let Some((t, v)) = samples.iter().find(|(t, v)| !(t.is_finite() && v.is_finite())) {
            return Err(Error::domain(format!("non-finite sample ({t}, {v})")));
        }
        if let Some(w) = samples.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(Error::domain(format!(
                "sample times not strictly increasing at t = {}",
                w[1].0
            )));
        }
        Ok(Self { samples })
    }

    pub fn from_fn(times: impl IntoIterator<Item = f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(times.into_iter().map(|t| (t, f(t))).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.0)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    pub fn span(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.0 - a.0,
            _ => 0.0,
        }
    }

    /// Samples with `start <= t <= end`.
    pub fn window(&self, start: f64, end: f64) -> TimeSeries {
        TimeSeries {
            samples: self
                .samples
                .iter()
                .copied()
                .filter(|(t, _)| *t >= start && *t <= end)
                .collect(),
        }
    }

    fn value_range(&self) -> (f64, f64) {
        self.values()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodEstimator {
    /// Mean spacing of successive maxima of the smoothed series.
    #[default]
    PeakSpacing,
    /// Inverse of the dominant frequency of the mean-removed series.
    Spectral,
}

/// Smoothing window as a fraction of the series length.
const SMOOTHING_FRACTION: f64 = 0.01;
/// A maximum only counts once the smoothed series has fallen this fraction
/// of its full range below it (and risen as much before the next one).
const PEAK_HYSTERESIS: f64 = 0.2;

pub fn estimate_period(series: &TimeSeries) -> Result<f64> {
    estimate_period_with(series, PeriodEstimator::PeakSpacing)
}

pub fn estimate_period_with(series: &TimeSeries, estimator: PeriodEstimator) -> Result<f64> {
    if series.len() < 3 {
        return Err(Error::NoOscillation);
    }
    let (lo, hi) = series.value_range();
    if hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(1.0) {
        return Err(Error::NoOscillation);
    }
    match estimator {
        PeriodEstimator::PeakSpacing => peak_spacing_period(series),
        PeriodEstimator::Spectral => spectral_period(series),
    }
}

/// Centered moving average; the window shrinks symmetrically at the edges.
fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(0.0);
    for v in values {
        prefix.push(prefix.last().unwrap() + v);
    }
    let n = values.len();
    (0..n)
        .map(|i| {
            let r = half.min(i).min(n - 1 - i);
            (prefix[i + r + 1] - prefix[i - r]) / (2 * r + 1) as f64
        })
        .collect()
}

fn peak_spacing_period(series: &TimeSeries) -> Result<f64> {
    let times: Vec<f64> = series.times().collect();
    let raw: Vec<f64> = series.values().collect();
    let n = raw.len();
    let window = ((SMOOTHING_FRACTION * n as f64).round() as usize).max(1) | 1;
    let smooth = moving_average(&raw, window);

    let (lo, hi) = smooth
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let threshold = PEAK_HYSTERESIS * (hi - lo);
    if threshold <= 0.0 {
        return Err(Error::NoOscillation);
    }

    let mut peaks = Vec::new();
    let mut rising = true;
    let mut extreme = 0usize;
    for i in 1..n {
        let v = smooth[i];
        if rising {
            if v > smooth[extreme] {
                extreme = i;
            } else if v < smooth[extreme] - threshold {
                if extreme > 0 {
                    peaks.push(refine_peak(&times, &smooth, extreme));
                }
                rising = false;
                extreme = i;
            }
        } else if v < smooth[extreme] {
            extreme = i;
        } else if v > smooth[extreme] + threshold {
            rising = true;
            extreme = i;
        }
    }

    if peaks.len() < 2 {
        return Err(Error::NoOscillation);
    }
    Ok((peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64)
}

/// Vertex of the parabola through the three samples around index `i`.
fn refine_peak(times: &[f64], y: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= y.len() {
        return times[i];
    }
    let curvature = y[i - 1] - 2.0 * y[i] + y[i + 1];
    if curvature >= 0.0 {
        return times[i];
    }
    let offset = 0.5 * (y[i - 1] - y[i + 1]) / curvature;
    let step = 0.5 * (times[i + 1] - times[i - 1]);
    times[i] + offset.clamp(-1.0, 1.0) * step
}

fn spectral_period(series: &TimeSeries) -> Result<f64> {
    let n = series.len();
    let dt = series.span() / (n - 1) as f64;
    let mean = series.values().sum::<f64>() / n as f64;
    let padded = (4 * n).next_power_of_two();
    let mut buffer: Vec<Complex<f64>> = series
        .values()
        .map(|v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(padded)
        .collect();
    FftPlanner::new().plan_fft_forward(padded).process(&mut buffer);

    let power: Vec<f64> = buffer[..padded / 2].iter().map(|c| c.norm_sqr()).collect();
    let (k, &peak) = power
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::NoOscillation)?;
    if peak <= 0.0 || k + 1 >= power.len() {
        return Err(Error::NoOscillation);
    }
    let (a, b, c) = (power[k - 1], power[k], power[k + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom < 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    let frequency = (k as f64 + shift) / (padded as f64 * dt);
    let period = 1.0 / frequency;
    // fewer than two cycles inside the record is a trend, not an oscillation
    if !(period.is_finite() && period <= 0.5 * series.span()) {
        return Err(Error::NoOscillation);
    }
    Ok(period)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// z pinned to 0; u and w free.
    #[default]
    FixZZero,
    /// value = u·ln t + c, reported in the canonical z = 0 form.
    LinearIntercept,
}

/// Parameters of Φ(t) = u·ln(w·t) + z.
///
/// Only u and u·ln w + z are identifiable; fits are reported with z = 0
/// unless `degenerate` is set, in which case w = 1 and z carries the level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub u: f64,
    pub w: f64,
    pub z: f64,
    pub r2_adj: Option<f64>,
    pub mode: FitMode,
    pub degenerate: bool,
}

impl FitResult {
    pub fn predict(&self, t: f64) -> f64 {
        self.u * (self.w * t).ln() + self.z
    }

    /// The identifiable level u·ln w + z.
    pub fn level(&self) -> f64 {
        self.u * self.w.ln() + self.z
    }
}

const MIN_FIT_SAMPLES: usize = 10;
const FREE_PARAMETERS: usize = 2;
const DEGENERATE_SLOPE: f64 = 1e-8;

fn positive_time_samples(series: &TimeSeries) -> impl Iterator<Item = (f64, f64)> + '_ {
    series.samples().iter().copied().filter(|(t, _)| *t > 0.0)
}

/// Least-squares fit of value = u·ln t + c over the samples with t > 0.
pub fn fit_log_model(series: &TimeSeries, mode: FitMode) -> Result<FitResult> {
    let points: Vec<(f64, f64)> = positive_time_samples(series).map(|(t, v)| (t.ln(), v)).collect();
    if points.len() < MIN_FIT_SAMPLES {
        return Err(Error::domain(format!(
            "log fit needs at least {MIN_FIT_SAMPLES} samples with t > 0, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxx, sxy) = points.iter().fold((0.0, 0.0), |(sxx, sxy), (x, y)| {
        let dx = x - mean_x;
        (sxx + dx * dx, sxy + dx * (y - mean_y))
    });
    if sxx <= 0.0 {
        return Err(Error::domain("log fit needs at least two distinct times"));
    }
    let u = sxy / sxx;
    let intercept = mean_y - u * mean_x;

    let w = (intercept / u).exp();
    let degenerate = u.abs() < DEGENERATE_SLOPE || !(w.is_finite() && w > 0.0);
    let mut fit = if degenerate {
        FitResult {
            u,
            w: 1.0,
            z: intercept,
            r2_adj: None,
            mode,
            degenerate: true,
        }
    } else {
        FitResult {
            u,
            w,
            z: 0.0,
            r2_adj: None,
            mode,
            degenerate: false,
        }
    };
    fit.r2_adj = adjusted_r_squared(series, &fit).ok();
    Ok(fit)
}

/// 1 − (1 − R²)(n − 1)/(n − p − 1) with p = 2, over samples with t > 0.
pub fn adjusted_r_squared(series: &TimeSeries, fit: &FitResult) -> Result<f64> {
    let points: Vec<(f64, f64)> = positive_time_samples(series).collect();
    let n = points.len();
    if n <= FREE_PARAMETERS + 1 {
        return Err(Error::domain(format!(
            "adjusted R^2 needs more than {} samples, got {n}",
            FREE_PARAMETERS + 1
        )));
    }
    let mean = points.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let (ss_res, ss_tot) = points.iter().fold((0.0, 0.0), |(res, tot), &(t, v)| {
        let r = v - fit.predict(t);
        (res + r * r, tot + (v - mean) * (v - mean))
    });
    if ss_tot <= f64::EPSILON * mean.abs().max(1.0) * n as f64 {
        return Err(Error::UndefinedRSquared);
    }
    let r2 = 1.0 - ss_res / ss_tot;
    let nf = n as f64;
    Ok(1.0 - (1.0 - r2) * (nf - 1.0) / (nf - FREE_PARAMETERS as f64 - 1.0))
}
