//! Scenario execution: numeric and analytic entropy on a shared time grid,
//! period and log-fit analysis, CSV/summary/plot output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analytic::analytic_entropy_at;
use crate::dynamics::evolve;
use crate::error::{Error, Result};
use crate::fitting::{
    estimate_period_with, fit_log_model, FitMode, FitResult, PeriodEstimator, TimeSeries,
};
use crate::plot::{emit_plot, PlotStyle};
use crate::scenario::Scenario;
use crate::symplectic::{entanglement_entropy, purity_defect, reduce_to_oscillator};

pub const CSV_HEADER: &str = "t,S_c,S_a,d_reduced,purity_defect";

/// Overrides the directory outputs are written to.
pub const OUTPUT_DIR_ENV: &str = "QUENCH_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "output";

const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub t: f64,
    pub s_c: f64,
    pub s_a: f64,
    pub d_reduced: f64,
    pub purity_defect: f64,
}

/// Results of the post-processing stage. Quantities that are undefined for
/// a particular trajectory (no oscillation, flat series) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub max_abs_difference: f64,
    pub max_purity_defect: f64,
    pub period_s_c: Option<f64>,
    pub period_s_a: Option<f64>,
    /// period(S_a) / period(S_c)
    pub period_ratio: Option<f64>,
    pub spectral_period_s_c: Option<f64>,
    pub spectral_period_s_a: Option<f64>,
    pub fit_window_start: f64,
    pub fit: Option<FitResult>,
}

#[derive(Debug, Clone)]
pub struct RunData {
    pub scenario: Scenario,
    pub rows: Vec<Row>,
    pub analysis: Analysis,
}

impl RunData {
    pub fn s_c(&self) -> TimeSeries {
        column(&self.rows, |r| r.s_c)
    }

    pub fn s_a(&self) -> TimeSeries {
        column(&self.rows, |r| r.s_a)
    }

    pub fn csv(&self) -> String {
        render_csv(&self.rows)
    }
}

fn column(rows: &[Row], f: impl Fn(&Row) -> f64) -> TimeSeries {
    TimeSeries::new(rows.iter().map(|r| (r.t, f(r))).collect())
        .expect("recorder produces increasing finite samples")
}

/// Evolves the scenario and evaluates both entropies on the recorded grid.
pub fn simulate(scenario: &Scenario) -> Result<RunData> {
    scenario.validate()?;
    let schedule = scenario.schedule;
    let states = evolve(&schedule, &scenario.integration())?;

    let rows = states
        .iter()
        .map(|state| {
            let reduced = reduce_to_oscillator(state, 1)?;
            Ok(Row {
                t: state.t,
                s_c: entanglement_entropy(&reduced)?,
                s_a: analytic_entropy_at(&schedule, state.t)?,
                d_reduced: reduced.symplectic_eigenvalue(),
                purity_defect: purity_defect(state)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let analysis = analyse(scenario, &rows);
    Ok(RunData {
        scenario: scenario.clone(),
        rows,
        analysis,
    })
}

fn analyse(scenario: &Scenario, rows: &[Row]) -> Analysis {
    let s_c = column(rows, |r| r.s_c);
    let s_a = column(rows, |r| r.s_a);
    let period = |s: &TimeSeries, e| estimate_period_with(s, e).ok();

    let period_s_c = period(&s_c, PeriodEstimator::PeakSpacing);
    let period_s_a = period(&s_a, PeriodEstimator::PeakSpacing);
    let fit_window_start = scenario.schedule.shortest_period();
    let fit = fit_log_model(&s_c.window(fit_window_start, f64::INFINITY), FitMode::FixZZero).ok();

    Analysis {
        max_abs_difference: rows.iter().map(|r| (r.s_a - r.s_c).abs()).fold(0.0, f64::max),
        max_purity_defect: rows.iter().map(|r| r.purity_defect).fold(0.0, f64::max),
        period_ratio: period_s_a.zip(period_s_c).map(|(a, c)| a / c),
        period_s_c,
        period_s_a,
        spectral_period_s_c: period(&s_c, PeriodEstimator::Spectral),
        spectral_period_s_a: period(&s_a, PeriodEstimator::Spectral),
        fit_window_start,
        fit,
    }
}

/// `%.12g`-style rendering: 12 significant digits, trailing zeros dropped,
/// scientific notation outside [1e-5, 1e12).
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn render_csv(rows: &[Row]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_number(r.t),
            format_number(r.s_c),
            format_number(r.s_a),
            format_number(r.d_reduced),
            format_number(r.purity_defect)
        );
    }
    out
}

/// Output directory: `$QUENCH_OUTPUT_DIR` if set, else `./output`.
pub fn output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedOutputs {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub plot: PathBuf,
}

/// Relative paths from the scenario are taken relative to `out_dir`;
/// unspecified ones default to `<out_dir>/<name>.{csv,summary.json,svg}`.
pub fn resolve_outputs(scenario: &Scenario, out_dir: &Path) -> ResolvedOutputs {
    let pick = |p: &Option<PathBuf>, suffix: &str| match p {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => out_dir.join(p),
        None => out_dir.join(format!("{}{suffix}", scenario.name)),
    };
    ResolvedOutputs {
        csv: pick(&scenario.outputs.csv, ".csv"),
        summary: pick(&scenario.outputs.summary, ".summary.json"),
        plot: pick(&scenario.outputs.plot, ".svg"),
    }
}

/// Writes `contents` to a temporary file beside `path`, then renames it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub name: String,
    pub omega_p0: f64,
    pub omega_m0: f64,
    pub omega_p1: f64,
    pub omega_m1: f64,
    pub dt: f64,
    pub t_max: f64,
    pub record_every: usize,
    pub first_step_prequench: bool,
    pub samples: usize,
    #[serde(flatten)]
    pub analysis: Analysis,
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub plot: PathBuf,
}

impl RunReport {
    fn new(data: &RunData, outputs: &ResolvedOutputs) -> Self {
        let s = &data.scenario;
        Self {
            name: s.name.clone(),
            omega_p0: s.schedule.omega_p0,
            omega_m0: s.schedule.omega_m0,
            omega_p1: s.schedule.omega_p1,
            omega_m1: s.schedule.omega_m1,
            dt: s.dt,
            t_max: s.t_max,
            record_every: s.record_every,
            first_step_prequench: s.first_step_prequench,
            samples: data.rows.len(),
            analysis: data.analysis.clone(),
            csv: outputs.csv.clone(),
            summary: outputs.summary.clone(),
            plot: outputs.plot.clone(),
        }
    }
}

/// Runs a scenario and writes its CSV, JSON summary and SVG plot.
///
/// On a numerical failure nothing but a `<csv>.partial` marker holding the
/// error message is written.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path) -> Result<RunReport> {
    let outputs = resolve_outputs(scenario, out_dir);
    let data = match simulate(scenario) {
        Ok(d) => d,
        Err(e) => {
            let marker = partial_marker(&outputs.csv);
            // the simulation error is the one worth reporting
            let _ = write_atomic(&marker, format!("{e}\n").as_bytes());
            return Err(e);
        }
    };

    let csv = data.csv();
    write_atomic(&outputs.csv, csv.as_bytes())?;

    let style = PlotStyle {
        title: format!(
            "{}: ω_p {} → {}, ω_m {} → {}",
            scenario.name,
            scenario.schedule.omega_p0,
            scenario.schedule.omega_p1,
            scenario.schedule.omega_m0,
            scenario.schedule.omega_m1
        ),
        fit: data.analysis.fit,
        fit_window_start: data.analysis.fit_window_start,
        ..PlotStyle::default()
    };
    let svg = emit_plot(&csv, &style)?;
    write_atomic(&outputs.plot, svg.as_bytes())?;

    let report = RunReport::new(&data, &outputs);
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_atomic(&outputs.summary, format!("{json}\n").as_bytes())?;

    let marker = partial_marker(&outputs.csv);
    if marker.exists() {
        std::fs::remove_file(&marker).map_err(|e| Error::io(&marker, e))?;
    }
    Ok(report)
}

pub fn partial_marker(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    csv.with_file_name(name)
}
