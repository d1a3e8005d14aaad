//! SVG rendering of a run CSV: numeric and analytic entropy against time,
//! with an optional second panel overlaying a fitted log curve.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fitting::FitResult;

#[derive(Debug, Clone)]
pub struct PlotStyle {
    pub title: String,
    pub width: f64,
    pub panel_height: f64,
    /// Draws the fit panel when set.
    pub fit: Option<FitResult>,
    pub fit_window_start: f64,
}

impl Default for PlotStyle {
    fn default() -> Self {
        Self {
            title: String::new(),
            width: 800.0,
            panel_height: 360.0,
            fit: None,
            fit_window_start: 0.0,
        }
    }
}

const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const COLOR_NUMERIC: &str = "#1f77b4";
const COLOR_ANALYTIC: &str = "#d62728";
const COLOR_FIT: &str = "#2ca02c";

struct Columns {
    t: Vec<f64>,
    s_c: Vec<f64>,
    s_a: Vec<f64>,
}

fn read_columns(csv_text: &str) -> Result<Columns> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Render(format!("bad CSV header: {e}")))?
        .clone();
    let index = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Render(format!("missing column '{name}'")))
    };
    let (it, ic, ia) = (index("t")?, index("S_c")?, index("S_a")?);

    let mut cols = Columns {
        t: Vec::new(),
        s_c: Vec::new(),
        s_a: Vec::new(),
    };
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Render(format!("row {}: {e}", row + 1)))?;
        let field = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Render(format!("row {}: bad value in column {i}", row + 1)))
        };
        cols.t.push(field(it)?);
        cols.s_c.push(field(ic)?);
        cols.s_a.push(field(ia)?);
    }
    if cols.t.is_empty() {
        return Err(Error::Render("empty series".into()));
    }
    Ok(cols)
}

#[derive(Clone, Copy)]
struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    t_lo: f64,
    t_hi: f64,
    v_lo: f64,
    v_hi: f64,
}

impl Frame {
    fn px(&self, t: f64) -> f64 {
        self.x0 + (t - self.t_lo) / (self.t_hi - self.t_lo) * self.w
    }

    fn py(&self, v: f64) -> f64 {
        self.y0 + self.h - (v - self.v_lo) / (self.v_hi - self.v_lo) * self.h
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let span = hi - lo;
    if span <= 1e-12 * hi.abs().max(1.0) {
        let pad = 0.5 * hi.abs().max(1e-3);
        (lo - pad, hi + pad)
    } else {
        (lo - 0.05 * span, hi + 0.05 * span)
    }
}

/// Roughly `target` round-valued ticks covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{:.4}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polyline(out: &mut String, frame: &Frame, t: &[f64], v: &[f64], color: &str, dash: Option<&str>) {
    let mut points = String::with_capacity(t.len() * 16);
    for (ti, vi) in t.iter().zip(v) {
        let _ = write!(points, "{:.2},{:.2} ", frame.px(*ti), frame.py(*vi));
    }
    let dash = dash.map(|d| format!(" stroke-dasharray=\"{d}\"")).unwrap_or_default();
    let _ = writeln!(
        out,
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash} points=\"{}\"/>",
        points.trim_end()
    );
}

fn axes(out: &mut String, frame: &Frame, y_label: &str) {
    let f = frame;
    let _ = writeln!(
        out,
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
        f.x0, f.y0, f.w, f.h
    );
    for t in ticks(f.t_lo, f.t_hi, 8) {
        let x = f.px(t);
        let _ = writeln!(
            out,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\
             <text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
            f.y0 + f.h,
            f.y0 + f.h + 5.0,
            f.y0 + f.h + 18.0,
            tick_label(t)
        );
    }
    for v in ticks(f.v_lo, f.v_hi, 6) {
        let y = f.py(v);
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"black\"/>\
             <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            f.x0 - 5.0,
            f.x0,
            f.x0 - 8.0,
            y + 4.0,
            tick_label(v)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">t</text>",
        f.x0 + f.w / 2.0,
        f.y0 + f.h + 38.0
    );
    let (lx, ly) = (f.x0 - 52.0, f.y0 + f.h / 2.0);
    let _ = writeln!(
        out,
        "<text x=\"{lx:.2}\" y=\"{ly:.2}\" font-size=\"13\" text-anchor=\"middle\" \
         transform=\"rotate(-90 {lx:.2} {ly:.2})\">{}</text>",
        escape(y_label)
    );
}

fn legend(out: &mut String, x: f64, mut y: f64, entries: &[(&str, &str, Option<&str>)]) {
    for (label, color, dash) in entries {
        let dash = dash.map(|d| format!(" stroke-dasharray=\"{d}\"")).unwrap_or_default();
        let _ = writeln!(
            out,
            "<line x1=\"{x:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{color}\" stroke-width=\"2\"{dash}/>\
             <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>",
            x + 28.0,
            x + 34.0,
            y + 4.0,
            escape(label)
        );
        y += 18.0;
    }
}

/// Renders the `t`, `S_c` and `S_a` columns of `csv_text` as an SVG document.
pub fn emit_plot(csv_text: &str, style: &PlotStyle) -> Result<String> {
    let fits = style.width > MARGIN_LEFT + MARGIN_RIGHT && style.panel_height > MARGIN_TOP + MARGIN_BOTTOM;
    if !fits {
        return Err(Error::Render("plot dimensions too small".into()));
    }
    let cols = read_columns(csv_text)?;
    let (t_lo, t_hi) = match (cols.t.first(), cols.t.last()) {
        (Some(a), Some(b)) if b > a => (*a, *b),
        (Some(a), _) => (*a - 0.5, *a + 0.5),
        _ => unreachable!("non-empty"),
    };
    let (v_lo, v_hi) = padded_range(cols.s_c.iter().chain(&cols.s_a).copied());

    let panels = if style.fit.is_some() { 2.0 } else { 1.0 };
    let height = style.panel_height * panels;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{height}\" viewBox=\"0 0 {w} {height}\">",
        w = style.width
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    if !style.title.is_empty() {
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">{}</text>",
            style.width / 2.0,
            escape(&style.title)
        );
    }

    let frame = Frame {
        x0: MARGIN_LEFT,
        y0: MARGIN_TOP,
        w: style.width - MARGIN_LEFT - MARGIN_RIGHT,
        h: style.panel_height - MARGIN_TOP - MARGIN_BOTTOM,
        t_lo,
        t_hi,
        v_lo,
        v_hi,
    };
    axes(&mut out, &frame, "entropy S");
    polyline(&mut out, &frame, &cols.t, &cols.s_c, COLOR_NUMERIC, None);
    polyline(&mut out, &frame, &cols.t, &cols.s_a, COLOR_ANALYTIC, Some("6,4"));
    legend(
        &mut out,
        frame.x0 + frame.w - 190.0,
        frame.y0 + 16.0,
        &[
            ("S_c (covariance)", COLOR_NUMERIC, None),
            ("S_a (analytic)", COLOR_ANALYTIC, Some("6,4")),
        ],
    );

    if let Some(fit) = &style.fit {
        let start = style.fit_window_start.max(t_lo);
        let (ft, fv): (Vec<f64>, Vec<f64>) = cols
            .t
            .iter()
            .filter(|t| **t >= start && **t > 0.0)
            .map(|t| (*t, fit.predict(*t)))
            .filter(|(_, v)| v.is_finite())
            .unzip();
        let (lo, hi) = padded_range(cols.s_c.iter().chain(&fv).copied());
        let lower = Frame {
            y0: style.panel_height + MARGIN_TOP,
            v_lo: lo,
            v_hi: hi,
            ..frame
        };
        axes(&mut out, &lower, "S_c and fit");
        polyline(&mut out, &lower, &cols.t, &cols.s_c, COLOR_NUMERIC, None);
        if !ft.is_empty() {
            polyline(&mut out, &lower, &ft, &fv, COLOR_FIT, Some("4,3"));
        }
        let label = match fit.r2_adj {
            Some(r2) => format!("u ln(w t): u={:.4}, w={:.4}, R²adj={:.3}", fit.u, fit.w, r2),
            None => format!("u ln(w t): u={:.4}, w={:.4}", fit.u, fit.w),
        };
        legend(
            &mut out,
            lower.x0 + lower.w - 330.0,
            lower.y0 + lower.h - 40.0,
            &[("S_c", COLOR_NUMERIC, None), (&label, COLOR_FIT, Some("4,3"))],
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
