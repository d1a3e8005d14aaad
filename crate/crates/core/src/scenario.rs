//! Scenario configuration files.
//!
//! ```text
//! # comment
//! [scenario.fig1a]
//! omega_p0 = 0.9
//! omega_m0 = 4.9
//! omega_p1 = 0.17
//! omega_m1 = 4.17
//! t_max = 100
//! dt = 0.001            # optional
//! record_every = 10     # optional
//! first_step_prequench = false
//! csv = "fig1a.csv"     # optional output paths
//! ```

use std::collections::HashMap;
use std::path::PathBuf;

use crate::dynamics::{Integration, QuenchSchedule, DEFAULT_DT};
use crate::error::{Error, Result};

pub const DEFAULT_RECORD_EVERY: usize = 10;

/// Bundled presets covering every frequency combination of the reference study.
pub const PRESETS: &str = include_str!("../presets/builtin.conf");

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub schedule: QuenchSchedule,
    pub dt: f64,
    pub t_max: f64,
    pub record_every: usize,
    pub first_step_prequench: bool,
    pub outputs: OutputPaths,
}

impl Scenario {
    pub fn new(name: impl Into<String>, schedule: QuenchSchedule, t_max: f64) -> Self {
        Self {
            name: name.into(),
            schedule,
            dt: DEFAULT_DT,
            t_max,
            record_every: DEFAULT_RECORD_EVERY,
            first_step_prequench: false,
            outputs: OutputPaths::default(),
        }
    }

    pub fn integration(&self) -> Integration {
        Integration {
            dt: self.dt,
            t_max: self.t_max,
            record_every: self.record_every,
            first_step_prequench: self.first_step_prequench,
        }
    }

    pub fn validate(&self) -> Result<()> {
        QuenchSchedule::new(
            self.schedule.omega_p0,
            self.schedule.omega_m0,
            self.schedule.omega_p1,
            self.schedule.omega_m1,
        )?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::domain(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_max.is_finite() && self.t_max >= 10.0 * self.dt) {
            return Err(Error::domain(format!(
                "t_max = {} must be at least 10 dt",
                self.t_max
            )));
        }
        if self.record_every == 0 {
            return Err(Error::domain("record_every must be at least 1"));
        }
        Ok(())
    }
}

/// All bundled presets, in file order.
pub fn presets() -> Vec<Scenario> {
    parse_config(PRESETS, "<presets>").expect("bundled presets are valid")
}

pub fn preset(name: &str) -> Option<Scenario> {
    presets().into_iter().find(|s| s.name == name)
}

const KEYS: &[&str] = &[
    "omega_p0",
    "omega_m0",
    "omega_p1",
    "omega_m1",
    "t_max",
    "dt",
    "record_every",
    "first_step_prequench",
    "csv",
    "summary",
    "plot",
];

const REQUIRED: &[&str] = &["omega_p0", "omega_m0", "omega_p1", "omega_m1", "t_max"];

struct Section {
    name: String,
    header_line: usize,
    entries: HashMap<&'static str, (usize, String)>,
}

/// Parses a configuration document. `source` names the document in errors.
pub fn parse_config(text: &str, source: &str) -> Result<Vec<Scenario>> {
    let err = |line: usize, message: String| Error::Parse {
        path: source.to_string(),
        line,
        message,
    };

    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('[') {
            let inner = header
                .strip_suffix(']')
                .ok_or_else(|| err(line_no, format!("unterminated section header `{line}`")))?;
            let name = inner
                .trim()
                .strip_prefix("scenario.")
                .ok_or_else(|| err(line_no, format!("expected `[scenario.NAME]`, found `{line}`")))?;
            if name.is_empty()
                || !name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return Err(err(line_no, format!("invalid scenario name `{name}`")));
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(err(line_no, format!("duplicate scenario `{name}`")));
            }
            sections.push(Section {
                name: name.to_string(),
                header_line: line_no,
                entries: HashMap::new(),
            });
            continue;
        }

        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected `key = value`, found `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        let known = KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| err(line_no, format!("unknown key `{key}`")))?;
        let section = sections
            .last_mut()
            .ok_or_else(|| err(line_no, format!("key `{key}` outside a [scenario.NAME] section")))?;
        if value.is_empty() {
            return Err(err(line_no, format!("key `{key}` has no value")));
        }
        if section
            .entries
            .insert(known, (line_no, value.to_string()))
            .is_some()
        {
            return Err(err(line_no, format!("duplicate key `{key}`")));
        }
    }

    sections
        .into_iter()
        .map(|section| build_scenario(section, &err))
        .collect()
}

fn build_scenario(section: Section, err: &dyn Fn(usize, String) -> Error) -> Result<Scenario> {
    for key in REQUIRED {
        if !section.entries.contains_key(key) {
            return Err(err(
                section.header_line,
                format!("scenario `{}` is missing required key `{key}`", section.name),
            ));
        }
    }
    let number = |key: &str| -> Result<Option<(usize, f64)>> {
        match section.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(|x| Some((*line, x)))
                .ok_or_else(|| err(*line, format!("key `{key}`: `{v}` is not a finite number"))),
        }
    };
    let required = |key: &str| number(key).map(|v| v.expect("presence checked above"));

    let mut freqs = [0.0; 4];
    for (slot, key) in freqs
        .iter_mut()
        .zip(["omega_p0", "omega_m0", "omega_p1", "omega_m1"])
    {
        let (line, value) = required(key)?;
        if value <= 0.0 {
            return Err(err(line, format!("key `{key}`: frequency must be positive, got {value}")));
        }
        *slot = value;
    }
    let schedule = QuenchSchedule::new(freqs[0], freqs[1], freqs[2], freqs[3])
        .map_err(|e| err(section.header_line, e.to_string()))?;

    let (t_max_line, t_max) = required("t_max")?;
    let mut scenario = Scenario::new(section.name.clone(), schedule, t_max);

    if let Some((line, dt)) = number("dt")? {
        if dt <= 0.0 {
            return Err(err(line, format!("key `dt`: must be positive, got {dt}")));
        }
        scenario.dt = dt;
    }
    if scenario.t_max < 10.0 * scenario.dt {
        return Err(err(
            t_max_line,
            format!("key `t_max`: {} is shorter than 10 dt", scenario.t_max),
        ));
    }
    if let Some((line, v)) = section.entries.get("record_every") {
        scenario.record_every = v
            .parse::<usize>()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| err(*line, format!("key `record_every`: `{v}` is not a positive integer")))?;
    }
    if let Some((line, v)) = section.entries.get("first_step_prequench") {
        scenario.first_step_prequench = match v.as_str() {
            "true" => true,
            "false" => false,
            _ => {
                return Err(err(
                    *line,
                    format!("key `first_step_prequench`: expected true or false, got `{v}`"),
                ))
            }
        };
    }
    let path = |key: &str| section.entries.get(key).map(|(_, v)| PathBuf::from(unquote(v)));
    scenario.outputs = OutputPaths {
        csv: path("csv"),
        summary: path("summary"),
        plot: path("plot"),
    };
    Ok(scenario)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .unwrap_or(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
# minimal
[scenario.demo]
omega_p0 = 1.0
omega_m0 = 2.0   # relative mode
omega_p1 = 0.5
omega_m1 = 1.5
t_max = 20
";

    #[test]
    fn defaults_applied() {
        let s = parse_config(MINIMAL, "demo.conf").unwrap();
        assert_eq!(s.len(), 1);
        let s = &s[0];
        assert_eq!(s.name, "demo");
        assert_eq!(s.dt, 0.001);
        assert_eq!(s.record_every, 10);
        assert!(!s.first_step_prequench);
        assert_eq!(s.schedule.omega_m0, 2.0);
        assert_eq!(s.outputs, OutputPaths::default());
        s.validate().unwrap();
    }

    #[test]
    fn optional_keys() {
        let text = format!(
            "{MINIMAL}dt = 0.002\nrecord_every = 5\nfirst_step_prequench = true\ncsv = \"out/demo.csv\"\nplot = demo.svg\n"
        );
        let s = &parse_config(&text, "x").unwrap()[0];
        assert_eq!(s.dt, 0.002);
        assert_eq!(s.record_every, 5);
        assert!(s.first_step_prequench);
        assert_eq!(s.outputs.csv.as_deref(), Some(std::path::Path::new("out/demo.csv")));
        assert_eq!(s.outputs.plot.as_deref(), Some(std::path::Path::new("demo.svg")));
    }

    fn parse_error(text: &str) -> (usize, String) {
        match parse_config(text, "bad.conf") {
            Err(Error::Parse { line, message, .. }) => (line, message),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn typo_key_rejected_at_its_line() {
        let text = MINIMAL.replace("omega_p0 = 1.0", "omgea_p0 = 1.0");
        let (line, msg) = parse_error(&text);
        assert_eq!(line, 3);
        assert!(msg.contains("omgea_p0"), "{msg}");
    }

    #[test]
    fn missing_frequency_reported() {
        let text = MINIMAL.replace("omega_m1 = 1.5\n", "");
        let (line, msg) = parse_error(&text);
        assert_eq!(line, 2);
        assert!(msg.contains("omega_m1"), "{msg}");
    }

    #[test]
    fn invariant_violations() {
        let (line, msg) = parse_error(&MINIMAL.replace("omega_p1 = 0.5", "omega_p1 = -0.5"));
        assert_eq!(line, 5);
        assert!(msg.contains("omega_p1"));

        let (line, msg) = parse_error(&MINIMAL.replace("t_max = 20", "t_max = 0.005"));
        assert_eq!(line, 7);
        assert!(msg.contains("t_max"));

        let (_, msg) = parse_error(&format!("{MINIMAL}record_every = 0\n"));
        assert!(msg.contains("record_every"));

        let (_, msg) = parse_error(&format!("{MINIMAL}dt = abc\n"));
        assert!(msg.contains("dt"));
    }

    #[test]
    fn structural_errors() {
        assert_eq!(parse_error("omega_p0 = 1\n").0, 1);
        assert_eq!(parse_error("[scenario.a\n").0, 1);
        assert_eq!(parse_error("[other.a]\n").0, 1);
        assert_eq!(parse_error(&format!("{MINIMAL}{MINIMAL}")).0, 9);
        assert_eq!(parse_error(&format!("{MINIMAL}t_max = 3\n")).0, 8);
        assert_eq!(parse_error("[scenario.a]\njunk\n").0, 2);
    }

    #[test]
    fn presets_cover_all_frequency_sets() {
        let all = presets();
        assert_eq!(all.len(), 12);
        let fig1a = preset("fig1a").unwrap();
        assert_eq!(
            (fig1a.schedule.omega_p0, fig1a.schedule.omega_m0, fig1a.schedule.omega_p1, fig1a.schedule.omega_m1),
            (0.9, 4.9, 0.17, 4.17)
        );
        let mut tuples: Vec<[u64; 4]> = all
            .iter()
            .map(|s| {
                let q = s.schedule;
                [q.omega_p0, q.omega_m0, q.omega_p1, q.omega_m1].map(f64::to_bits)
            })
            .collect();
        tuples.sort();
        tuples.dedup();
        assert_eq!(tuples.len(), 8);
        for s in &all {
            let expected = if s.name.starts_with("fig3") { 200.0 } else { 100.0 };
            assert_eq!(s.t_max, expected, "{}", s.name);
            s.validate().unwrap();
        }
    }
}
