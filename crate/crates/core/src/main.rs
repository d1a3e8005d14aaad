use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use quench_entropy::fitting::{fit_log_model, FitMode, TimeSeries};
use quench_entropy::plot::{emit_plot, PlotStyle};
use quench_entropy::runner::{output_dir, run_scenario};
use quench_entropy::scenario::{parse_config, presets, Scenario, PRESETS};
use quench_entropy::Error;

const EXIT_PARSE: u8 = 3;
const EXIT_NUMERIC: u8 = 4;
const EXIT_IO: u8 = 5;

/// Entanglement entropy of two coupled oscillators after a frequency quench.
#[derive(Parser)]
#[command(name = "quench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario in a configuration file. Outputs go to
    /// $QUENCH_OUTPUT_DIR (default ./output).
    Run {
        config: PathBuf,
        /// Run only the named scenario.
        #[arg(long)]
        scenario: Option<String>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Show the built-in scenarios.
    Presets {
        /// Print scenario names.
        #[arg(long, conflicts_with = "dump")]
        list: bool,
        /// Print the preset configuration file.
        #[arg(long)]
        dump: bool,
    },
    /// Render a run CSV to SVG.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Add a panel with the log fit of S_c.
        #[arg(long)]
        fit: bool,
        /// Start of the fit window.
        #[arg(long, default_value_t = 0.0, requires = "fit")]
        fit_from: f64,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::Domain(_) => EXIT_PARSE,
        Error::Io { .. } | Error::Render(_) => EXIT_IO,
        _ => EXIT_NUMERIC,
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run(config: &Path, only: Option<&str>, jobs: Option<usize>) -> Result<(), Error> {
    let mut scenarios: Vec<Scenario> = parse_config(&read(config)?, &config.display().to_string())?;
    if let Some(name) = only {
        scenarios.retain(|s| s.name == name);
        if scenarios.is_empty() {
            return Err(Error::Parse {
                path: config.display().to_string(),
                line: 0,
                message: format!("no scenario named '{name}'"),
            });
        }
    }
    for s in &scenarios {
        s.validate()?;
    }

    let out_dir = output_dir();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
    let results: Vec<_> = pool.install(|| {
        scenarios
            .par_iter()
            .map(|s| (s.name.clone(), run_scenario(s, &out_dir)))
            .collect()
    });

    let mut first_err = None;
    for (name, result) in results {
        match result {
            Ok(report) => println!("{name}: wrote {}", report.csv.display()),
            Err(e) => {
                eprintln!("{name}: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    first_err.map_or(Ok(()), Err)
}

fn plot(csv: &Path, out: &Path, fit: bool, fit_from: f64) -> Result<(), Error> {
    let text = read(csv)?;
    let mut style = PlotStyle {
        title: csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        fit_window_start: fit_from,
        ..PlotStyle::default()
    };
    if fit {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut samples = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::Render(e.to_string()))?;
            let get = |i| record.get(i).and_then(|s: &str| s.parse::<f64>().ok());
            if let (Some(t), Some(s)) = (get(0), get(1)) {
                samples.push((t, s));
            }
        }
        let series = TimeSeries::new(samples).map_err(|e| Error::Render(e.to_string()))?;
        let window = series.window(fit_from, f64::INFINITY);
        style.fit = Some(fit_log_model(&window, FitMode::FixZZero).map_err(|e| Error::Render(e.to_string()))?);
    }
    let svg = emit_plot(&text, &style)?;
    quench_entropy::runner::write_atomic(out, svg.as_bytes())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, scenario, jobs } => run(&config, scenario.as_deref(), jobs),
        Command::Presets { dump: true, .. } => {
            print!("{PRESETS}");
            Ok(())
        }
        Command::Presets { .. } => {
            for s in presets() {
                let q = s.schedule;
                println!(
                    "{}\t{} {} -> {} {}\tt_max={}",
                    s.name, q.omega_p0, q.omega_m0, q.omega_p1, q.omega_m1, s.t_max
                );
            }
            Ok(())
        }
        Command::Plot { csv, out, fit, fit_from } => plot(&csv, &out, fit, fit_from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
