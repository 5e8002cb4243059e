//! Batch front end: parse a scenario config, run it (optionally once per
//! controller for comparison), and leave CSV trajectories, SVG plots, and
//! a metrics summary in the output directory.
//!
//! Every error class maps to its own exit status so scripts can branch on
//! the failure kind; see [`CliError::exit_code`].

pub mod config;
pub mod csv;
pub mod plot;
pub mod selftest;

pub use config::{parse_config, serialize_config, CliConfig};
pub use csv::{format_csv, parse_csv, write_csv, CsvRow, CSV_HEADER};
pub use plot::{chart, emit_plots, Series};

use crate::control::{AdaptiveControllerConfig, ControlError, FLControllerConfig};
use crate::sim::{
    compute_metrics, run_simulation, ControllerChoice, Metrics, ScenarioConfig, SimError,
    Trajectory,
};
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error{}: {msg}", fmt_line(.line))]
    Config { line: Option<usize>, msg: String },
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("controller construction failed: {0}")]
    Controller(#[from] ControlError),
    #[error("simulation diverged at t = {t:.4} s ({reason})")]
    Diverged { t: f64, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn fmt_line(line: &Option<usize>) -> String {
    match line {
        Some(n) => format!(" at line {n}"),
        None => String::new(),
    }
}

impl CliError {
    /// Stable per-class exit status (0 is success, 1 is a selftest
    /// failure, 2 is argument parsing, handled by the argument parser).
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 3,
            CliError::Scenario(_) => 4,
            CliError::Controller(_) => 5,
            CliError::Diverged { .. } => 6,
            CliError::Io { .. } => 7,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::ScenarioInvalid(msg) => CliError::Scenario(msg),
            SimError::Control(c) => CliError::Controller(c),
            SimError::Diverged { t, reason, .. } => CliError::Diverged { t, reason },
            SimError::EmptyTrajectory => CliError::Scenario("trajectory is empty".into()),
        }
    }
}

/// Everything a run leaves behind, also rendered into `metrics.txt`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// Canonical echo of the executed config.
    pub scenario: String,
    pub metrics: Vec<(String, Metrics)>,
    pub verdicts: Vec<String>,
    /// Controller construction diagnostics (fixed-matrix mode).
    pub warnings: Vec<String>,
    /// Every path written; each exists when the run returned success.
    pub files: Vec<PathBuf>,
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (label, m) in &self.metrics {
            writeln!(f, "[{label}]")?;
            writeln!(f, "rms_full = {:.6}", m.rms_full)?;
            writeln!(f, "rms_final_window = {:.6}", m.rms_final)?;
            writeln!(f, "band_final_window = ({:.6}, {:.6})", m.band.0, m.band.1)?;
            writeln!(f, "max_abs_e = {:.6}", m.max_abs_e)?;
            match m.settle_time {
                Some(t) => writeln!(
                    f,
                    "settle_time = {t:.3} s (|e| < {} rad)",
                    m.settle_threshold
                )?,
                None => writeln!(f, "settle_time = never (|e| < {} rad)", m.settle_threshold)?,
            }
            writeln!(f)?;
        }
        if !self.verdicts.is_empty() {
            writeln!(f, "[verdicts]")?;
            for v in &self.verdicts {
                writeln!(f, "{v}")?;
            }
            writeln!(f)?;
        }
        if !self.warnings.is_empty() {
            writeln!(f, "[warnings]")?;
            for w in &self.warnings {
                writeln!(f, "{w}")?;
            }
            writeln!(f)?;
        }
        writeln!(f, "[files]")?;
        for p in &self.files {
            writeln!(f, "{}", p.display())?;
        }
        writeln!(f)?;
        writeln!(f, "[scenario]")?;
        write!(f, "{}", self.scenario)
    }
}

pub fn read_config(path: &Path) -> Result<CliConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

fn label_of(choice: &ControllerChoice) -> &'static str {
    match choice {
        ControllerChoice::Classical(_) => "classical",
        ControllerChoice::Adaptive(_) => "adaptive",
    }
}

/// The classical/adaptive pair for compare mode: the configured controller
/// as is, its counterpart at defaults (stable preset for the adaptive side).
fn comparison_pair(scenario: &ScenarioConfig) -> [ScenarioConfig; 2] {
    let classical = ScenarioConfig {
        controller: match &scenario.controller {
            c @ ControllerChoice::Classical(_) => c.clone(),
            ControllerChoice::Adaptive(_) => {
                ControllerChoice::Classical(FLControllerConfig::default())
            }
        },
        ..scenario.clone()
    };
    let adaptive = ScenarioConfig {
        controller: match &scenario.controller {
            a @ ControllerChoice::Adaptive(_) => a.clone(),
            ControllerChoice::Classical(_) => ControllerChoice::Adaptive(
                AdaptiveControllerConfig::preset("stable").expect("shipped preset"),
            ),
        },
        ..scenario.clone()
    };
    [classical, adaptive]
}

/// Runs the scenario (both controllers when `compare` is set), writes all
/// artifacts into `out_dir`, and returns the report. On divergence the
/// partial trajectory is still written for diagnosis and the error comes
/// back after the writes, so the exit status reflects the failure.
pub fn run_command(cfg: &CliConfig, out_dir: &Path) -> Result<RunReport, CliError> {
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;

    let scenarios: Vec<ScenarioConfig> = if cfg.compare {
        comparison_pair(&cfg.scenario).into()
    } else {
        vec![cfg.scenario.clone()]
    };

    let mut results: Vec<(String, Result<Trajectory, SimError>)> = if scenarios.len() == 2 {
        // The two comparison runs are independent; writes happen after both.
        std::thread::scope(|scope| {
            let handles: Vec<_> = scenarios
                .iter()
                .map(|s| scope.spawn(move || run_simulation(s)))
                .collect();
            handles
                .into_iter()
                .zip(&scenarios)
                .map(|(h, s)| {
                    (
                        label_of(&s.controller).to_string(),
                        h.join().expect("simulation thread panicked"),
                    )
                })
                .collect()
        })
    } else {
        scenarios
            .iter()
            .map(|s| (label_of(&s.controller).to_string(), run_simulation(s)))
            .collect()
    };

    let mut report = RunReport {
        scenario: serialize_config(cfg),
        metrics: Vec::new(),
        verdicts: Vec::new(),
        warnings: Vec::new(),
        files: Vec::new(),
    };
    let mut first_error: Option<CliError> = None;

    // Salvage partial trajectories so a diverged run still leaves evidence.
    let mut runs: Vec<(String, Trajectory)> = Vec::new();
    for (label, result) in results.drain(..) {
        match result {
            Ok(traj) => runs.push((label, traj)),
            Err(e) => {
                report.verdicts.push(format!("{label}: {e}"));
                if let SimError::Diverged {
                    trajectory: Some(partial),
                    ..
                } = &e
                {
                    runs.push((label, (**partial).clone()));
                }
                first_error.get_or_insert(e.into());
            }
        }
    }

    for (label, traj) in &runs {
        report.warnings.extend(
            traj.warnings
                .iter()
                .map(|w| format!("{label}: {w}")),
        );
        let name = if cfg.compare {
            format!("trajectory_{label}.csv")
        } else {
            "trajectory.csv".to_string()
        };
        let path = out_dir.join(name);
        write_csv(traj, &path)?;
        report.files.push(path);
        let m = compute_metrics(traj)?;
        report.metrics.push((label.clone(), m));
        match m.settle_time {
            Some(t) => report
                .verdicts
                .push(format!("{label} settled to |e| < {} rad: yes, from t = {t:.3} s", m.settle_threshold)),
            None => report
                .verdicts
                .push(format!("{label} settled to |e| < {} rad: no", m.settle_threshold)),
        }
    }
    if cfg.compare {
        let find = |l: &str| report.metrics.iter().find(|(label, _)| label == l);
        if let (Some((_, mc)), Some((_, ma))) = (find("classical"), find("adaptive")) {
            let yes = ma.rms_final < mc.rms_final;
            report.verdicts.push(format!(
                "adaptive final-window RMS < classical: {} ({:.6} vs {:.6})",
                if yes { "yes" } else { "no" },
                ma.rms_final,
                mc.rms_final
            ));
        }
    }

    if !runs.is_empty() {
        let labelled: Vec<(String, &Trajectory)> =
            runs.iter().map(|(l, t)| (l.clone(), t)).collect();
        report.files.extend(emit_plots(&labelled, out_dir)?);
    }

    let metrics_path = out_dir.join("metrics.txt");
    report.files.push(metrics_path.clone());
    std::fs::write(&metrics_path, report.to_string()).map_err(|source| CliError::Io {
        path: metrics_path,
        source,
    })?;

    match first_error {
        Some(e) => Err(e),
        None => Ok(report),
    }
}
