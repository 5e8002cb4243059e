//! Line-oriented scenario config format.
//!
//! ```text
//! # comment                          blank lines and # comments ignored
//! [plant]                            physical constants, nominal by default
//! m1 = 0.086184                      keys: m1 k1 a_p j1 g l1 c1 k_p
//! [reference]
//! amplitude = 0.2
//! frequency = 1.0
//! [controller]
//! type = adaptive                    classical (default) | adaptive
//! preset = stable                    adaptive baseline: stable | paper
//! k = 10 37 60 36                    target error polynomial, order 2 to 4
//! gamma1 = 35                        remaining keys override the preset
//! q_diag = 1000                      one value or one per error state
//! [schedule.1]                       numbered parameter perturbations
//! kind = step                        step | ramp | sin
//! param = m1
//! magnitude = 1.3
//! start = 10
//! [sim]
//! dt = 0.001
//! t_end = 20
//! initial_state = 0 0 0 0.2
//! measurement = true-state           true-state | backward-difference
//! compare = false
//! schedule.2 = step c1 1.5 at 10     compact event form, same meaning
//! ```
//!
//! Unknown keys and sections are errors, not silently ignored defaults;
//! every message carries the offending line number. [`serialize_config`]
//! emits the canonical form, which parses back to an equal config.

use super::CliError;
use crate::control::{AdaptiveControllerConfig, FLControllerConfig, PMode};
use crate::plant::ParamName;
use crate::sim::{
    ControllerChoice, MeasurementMode, ParameterSchedule, ScenarioConfig, ScheduleEvent,
    ScheduleKind,
};
use nalgebra::DMatrix;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// A scenario plus the CLI-level comparison toggle.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub scenario: ScenarioConfig,
    /// Run both controllers on the scenario and overlay the results.
    pub compare: bool,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            compare: false,
        }
    }
}

fn err(line: usize, msg: impl Into<String>) -> CliError {
    CliError::Config {
        line: Some(line),
        msg: msg.into(),
    }
}

fn parse_f64(value: &str, key: &str, line: usize) -> Result<f64, CliError> {
    value
        .parse()
        .map_err(|_| err(line, format!("{key}: `{value}` is not a number")))
}

fn parse_f64_list(value: &str, key: &str, line: usize) -> Result<Vec<f64>, CliError> {
    value
        .split_whitespace()
        .map(|tok| parse_f64(tok, key, line))
        .collect()
}

fn parse_fixed<const N: usize>(value: &str, key: &str, line: usize) -> Result<[f64; N], CliError> {
    let list = parse_f64_list(value, key, line)?;
    list.try_into()
        .map_err(|list: Vec<f64>| err(line, format!("{key}: expected {N} numbers, got {}", list.len())))
}

fn parse_bool(value: &str, key: &str, line: usize) -> Result<bool, CliError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(err(line, format!("{key}: `{value}` is not true/false"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    None,
    Plant,
    Reference,
    Controller,
    Sim,
    Schedule(u32),
}

/// One `key = value` occurrence, kept raw until the whole file is read so
/// later keys (e.g. `preset`) cannot depend on line order.
struct RawEntry {
    key: String,
    value: String,
    line: usize,
}

#[derive(Default)]
struct RawSchedule {
    /// Section header line, for errors about missing keys.
    header_line: usize,
    compact: Option<(String, usize)>,
    fields: Vec<RawEntry>,
}

pub fn parse_config(text: &str) -> Result<CliConfig, CliError> {
    let mut section = Section::None;
    let mut plant: Vec<RawEntry> = Vec::new();
    let mut reference: Vec<RawEntry> = Vec::new();
    let mut controller: Vec<RawEntry> = Vec::new();
    let mut sim: Vec<RawEntry> = Vec::new();
    let mut schedules: BTreeMap<u32, RawSchedule> = BTreeMap::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(line, "unterminated section header"))?
                .trim();
            section = match name {
                "plant" => Section::Plant,
                "reference" => Section::Reference,
                "controller" => Section::Controller,
                "sim" => Section::Sim,
                _ => match name.strip_prefix("schedule.") {
                    Some(n) => {
                        let n: u32 = n
                            .parse()
                            .map_err(|_| err(line, format!("bad schedule number `{n}`")))?;
                        let slot = schedules.entry(n).or_default();
                        if slot.header_line != 0 || slot.compact.is_some() {
                            return Err(err(line, format!("schedule event {n} defined twice")));
                        }
                        slot.header_line = line;
                        Section::Schedule(n)
                    }
                    None => return Err(err(line, format!("unknown section [{name}]"))),
                },
            };
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, "expected `key = value`"))?;
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        if value.is_empty() {
            return Err(err(line, format!("{key}: empty value")));
        }
        // Compact schedule lines are legal anywhere outside a schedule
        // section, so a short config does not need section headers for them.
        if let Some(n) = key.strip_prefix("schedule.") {
            if !matches!(section, Section::Schedule(_)) {
                let n: u32 = n
                    .parse()
                    .map_err(|_| err(line, format!("bad schedule number `{n}`")))?;
                let slot = schedules.entry(n).or_default();
                if slot.header_line != 0 || slot.compact.is_some() {
                    return Err(err(line, format!("schedule event {n} defined twice")));
                }
                slot.compact = Some((value, line));
                continue;
            }
        }
        let entry = RawEntry { key, value, line };
        match section {
            Section::None => {
                return Err(err(
                    line,
                    format!("key `{}` appears before any [section] header", entry.key),
                ))
            }
            Section::Plant => plant.push(entry),
            Section::Reference => reference.push(entry),
            Section::Controller => controller.push(entry),
            Section::Sim => sim.push(entry),
            Section::Schedule(n) => schedules
                .get_mut(&n)
                .expect("section seen implies slot")
                .fields
                .push(entry),
        }
    }

    reject_duplicates(&plant, "plant")?;
    reject_duplicates(&reference, "reference")?;
    reject_duplicates(&controller, "controller")?;
    reject_duplicates(&sim, "sim")?;

    let mut cfg = CliConfig::default();
    for e in &plant {
        let name: ParamName = e
            .key
            .parse()
            .map_err(|_| err(e.line, format!("unknown key `{}` in [plant]", e.key)))?;
        cfg.scenario
            .params
            .set(name, parse_f64(&e.value, &e.key, e.line)?);
    }
    for e in &reference {
        match e.key.as_str() {
            "amplitude" => cfg.scenario.reference.amplitude = parse_f64(&e.value, &e.key, e.line)?,
            "frequency" => cfg.scenario.reference.frequency = parse_f64(&e.value, &e.key, e.line)?,
            _ => return Err(err(e.line, format!("unknown key `{}` in [reference]", e.key))),
        }
    }
    cfg.scenario.controller = build_controller(&controller)?;
    for e in &sim {
        match e.key.as_str() {
            "dt" => cfg.scenario.dt = parse_f64(&e.value, &e.key, e.line)?,
            "t_end" => cfg.scenario.t_end = parse_f64(&e.value, &e.key, e.line)?,
            "initial_state" => cfg.scenario.initial_state = parse_fixed(&e.value, &e.key, e.line)?,
            "measurement" => {
                cfg.scenario.measurement = match e.value.as_str() {
                    "true-state" => MeasurementMode::TrueState,
                    "backward-difference" => MeasurementMode::BackwardDifference,
                    v => {
                        return Err(err(
                            e.line,
                            format!("measurement: `{v}` is not true-state/backward-difference"),
                        ))
                    }
                }
            }
            "seed" => {
                cfg.scenario.seed = e
                    .value
                    .parse()
                    .map_err(|_| err(e.line, format!("seed: `{}` is not an integer", e.value)))?
            }
            "compare" => cfg.compare = parse_bool(&e.value, &e.key, e.line)?,
            _ => return Err(err(e.line, format!("unknown key `{}` in [sim]", e.key))),
        }
    }
    let mut events = Vec::new();
    for (n, raw) in &schedules {
        events.push(build_event(*n, raw)?);
    }
    cfg.scenario.schedule = ParameterSchedule { events };

    cfg.scenario
        .validate()
        .map_err(|e| CliError::Scenario(e.to_string()))?;
    Ok(cfg)
}

fn reject_duplicates(entries: &[RawEntry], section: &str) -> Result<(), CliError> {
    for (i, e) in entries.iter().enumerate() {
        if let Some(dup) = entries[..i].iter().find(|p| p.key == e.key) {
            return Err(err(
                e.line,
                format!(
                    "key `{}` in [{section}] already set on line {}",
                    e.key, dup.line
                ),
            ));
        }
    }
    Ok(())
}

fn build_controller(entries: &[RawEntry]) -> Result<ControllerChoice, CliError> {
    let find = |key: &str| entries.iter().find(|e| e.key == key);
    let kind = match find("type") {
        None => "classical",
        Some(e) => match e.value.as_str() {
            "classical" | "adaptive" => e.value.as_str(),
            v => return Err(err(e.line, format!("type: `{v}` is not classical/adaptive"))),
        },
    };

    if kind == "classical" {
        let mut fl = FLControllerConfig::default();
        for e in entries {
            match e.key.as_str() {
                "type" => {}
                "kp" => fl.kp = parse_f64(&e.value, &e.key, e.line)?,
                "kd" => fl.kd = parse_f64(&e.value, &e.key, e.line)?,
                _ => {
                    return Err(err(
                        e.line,
                        format!("key `{}` requires `type = adaptive`", e.key),
                    ))
                }
            }
        }
        return Ok(ControllerChoice::Classical(fl));
    }

    let mut cfg = match find("preset") {
        None => AdaptiveControllerConfig::preset("stable").expect("shipped preset"),
        Some(e) => AdaptiveControllerConfig::preset(&e.value)
            .ok_or_else(|| err(e.line, format!("preset: `{}` is not paper/stable", e.value)))?,
    };
    let mut q_diag: Option<(Vec<f64>, usize)> = None;
    for e in entries {
        match e.key.as_str() {
            "type" | "preset" => {}
            "k" => cfg.k = parse_f64_list(&e.value, &e.key, e.line)?,
            "gamma1" => cfg.gamma1 = parse_f64(&e.value, &e.key, e.line)?,
            "gamma2" => cfg.gamma2 = parse_f64(&e.value, &e.key, e.line)?,
            "q_diag" => q_diag = Some((parse_f64_list(&e.value, &e.key, e.line)?, e.line)),
            "g_floor" => cfg.g_floor = parse_f64(&e.value, &e.key, e.line)?,
            "theta_cap" => cfg.theta_cap = parse_f64(&e.value, &e.key, e.line)?,
            "deriv_tau" => cfg.deriv_tau = parse_f64(&e.value, &e.key, e.line)?,
            "p_mode" => {
                cfg.p_mode = match e.value.as_str() {
                    "solved" => PMode::Solved,
                    "paper-matrix" => PMode::PaperMatrix,
                    v => return Err(err(e.line, format!("p_mode: `{v}` is not solved/paper-matrix"))),
                }
            }
            "domain_x2" => cfg.domains[0] = pair(&e.value, &e.key, e.line)?,
            "domain_x3" => cfg.domains[1] = pair(&e.value, &e.key, e.line)?,
            "domain_x4" => cfg.domains[2] = pair(&e.value, &e.key, e.line)?,
            "centers" => {
                cfg.centers = e
                    .value
                    .split_whitespace()
                    .map(|tok| {
                        tok.parse()
                            .map_err(|_| err(e.line, format!("centers: `{tok}` is not a count")))
                    })
                    .collect::<Result<_, _>>()?
            }
            "kp" | "kd" => {
                return Err(err(
                    e.line,
                    format!("key `{}` requires `type = classical`", e.key),
                ))
            }
            _ => return Err(err(e.line, format!("unknown key `{}` in [controller]", e.key))),
        }
    }
    let n = cfg.k.len();
    match q_diag {
        Some((d, line)) => {
            let d = if d.len() == 1 { vec![d[0]; n] } else { d };
            if d.len() != n {
                return Err(err(
                    line,
                    format!("q_diag: expected 1 or {n} values, got {}", d.len()),
                ));
            }
            cfg.q = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d));
        }
        // A k override that changes the loop order drags Q along so the
        // preset default stays usable at any order.
        None if cfg.q.nrows() != n => cfg.q = DMatrix::identity(n, n) * 1000.0,
        None => {}
    }
    Ok(ControllerChoice::Adaptive(cfg))
}

fn pair(value: &str, key: &str, line: usize) -> Result<(f64, f64), CliError> {
    let [lo, hi] = parse_fixed::<2>(value, key, line)?;
    Ok((lo, hi))
}

fn build_event(n: u32, raw: &RawSchedule) -> Result<ScheduleEvent, CliError> {
    if let Some((value, line)) = &raw.compact {
        return parse_compact_event(value, *line);
    }
    let header = raw.header_line;
    let get = |key: &str| raw.fields.iter().find(|e| e.key == key);
    for (i, e) in raw.fields.iter().enumerate() {
        if !["kind", "param", "magnitude", "start", "end", "period"].contains(&e.key.as_str()) {
            return Err(err(e.line, format!("unknown key `{}` in [schedule.{n}]", e.key)));
        }
        if raw.fields[..i].iter().any(|p| p.key == e.key) {
            return Err(err(e.line, format!("key `{}` in [schedule.{n}] set twice", e.key)));
        }
    }
    let require = |key: &str| {
        get(key).ok_or_else(|| err(header, format!("[schedule.{n}] is missing `{key}`")))
    };
    let kind_entry = require("kind")?;
    let param_entry = require("param")?;
    let param: ParamName = param_entry.value.parse().map_err(|_| {
        err(
            param_entry.line,
            format!("param: `{}` is not a plant parameter", param_entry.value),
        )
    })?;
    let magnitude = {
        let e = require("magnitude")?;
        parse_f64(&e.value, &e.key, e.line)?
    };
    let start = {
        let e = require("start")?;
        parse_f64(&e.value, &e.key, e.line)?
    };
    let forbid = |key: &str| match get(key) {
        Some(e) => Err(err(
            e.line,
            format!("`{key}` does not apply to kind = {}", kind_entry.value),
        )),
        None => Ok(()),
    };
    let kind = match kind_entry.value.as_str() {
        "step" => {
            forbid("end")?;
            forbid("period")?;
            ScheduleKind::Step
        }
        "ramp" => {
            forbid("period")?;
            let e = require("end")?;
            ScheduleKind::Ramp {
                end: parse_f64(&e.value, &e.key, e.line)?,
            }
        }
        "sin" => {
            forbid("end")?;
            let e = require("period")?;
            ScheduleKind::Sinusoidal {
                period: parse_f64(&e.value, &e.key, e.line)?,
            }
        }
        v => return Err(err(kind_entry.line, format!("kind: `{v}` is not step/ramp/sin"))),
    };
    Ok(ScheduleEvent {
        param,
        kind,
        start,
        magnitude,
    })
}

/// `step PARAM MAG at START` | `ramp PARAM MAG from START to END` |
/// `sin PARAM MAG at START period PERIOD`
fn parse_compact_event(value: &str, line: usize) -> Result<ScheduleEvent, CliError> {
    let tok: Vec<&str> = value.split_whitespace().collect();
    let bad = || err(line, format!("malformed schedule event `{value}`"));
    let (kind_word, rest) = tok.split_first().ok_or_else(bad)?;
    let param: ParamName = rest
        .first()
        .ok_or_else(bad)?
        .parse()
        .map_err(|_| err(line, format!("`{}` is not a plant parameter", rest[0])))?;
    let num = |s: &&str| parse_f64(s, "schedule", line);
    match (*kind_word, rest) {
        ("step", [_, mag, "at", start]) => Ok(ScheduleEvent {
            param,
            kind: ScheduleKind::Step,
            start: num(start)?,
            magnitude: num(mag)?,
        }),
        ("ramp", [_, mag, "from", start, "to", end]) => Ok(ScheduleEvent {
            param,
            kind: ScheduleKind::Ramp { end: num(end)? },
            start: num(start)?,
            magnitude: num(mag)?,
        }),
        ("sin", [_, mag, "at", start, "period", period]) => Ok(ScheduleEvent {
            param,
            kind: ScheduleKind::Sinusoidal {
                period: num(period)?,
            },
            start: num(start)?,
            magnitude: num(mag)?,
        }),
        _ => Err(bad()),
    }
}

/// Canonical form: every key explicit, floats in shortest round-trip
/// notation, schedule events as compact lines. Parsing the result gives
/// back an equal config.
pub fn serialize_config(cfg: &CliConfig) -> String {
    let mut out = String::new();
    let s = &cfg.scenario;
    out.push_str("[plant]\n");
    for name in ParamName::ALL {
        let _ = writeln!(out, "{} = {:?}", name.as_str(), s.params.get(name));
    }
    out.push_str("\n[reference]\n");
    let _ = writeln!(out, "amplitude = {:?}", s.reference.amplitude);
    let _ = writeln!(out, "frequency = {:?}", s.reference.frequency);
    out.push_str("\n[controller]\n");
    match &s.controller {
        ControllerChoice::Classical(fl) => {
            out.push_str("type = classical\n");
            let _ = writeln!(out, "kp = {:?}", fl.kp);
            let _ = writeln!(out, "kd = {:?}", fl.kd);
        }
        ControllerChoice::Adaptive(a) => {
            out.push_str("type = adaptive\n");
            let _ = writeln!(out, "k = {}", join(&a.k));
            let _ = writeln!(out, "gamma1 = {:?}", a.gamma1);
            let _ = writeln!(out, "gamma2 = {:?}", a.gamma2);
            let diag: Vec<f64> = (0..a.q.nrows()).map(|i| a.q[(i, i)]).collect();
            let _ = writeln!(out, "q_diag = {}", join(&diag));
            let _ = writeln!(out, "g_floor = {:?}", a.g_floor);
            let _ = writeln!(out, "theta_cap = {:?}", a.theta_cap);
            let mode = match a.p_mode {
                PMode::Solved => "solved",
                PMode::PaperMatrix => "paper-matrix",
            };
            let _ = writeln!(out, "p_mode = {mode}");
            let _ = writeln!(out, "deriv_tau = {:?}", a.deriv_tau);
            for (i, (lo, hi)) in a.domains.iter().enumerate() {
                let _ = writeln!(out, "domain_x{} = {lo:?} {hi:?}", i + 2);
            }
            let centers: Vec<String> = a.centers.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(out, "centers = {}", centers.join(" "));
        }
    }
    out.push_str("\n[sim]\n");
    let _ = writeln!(out, "dt = {:?}", s.dt);
    let _ = writeln!(out, "t_end = {:?}", s.t_end);
    let _ = writeln!(out, "initial_state = {}", join(&s.initial_state));
    let mode = match s.measurement {
        MeasurementMode::TrueState => "true-state",
        MeasurementMode::BackwardDifference => "backward-difference",
    };
    let _ = writeln!(out, "measurement = {mode}");
    let _ = writeln!(out, "seed = {}", s.seed);
    let _ = writeln!(out, "compare = {}", cfg.compare);
    for (i, ev) in s.schedule.events.iter().enumerate() {
        let p = ev.param.as_str();
        let m = ev.magnitude;
        let t = ev.start;
        let _ = match ev.kind {
            ScheduleKind::Step => {
                writeln!(out, "schedule.{} = step {p} {m:?} at {t:?}", i + 1)
            }
            ScheduleKind::Ramp { end } => {
                writeln!(out, "schedule.{} = ramp {p} {m:?} from {t:?} to {end:?}", i + 1)
            }
            ScheduleKind::Sinusoidal { period } => {
                writeln!(out, "schedule.{} = sin {p} {m:?} at {t:?} period {period:?}", i + 1)
            }
        };
    }
    out
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_full_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, CliConfig::default());
        assert!(matches!(
            cfg.scenario.controller,
            ControllerChoice::Classical(_)
        ));
        assert_eq!(cfg.scenario.dt, 1e-3);
        assert_eq!(cfg.scenario.t_end, 20.0);
        assert_eq!(cfg.scenario.reference.amplitude, 0.2);
        assert_eq!(cfg.scenario.reference.frequency, 1.0);
    }

    #[test]
    fn adaptive_preset_selection() {
        let cfg = parse_config("[controller]\ntype = adaptive\npreset = paper\n").unwrap();
        match &cfg.scenario.controller {
            ControllerChoice::Adaptive(a) => {
                assert_eq!(a.p_mode, PMode::PaperMatrix);
                assert_eq!(a.k, vec![-0.7, 1.0, 10.8, 0.7]);
            }
            other => panic!("expected adaptive, got {other:?}"),
        }
    }

    #[test]
    fn compact_schedule_line() {
        let cfg = parse_config("[sim]\nschedule.1 = step m1 1.3 at 10\n").unwrap();
        assert_eq!(
            cfg.scenario.schedule.events,
            vec![ScheduleEvent {
                param: ParamName::M1,
                kind: ScheduleKind::Step,
                start: 10.0,
                magnitude: 1.3,
            }]
        );
    }

    #[test]
    fn sectional_schedule_equals_compact() {
        let sectional = parse_config(
            "[schedule.1]\nkind = ramp\nparam = c1\nmagnitude = 1.5\nstart = 2\nend = 4\n",
        )
        .unwrap();
        let compact = parse_config("[sim]\nschedule.1 = ramp c1 1.5 from 2 to 4\n").unwrap();
        assert_eq!(sectional, compact);
    }

    #[test]
    fn unknown_keys_error_with_line_numbers() {
        let e = parse_config("[plant]\nm1 = 0.1\nmass = 2\n").unwrap_err();
        match e {
            CliError::Config { line, msg } => {
                assert_eq!(line, Some(3));
                assert!(msg.contains("mass"), "{msg}");
            }
            other => panic!("expected config error, got {other:?}"),
        }
        assert!(parse_config("[rocket]\n").is_err());
        assert!(parse_config("dt = 1\n").is_err());
        // Typo in a controller key must not fall back to a default.
        assert!(parse_config("[controller]\ntype = adaptive\ngama1 = 3\n").is_err());
    }

    #[test]
    fn duplicate_keys_rejected() {
        let e = parse_config("[sim]\ndt = 0.01\ndt = 0.02\n").unwrap_err();
        match e {
            CliError::Config { line, msg } => {
                assert_eq!(line, Some(3));
                assert!(msg.contains("already set on line 2"), "{msg}");
            }
            other => panic!("expected config error, got {other:?}"),
        }
        assert!(
            parse_config("[sim]\nschedule.1 = step m1 1.3 at 10\nschedule.1 = step c1 1.5 at 10\n")
                .is_err()
        );
    }

    #[test]
    fn controller_keys_are_type_checked() {
        assert!(parse_config("[controller]\nkp = 8\n").is_ok());
        let e = parse_config("[controller]\ngamma1 = 35\n").unwrap_err();
        assert!(e.to_string().contains("type = adaptive"), "{e}");
        let e = parse_config("[controller]\ntype = adaptive\nkp = 8\n").unwrap_err();
        assert!(e.to_string().contains("type = classical"), "{e}");
    }

    #[test]
    fn k_override_resizes_q() {
        let cfg = parse_config("[controller]\ntype = adaptive\nk = 5 6\n").unwrap();
        match &cfg.scenario.controller {
            ControllerChoice::Adaptive(a) => {
                assert_eq!(a.q.nrows(), 2);
                assert_eq!(a.q[(0, 0)], 1000.0);
            }
            other => panic!("expected adaptive, got {other:?}"),
        }
        // Explicit q_diag of the wrong arity stays an error.
        assert!(parse_config("[controller]\ntype = adaptive\nk = 5 6\nq_diag = 1 2 3\n").is_err());
    }

    #[test]
    fn semantic_errors_flow_through_scenario_validation() {
        let e = parse_config("[sim]\ndt = -1\n").unwrap_err();
        assert!(matches!(e, CliError::Scenario(_)), "{e:?}");
        // Schedule that drives the mass negative.
        let e = parse_config("[sim]\nschedule.1 = step m1 -2 at 1\n").unwrap_err();
        assert!(matches!(e, CliError::Scenario(_)), "{e:?}");
    }

    #[test]
    fn round_trip_is_identity() {
        let text = "\
[plant]
m1 = 0.09
[reference]
amplitude = 0.25
[controller]
type = adaptive
preset = stable
gamma1 = 20
centers = 5 7 5
domain_x2 = -30 30
[schedule.1]
kind = sin
param = g
magnitude = 0.05
start = 3
period = 2.5
[sim]
dt = 0.002
t_end = 10
compare = true
schedule.2 = ramp c1 1.5 from 2 to 4
";
        let parsed = parse_config(text).unwrap();
        assert!(parsed.compare);
        let canonical = serialize_config(&parsed);
        let reparsed = parse_config(&canonical).unwrap();
        assert_eq!(parsed, reparsed);
        // Canonical form is a fixed point.
        assert_eq!(canonical, serialize_config(&reparsed));
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let cfg = parse_config("# top\n\n[sim]  # section\ndt = 0.01  # tail\n").unwrap();
        assert_eq!(cfg.scenario.dt, 0.01);
    }
}
