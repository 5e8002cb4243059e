//! Minimal deterministic SVG line charts for the four standard views:
//! tracking, tracking error, control effort, and parameter-norm evolution.
//! Pure text generation with fixed-precision coordinates, so identical
//! runs produce byte-identical files and goldens stay stable.

use super::CliError;
use crate::sim::Trajectory;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
/// Points per polyline before stride downsampling kicks in; keeps a 20 k
/// sample run near 100 kB per file without visible loss at 800 px.
const MAX_POINTS: usize = 2000;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn downsample(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let stride = points.len().div_ceil(MAX_POINTS);
    let mut out: Vec<(f64, f64)> = points.iter().copied().step_by(stride).collect();
    if out.last() != points.last() {
        out.push(*points.last().expect("nonempty"));
    }
    out
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Renders one chart. Axis ranges come from the data, padded 5% in y; a
/// flat series (e.g. zero error) gets a unit band so it draws as the
/// midline rather than collapsing the axis.
pub fn chart(title: &str, y_label: &str, series: &[Series]) -> String {
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    if !x_min.is_finite() {
        (x_min, x_max) = (0.0, 1.0);
    }
    if x_min == x_max {
        x_max = x_min + 1.0;
    }
    if !y_min.is_finite() {
        (y_min, y_max) = (-1.0, 1.0);
    }
    if y_min == y_max {
        y_min -= 1.0;
        y_max += 1.0;
    } else {
        let pad = 0.05 * (y_max - y_min);
        y_min -= pad;
        y_max += pad;
    }

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let px = |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w;
    let py = |y: f64| MARGIN_T + (y_max - y) / (y_max - y_min) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>"#,
        MARGIN_L + plot_w / 2.0
    );

    // Grid and tick labels, 5 divisions per axis.
    for i in 0..=4 {
        let fx = x_min + (x_max - x_min) * i as f64 / 4.0;
        let gx = px(fx);
        let _ = writeln!(
            out,
            r##"<line x1="{gx:.2}" y1="{MARGIN_T}" x2="{gx:.2}" y2="{:.1}" stroke="#dddddd"/>"##,
            MARGIN_T + plot_h
        );
        let _ = writeln!(
            out,
            r#"<text x="{gx:.2}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            MARGIN_T + plot_h + 16.0,
            tick_label(fx)
        );
        let fy = y_min + (y_max - y_min) * i as f64 / 4.0;
        let gy = py(fy);
        let _ = writeln!(
            out,
            r##"<line x1="{MARGIN_L}" y1="{gy:.2}" x2="{:.1}" y2="{gy:.2}" stroke="#dddddd"/>"##,
            MARGIN_L + plot_w
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{gy:.2}" text-anchor="end" dominant-baseline="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            MARGIN_L - 6.0,
            tick_label(fy)
        );
    }
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="#333333"/>"##
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="12">t (s)</text>"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {:.1})">{y_label}</text>"#,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = String::new();
        for (x, y) in downsample(&s.points) {
            let _ = write!(pts, "{:.2},{:.2} ", px(x), py(y));
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
            pts.trim_end()
        );
        let ly = MARGIN_T + 14.0 + 18.0 * i as f64;
        let lx = MARGIN_L + plot_w + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 24.0,
            ly + 4.0,
            s.label
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Writes the four standard charts for one or more labelled runs and
/// returns the created paths. Multiple runs overlay as separate series.
pub fn emit_plots(runs: &[(String, &Trajectory)], out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    if runs.is_empty() {
        return Err(CliError::Scenario("no runs to plot".into()));
    }
    let pick = |f: &dyn Fn(&crate::sim::Record) -> f64, traj: &Trajectory| -> Vec<(f64, f64)> {
        traj.records.iter().map(|r| (r.t, f(r))).collect()
    };

    let mut tracking = vec![Series {
        label: "reference".into(),
        points: pick(&|r| r.ym, runs[0].1),
    }];
    let mut error = Vec::new();
    let mut control = Vec::new();
    let mut theta = Vec::new();
    for (label, traj) in runs {
        tracking.push(Series {
            label: format!("y ({label})"),
            points: pick(&|r| r.x[2], traj),
        });
        error.push(Series {
            label: format!("e ({label})"),
            points: pick(&|r| r.e, traj),
        });
        control.push(Series {
            label: format!("u ({label})"),
            points: pick(&|r| r.u, traj),
        });
        theta.push(Series {
            label: format!("|theta_f| ({label})"),
            points: pick(&|r| r.theta_f_norm, traj),
        });
        theta.push(Series {
            label: format!("|theta_g| ({label})"),
            points: pick(&|r| r.theta_g_norm, traj),
        });
    }

    let charts = [
        ("tracking.svg", chart("Output tracking", "angle (rad)", &tracking)),
        ("error.svg", chart("Tracking error", "e (rad)", &error)),
        ("control.svg", chart("Control effort", "u", &control)),
        ("theta.svg", chart("Estimate norms", "inf-norm", &theta)),
    ];
    let mut paths = Vec::new();
    for (name, svg) in charts {
        let path = out_dir.join(name);
        std::fs::write(&path, svg).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        paths.push(path);
    }
    Ok(paths)
}
