//! CSV, SVG, and manifest emission.
//!
//! Column sets and their order are stable contracts:
//! trajectory CSVs carry `t, err_rel, field_norm, sigma, V_surrogate`;
//! sweep CSVs carry `magnitude, settling_time, thm_bound, final_err_rel,
//! terminated_by`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{FtError, Result};
use crate::experiments::SweepResult;
use crate::integrator::Trajectory;
use crate::linalg::{dist, norm};

/// Formats a float with full round-trip precision, deterministically.
fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

fn check_finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(FtError::Degenerate(format!("non-finite value in output column {name}: {v}")))
    }
}

/// Renders a trajectory as CSV text. `err_rel` and `V_surrogate` are
/// relative error and squared distance to `equilibrium`.
pub fn trajectory_csv(traj: &Trajectory<f64>, equilibrium: &[f64]) -> Result<String> {
    let scale = norm(equilibrium).max(1.0);
    let mut out = String::from("t,err_rel,field_norm,sigma,V_surrogate\n");
    for i in 0..traj.len() {
        let e = dist(&traj.states[i], equilibrium);
        let row = [
            check_finite("t", traj.times[i])?,
            check_finite("err_rel", e / scale)?,
            check_finite("field_norm", traj.field_norms[i])?,
            check_finite("sigma", traj.sigma_values[i])?,
            check_finite("V_surrogate", e * e)?,
        ];
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&fmt(v));
            first = false;
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_trajectory_csv(
    path: &Path,
    traj: &Trajectory<f64>,
    equilibrium: &[f64],
) -> Result<()> {
    std::fs::write(path, trajectory_csv(traj, equilibrium)?)?;
    Ok(())
}

/// Renders a sweep table as CSV text; absent settling times and bounds
/// become empty fields.
pub fn sweep_csv(result: &SweepResult) -> Result<String> {
    let mut out = String::from("magnitude,settling_time,thm_bound,final_err_rel,terminated_by\n");
    for row in &result.rows {
        let opt = |v: Option<f64>| -> Result<String> {
            match v {
                Some(x) => Ok(fmt(check_finite("settling_time/thm_bound", x)?)),
                None => Ok(String::new()),
            }
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt(check_finite("magnitude", row.magnitude)?),
            opt(row.settling_time)?,
            opt(row.thm_bound)?,
            fmt(check_finite("final_err_rel", row.final_err_rel)?),
            row.terminated_by,
        );
    }
    Ok(out)
}

pub fn write_sweep_csv(path: &Path, result: &SweepResult) -> Result<()> {
    std::fs::write(path, sweep_csv(result)?)?;
    Ok(())
}

/// One curve of a log-error plot.
pub struct PlotSeries {
    pub label: String,
    /// (t, err_rel) samples; err_rel values at or below 1e-16 are clipped.
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Renders a line plot of log₁₀(err_rel) versus time as a standalone SVG.
pub fn error_plot_svg(title: &str, series: &[PlotSeries]) -> Result<String> {
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        return Err(FtError::Degenerate("nothing to plot".into()));
    }
    let (w, h) = (720.0, 480.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);

    let floor = 1e-16f64;
    let mut t_max = f64::MIN;
    let mut t_min = f64::MAX;
    let mut y_min = f64::MAX;
    let mut y_max = f64::MIN;
    for s in series {
        for &(t, e) in &s.points {
            if !t.is_finite() || !e.is_finite() {
                return Err(FtError::Degenerate("non-finite value in plot data".into()));
            }
            let ly = e.max(floor).log10();
            t_min = t_min.min(t);
            t_max = t_max.max(t);
            y_min = y_min.min(ly);
            y_max = y_max.max(ly);
        }
    }
    if t_max <= t_min {
        t_max = t_min + 1.0;
    }
    if y_max <= y_min {
        y_max = y_min + 1.0;
    }
    let x_of = |t: f64| ml + (t - t_min) / (t_max - t_min) * pw;
    let y_of = |ly: f64| mt + (y_max - ly) / (y_max - y_min) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{title}</text>",
        w / 2.0
    );
    // axes
    let _ = writeln!(
        svg,
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        h - mb,
        w - mr,
        h - mb
    );
    let _ = writeln!(svg, "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>", h - mb);
    // y ticks at integer decades
    let (d0, d1) = (y_min.floor() as i64, y_max.ceil() as i64);
    let step = (((d1 - d0) as f64 / 8.0).ceil() as i64).max(1);
    let mut d = d0;
    while d <= d1 {
        let y = y_of(d as f64);
        if (mt..=h - mb).contains(&y) {
            let _ = writeln!(
                svg,
                "<line x1=\"{}\" y1=\"{y}\" x2=\"{ml}\" y2=\"{y}\" stroke=\"black\"/>",
                ml - 5.0
            );
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">1e{d}</text>",
                ml - 8.0,
                y + 4.0
            );
        }
        d += step;
    }
    // x ticks
    for k in 0..=5 {
        let t = t_min + (t_max - t_min) * k as f64 / 5.0;
        let x = x_of(t);
        let _ = writeln!(
            svg,
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>",
            h - mb,
            h - mb + 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{t:.3}</text>",
            h - mb + 18.0
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">t</text>",
        ml + pw / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">relative error</text>",
        mt + ph / 2.0,
        mt + ph / 2.0
    );

    for (idx, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            continue;
        }
        let color = PALETTE[idx % PALETTE.len()];
        let dash = if s.dashed { " stroke-dasharray=\"6,4\"" } else { "" };
        let mut pts = String::new();
        for &(t, e) in &s.points {
            let _ = write!(pts, "{:.3},{:.3} ", x_of(t), y_of(e.max(floor).log10()));
        }
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash} points=\"{}\"/>",
            pts.trim_end()
        );
        let ly = mt + 16.0 + 16.0 * idx as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>",
            w - mr - 150.0,
            w - mr - 120.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
            w - mr - 114.0,
            ly + 4.0,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// 64-bit FNV-1a digest as lowercase hex; used to fingerprint config files.
pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

/// What a CLI command produced: written alongside the outputs.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    pub config_digest: String,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
    pub versions: String,
}

impl RunManifest {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        let _ = writeln!(out, "config_digest: {}", self.config_digest);
        for o in &self.outputs {
            let _ = writeln!(out, "output: {o}");
        }
        let _ = writeln!(out, "wall_time: {:.3}", self.wall_time_s);
        let _ = writeln!(out, "versions: {}", self.versions);
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::SweepRow;
    use crate::integrator::Termination;

    fn toy_trajectory() -> Trajectory<f64> {
        Trajectory {
            times: vec![0.0, 0.5, 1.0],
            states: vec![vec![2.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.0]],
            field_norms: vec![2.0, 1.0, 0.5],
            sigma_values: vec![1.0, 1.0, 1.0],
            terminated_by: Termination::TMax,
        }
    }

    #[test]
    fn trajectory_csv_columns_and_values() {
        let csv = trajectory_csv(&toy_trajectory(), &[0.0, 0.0]).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,err_rel,field_norm,sigma,V_surrogate");
        let first: Vec<f64> =
            lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(first, vec![0.0, 2.0, 2.0, 1.0, 4.0]);
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn trajectory_csv_relative_to_equilibrium_norm() {
        // ‖z*‖ = 5 > 1, so err_rel is scaled by 5
        let csv = trajectory_csv(&toy_trajectory(), &[0.0, 5.0]).unwrap();
        let row1: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        let err: f64 = row1[1].parse().unwrap();
        let expected = (2.0f64 * 2.0 + 25.0).sqrt() / 5.0;
        assert!((err - expected).abs() <= 1e-12);
    }

    #[test]
    fn sweep_csv_handles_missing_values() {
        let res = SweepResult {
            rows: vec![
                SweepRow {
                    magnitude: 1.0,
                    settling_time: Some(2.0),
                    thm_bound: Some(4.0),
                    final_err_rel: 1e-10,
                    terminated_by: "settle_event".into(),
                },
                SweepRow {
                    magnitude: 10.0,
                    settling_time: None,
                    thm_bound: None,
                    final_err_rel: 0.5,
                    terminated_by: "t_max".into(),
                },
            ],
            direction: vec![1.0],
            trajectories: vec![],
        };
        let csv = sweep_csv(&res).unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "magnitude,settling_time,thm_bound,final_err_rel,terminated_by"
        );
        let second = lines.nth(1).unwrap();
        let fields: Vec<&str> = second.split(',').collect();
        assert_eq!(fields.len(), 5);
        assert!(fields[1].is_empty() && fields[2].is_empty());
        assert_eq!(fields[4], "t_max");
    }

    #[test]
    fn non_finite_values_are_defects() {
        let mut traj = toy_trajectory();
        traj.field_norms[1] = f64::NAN;
        assert!(trajectory_csv(&traj, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn svg_plot_renders_polylines() {
        let series = vec![
            PlotSeries {
                label: "a".into(),
                points: vec![(0.0, 1.0), (1.0, 0.1), (2.0, 0.01)],
                dashed: false,
            },
            PlotSeries {
                label: "b".into(),
                points: vec![(0.0, 1.0), (1.0, 1e-6)],
                dashed: true,
            },
        ];
        let svg = error_plot_svg("demo", &series).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("stroke-dasharray"));
        assert!(error_plot_svg("empty", &[]).is_err());
    }

    #[test]
    fn digest_is_stable_and_input_sensitive() {
        // reference value computed by the standard FNV-1a test vector
        assert_eq!(fnv1a_hex(b""), "cbf29ce484222325");
        assert_eq!(fnv1a_hex(b"a"), fnv1a_hex(b"a"));
        assert_ne!(fnv1a_hex(b"a"), fnv1a_hex(b"b"));
    }

    #[test]
    fn manifest_renders_key_value_lines() {
        let m = RunManifest {
            command: "run".into(),
            config_digest: "deadbeef".into(),
            outputs: vec!["trajectory_0.csv".into()],
            wall_time_s: 1.25,
            versions: "ftflow 0.1.0".into(),
        };
        let text = m.render();
        assert!(text.contains("command: run"));
        assert!(text.contains("config_digest: deadbeef"));
        assert!(text.contains("output: trajectory_0.csv"));
        assert!(text.contains("wall_time: 1.250"));
    }
}
