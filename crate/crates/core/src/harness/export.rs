use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::rmse;
use super::simulate::{ns_to_s, TimeSeriesLog};
use super::HarnessError;
use crate::ssm::SsmOutput;
use crate::TimestampNs;

pub const TICKS_HEADER: [&str; 6] = ["t_ns", "min_distance_m", "S_safety_m", "rho", "V_robot_mps", "valid"];
pub const TRUTH_HEADER: [&str; 2] = ["t_ns", "truth_distance_m"];

/// Value written in the velocity column of invalid ticks.
pub const INVALID_VELOCITY: f64 = -1.0;

/// One line of `ticks.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickRow {
    pub t_ns: TimestampNs,
    pub min_distance_m: Option<f64>,
    pub s_safety_m: f64,
    pub rho: f64,
    pub v_robot_mps: f64,
    pub valid: bool,
}

impl From<&SsmOutput> for TickRow {
    fn from(o: &SsmOutput) -> Self {
        Self {
            t_ns: o.timestamp_ns,
            min_distance_m: o.min_distance,
            s_safety_m: o.s_safety,
            rho: o.rho,
            v_robot_mps: o.v_robot.unwrap_or(INVALID_VELOCITY),
            valid: o.valid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub ticks: usize,
    pub valid_ticks: usize,
    pub invalid_ticks: usize,
    /// Measured vs true minimum distance over ticks that had a measurement.
    pub rmse_m: Option<f64>,
    pub min_rho: f64,
    pub max_rho: f64,
    /// Valid ticks whose minimum distance was below the safety distance.
    pub violation_count: usize,
    pub dropped_sync: usize,
    pub perception_misses: usize,
}

pub fn summarize(log: &TimeSeriesLog) -> Summary {
    let (measured, truth): (Vec<f64>, Vec<f64>) = log
        .outputs
        .iter()
        .zip(&log.truth_m)
        .filter_map(|(o, t)| o.min_distance.map(|d| (d, *t)))
        .unzip();
    let rho = log.outputs.iter().map(|o| o.rho);
    let valid = log.outputs.iter().filter(|o| o.valid).count();
    Summary {
        ticks: log.len(),
        valid_ticks: valid,
        invalid_ticks: log.len() - valid,
        rmse_m: rmse(&measured, &truth).ok(),
        min_rho: rho.clone().fold(f64::INFINITY, f64::min),
        max_rho: rho.fold(f64::NEG_INFINITY, f64::max),
        violation_count: log
            .outputs
            .iter()
            .filter(|o| o.valid && o.min_distance.is_some_and(|d| d < o.s_safety))
            .count(),
        dropped_sync: log.dropped_sync,
        perception_misses: log.perception_misses,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    std::fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::Parse(format!("{}: {e}", path.display()))
}

pub fn write_ticks_csv(path: &Path, rows: &[TickRow]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(TICKS_HEADER).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record([
            r.t_ns.to_string(),
            r.min_distance_m.map(|d| d.to_string()).unwrap_or_default(),
            r.s_safety_m.to_string(),
            r.rho.to_string(),
            r.v_robot_mps.to_string(),
            u8::from(r.valid).to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_ticks_csv(path: &Path) -> Result<Vec<TickRow>, HarnessError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers.iter().ne(TICKS_HEADER) {
        return Err(HarnessError::Parse(format!("{}: unexpected header {headers:?}", path.display())));
    }
    let num = |s: &str, line: usize| -> Result<f64, HarnessError> {
        s.parse().map_err(|_| HarnessError::Parse(format!("{}:{line}: bad number {s:?}", path.display())))
    };
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = i + 2;
        rows.push(TickRow {
            t_ns: rec[0]
                .parse()
                .map_err(|_| HarnessError::Parse(format!("{}:{line}: bad timestamp", path.display())))?,
            min_distance_m: if rec[1].is_empty() { None } else { Some(num(&rec[1], line)?) },
            s_safety_m: num(&rec[2], line)?,
            rho: num(&rec[3], line)?,
            v_robot_mps: num(&rec[4], line)?,
            valid: &rec[5] == "1",
        });
    }
    Ok(rows)
}

pub fn write_truth_csv(path: &Path, log: &TimeSeriesLog) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(TRUTH_HEADER).map_err(|e| csv_err(path, e))?;
    for (o, t) in log.outputs.iter().zip(&log.truth_m) {
        w.write_record([o.timestamp_ns.to_string(), t.to_string()]).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// `(t_ns, value)` pairs of a named column; rows with an empty value are
/// skipped.
pub fn read_column(path: &Path, column: &str) -> Result<Vec<(TimestampNs, f64)>, HarnessError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::Parse(format!("{}: no column {name:?}", path.display())))
    };
    let (ti, vi) = (find("t_ns")?, find(column)?);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec[vi].is_empty() {
            continue;
        }
        let bad = || HarnessError::Parse(format!("{}:{}: bad value", path.display(), i + 2));
        out.push((rec[ti].parse().map_err(|_| bad())?, rec[vi].parse().map_err(|_| bad())?));
    }
    Ok(out)
}

/// Pair two timestamped series on equal timestamps.
pub fn join_on_time(a: &[(TimestampNs, f64)], b: &[(TimestampNs, f64)]) -> (Vec<f64>, Vec<f64>) {
    let index: std::collections::HashMap<TimestampNs, f64> = b.iter().copied().collect();
    a.iter()
        .filter_map(|(t, v)| index.get(t).map(|w| (*v, *w)))
        .unzip()
}

struct Panel<'a> {
    title: &'a str,
    unit: &'a str,
    series: Vec<(&'a str, &'a str, Vec<(f64, f64)>)>,
}

fn panel_svg(out: &mut String, panel: &Panel, top: f64, width: f64, height: f64, t_max: f64) {
    let (left, right) = (70.0, 20.0);
    let plot_w = width - left - right;
    let plot_h = height - 40.0;
    let values = panel.series.iter().flat_map(|s| s.2.iter().map(|p| p.1)).filter(|v| v.is_finite());
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        lo -= 0.5;
        hi += 0.5;
    }
    let x = |t: f64| left + plot_w * t / t_max.max(1e-9);
    let y = |v: f64| top + 20.0 + plot_h * (1.0 - (v - lo) / (hi - lo));
    let _ = writeln!(
        out,
        r##"<rect x="{left}" y="{}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#999"/>"##,
        top + 20.0
    );
    let _ = writeln!(out, r#"<text x="{left}" y="{}" font-size="13">{} [{}]</text>"#, top + 14.0, panel.title, panel.unit);
    let _ = writeln!(out, r#"<text x="5" y="{}" font-size="10">{hi:.3}</text>"#, top + 28.0);
    let _ = writeln!(out, r#"<text x="5" y="{}" font-size="10">{lo:.3}</text>"#, top + 20.0 + plot_h);
    let mut legend_x = left + plot_w - 10.0;
    for (name, color, pts) in panel.series.iter().rev() {
        let mut d = String::new();
        let mut pen_down = false;
        for &(t, v) in pts {
            if !v.is_finite() {
                pen_down = false;
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, x(t), y(v.clamp(lo, hi)));
            pen_down = true;
        }
        let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#, d.trim_end());
        legend_x -= 8.0 * name.len() as f64 + 20.0;
        let _ = writeln!(
            out,
            r#"<text x="{legend_x:.1}" y="{}" font-size="11" fill="{color}">{name}</text>"#,
            top + 14.0
        );
    }
}

/// Stacked time-series plot: distances, scaling factor and robot speed.
pub fn plot_svg(log: &TimeSeriesLog) -> String {
    let t0 = log.outputs.first().map_or(0, |o| o.timestamp_ns);
    let t = |o: &SsmOutput| ns_to_s(o.timestamp_ns - t0);
    let nan = f64::NAN;
    let panels = [
        Panel {
            title: "minimum distance",
            unit: "m",
            series: vec![
                ("measured", "#1f77b4", log.outputs.iter().map(|o| (t(o), o.min_distance.unwrap_or(nan))).collect()),
                ("S_safety", "#d62728", log.outputs.iter().map(|o| (t(o), o.s_safety)).collect()),
                ("truth", "#7f7f7f", log.outputs.iter().zip(&log.truth_m).map(|(o, d)| (t(o), *d)).collect()),
            ],
        },
        Panel {
            title: "speed scaling",
            unit: "-",
            series: vec![("rho", "#2ca02c", log.outputs.iter().map(|o| (t(o), o.rho)).collect())],
        },
        Panel {
            title: "directed robot velocity",
            unit: "m/s",
            series: vec![("V_robot", "#9467bd", log.outputs.iter().map(|o| (t(o), o.v_robot.unwrap_or(nan))).collect())],
        },
    ];
    let (width, panel_h) = (900.0, 180.0);
    let t_max = log.outputs.last().map_or(1.0, t);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{}" font-family="sans-serif">"#,
        panel_h * panels.len() as f64 + 30.0
    );
    for (i, p) in panels.iter().enumerate() {
        panel_svg(&mut out, p, i as f64 * panel_h, width, panel_h, t_max);
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12">time [s]</text>"#,
        width / 2.0,
        panel_h * panels.len() as f64 + 20.0
    );
    out.push_str("</svg>\n");
    out
}

/// Write `ticks.csv`, `truth.csv`, `summary.json` and `plot.svg` into `dir`.
pub fn export(log: &TimeSeriesLog, dir: &Path) -> Result<Summary, HarnessError> {
    if log.is_empty() {
        return Err(HarnessError::EmptySeries);
    }
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let rows: Vec<TickRow> = log.outputs.iter().map(TickRow::from).collect();
    write_ticks_csv(&dir.join("ticks.csv"), &rows)?;
    write_truth_csv(&dir.join("truth.csv"), log)?;
    let summary = summarize(log);
    let json = serde_json::to_string_pretty(&summary).expect("summary serialises");
    write_file(&dir.join("summary.json"), &(json + "\n"))?;
    write_file(&dir.join("plot.svg"), &plot_svg(log))?;
    Ok(summary)
}
