use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use velfree_core::control::GainCheckReport;
use velfree_core::dynamics::ModelConstants;
use velfree_core::sim::{ResponseMetrics, SimResult, SimStatus};

use crate::error::{CliError, CliResult};

pub const OUT_ENV: &str = "VELFREE_OUT";

/// Writes `contents` to a temporary file in the target directory, then renames it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// `--out`, else `$VELFREE_OUT/<config stem>`, else `out/<config stem>`.
pub fn output_dir(explicit: Option<&Path>, config: &Path) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    let root = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"));
    let stem = config.file_stem().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("run"));
    root.join(stem)
}

pub fn timeseries_header(result: &SimResult) -> Vec<String> {
    let n = result.dof;
    let mut header = vec!["t".to_string()];
    for prefix in ["q", "qd", "tau", "err"] {
        header.extend((1..=n).map(|i| format!("{prefix}{i}")));
    }
    header.extend(result.internal_labels.iter().cloned());
    header
}

pub fn timeseries_csv(result: &SimResult) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
    w.write_record(timeseries_header(result)).map_err(csv_err)?;
    for k in 0..result.len() {
        let mut row = vec![format!("{:e}", result.time[k])];
        for series in [result.q_at(k), result.q_d_at(k), result.tau_at(k), result.err_at(k), result.internals_at(k)] {
            row.extend(series.iter().map(|v| format!("{v:e}")));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))
}

pub fn status_label(status: &SimStatus) -> String {
    match status {
        SimStatus::Completed => "completed".to_string(),
        SimStatus::Diverged { time, .. } => format!("diverged@{time:.6}"),
    }
}

/// Flat `key = value` metrics file.
pub fn summary_text(
    controller: &str,
    model: &str,
    result: &SimResult,
    metrics: Option<&ResponseMetrics>,
) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("controller", controller.to_string());
    kv("model", model.to_string());
    match &result.status {
        SimStatus::Completed => kv("status", "completed".to_string()),
        SimStatus::Diverged { time, reason } => {
            kv("status", "diverged".to_string());
            kv("divergence_time", format!("{time:e}"));
            kv("divergence_reason", reason.clone());
        }
    }
    kv("samples", result.len().to_string());
    if let Some(&t) = result.time.last() {
        kv("t_end", format!("{t:e}"));
    }
    kv("E_tau", format!("{:e}", result.e_tau));
    kv("final_error_norm", format!("{:e}", result.final_error_norm()));
    for d in &result.disturbances {
        kv("disturbance", format!("{} += {} at t = {} (step {})", d.param, d.delta, d.time, d.step));
    }
    if let Some(m) = metrics {
        kv("max_overshoot_pct", format!("{:e}", m.max_overshoot()));
        kv("max_settling_time", format!("{:e}", m.max_settling()));
        kv("max_late_amplitude", format!("{:e}", m.max_late_amplitude()));
        for (i, j) in m.joints.iter().enumerate() {
            let i = i + 1;
            kv(&format!("overshoot_pct_{i}"), format!("{:e}", j.overshoot_pct));
            kv(&format!("settling_time_{i}"), format!("{:e}", j.settling_time));
            kv(&format!("steady_state_error_{i}"), format!("{:e}", j.steady_state_error));
            kv(&format!("late_amplitude_{i}"), format!("{:e}", j.late_amplitude));
        }
    }
    s
}

pub fn gaincheck_text(report: &GainCheckReport, constants: &ModelConstants, model: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "controller {}  model {model}", report.controller.id());
    let _ = writeln!(
        s,
        "constants  lambda_min_H = {:.6e}  lambda_max_H = {:.6e}  k_c = {:.6e}{}  k_g = {:.6e}",
        constants.lambda_min_h,
        constants.lambda_max_h,
        constants.k_c,
        if constants.k_c_closed_form { " (closed form)" } else { "" },
        constants.k_g,
    );
    let width = report.conditions.iter().map(|c| c.name.len()).max().unwrap_or(0).max(9);
    let _ = writeln!(s, "{:<width$}  {:>13}  {:>13}  status", "condition", "lhs", "rhs");
    for c in &report.conditions {
        let status = if c.satisfied { "satisfied" } else { "VIOLATED" };
        let _ = writeln!(s, "{:<width$}  {:>13.6e}  {:>13.6e}  {status}", c.name, c.lhs, c.rhs);
    }
    for note in &report.notes {
        let _ = writeln!(s, "note: {note}");
    }
    let verdict = if report.verdict {
        "all conditions satisfied"
    } else {
        "some conditions violated (sufficient conditions only; run may still converge)"
    };
    let _ = writeln!(s, "verdict: {verdict}");
    s
}

/// One polyline chart per error channel, stacked vertically.
pub fn error_svg(result: &SimResult) -> String {
    const W: f64 = 640.0;
    const H: f64 = 160.0;
    const PAD: f64 = 30.0;
    let n = result.dof;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{}" font-family="monospace" font-size="11">"#,
        H * n as f64
    );
    let t0 = result.time.first().copied().unwrap_or(0.0);
    let t1 = result.time.last().copied().unwrap_or(1.0).max(t0 + f64::EPSILON);
    for i in 0..n {
        let series: Vec<f64> = (0..result.len()).map(|k| result.err_at(k)[i]).collect();
        let lo = series.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
        let hi = series.iter().copied().fold(f64::NEG_INFINITY, f64::max).max(0.0);
        let span = (hi - lo).max(f64::EPSILON);
        let y0 = H * i as f64;
        let x = |t: f64| PAD + (W - 2.0 * PAD) * (t - t0) / (t1 - t0);
        let y = |v: f64| y0 + H - PAD - (H - 2.0 * PAD) * (v - lo) / span;
        let step = (result.len() / 2000).max(1);
        let points: Vec<String> = (0..result.len())
            .step_by(step)
            .map(|k| format!("{:.2},{:.2}", x(result.time[k]), y(series[k])))
            .collect();
        let _ = writeln!(
            s,
            r#"<line x1="{PAD}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray"/>"#,
            y(0.0),
            W - PAD,
            y(0.0)
        );
        let _ = writeln!(s, r#"<text x="{PAD}" y="{:.2}">err{} [{lo:.3e}, {hi:.3e}]</text>"#, y0 + 14.0, i + 1);
        let _ = writeln!(s, r#"<polyline fill="none" stroke="black" points="{}"/>"#, points.join(" "));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_whole_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("a.txt");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn explicit_output_dir_wins() {
        let p = output_dir(Some(Path::new("x/y")), Path::new("cfg/r2.toml"));
        assert_eq!(p, PathBuf::from("x/y"));
    }

    #[test]
    fn status_labels() {
        assert_eq!(status_label(&SimStatus::Completed), "completed");
        let d = SimStatus::Diverged { time: 0.25, reason: String::new() };
        assert_eq!(status_label(&d), "diverged@0.250000");
    }
}
