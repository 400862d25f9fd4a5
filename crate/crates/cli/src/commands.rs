use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use velfree_core::control::{check_gains, ControllerKind, GainCheckReport};
use velfree_core::dynamics::properties::property_suite;
use velfree_core::dynamics::{model_constants, Manipulator, ModelConstants, ModelKind, RobotModel};
use velfree_core::sampling;
use velfree_core::signal::{dirty_diff_gain, measure_filter_response};
use velfree_core::sim::{response_metrics, run_scenario, Scenario, SimResult, SimStatus};

use crate::config::LoadedConfig;
use crate::error::{CliError, CliResult, EXIT_CONFIG, EXIT_DIVERGED, EXIT_OK};
use crate::output::{
    error_svg, gaincheck_text, output_dir, status_label, summary_text, timeseries_csv, write_atomic,
};

/// What a finished `run` produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub result: SimResult,
    pub summary: String,
    pub gaincheck: String,
}

impl RunOutcome {
    pub fn exit_code(&self) -> u8 {
        match self.result.status {
            SimStatus::Completed => EXIT_OK,
            SimStatus::Diverged { .. } => EXIT_DIVERGED,
        }
    }
}

fn gain_report(cfg: &LoadedConfig, scenario: &Scenario, run: Option<&SimResult>) -> CliResult<(GainCheckReport, ModelConstants)> {
    let constants = model_constants(&scenario.plant, &cfg.sampling_grid())?;
    let mut inputs = cfg.check_inputs(&scenario.reference)?;
    let mut sampled_k_q = None;
    if inputs.k_q.is_none() && scenario.law.kind == ControllerKind::R1 {
        if let Some(r) = run {
            let sup = (0..r.len())
                .map(|k| r.dq_at(k).iter().map(|v| v * v).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            inputs.k_q = Some(sup);
            sampled_k_q = Some(sup);
        }
    }
    let mut report = check_gains(scenario.law.kind, &scenario.law.gains, &constants, &inputs)?;
    if let Some(k) = sampled_k_q {
        report.notes.push(format!("k_q = {k:.6e} taken as sup ||qdot|| along this run"));
    }
    Ok((report, constants))
}

pub fn run(config: &Path, out: Option<&Path>, plot: bool) -> CliResult<RunOutcome> {
    let cfg = LoadedConfig::load(config)?;
    let scenario = cfg.scenario()?;
    let dir = output_dir(out, config);
    let result = run_scenario(&scenario)?;
    let metrics = response_metrics(&result).ok();
    let model = scenario.plant.kind().id();
    let summary = summary_text(scenario.law.kind.id(), model, &result, metrics.as_ref());
    let gaincheck = match gain_report(&cfg, &scenario, Some(&result)) {
        Ok((report, constants)) => gaincheck_text(&report, &constants, model),
        Err(e) => format!("gain check unavailable: {e}\n"),
    };
    let emit = &cfg.file.output;
    if emit.csv {
        write_atomic(&dir.join("timeseries.csv"), &timeseries_csv(&result)?)?;
    }
    if emit.summary {
        write_atomic(&dir.join("summary.txt"), summary.as_bytes())?;
    }
    write_atomic(&dir.join("gaincheck.txt"), gaincheck.as_bytes())?;
    if plot || emit.plot {
        write_atomic(&dir.join("error.svg"), error_svg(&result).as_bytes())?;
    }
    Ok(RunOutcome { dir, result, summary, gaincheck })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub e_tau: Option<f64>,
    pub overshoot: Option<f64>,
    pub settling: Option<f64>,
    pub status: String,
}

fn sweep_one(cfg: &LoadedConfig, param: &str, value: f64) -> CliResult<SweepRow> {
    let scenario = match cfg.with_gain(param, value)?.scenario() {
        Ok(s) => s,
        Err(e) => {
            return Ok(SweepRow {
                value,
                e_tau: None,
                overshoot: None,
                settling: None,
                status: format!("invalid: {e}"),
            })
        }
    };
    let result = run_scenario(&scenario)?;
    let metrics = response_metrics(&result).ok();
    Ok(SweepRow {
        value,
        e_tau: metrics.as_ref().map(|m| m.e_tau),
        overshoot: metrics.as_ref().map(|m| m.max_overshoot()),
        settling: metrics.as_ref().map(|m| m.max_settling()),
        status: status_label(&result.status),
    })
}

/// Runs one scenario per value in parallel; rows come back in input order.
pub fn sweep_rows(cfg: &LoadedConfig, param: &str, values: &[f64]) -> CliResult<Vec<SweepRow>> {
    cfg.with_gain(param, values.first().copied().unwrap_or(0.0))?;
    values.par_iter().map(|&v| sweep_one(cfg, param, v)).collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:e}")).unwrap_or_default()
}

pub fn sweep_csv(rows: &[SweepRow]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
    w.write_record(["value", "E_tau", "overshoot", "settling", "status"]).map_err(err)?;
    for r in rows {
        w.write_record([format!("{:e}", r.value), opt(r.e_tau), opt(r.overshoot), opt(r.settling), r.status.clone()])
            .map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))
}

pub fn sweep_table(kind: &str, param: &str, rows: &[SweepRow]) -> String {
    let fmt = |v: Option<f64>, prec: usize| v.map(|v| format!("{v:.prec$}")).unwrap_or_else(|| "-".into());
    let mut s = String::new();
    let _ = writeln!(s, "{kind}: sweep over {param}");
    let _ = writeln!(s, "{:>12} | {:>14} | {:>12} | {:>12} | status", param, "E_tau", "overshoot %", "settling s");
    let _ = writeln!(s, "{}", "-".repeat(72));
    for r in rows {
        let _ = writeln!(
            s,
            "{:>12} | {:>14} | {:>12} | {:>12} | {}",
            format!("{}", r.value),
            r.e_tau.map(|e| format!("{e:.6e}")).unwrap_or_else(|| "-".into()),
            fmt(r.overshoot, 2),
            fmt(r.settling, 3),
            r.status
        );
    }
    s
}

pub fn sweep(config: &Path, param: &str, values: &[f64], out: Option<&Path>) -> CliResult<(PathBuf, Vec<SweepRow>, String)> {
    if values.is_empty() {
        return Err(CliError::Usage("--values needs at least one number".into()));
    }
    let cfg = LoadedConfig::load(config)?;
    cfg.scenario()?;
    let rows = sweep_rows(&cfg, param, values)?;
    let table = sweep_table(&cfg.file.controller.kind, param, &rows);
    let dir = output_dir(out, config);
    write_atomic(&dir.join("sweep.csv"), &sweep_csv(&rows)?)?;
    write_atomic(&dir.join("sweep.txt"), table.as_bytes())?;
    Ok((dir, rows, table))
}

pub fn check(config: &Path) -> CliResult<(GainCheckReport, String)> {
    let cfg = LoadedConfig::load(config)?;
    let scenario = cfg.scenario()?;
    let (report, constants) = gain_report(&cfg, &scenario, None)?;
    let text = gaincheck_text(&report, &constants, scenario.plant.kind().id());
    Ok((report, text))
}

/// One line of the validation report.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationLine {
    pub name: String,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub const VALIDATE_V_MAX: f64 = 5.0;
pub const FILTER_TOLERANCE: f64 = 0.01;
pub const ORACLE_TOLERANCE: f64 = 1e-10;

/// Worst relative error of the measured filter gain over `points`
/// log-spaced frequencies in `[0.1, 1/(10 dt)]`.
pub fn filter_response_residual(b: f64, l: f64, dt: f64, points: usize) -> CliResult<f64> {
    let (lo, hi) = (0.1f64.ln(), (1.0 / (10.0 * dt)).ln());
    let mut worst: f64 = 0.0;
    for k in 0..points {
        let w = (lo + (hi - lo) * k as f64 / (points - 1).max(1) as f64).exp();
        let (gain, _) = measure_filter_response(b, l, w, dt)?;
        let expected = dirty_diff_gain(b, l, w);
        worst = worst.max((gain - expected).abs() / expected);
    }
    Ok(worst)
}

pub fn validate(model_id: &str, samples: usize, seed: u64) -> CliResult<(Vec<ValidationLine>, String)> {
    let kind = ModelKind::from_id(model_id)
        .ok_or_else(|| CliError::Usage(format!("unknown model '{model_id}' (point_mass, planar2, phantom3)")))?;
    let model = Manipulator::default_for(kind);
    let constants = model_constants(&model, &Default::default())?;
    let mut lines: Vec<ValidationLine> = property_suite(&model, &constants, samples, VALIDATE_V_MAX, seed)
        .into_iter()
        .map(|c| ValidationLine { name: c.name.to_string(), worst: c.worst, tolerance: c.tolerance, passed: c.passed() })
        .collect();
    if let Manipulator::Planar2(params, _) = &model {
        let mut rng = sampling::rng(seed ^ 0x9e37_79b9);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let q = sampling::uniform_vec(&mut rng, 2, -std::f64::consts::PI, std::f64::consts::PI);
            let (h, g) = params.closed_form(&q);
            worst = worst.max((model.mass_matrix(&q) - h).amax()).max((model.gravity_torque(&q) - g).amax());
        }
        lines.push(ValidationLine {
            name: "H, G match closed-form two-link oracle".into(),
            worst,
            tolerance: ORACLE_TOLERANCE,
            passed: worst <= ORACLE_TOLERANCE,
        });
    }
    let filter = filter_response_residual(5.0, 100.0, 1e-3, 20)?;
    lines.push(ValidationLine {
        name: "dirty filter gain b w / sqrt(l^2 + w^2)".into(),
        worst: filter,
        tolerance: FILTER_TOLERANCE,
        passed: filter <= FILTER_TOLERANCE,
    });

    let mut s = String::new();
    let _ = writeln!(s, "model {}  samples {samples}  seed {seed}", kind.id());
    let _ = writeln!(
        s,
        "constants  lambda_min_H = {:.6e}  lambda_max_H = {:.6e}  k_c = {:.6e}  k_g = {:.6e}",
        constants.lambda_min_h, constants.lambda_max_h, constants.k_c, constants.k_g
    );
    let width = lines.iter().map(|l| l.name.len()).max().unwrap_or(0);
    for l in &lines {
        let _ = writeln!(
            s,
            "{} {:<width$}  worst {:.6e}  tol {:.1e}",
            if l.passed { "PASS" } else { "FAIL" },
            l.name,
            l.worst,
            l.tolerance
        );
    }
    Ok((lines, s))
}

pub fn report_error(e: &CliError) -> u8 {
    eprintln!("error: {e}");
    e.exit_code()
}

pub fn exit_for_validation(lines: &[ValidationLine]) -> u8 {
    if lines.iter().all(|l| l.passed) {
        EXIT_OK
    } else {
        EXIT_CONFIG
    }
}
