//! Scenario files.
//!
//! ```toml
//! [model]
//! kind = "phantom3"            # point_mass | planar2 | phantom3
//! params = { m_a = 0.0202 }    # absolute overrides of named parameters
//!
//! [controller]
//! kind = "R2"                  # R1 R2 R3 T1 T2 T3
//! alpha_p = 10.0
//! alpha_d = 10.0
//! alpha_l = 100.0
//! b = 5.0
//!
//! [reference]
//! kind = "setpoint"            # setpoint | sinusoid
//! q = [0.785, 1.571, -2.094]   # optional; defaults to the benchmark motion
//!
//! [sim]
//! dt = 1e-3
//! horizon = 30.0
//! q0 = [0.0, 0.0, 0.0]
//!
//! [[disturbance]]
//! time = 5.0
//! param = "m_a"
//! delta = 1.0
//! ```
//!
//! Optional sections: `[init]` (controller initial states), `[check]`
//! (constants for gain checks) and `[output]` (artifact switches).

use std::path::{Path, PathBuf};

use serde::Deserialize;
use velfree_core::control::{
    CheckInputs, ControlLaw, ControllerKind, ControllerState, Gains, InitialConditions, ScalarGains,
};
use velfree_core::dynamics::{JointVec, Manipulator, ModelKind, RobotModel, SamplingGrid};
use velfree_core::reference::{
    benchmark_setpoint, benchmark_sinusoid, ref_bounds, Reference, SineComponent, MIN_BOUND_SAMPLES,
};
use velfree_core::sim::{Disturbance, Scenario, DEFAULT_DIVERGENCE_THRESHOLD, DEFAULT_DT};

use crate::error::{CliError, CliResult};

pub const DEFAULT_BETA: f64 = 0.5;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub model: ModelSection,
    pub controller: ControllerSection,
    #[serde(default)]
    pub reference: ReferenceSection,
    pub sim: SimSection,
    #[serde(default)]
    pub init: InitSection,
    #[serde(default, rename = "disturbance")]
    pub disturbances: Vec<DisturbanceSection>,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: String,
    #[serde(default)]
    pub params: toml::Table,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    pub kind: String,
    pub alpha_p: Option<f64>,
    pub alpha_d: Option<f64>,
    pub alpha_i: Option<f64>,
    pub alpha_l: Option<f64>,
    pub b: Option<f64>,
    pub k_d_obs: Option<f64>,
    pub alpha_lp: Option<f64>,
    pub alpha_ld: Option<f64>,
}

/// Scalar gain keys of `[controller]`, in schema order.
pub const GAIN_KEYS: [&str; 8] = [
    "alpha_p", "alpha_d", "alpha_i", "alpha_l", "b", "k_d_obs", "alpha_lp", "alpha_ld",
];

impl ControllerSection {
    pub fn scalars(&self) -> ScalarGains {
        ScalarGains {
            alpha_p: self.alpha_p,
            alpha_d: self.alpha_d,
            alpha_i: self.alpha_i,
            alpha_l: self.alpha_l,
            b: self.b,
            k_d_obs: self.k_d_obs,
            alpha_lp: self.alpha_lp,
            alpha_ld: self.alpha_ld,
        }
    }

    pub fn gain_mut(&mut self, key: &str) -> Option<&mut Option<f64>> {
        Some(match key {
            "alpha_p" => &mut self.alpha_p,
            "alpha_d" => &mut self.alpha_d,
            "alpha_i" => &mut self.alpha_i,
            "alpha_l" => &mut self.alpha_l,
            "b" => &mut self.b,
            "k_d_obs" => &mut self.k_d_obs,
            "alpha_lp" => &mut self.alpha_lp,
            "alpha_ld" => &mut self.alpha_ld,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSection {
    pub kind: Option<String>,
    pub q: Option<Vec<f64>>,
    pub components: Option<Vec<SineComponent>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub horizon: f64,
    pub q0: Option<Vec<f64>>,
    pub v0: Option<Vec<f64>>,
    #[serde(default = "default_threshold")]
    pub divergence_threshold: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_threshold() -> f64 {
    DEFAULT_DIVERGENCE_THRESHOLD
}

fn default_record_every() -> usize {
    1
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub q_hat: Option<Vec<f64>>,
    pub v_hat: Option<Vec<f64>>,
    pub nu: Option<Vec<f64>>,
    pub e_hat: Option<Vec<f64>>,
    pub w: Option<Vec<f64>>,
    pub z: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSection {
    pub time: f64,
    pub param: String,
    pub delta: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    pub k_q: Option<f64>,
    pub k_delta: Option<f64>,
    pub beta: Option<f64>,
    pub grid_per_axis: Option<usize>,
    pub grid_random: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub summary: bool,
    #[serde(default)]
    pub plot: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { csv: true, summary: true, plot: false }
    }
}

/// A parsed file together with its source text, kept for error locations.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub path: PathBuf,
    pub text: String,
    pub file: ScenarioFile,
}

/// 1-based line of `key` inside `[section]` (or `[[section]]`).
pub fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            continue;
        }
        let Some(rest) = line.strip_prefix(key) else { continue };
        if current == section && rest.trim_start().starts_with('=') {
            return Some(i + 1);
        }
    }
    None
}

impl LoadedConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(path, text)
    }

    pub fn parse(path: &Path, text: String) -> CliResult<Self> {
        let file: ScenarioFile = toml::from_str(&text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            let message = e.message().trim().to_string();
            CliError::Config {
                path: path.to_path_buf(),
                message: match line {
                    Some(l) => format!("line {l}: {message}"),
                    None => message,
                },
            }
        })?;
        Ok(Self { path: path.to_path_buf(), text, file })
    }

    /// Config error pointing at `section.key`.
    pub fn error_at(&self, section: &str, key: &str, message: impl std::fmt::Display) -> CliError {
        let at = match locate(&self.text, section, key) {
            Some(line) => format!("line {line}: "),
            None => String::new(),
        };
        CliError::Config {
            path: self.path.clone(),
            message: format!("{at}{section}.{key}: {message}"),
        }
    }

    fn error(&self, message: impl std::fmt::Display) -> CliError {
        CliError::Config { path: self.path.clone(), message: message.to_string() }
    }

    pub fn model(&self) -> CliResult<Manipulator> {
        let section = &self.file.model;
        let kind = ModelKind::from_id(&section.kind).ok_or_else(|| {
            self.error_at("model", "kind", format!("unknown model '{}'", section.kind))
        })?;
        let mut model = Manipulator::default_for(kind);
        for (name, value) in &section.params {
            let value = value
                .as_float()
                .or_else(|| value.as_integer().map(|i| i as f64))
                .ok_or_else(|| self.error_at("model", "params", format!("'{name}' must be a number")))?;
            let current = model.param(name).ok_or_else(|| {
                self.error_at(
                    "model",
                    "params",
                    format!("unknown parameter '{name}' (known: {})", model.param_names().join(", ")),
                )
            })?;
            model = model
                .with_param_delta(name, value - current)
                .map_err(|e| self.error_at("model", "params", e))?;
        }
        Ok(model)
    }

    pub fn controller_kind(&self) -> CliResult<ControllerKind> {
        let id = &self.file.controller.kind;
        ControllerKind::from_id(id)
            .ok_or_else(|| self.error_at("controller", "kind", format!("unknown controller '{id}'")))
    }

    pub fn reference(&self, dof: usize) -> CliResult<Reference> {
        let section = &self.file.reference;
        let kind = section.kind.as_deref().unwrap_or("setpoint");
        let reference = match kind {
            "setpoint" => match &section.q {
                Some(q) => Reference::SetPoint(JointVec::from_column_slice(q)),
                None => benchmark_setpoint(),
            },
            "sinusoid" => match &section.components {
                Some(c) => Reference::Sinusoid(c.clone()),
                None => benchmark_sinusoid(),
            },
            other => {
                return Err(self.error_at("reference", "kind", format!("unknown reference '{other}'")))
            }
        };
        if reference.dof() != dof {
            let key = if kind == "setpoint" { "q" } else { "components" };
            return Err(self.error_at(
                "reference",
                key,
                format!("has {} joints, model has {dof}", reference.dof()),
            ));
        }
        Ok(reference)
    }

    fn joint_vec(&self, section: &str, key: &str, v: &Option<Vec<f64>>, n: usize) -> CliResult<Option<JointVec>> {
        match v {
            None => Ok(None),
            Some(v) if v.len() == n => Ok(Some(JointVec::from_column_slice(v))),
            Some(v) => Err(self.error_at(section, key, format!("has {} entries, model has {n} joints", v.len()))),
        }
    }

    fn check_sim(&self) -> CliResult<()> {
        let s = &self.file.sim;
        if !(s.dt.is_finite() && s.dt > 0.0) {
            return Err(self.error_at("sim", "dt", format!("must be positive, got {}", s.dt)));
        }
        if !(s.horizon.is_finite() && s.horizon >= s.dt) {
            return Err(self.error_at("sim", "horizon", format!("must be at least dt, got {}", s.horizon)));
        }
        if !(s.divergence_threshold > 0.0) {
            return Err(self.error_at("sim", "divergence_threshold", "must be positive"));
        }
        if s.record_every == 0 {
            return Err(self.error_at("sim", "record_every", "must be at least 1"));
        }
        for (i, d) in self.file.disturbances.iter().enumerate() {
            if !(d.time >= 0.0 && d.time <= s.horizon) {
                return Err(self.error(format!(
                    "disturbance #{}: time {} outside [0, {}]",
                    i + 1,
                    d.time,
                    s.horizon
                )));
            }
        }
        Ok(())
    }

    /// Builds the scenario and checks that its initial state and torque are
    /// computable, so no simulation starts from an invalid file.
    pub fn scenario(&self) -> CliResult<Scenario> {
        self.check_sim()?;
        let plant = self.model()?;
        let n = plant.dof();
        let kind = self.controller_kind()?;
        let gains = Gains::from_scalars(kind, n, &self.file.controller.scalars());
        let reference = self.reference(n)?;
        let sim = &self.file.sim;
        let q0 = self
            .joint_vec("sim", "q0", &sim.q0, n)?
            .unwrap_or_else(|| JointVec::zeros(n));
        let v0 = self
            .joint_vec("sim", "v0", &sim.v0, n)?
            .unwrap_or_else(|| JointVec::zeros(n));
        let i = &self.file.init;
        let init = InitialConditions {
            q_hat: self.joint_vec("init", "q_hat", &i.q_hat, n)?,
            v_hat: self.joint_vec("init", "v_hat", &i.v_hat, n)?,
            nu: self.joint_vec("init", "nu", &i.nu, n)?,
            e_hat: self.joint_vec("init", "e_hat", &i.e_hat, n)?,
            w: self.joint_vec("init", "w", &i.w, n)?,
            z: self.joint_vec("init", "z", &i.z, n)?,
        };
        let disturbances = self
            .file
            .disturbances
            .iter()
            .map(|d| Disturbance { time: d.time, param: d.param.clone(), delta: d.delta })
            .collect();
        let scenario = Scenario {
            plant,
            nominal: None,
            law: ControlLaw::new(kind, gains),
            init,
            reference,
            q0,
            v0,
            disturbances,
            dt: sim.dt,
            horizon: sim.horizon,
            divergence_threshold: sim.divergence_threshold,
            record_every: sim.record_every,
        };
        scenario.validate().map_err(|e| self.error(e))?;
        let sample0 = scenario.reference.sample(0.0);
        let state = ControllerState::initial(kind, &scenario.law.gains, &scenario.q0, &sample0, &scenario.init)
            .map_err(|e| self.error_at("controller", "kind", e))?;
        scenario
            .law
            .torque(&scenario.q0, &sample0, &state, Some(&scenario.plant))
            .map_err(|e| self.error_at("controller", "kind", e))?;
        Ok(scenario)
    }

    pub fn sampling_grid(&self) -> SamplingGrid {
        let c = &self.file.check;
        let mut grid = SamplingGrid::default();
        if let Some(p) = c.grid_per_axis {
            grid.per_axis = p;
        }
        if let Some(r) = c.grid_random {
            grid.random = r;
        }
        if let Some(s) = c.seed {
            grid.seed = s;
        }
        grid
    }

    /// Check inputs: explicit `[check]` values, else the reference envelopes and `β = 0.5`.
    pub fn check_inputs(&self, reference: &Reference) -> CliResult<CheckInputs> {
        let c = &self.file.check;
        let kind = self.controller_kind()?;
        let bounds = ref_bounds(reference, MIN_BOUND_SAMPLES).map_err(|e| self.error(e))?;
        let from_reference = kind.is_tracking();
        Ok(CheckInputs {
            k_q: c.k_q.or(from_reference.then_some(bounds.k_q_envelope)),
            k_delta: c.k_delta.or(Some(bounds.k_delta_envelope)),
            beta: c.beta.or(Some(DEFAULT_BETA)),
        })
    }

    /// Copy with `[controller].key` set to `value`.
    pub fn with_gain(&self, key: &str, value: f64) -> CliResult<Self> {
        let mut next = self.clone();
        let slot = next.file.controller.gain_mut(key).ok_or_else(|| {
            CliError::Usage(format!(
                "--param '{key}' is not a controller gain (expected one of {})",
                GAIN_KEYS.join(", ")
            ))
        })?;
        *slot = Some(value);
        Ok(next)
    }
}
