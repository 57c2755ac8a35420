//! Scenario files: flat TOML, overridden by `LAMSPEC_*` variables and then
//! by `--set key=value`.

use std::path::Path;

use lamspec_core::field::DEFAULT_SIGMAS;
use lamspec_core::model::DEFAULT_DENSITY;
use lamspec_core::{FieldState, FrequencyGrid, SystemParams};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

pub const ENV_PREFIX: &str = "LAMSPEC_";

/// Invalid or unreadable configuration. Maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn fail<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Coherent,
    Fock,
    Window,
    Separated,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Fast,
    Oracle,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub gamma1: f64,
    pub gamma2: f64,
    pub omega21: f64,
    /// Drive coupling magnitude. Mutually exclusive with `omega_rabi`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gbar: Option<f64>,
    /// Rabi frequency `|gbar| sqrt(n)` at the nominal photon number.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_rabi: Option<f64>,
    pub phi: f64,
    pub phi_g: f64,
    pub phi_ghat: f64,
    pub density: f64,
    pub interference: bool,
    pub state: StateKind,
    pub alpha: f64,
    pub phi_alpha: f64,
    pub sigmas: f64,
    pub n0: usize,
    pub width: usize,
    pub kappas: Vec<i64>,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_count: usize,
    pub dip_lo: f64,
    pub dip_hi: f64,
    pub solver: Solver,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub t_end: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "spectrum".into(),
            gamma1: 0.5,
            gamma2: 0.5,
            omega21: 1.0,
            gbar: None,
            omega_rabi: None,
            phi: 0.0,
            phi_g: 0.0,
            phi_ghat: 0.0,
            density: DEFAULT_DENSITY,
            interference: true,
            state: StateKind::Coherent,
            alpha: 20.0,
            phi_alpha: 0.0,
            sigmas: DEFAULT_SIGMAS,
            n0: 400,
            width: 1,
            kappas: vec![0, 2, 4],
            grid_lo: -40.0,
            grid_hi: 40.0,
            grid_count: 4001,
            dip_lo: 4.0,
            dip_hi: 5.5,
            solver: Solver::Fast,
            dt: None,
            t_end: 80.0,
        }
    }
}

/// Parses a raw override as a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn split_assignment(s: &str) -> Result<(String, Value), ConfigError> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), parse_value(v.trim()))),
        _ => fail(format!("override `{s}` is not of the form key=value")),
    }
}

impl Scenario {
    /// Layers file, environment and command-line overrides, in that order.
    pub fn load(
        file: Option<&Path>,
        env: impl IntoIterator<Item = (String, String)>,
        sets: &[String],
    ) -> Result<Self, ConfigError> {
        let mut table = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
                text.parse::<Table>()
                    .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?
            }
            None => Table::new(),
        };
        if let Some((key, _)) = table.iter().find(|(_, v)| v.is_table()) {
            return fail(format!(
                "section `{key}` not allowed, the config is a flat key list"
            ));
        }
        let mut env: Vec<_> = env
            .into_iter()
            .filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|k| (k.to_lowercase(), v)))
            .collect();
        env.sort();
        for (key, raw) in env {
            table.insert(key, parse_value(&raw));
        }
        for s in sets {
            let (key, value) = split_assignment(s)?;
            table.insert(key, value);
        }
        let scenario: Scenario = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError(e.message().to_string()))?;
        scenario.check()?;
        Ok(scenario)
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.gbar.is_some() && self.omega_rabi.is_some() {
            return fail("set either gbar or omega_rabi, not both");
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return fail(format!("name `{}` is not a plain file stem", self.name));
        }
        if !(self.dip_lo <= self.dip_hi) {
            return fail("dip_lo must not exceed dip_hi");
        }
        Ok(())
    }

    /// Photon number the Rabi frequency refers to.
    fn nominal_photons(&self) -> f64 {
        match self.state {
            StateKind::Coherent => self.alpha * self.alpha,
            StateKind::Classical => 1.0,
            _ => self.n0 as f64,
        }
    }

    pub fn gbar_mag(&self) -> f64 {
        match (self.gbar, self.omega_rabi) {
            (Some(g), _) => g,
            (None, Some(omega)) => omega / self.nominal_photons().sqrt(),
            (None, None) => 5.0 / self.nominal_photons().sqrt(),
        }
    }

    /// Classical Rabi frequency matching the quantized drive.
    pub fn rabi(&self) -> f64 {
        self.gbar_mag() * self.nominal_photons().sqrt()
    }

    /// Same scenario with the coupling pinned as `gbar`, loadable as is.
    pub fn resolved(&self) -> Self {
        Self {
            gbar: Some(self.gbar_mag()),
            omega_rabi: None,
            ..self.clone()
        }
    }

    pub fn params(&self) -> lamspec_core::Result<SystemParams> {
        let p = SystemParams {
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            omega21: self.omega21,
            gbar_mag: self.gbar_mag(),
            phi: self.phi,
            phi_g: self.phi_g,
            phi_ghat: self.phi_ghat,
            density: self.density,
            interference: self.interference,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn grid(&self) -> lamspec_core::Result<FrequencyGrid> {
        FrequencyGrid::new(self.grid_lo, self.grid_hi, self.grid_count)
    }

    /// Quantized field state; `None` for a classical drive.
    pub fn field_state(&self) -> lamspec_core::Result<Option<FieldState>> {
        let state = match self.state {
            StateKind::Coherent => FieldState::coherent(self.alpha, self.phi_alpha, self.sigmas)?,
            StateKind::Fock => FieldState::single_fock(self.n0),
            StateKind::Window => FieldState::adjacent_window(self.n0, self.width, self.phi_alpha)?,
            StateKind::Separated => {
                FieldState::separated_fock(self.n0, &self.kappas, self.phi_alpha)?
            }
            StateKind::Classical => return Ok(None),
        };
        Ok(Some(state))
    }

    /// `# key=value` header pairs, sorted by key.
    pub fn header(&self) -> Vec<(String, String)> {
        let Ok(Value::Table(t)) = Value::try_from(self.resolved()) else {
            unreachable!("scenario always serializes to a table")
        };
        t.into_iter()
            .map(|(k, v)| {
                let shown = match v {
                    Value::String(s) => s,
                    other => other.to_string(),
                };
                (k, shown)
            })
            .collect()
    }
}
