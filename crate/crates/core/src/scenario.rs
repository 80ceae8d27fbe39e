//! Experiment definitions stored as TOML.
//!
//! ```toml
//! case = "../data/wscc9.case"      # relative to this file; omit for the bundled case
//! control = "cig_omega_tilde"       # no_cig | cig_omega | cig_omega_tilde
//! k = 1.2                           # ignored unless control = cig_omega_tilde
//! t_end = 20.0
//! h = 0.01
//! output_dt = 0.01
//! channels = ["omega_coi", "v_bus7", "p_cig", "q_cig"]
//! output_dir = "out/omega_tilde"
//!
//! [[events]]
//! kind = "load_scale"               # load_scale | fault_on | fault_off
//! time = 1.0
//! bus = 5
//! factor = 0.5
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cig::FrequencyInput;
use crate::error::{Error, Result};
use crate::network::{Event, EventKind, Network, DEFAULT_FAULT_CONDUCTANCE};

pub const DEFAULT_T_END: f64 = 20.0;
pub const DEFAULT_H: f64 = 0.01;
pub const DEFAULT_OUTPUT_DT: f64 = 0.01;
pub const DEFAULT_PF_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    NoCig,
    #[default]
    CigOmega,
    CigOmegaTilde,
}

impl ControlMode {
    pub fn frequency_input(self) -> FrequencyInput {
        match self {
            ControlMode::NoCig => FrequencyInput::Off,
            ControlMode::CigOmega => FrequencyInput::Omega,
            ControlMode::CigOmegaTilde => FrequencyInput::OmegaTilde,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventSpec {
    LoadScale { time: f64, bus: i64, factor: f64 },
    FaultOn { time: f64, bus: i64, conductance: Option<f64> },
    FaultOff { time: f64, bus: i64 },
}

impl EventSpec {
    pub fn to_event(&self) -> Event {
        match *self {
            EventSpec::LoadScale { time, bus, factor } => Event::new(time, EventKind::LoadScale { bus, factor }),
            EventSpec::FaultOn { time, bus, conductance } => Event::new(
                time,
                EventKind::FaultOn { bus, admittance: conductance.unwrap_or(DEFAULT_FAULT_CONDUCTANCE) },
            ),
            EventSpec::FaultOff { time, bus } => Event::new(time, EventKind::FaultOff { bus }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Case file; `None` selects the bundled WSCC 9-bus case.
    #[serde(default)]
    pub case: Option<PathBuf>,
    #[serde(default)]
    pub control: ControlMode,
    /// Compensation gain; when absent the case file value is kept.
    #[serde(default)]
    pub k: Option<f64>,
    #[serde(default)]
    pub events: Vec<EventSpec>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_output_dt")]
    pub output_dt: f64,
    /// Channels written to CSV and plotted; empty means all.
    #[serde(default)]
    pub channels: Vec<String>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_t_end() -> f64 {
    DEFAULT_T_END
}

fn default_h() -> f64 {
    DEFAULT_H
}

fn default_output_dt() -> f64 {
    DEFAULT_OUTPUT_DT
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            case: None,
            control: ControlMode::default(),
            k: None,
            events: Vec::new(),
            t_end: DEFAULT_T_END,
            h: DEFAULT_H,
            output_dt: DEFAULT_OUTPUT_DT,
            channels: Vec::new(),
            output_dir: None,
        }
    }
}

impl Scenario {
    /// Parses a scenario; relative paths are resolved against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Scenario> {
        let mut sc: Scenario = toml::from_str(text).map_err(|e| Error::InvalidData(format!("scenario: {e}")))?;
        if let Some(c) = &sc.case {
            if c.is_relative() {
                sc.case = Some(base_dir.join(c));
            }
        }
        if let Some(o) = &sc.output_dir {
            if o.is_relative() {
                sc.output_dir = Some(base_dir.join(o));
            }
        }
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        Scenario::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(c) = &self.case {
            if !c.is_file() {
                return Err(Error::InvalidData(format!("case file {} does not exist", c.display())));
            }
        }
        if !(self.h > 0.0) || !(self.output_dt > 0.0) {
            return Err(Error::InvalidData("h and output_dt must be positive".into()));
        }
        if self.t_end.is_nan() || self.t_end < 0.0 {
            return Err(Error::InvalidData(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        Ok(())
    }

    /// Loads the case and applies the control mode and gain.
    pub fn network(&self) -> Result<Network> {
        let mut net = match &self.case {
            Some(p) => crate::network::parse_case(&std::fs::read_to_string(p)?)?,
            None => Network::wscc9(),
        };
        if self.control == ControlMode::NoCig {
            net = net.without_cigs();
        }
        if let (ControlMode::CigOmegaTilde, Some(k)) = (self.control, self.k) {
            for c in &mut net.cigs {
                c.params.k = k;
            }
        }
        Ok(net)
    }

    pub fn events(&self) -> Vec<Event> {
        self.events.iter().map(EventSpec::to_event).collect()
    }

    /// SHA-256 of the canonical TOML form of the scenario.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).unwrap_or_default();
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
