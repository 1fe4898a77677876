//! TOML experiment files.
//!
//! Human units throughout: meters, degrees, Hz, dB/dBm. A minimal file:
//!
//! ```toml
//! name = "example"
//! trials = 500
//! seed = 7
//!
//! [scene]
//! bs_distance_m = 90.0
//! user_distance_m = 70.0
//! elements = 256
//! pitch_h_m = 0.05
//! pitch_v_m = 0.05
//! frequency_hz = 2.6e9
//!
//! [[channels]]
//! label = "rician"
//! model = "rician"
//! k1 = 4.0
//! k2 = 4.0
//!
//! [[codebooks]]
//! kind = "grid"
//! label = "2bit"
//! bits = 2
//! amplitudes_db = [0.0, -6.0, -10.0, -3.0]
//!
//! [sweep]
//! variable = "decrement"
//! start = 0.0
//! stop = 180.0
//! step = 10.0
//! methods = ["continuous", "group_query", "nearest_phase"]
//! ```
//!
//! Everything else has a default; see the field docs below.

use std::path::{Path, PathBuf};

use ris_core::channel::{NlosGainModel, K_MAX};
use ris_core::codebook::{load_measured_codebook, CodebookEntry, MeasuredPoint};
use ris_core::montecarlo::{
    ChannelSpec, CodebookSource, CodebookSpec, ExperimentSpec, Placement, Scheme, SweepVariable,
    DEFAULT_TRIALS,
};
use ris_core::units::{db_to_amplitude, db_to_linear_power, linear_power_to_db, SPEED_OF_LIGHT};
use ris_core::{Codebook, MeasuredResponse, RicianConfig, SceneConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_transmit_dbm")]
    pub transmit_dbm: f64,
    #[serde(default = "default_noise_dbm")]
    pub noise_dbm: f64,
    pub scene: SceneSection,
    #[serde(default)]
    pub placement: PlacementSection,
    pub channels: Vec<ChannelSection>,
    #[serde(default)]
    pub codebooks: Vec<CodebookSection>,
    pub sweep: SweepSection,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_transmit_dbm() -> f64 {
    20.0
}

fn default_noise_dbm() -> f64 {
    -90.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSection {
    pub bs_distance_m: f64,
    pub user_distance_m: f64,
    /// Only used with fixed placement.
    #[serde(default = "default_angle")]
    pub user_angle_deg: f64,
    #[serde(default = "default_angle")]
    pub bs_azimuth_deg: f64,
    #[serde(default = "default_elevation")]
    pub bs_elevation_deg: f64,
    pub elements: usize,
    pub pitch_h_m: f64,
    pub pitch_v_m: f64,
    pub frequency_hz: f64,
    #[serde(default = "default_exponent")]
    pub path_loss_exponent: f64,
    #[serde(default)]
    pub antenna_gain_db: f64,
}

fn default_angle() -> f64 {
    45.0
}

fn default_elevation() -> f64 {
    15.0
}

fn default_exponent() -> f64 {
    2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlacementSection {
    Fixed,
    Uniform { min_deg: f64, max_deg: f64 },
}

impl Default for PlacementSection {
    /// Quarter circle in front of the surface.
    fn default() -> Self {
        PlacementSection::Uniform {
            min_deg: 0.0,
            max_deg: 90.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelModel {
    PureLos,
    Rayleigh,
    Rician,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub label: String,
    pub model: ChannelModel,
    /// Linear K-factors, required for `rician`.
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    /// Fixed linear NLoS amplitude gain; the UMa model when absent.
    pub nlos_gain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CodebookSection {
    /// Uniform phase grid; `omega_deg` defaults to 360 and is overridden by
    /// decrement sweeps.
    Grid {
        label: String,
        bits: u32,
        omega_deg: Option<f64>,
        amplitudes_db: Option<Vec<f64>>,
    },
    Explicit {
        label: String,
        bits: u32,
        omega_deg: f64,
        phases_deg: Vec<f64>,
        /// Linear.
        amplitudes: Vec<f64>,
    },
    /// States picked from a measured sweep, given as a CSV `file` (relative
    /// to the config file) or inline `rows` of `[voltage, phase_deg, amplitude_db]`.
    Measured {
        label: String,
        file: Option<PathBuf>,
        rows: Option<Vec<[f64; 3]>>,
        voltages: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    /// Explicit grid; alternatively `start`, `stop`, `step`.
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub step: Option<f64>,
    pub methods: Vec<Scheme>,
}

impl SweepSection {
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        if let Some(v) = &self.values {
            return Ok(v.clone());
        }
        match (self.start, self.stop, self.step) {
            (Some(a), Some(b), Some(s)) if s > 0.0 && b >= a => {
                let n = ((b - a) / s + 1e-9).floor() as usize;
                Ok((0..=n).map(|i| a + i as f64 * s).collect())
            }
            _ => Err(CliError::Config(
                "sweep needs `values` or a valid `start`/`stop`/`step`".into(),
            )),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Resolves the file into a simulation spec; measured files are read
    /// relative to `base_dir`.
    pub fn to_spec(&self, base_dir: &Path) -> Result<ExperimentSpec, CliError> {
        let s = &self.scene;
        if s.frequency_hz.is_nan() || s.frequency_hz <= 0.0 {
            return Err(CliError::Config(format!(
                "frequency_hz must be positive, got {}",
                s.frequency_hz
            )));
        }
        let scene = SceneConfig {
            bs_distance: s.bs_distance_m,
            user_distance: s.user_distance_m,
            user_angle: s.user_angle_deg.to_radians(),
            bs_azimuth: s.bs_azimuth_deg.to_radians(),
            bs_elevation: s.bs_elevation_deg.to_radians(),
            elements: s.elements,
            pitch_h: s.pitch_h_m,
            pitch_v: s.pitch_v_m,
            wavelength: SPEED_OF_LIGHT / s.frequency_hz,
            path_loss_exponent: s.path_loss_exponent,
            antenna_gain: db_to_linear_power(s.antenna_gain_db),
        };
        let placement = match self.placement {
            PlacementSection::Fixed => Placement::Fixed,
            PlacementSection::Uniform { min_deg, max_deg } => Placement::Uniform {
                min: min_deg.to_radians(),
                max: max_deg.to_radians(),
            },
        };
        let channels = self
            .channels
            .iter()
            .map(ChannelSection::to_spec)
            .collect::<Result<Vec<_>, _>>()?;
        let codebooks = self
            .codebooks
            .iter()
            .map(|c| c.to_spec(base_dir))
            .collect::<Result<Vec<_>, _>>()?;
        let spec = ExperimentSpec {
            name: self.name.clone(),
            scene,
            placement,
            channels,
            codebooks,
            schemes: self.sweep.methods.clone(),
            sweep: self.sweep.variable,
            values: self.sweep.grid()?,
            trials: self.trials,
            seed: self.seed,
            transmit_dbm: self.transmit_dbm,
            noise_dbm: self.noise_dbm,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Inverse of [`to_spec`](Self::to_spec); measured codebooks come back as explicit entries.
    pub fn from_spec(spec: &ExperimentSpec) -> Self {
        let sc = &spec.scene;
        ExperimentConfig {
            name: spec.name.clone(),
            trials: spec.trials,
            seed: spec.seed,
            transmit_dbm: spec.transmit_dbm,
            noise_dbm: spec.noise_dbm,
            scene: SceneSection {
                bs_distance_m: sc.bs_distance,
                user_distance_m: sc.user_distance,
                user_angle_deg: sc.user_angle.to_degrees(),
                bs_azimuth_deg: sc.bs_azimuth.to_degrees(),
                bs_elevation_deg: sc.bs_elevation.to_degrees(),
                elements: sc.elements,
                pitch_h_m: sc.pitch_h,
                pitch_v_m: sc.pitch_v,
                frequency_hz: SPEED_OF_LIGHT / sc.wavelength,
                path_loss_exponent: sc.path_loss_exponent,
                antenna_gain_db: linear_power_to_db(sc.antenna_gain),
            },
            placement: match spec.placement {
                Placement::Fixed => PlacementSection::Fixed,
                Placement::Uniform { min, max } => PlacementSection::Uniform {
                    min_deg: min.to_degrees(),
                    max_deg: max.to_degrees(),
                },
            },
            channels: spec
                .channels
                .iter()
                .map(ChannelSection::from_spec)
                .collect(),
            codebooks: spec
                .codebooks
                .iter()
                .map(CodebookSection::from_spec)
                .collect(),
            sweep: SweepSection {
                variable: spec.sweep,
                values: Some(spec.values.clone()),
                start: None,
                stop: None,
                step: None,
                methods: spec.schemes.clone(),
            },
        }
    }
}

impl ChannelSection {
    fn to_spec(&self) -> Result<ChannelSpec, CliError> {
        let gain = match self.nlos_gain {
            Some(g) => NlosGainModel::Fixed(g),
            None => NlosGainModel::UmaNlos,
        };
        let rician = match self.model {
            ChannelModel::PureLos => RicianConfig::pure_los(gain),
            ChannelModel::Rayleigh => RicianConfig::rayleigh(gain),
            ChannelModel::Rician => match (self.k1, self.k2) {
                (Some(k1), Some(k2)) => RicianConfig::new(k1, k2, gain)?,
                _ => {
                    return Err(CliError::Config(format!(
                        "channel `{}`: rician model needs k1 and k2",
                        self.label
                    )))
                }
            },
        };
        rician.validate()?;
        Ok(ChannelSpec {
            label: self.label.clone(),
            rician,
        })
    }

    fn from_spec(c: &ChannelSpec) -> Self {
        let r = c.rician;
        let (model, k1, k2) = if r.k1 == K_MAX && r.k2 == K_MAX {
            (ChannelModel::PureLos, None, None)
        } else if r.k1 == 0.0 && r.k2 == 0.0 {
            (ChannelModel::Rayleigh, None, None)
        } else {
            (ChannelModel::Rician, Some(r.k1), Some(r.k2))
        };
        ChannelSection {
            label: c.label.clone(),
            model,
            k1,
            k2,
            nlos_gain: match r.nlos_gain {
                NlosGainModel::UmaNlos => None,
                NlosGainModel::Fixed(g) => Some(g),
            },
        }
    }
}

impl CodebookSection {
    fn label(&self) -> &str {
        match self {
            CodebookSection::Grid { label, .. }
            | CodebookSection::Explicit { label, .. }
            | CodebookSection::Measured { label, .. } => label,
        }
    }

    fn to_spec(&self, base_dir: &Path) -> Result<CodebookSpec, CliError> {
        let source = match self {
            CodebookSection::Grid {
                bits,
                omega_deg,
                amplitudes_db,
                ..
            } => CodebookSource::Grid {
                bits: *bits,
                omega: omega_deg.map(f64::to_radians),
                amplitudes_db: amplitudes_db.clone(),
            },
            CodebookSection::Explicit {
                bits,
                omega_deg,
                phases_deg,
                amplitudes,
                ..
            } => {
                if phases_deg.len() != amplitudes.len() {
                    return Err(CliError::Config(format!(
                        "codebook `{}`: {} phases but {} amplitudes",
                        self.label(),
                        phases_deg.len(),
                        amplitudes.len()
                    )));
                }
                let entries = phases_deg
                    .iter()
                    .zip(amplitudes)
                    .map(|(p, &amplitude)| CodebookEntry {
                        phase: p.to_radians(),
                        amplitude,
                    })
                    .collect();
                CodebookSource::Explicit(Codebook::from_entries(
                    *bits,
                    omega_deg.to_radians(),
                    entries,
                )?)
            }
            CodebookSection::Measured {
                file,
                rows,
                voltages,
                ..
            } => {
                let response = match (file, rows) {
                    (Some(f), None) => {
                        let path = base_dir.join(f);
                        let text = std::fs::read_to_string(&path).map_err(|e| {
                            CliError::Config(format!(
                                "cannot read measured file {}: {e}",
                                path.display()
                            ))
                        })?;
                        text.parse::<MeasuredResponse>()?
                    }
                    (None, Some(rows)) => MeasuredResponse::new(
                        rows.iter()
                            .map(|&[voltage, phase_deg, amp_db]| MeasuredPoint {
                                voltage,
                                phase: phase_deg.to_radians(),
                                amplitude: db_to_amplitude(amp_db),
                            })
                            .collect(),
                    )?,
                    _ => {
                        return Err(CliError::Config(format!(
                            "codebook `{}`: give exactly one of `file` or `rows`",
                            self.label()
                        )))
                    }
                };
                CodebookSource::Explicit(load_measured_codebook(&response, voltages)?)
            }
        };
        Ok(CodebookSpec {
            label: self.label().to_string(),
            source,
        })
    }

    fn from_spec(c: &CodebookSpec) -> Self {
        match &c.source {
            CodebookSource::Grid {
                bits,
                omega,
                amplitudes_db,
            } => CodebookSection::Grid {
                label: c.label.clone(),
                bits: *bits,
                omega_deg: omega.map(f64::to_degrees),
                amplitudes_db: amplitudes_db.clone(),
            },
            CodebookSource::Explicit(cb) => CodebookSection::Explicit {
                label: c.label.clone(),
                bits: cb.bits(),
                omega_deg: cb.omega().to_degrees(),
                phases_deg: cb.phases().map(f64::to_degrees).collect(),
                amplitudes: cb.amplitudes().collect(),
            },
        }
    }
}
