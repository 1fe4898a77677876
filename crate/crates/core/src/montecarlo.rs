//! Trial-level simulation and parameter sweeps.
//!
//! A trial places the user, builds the scene, draws one channel realisation
//! and evaluates `P_r = P_t |Σ_m f_m Φ_m h_m|²` for every scheme. All schemes
//! and codebooks at a sweep point share the same trials, and trial `i` always
//! uses RNG substream `i`, so results do not depend on thread scheduling and
//! differences between schemes are not drowned in sampling noise.
//!
//! Angular sweep values are in degrees; `Elements` values are element counts;
//! `CodebookSet` values index into [`ExperimentSpec::codebooks`].

use std::f64::consts::{LN_10, TAU};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    analysis_constants, expected_larp_general, expected_larp_uniform, larp_max_continuous,
    loss_factor, AnalysisConstants,
};
use crate::beamformer::{
    continuous_config, objective_weights, Quantizer, QuantizerMethod, ReflectionConfig,
};
use crate::channel::{generate_channel, ChannelPair, RicianConfig};
use crate::codebook::{make_codebook, omega_for_decrement, Amplitudes, Codebook};
use crate::geometry::{build_scene, SceneConfig};
use crate::rng::trial_rng;
use crate::units::{dbm_to_mw, mw_to_dbm};
use crate::{Error, Result};

pub const DEFAULT_TRIALS: usize = 2000;

/// Quadrature nodes used to average closed-form constants over placements.
const PLACEMENT_NODES: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Placement {
    /// Keep the template's user angle.
    Fixed,
    /// User angle drawn uniformly in `[min, max]` radians each trial.
    Uniform { min: f64, max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub label: String,
    pub rician: RicianConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CodebookSource {
    /// Uniform phase grid. `omega` defaults to 2π and is overridden by a
    /// decrement sweep; missing amplitudes mean 0 dB for every state.
    Grid {
        bits: u32,
        omega: Option<f64>,
        amplitudes_db: Option<Vec<f64>>,
    },
    Explicit(Codebook),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookSpec {
    pub label: String,
    pub source: CodebookSource,
}

impl CodebookSpec {
    fn resolve(&self, decrement: Option<f64>) -> Result<Option<Codebook>> {
        match &self.source {
            CodebookSource::Explicit(cb) => Ok(Some(cb.clone())),
            CodebookSource::Grid {
                bits,
                omega,
                amplitudes_db,
            } => {
                let omega = match decrement {
                    Some(c) => omega_for_decrement(*bits, c),
                    None => omega.unwrap_or(TAU),
                };
                if omega <= 0.0 {
                    return Ok(None);
                }
                let amps = match amplitudes_db {
                    Some(db) => Amplitudes::Db(db.clone()),
                    None => Amplitudes::uniform(*bits),
                };
                make_codebook(*bits, omega, amps).map(Some)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Scheme {
    /// Ideal co-phasing with unit amplitude.
    Continuous,
    Quantized(QuantizerMethod),
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Continuous => "continuous",
            Scheme::Quantized(m) => m.name(),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("continuous") {
            Ok(Scheme::Continuous)
        } else {
            s.parse().map(Scheme::Quantized)
        }
    }
}

impl TryFrom<String> for Scheme {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Scheme> for String {
    fn from(s: Scheme) -> Self {
        s.name().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Elements,
    Decrement,
    UserAngle,
    CodebookSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub scene: SceneConfig,
    pub placement: Placement,
    pub channels: Vec<ChannelSpec>,
    pub codebooks: Vec<CodebookSpec>,
    pub schemes: Vec<Scheme>,
    pub sweep: SweepVariable,
    pub values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub transmit_dbm: f64,
    /// Only used to annotate SNR.
    pub noise_dbm: f64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.values.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if self.channels.is_empty() {
            return Err(Error::Config("no channel conditions given".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("no schemes given".into()));
        }
        let quantized = self
            .schemes
            .iter()
            .any(|s| matches!(s, Scheme::Quantized(_)));
        if quantized && self.codebooks.is_empty() {
            return Err(Error::Config(
                "quantized schemes need at least one codebook".into(),
            ));
        }
        if let Placement::Uniform { min, max } = self.placement {
            if !(min.is_finite() && max.is_finite() && min <= max) {
                return Err(Error::Config(format!("bad placement range [{min}, {max}]")));
            }
        }
        for c in &self.channels {
            c.rician.validate()?;
        }
        for &v in &self.values {
            let ok = match self.sweep {
                SweepVariable::Elements => v >= 1.0 && v.fract() == 0.0,
                SweepVariable::Decrement => v >= 0.0,
                SweepVariable::UserAngle => v.is_finite(),
                SweepVariable::CodebookSet => {
                    v >= 0.0 && v.fract() == 0.0 && (v as usize) < self.codebooks.len()
                }
            };
            if !ok {
                return Err(Error::Config(format!(
                    "invalid {:?} sweep value {v}",
                    self.sweep
                )));
            }
        }
        build_scene(&self.scene)?;
        for cb in &self.codebooks {
            cb.resolve(None)?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> Result<String> {
        let bytes = serde_json::to_vec(self)?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }

    pub fn transmit_mw(&self) -> f64 {
        dbm_to_mw(self.transmit_dbm)
    }
}

/// One CSV row: a scheme at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub mean_dbm: f64,
    pub stderr_db: f64,
    pub closedform_dbm: f64,
    /// Simulated loss factor against continuous phases on the same trials.
    pub eps_db: f64,
    pub method: String,
    pub k: Option<u32>,
    pub omega_deg: Option<f64>,
    pub eps_closedform_db: f64,
    pub channel: String,
    pub codebook: String,
    pub mean_mw: f64,
    pub closedform_mw: f64,
    pub snr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub name: String,
    pub seed: u64,
    pub trials: usize,
    pub spec_hash: String,
    /// Set when `trials == 1`: standard errors are reported as 0.
    pub stderr_undefined: bool,
    pub sweep: SweepVariable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_rows(self.rows.iter(), writer)
    }

    pub fn write_metadata<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, &self.metadata)?;
        Ok(())
    }
}

pub fn write_rows<'a, W: Write>(
    rows: impl IntoIterator<Item = &'a SweepRow>,
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut any = false;
    for r in rows {
        w.serialize(r)?;
        any = true;
    }
    if !any {
        w.write_record(CSV_COLUMNS)?;
    }
    w.flush()?;
    Ok(())
}

pub const CSV_COLUMNS: [&str; 14] = [
    "sweep_value",
    "mean_dbm",
    "stderr_db",
    "closedform_dbm",
    "eps_db",
    "method",
    "k",
    "omega_deg",
    "eps_closedform_db",
    "channel",
    "codebook",
    "mean_mw",
    "closedform_mw",
    "snr_db",
];

/// `P_t |Σ f_m Φ_m h_m|²`.
pub fn run_trial(
    channel: &ChannelPair,
    reflection: &ReflectionConfig,
    transmit_power: f64,
) -> Result<f64> {
    let m = channel.len();
    if reflection.len() != m || channel.f.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: reflection.len(),
        });
    }
    let s: Complex64 = channel
        .f
        .iter()
        .zip(&channel.h)
        .zip(reflection.coefficients())
        .map(|((f, h), phi)| f * phi * h)
        .sum();
    Ok(transmit_power * s.norm_sqr())
}

/// Sample mean and standard error (`std / sqrt(n)`, 0 for a single sample).
pub fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Standard error of a mean power expressed in dB.
pub fn stderr_to_db(mean: f64, stderr: f64) -> f64 {
    10.0 / LN_10 * stderr / mean
}

/// Closed-form constants averaged over the user placement distribution.
pub fn placement_constants(
    scene: &SceneConfig,
    placement: Placement,
    rician: &RicianConfig,
    transmit_power: f64,
) -> Result<AnalysisConstants> {
    match placement {
        Placement::Fixed => Ok(analysis_constants(
            &build_scene(scene)?,
            rician,
            transmit_power,
        )),
        Placement::Uniform { min, max } => {
            let consts = (0..PLACEMENT_NODES)
                .map(|j| {
                    let a = min + (j as f64 + 0.5) / PLACEMENT_NODES as f64 * (max - min);
                    build_scene(&scene.with_user_angle(a))
                        .map(|s| analysis_constants(&s, rician, transmit_power))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(AnalysisConstants::mean(&consts))
        }
    }
}

struct Arm {
    scheme: Scheme,
    codebook_label: String,
    quantizer: Option<Quantizer>,
    closed_form: f64,
}

fn closed_form(constants: &AnalysisConstants, m: usize, q: &Quantizer) -> Result<f64> {
    let cb = &q.codebook;
    if cb.is_unit_uniform_grid() {
        Ok(expected_larp_uniform(constants, m, cb.bits(), cb.omega()))
    } else {
        expected_larp_general(constants, m, cb, &q.table)
    }
}

/// All rows for one channel condition at one sweep value.
pub fn run_point(
    spec: &ExperimentSpec,
    channel: &ChannelSpec,
    value: f64,
) -> Result<Vec<SweepRow>> {
    let mut scene_cfg = spec.scene.clone();
    let mut placement = spec.placement;
    let mut decrement = None;
    let mut codebooks: Vec<&CodebookSpec> = spec.codebooks.iter().collect();
    match spec.sweep {
        SweepVariable::Elements => scene_cfg.elements = value as usize,
        SweepVariable::Decrement => decrement = Some(value.to_radians()),
        SweepVariable::UserAngle => {
            scene_cfg.user_angle = value.to_radians();
            placement = Placement::Fixed;
        }
        SweepVariable::CodebookSet => codebooks = vec![&spec.codebooks[value as usize]],
    }
    let m = scene_cfg.elements;
    let p_t = spec.transmit_mw();
    let constants = placement_constants(&scene_cfg, placement, &channel.rician, p_t)?;
    let gamma_max = larp_max_continuous(&constants, m);

    let mut arms = Vec::new();
    for &scheme in &spec.schemes {
        match scheme {
            Scheme::Continuous => arms.push(Arm {
                scheme,
                codebook_label: String::new(),
                quantizer: None,
                closed_form: gamma_max,
            }),
            Scheme::Quantized(method) => {
                for cbs in &codebooks {
                    let Some(cb) = cbs.resolve(decrement)? else {
                        log::debug!("{} has no capability left at decrement {value}", cbs.label);
                        continue;
                    };
                    let w = objective_weights(&constants, &cb, m);
                    let q = Quantizer::new(cb, w, method);
                    arms.push(Arm {
                        scheme,
                        codebook_label: cbs.label.clone(),
                        closed_form: closed_form(&constants, m, &q)?,
                        quantizer: Some(q),
                    });
                }
            }
        }
    }

    let trial = |i: usize| -> Result<Vec<f64>> {
        let mut rng = trial_rng(spec.seed, i as u64);
        let cfg = match placement {
            Placement::Fixed => scene_cfg.clone(),
            Placement::Uniform { min, max } => {
                scene_cfg.with_user_angle(min + (max - min) * rng.random::<f64>())
            }
        };
        let scene = build_scene(&cfg)?;
        let ch = generate_channel(&scene, &channel.rician, &mut rng)?;
        let mut out = Vec::with_capacity(arms.len() + 1);
        out.push(run_trial(&ch, &continuous_config(&scene), p_t)?);
        for arm in &arms {
            let p = match &arm.quantizer {
                None => out[0],
                Some(q) => run_trial(&ch, &q.configure(&scene), p_t)?,
            };
            out.push(p);
        }
        Ok(out)
    };
    let samples = (0..spec.trials)
        .into_par_iter()
        .map(trial)
        .collect::<Result<Vec<_>>>()?;

    let column = |j: usize| samples.iter().map(|s| s[j]).collect::<Vec<f64>>();
    let (cont_mean, _) = mean_stderr(&column(0));
    let rows = arms
        .iter()
        .enumerate()
        .map(|(j, arm)| {
            let (mean, se) = mean_stderr(&column(j + 1));
            let cb = arm.quantizer.as_ref().map(|q| &q.codebook);
            SweepRow {
                sweep_value: value,
                mean_dbm: mw_to_dbm(mean),
                stderr_db: stderr_to_db(mean, se),
                closedform_dbm: mw_to_dbm(arm.closed_form),
                eps_db: loss_factor(mean, cont_mean),
                method: arm.scheme.name().to_string(),
                k: cb.map(Codebook::bits),
                omega_deg: cb.map(|c| c.omega().to_degrees()),
                eps_closedform_db: loss_factor(arm.closed_form, gamma_max),
                channel: channel.label.clone(),
                codebook: arm.codebook_label.clone(),
                mean_mw: mean,
                closedform_mw: arm.closed_form,
                snr_db: mw_to_dbm(mean) - spec.noise_dbm,
            }
        })
        .collect();
    Ok(rows)
}

pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut rows = Vec::new();
    for channel in &spec.channels {
        for &v in &spec.values {
            rows.extend(run_point(spec, channel, v)?);
        }
    }
    if let Some(r) = rows
        .iter()
        .find(|r| !(r.mean_mw.is_finite() && r.closedform_mw.is_finite()))
    {
        return Err(Error::Numerical(format!(
            "non-finite power for {} at {}",
            r.method, r.sweep_value
        )));
    }
    Ok(SweepResult {
        metadata: SweepMetadata {
            name: spec.name.clone(),
            seed: spec.seed,
            trials: spec.trials,
            spec_hash: spec.hash()?,
            stderr_undefined: spec.trials == 1,
            sweep: spec.sweep,
        },
        rows,
    })
}
