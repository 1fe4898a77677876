//! Discrete reflection states of an RIS element.
//!
//! A `k`-bit element has `2^k` states `(θ_i, A_i)`. With the uniform-grid
//! model the phases are
//!
//! ```text
//! θ_i = (i-1) · 2π / 2^k          if ω ≥ (2^k - 1)/2^k · 2π   (sufficient)
//! θ_i = (i-1) · ω / (2^k - 1)     otherwise                   (insufficient)
//! ```
//!
//! Amplitudes given in dB use the field convention `A = 10^(dB/20)`, since
//! `A` multiplies the reflected field and `A²` shows up in power.
//!
//! Codebooks can also be derived from a measured voltage→response sweep, see
//! [`MeasuredResponse`] and [`load_measured_codebook`].

use std::f64::consts::TAU;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::units::db_to_amplitude;
use crate::{Error, Result};

pub const MAX_BITS: u32 = 8;

/// Slack allowed when comparing phases against the capability `ω`.
const PHASE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodebookEntry {
    /// Radians.
    pub phase: f64,
    /// Linear, in `(0, 1]`.
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    bits: u32,
    omega: f64,
    entries: Vec<CodebookEntry>,
}

/// Amplitude list for [`make_codebook`].
#[derive(Debug, Clone, PartialEq)]
pub enum Amplitudes {
    Linear(Vec<f64>),
    Db(Vec<f64>),
}

impl Amplitudes {
    pub fn uniform(k: u32) -> Self {
        Amplitudes::Linear(vec![1.0; 1 << k])
    }

    fn into_linear(self) -> Result<Vec<f64>> {
        match self {
            Amplitudes::Linear(v) => Ok(v),
            Amplitudes::Db(v) => v
                .into_iter()
                .map(|db| {
                    if db > 0.0 {
                        Err(Error::Codebook(format!("amplitude {db} dB exceeds 0 dB")))
                    } else {
                        Ok(db_to_amplitude(db))
                    }
                })
                .collect(),
        }
    }
}

fn check_bits(k: u32) -> Result<()> {
    if (1..=MAX_BITS).contains(&k) {
        Ok(())
    } else {
        Err(Error::Codebook(format!(
            "bits must be in 1..={MAX_BITS}, got {k}"
        )))
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega <= TAU + PHASE_EPS {
        Ok(())
    } else {
        Err(Error::Codebook(format!(
            "capability must be in (0, 2π], got {omega}"
        )))
    }
}

/// `(2^k - 1)/2^k · 2π`, the smallest `ω` that fits the full uniform grid.
pub fn sufficient_threshold(k: u32) -> f64 {
    let n = (1u64 << k) as f64;
    (n - 1.0) / n * TAU
}

pub fn is_sufficient(k: u32, omega: f64) -> bool {
    omega >= sufficient_threshold(k)
}

/// The uniform-grid phases for `k` bits and capability `omega`.
pub fn quantized_phases(k: u32, omega: f64) -> Result<Vec<f64>> {
    check_bits(k)?;
    check_omega(omega)?;
    let n = 1usize << k;
    let step = if is_sufficient(k, omega) {
        TAU / n as f64
    } else {
        omega / (n - 1) as f64
    };
    Ok((0..n).map(|i| i as f64 * step).collect())
}

/// Shortfall of `omega` below the sufficient threshold, `max(0, threshold - ω)`.
pub fn capability_decrement(k: u32, omega: f64) -> f64 {
    (sufficient_threshold(k) - omega).max(0.0)
}

/// Inverse of [`capability_decrement`] on the insufficient side.
pub fn omega_for_decrement(k: u32, decrement: f64) -> f64 {
    sufficient_threshold(k) - decrement
}

pub fn make_codebook(k: u32, omega: f64, amplitudes: Amplitudes) -> Result<Codebook> {
    let phases = quantized_phases(k, omega)?;
    let amps = amplitudes.into_linear()?;
    if amps.len() != phases.len() {
        return Err(Error::DimensionMismatch {
            expected: phases.len(),
            found: amps.len(),
        });
    }
    let entries = phases
        .into_iter()
        .zip(amps)
        .map(|(phase, amplitude)| CodebookEntry { phase, amplitude })
        .collect();
    Codebook::from_entries(k, omega, entries)
}

impl Codebook {
    /// Validates and wraps raw entries. `bits = 0` denotes a single-state element.
    pub fn from_entries(bits: u32, omega: f64, entries: Vec<CodebookEntry>) -> Result<Self> {
        if bits > MAX_BITS {
            return Err(Error::Codebook(format!(
                "bits must be at most {MAX_BITS}, got {bits}"
            )));
        }
        check_omega(omega)?;
        let n = 1usize << bits;
        if entries.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: entries.len(),
            });
        }
        if entries[0].phase != 0.0 {
            return Err(Error::Codebook(format!(
                "first phase must be 0, got {}",
                entries[0].phase
            )));
        }
        if entries
            .windows(2)
            .any(|w| w[1].phase.partial_cmp(&w[0].phase) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::Codebook("phases must be strictly increasing".into()));
        }
        let last = entries[n - 1].phase;
        if last > omega + PHASE_EPS {
            return Err(Error::Codebook(format!(
                "phase {last} exceeds capability {omega}"
            )));
        }
        if let Some(e) = entries
            .iter()
            .find(|e| !(e.amplitude > 0.0 && e.amplitude <= 1.0))
        {
            return Err(Error::Codebook(format!(
                "amplitude {} outside (0, 1]",
                e.amplitude
            )));
        }
        Ok(Self {
            bits,
            omega,
            entries,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn entries(&self) -> &[CodebookEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn phases(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.phase)
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.amplitude)
    }

    pub fn decrement(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            capability_decrement(self.bits, self.omega)
        }
    }

    /// True when every state has the same amplitude.
    pub fn is_uniform_amplitude(&self) -> bool {
        let a0 = self.entries[0].amplitude;
        self.entries.iter().all(|e| e.amplitude == a0)
    }

    /// True when this is the unit-amplitude uniform grid for its `(k, ω)`.
    pub fn is_unit_uniform_grid(&self) -> bool {
        if self.bits == 0 || !self.entries.iter().all(|e| e.amplitude == 1.0) {
            return false;
        }
        match quantized_phases(self.bits, self.omega) {
            Ok(grid) => grid
                .iter()
                .zip(self.phases())
                .all(|(a, b)| (a - b).abs() <= 1e-12),
            Err(_) => false,
        }
    }
}

/// One row of a measured voltage sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredPoint {
    /// Volts.
    pub voltage: f64,
    /// Radians.
    pub phase: f64,
    /// Linear.
    pub amplitude: f64,
}

/// A measured voltage → (phase, amplitude) sweep of one element design.
///
/// The text format is CSV with header `voltage,phase_deg,amplitude_db`.
/// Leading lines of the form `# key=value` carry metadata; the recognised
/// keys are `frequency_hz` and `incident_angle_deg`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MeasuredResponse {
    pub points: Vec<MeasuredPoint>,
    pub frequency_hz: Option<f64>,
    pub incident_angle_deg: Option<f64>,
}

#[derive(Deserialize)]
struct RawRow {
    voltage: f64,
    phase_deg: f64,
    amplitude_db: f64,
}

impl MeasuredResponse {
    pub fn new(points: Vec<MeasuredPoint>) -> Result<Self> {
        let r = Self {
            points,
            ..Self::default()
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Measured("no data rows".into()));
        }
        for p in &self.points {
            if !(p.voltage.is_finite() && p.phase.is_finite()) {
                return Err(Error::Measured("non-finite voltage or phase".into()));
            }
            if !(p.amplitude > 0.0 && p.amplitude <= 1.0) {
                return Err(Error::Measured(format!(
                    "amplitude {} at {} V outside (0, 1]",
                    p.amplitude, p.voltage
                )));
            }
        }
        if self.points.windows(2).any(|w| w[1].voltage < w[0].voltage) {
            return Err(Error::Measured("voltage column is not monotone".into()));
        }
        Ok(())
    }

    pub fn from_reader<R: Read>(mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        text.parse()
    }

    /// Phase and amplitude at `voltage`, linearly interpolated.
    pub fn interpolate(&self, voltage: f64) -> Result<(f64, f64)> {
        let pts = &self.points;
        let (lo, hi) = (pts[0].voltage, pts[pts.len() - 1].voltage);
        if !(voltage >= lo && voltage <= hi) {
            return Err(Error::Measured(format!(
                "voltage {voltage} outside measured range [{lo}, {hi}]"
            )));
        }
        if let Some(p) = pts.iter().find(|p| p.voltage == voltage) {
            return Ok((p.phase, p.amplitude));
        }
        let j = pts.partition_point(|p| p.voltage < voltage);
        let (a, b) = (pts[j - 1], pts[j]);
        let t = (voltage - a.voltage) / (b.voltage - a.voltage);
        Ok((
            a.phase + t * (b.phase - a.phase),
            a.amplitude + t * (b.amplitude - a.amplitude),
        ))
    }
}

impl FromStr for MeasuredResponse {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = MeasuredResponse::default();
        for line in s.lines().map(str::trim).filter(|l| l.starts_with('#')) {
            let Some((key, value)) = line.trim_start_matches('#').split_once('=') else {
                continue;
            };
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Measured(format!("bad metadata value in `{line}`")))?;
            match key.trim() {
                "frequency_hz" => out.frequency_hz = Some(value),
                "incident_angle_deg" => out.incident_angle_deg = Some(value),
                _ => {}
            }
        }
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(s.as_bytes());
        for row in rdr.deserialize::<RawRow>() {
            let row = row?;
            if row.amplitude_db > 0.0 {
                return Err(Error::Measured(format!(
                    "amplitude {} dB at {} V exceeds 0 dB",
                    row.amplitude_db, row.voltage
                )));
            }
            out.points.push(MeasuredPoint {
                voltage: row.voltage,
                phase: row.phase_deg.to_radians(),
                amplitude: db_to_amplitude(row.amplitude_db),
            });
        }
        out.validate()?;
        Ok(out)
    }
}

/// Builds a codebook from the measured response at the given state voltages.
///
/// Phases are re-referenced so the smallest selected phase is 0, states are
/// ordered by phase, and `ω` is set to the largest re-referenced phase.
pub fn load_measured_codebook(response: &MeasuredResponse, voltages: &[f64]) -> Result<Codebook> {
    response.validate()?;
    let n = voltages.len();
    if !n.is_power_of_two() || n < 2 {
        return Err(Error::Codebook(format!(
            "need 2^k ≥ 2 state voltages, got {n}"
        )));
    }
    let bits = n.trailing_zeros();
    let mut states = voltages
        .iter()
        .map(|&v| response.interpolate(v))
        .collect::<Result<Vec<_>>>()?;
    let min = states.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    for s in &mut states {
        s.0 -= min;
    }
    states.sort_by(|a, b| a.0.total_cmp(&b.0));
    let omega = states[n - 1].0;
    if omega > TAU + PHASE_EPS {
        return Err(Error::Codebook(format!(
            "selected phases span {:.1}°, more than a full turn",
            omega.to_degrees()
        )));
    }
    let entries = states
        .into_iter()
        .map(|(phase, amplitude)| CodebookEntry { phase, amplitude })
        .collect();
    Codebook::from_entries(bits, omega.min(TAU), entries)
}
