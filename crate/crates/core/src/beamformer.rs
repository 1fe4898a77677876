//! Per-element state selection.
//!
//! Each element with expected phase `θ*` picks the codebook entry maximising
//!
//! ```text
//! f_i(θ*) = a_nlos · A_i² + a_los · A_i · cos(θ_i - θ*)
//! ```
//!
//! The group-based query method precomputes where each `f_i` is the upper
//! envelope of all curves, giving a partition of `[0, 2π)` into ranges `c_i`.
//! Selecting a state is then a binary search. The boundaries are the
//! pairwise curve crossings that lie on the envelope; ownership of each gap
//! between boundaries is decided by evaluating all curves at its midpoint.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisConstants;
use crate::codebook::{Codebook, CodebookEntry};
use crate::geometry::SceneGeometry;
use crate::units::{circular_distance, wrap_phase};
use crate::{Error, Result};

/// Relative slack for deciding that a crossing lies on the envelope.
pub const VALID_INTERSECTION_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub a_los: f64,
    pub a_nlos: f64,
    /// `Ā = ΣA² / ΣA` over the codebook.
    pub mean_amp_ratio: f64,
}

impl ObjectiveWeights {
    pub fn new(a_los: f64, a_nlos: f64) -> Result<Self> {
        if !(a_los >= 0.0 && a_nlos >= 0.0 && a_los.is_finite() && a_nlos.is_finite()) {
            return Err(Error::Config(format!(
                "objective weights must be finite and non-negative, got ({a_los}, {a_nlos})"
            )));
        }
        Ok(Self {
            a_los,
            a_nlos,
            mean_amp_ratio: 1.0,
        })
    }

    /// Only phase alignment matters.
    pub fn pure_los() -> Self {
        Self {
            a_los: 1.0,
            a_nlos: 0.0,
            mean_amp_ratio: 1.0,
        }
    }
}

pub fn mean_amp_ratio(codebook: &Codebook) -> f64 {
    let (sq, s) = codebook
        .amplitudes()
        .fold((0.0, 0.0), |(sq, s), a| (sq + a * a, s + a));
    sq / s
}

/// `a_los = M · Ā · κ_los`, `a_nlos = κ_nlos`.
pub fn objective_weights(
    constants: &AnalysisConstants,
    codebook: &Codebook,
    m: usize,
) -> ObjectiveWeights {
    let abar = mean_amp_ratio(codebook);
    ObjectiveWeights {
        a_los: m as f64 * abar * constants.kappa_los,
        a_nlos: constants.kappa_nlos,
        mean_amp_ratio: abar,
    }
}

pub fn p3_objective(entry: CodebookEntry, theta_star: f64, w: &ObjectiveWeights) -> f64 {
    let a = entry.amplitude;
    w.a_nlos * a * a + w.a_los * a * (entry.phase - theta_star).cos()
}

pub fn quantization_loss(entry: CodebookEntry, theta_star: f64) -> f64 {
    1.0 - entry.amplitude * (entry.phase - theta_star).cos()
}

/// All `θ ∈ [0, 2π)` where the objective curves of two entries cross.
///
/// Solves `R sin(θ + ϑ) = a_nlos (A_j² - A_i²) / a_los` with
/// `R sin ϑ = A_i cos θ_i - A_j cos θ_j` and `R cos ϑ = A_i sin θ_i - A_j sin θ_j`.
/// Both branches of the arcsine are returned.
pub fn entry_intersections(ei: CodebookEntry, ej: CodebookEntry, w: &ObjectiveWeights) -> Vec<f64> {
    let c_sin = ei.amplitude * ei.phase.sin() - ej.amplitude * ej.phase.sin();
    let c_cos = ei.amplitude * ei.phase.cos() - ej.amplitude * ej.phase.cos();
    let r = c_sin.hypot(c_cos);
    if w.a_los == 0.0 || r == 0.0 {
        return Vec::new();
    }
    let s = w.a_nlos * (ej.amplitude.powi(2) - ei.amplitude.powi(2)) / (w.a_los * r);
    if s.is_nan() || s.abs() > 1.0 {
        return Vec::new();
    }
    let vartheta = c_cos.atan2(c_sin);
    let base = s.asin();
    let a = wrap_phase(base - vartheta);
    let b = wrap_phase(PI - base - vartheta);
    if a == b {
        vec![a]
    } else {
        vec![a, b]
    }
}

/// Crossings of curves `i` and `j` (0-based) of `codebook`.
pub fn curve_intersections(
    i: usize,
    j: usize,
    codebook: &Codebook,
    w: &ObjectiveWeights,
) -> Vec<f64> {
    let e = codebook.entries();
    entry_intersections(e[i], e[j], w)
}

/// Arg-max of the objective over all entries; ties go to the lowest index.
pub fn exhaustive_quantize(codebook: &Codebook, theta_star: f64, w: &ObjectiveWeights) -> usize {
    argmax_entries(codebook.entries(), theta_star, w)
}

fn argmax_entries(entries: &[CodebookEntry], theta_star: f64, w: &ObjectiveWeights) -> usize {
    let mut best = 0;
    let mut best_val = p3_objective(entries[0], theta_star, w);
    for (i, &e) in entries.iter().enumerate().skip(1) {
        let v = p3_objective(e, theta_star, w);
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    best
}

/// Entry whose phase is circularly closest to `θ*`; ties go to the lowest index.
pub fn nearest_phase_quantize(codebook: &Codebook, theta_star: f64) -> usize {
    nearest_entry(codebook.entries(), theta_star)
}

fn nearest_entry(entries: &[CodebookEntry], theta_star: f64) -> usize {
    let mut best = 0;
    let mut best_d = circular_distance(entries[0].phase, theta_star);
    for (i, e) in entries.iter().enumerate().skip(1) {
        let d = circular_distance(e.phase, theta_star);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// A partition of `[0, 2π)` into left-closed segments, each mapped to an entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizationTable {
    /// Segment start phases, strictly increasing, first is 0.
    starts: Vec<f64>,
    /// Entry index owning each segment.
    owners: Vec<usize>,
    /// `μ_i`, total length of the range of entry `i`.
    lengths: Vec<f64>,
    /// The entries the table was built for.
    entries: Vec<CodebookEntry>,
}

impl QuantizationTable {
    fn from_candidates(
        entries: &[CodebookEntry],
        mut candidates: Vec<f64>,
        owner: impl Fn(f64) -> usize,
    ) -> Self {
        candidates.push(0.0);
        candidates.iter_mut().for_each(|c| *c = wrap_phase(*c));
        candidates.sort_by(f64::total_cmp);
        candidates.dedup();

        let mut starts: Vec<f64> = Vec::with_capacity(candidates.len());
        let mut owners: Vec<usize> = Vec::with_capacity(candidates.len());
        for (j, &s) in candidates.iter().enumerate() {
            let e = candidates.get(j + 1).copied().unwrap_or(TAU);
            let o = owner(0.5 * (s + e));
            if owners.last() != Some(&o) {
                starts.push(s);
                owners.push(o);
            }
        }

        let mut lengths = vec![0.0; entries.len()];
        for (j, &o) in owners.iter().enumerate() {
            let e = starts.get(j + 1).copied().unwrap_or(TAU);
            lengths[o] += e - starts[j];
        }
        Self {
            starts,
            owners,
            lengths,
            entries: entries.to_vec(),
        }
    }

    /// Entry index for expected phase `θ*`.
    pub fn lookup(&self, theta_star: f64) -> usize {
        let t = wrap_phase(theta_star);
        let j = self.starts.partition_point(|&s| s <= t);
        self.owners[j - 1]
    }

    /// `(start, end, owner)` for every segment, in phase order.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        self.starts.iter().enumerate().map(|(j, &s)| {
            let e = self.starts.get(j + 1).copied().unwrap_or(TAU);
            (s, e, self.owners[j])
        })
    }

    /// Interior boundaries, i.e. segment starts other than 0.
    pub fn boundaries(&self) -> &[f64] {
        &self.starts[1..]
    }

    /// The range `c_i` of entry `i` as a union of intervals.
    pub fn range(&self, i: usize) -> Vec<(f64, f64)> {
        self.segments()
            .filter(|s| s.2 == i)
            .map(|s| (s.0, s.1))
            .collect()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn entries(&self) -> &[CodebookEntry] {
        &self.entries
    }

    /// True if the table was built for exactly this codebook's entries.
    pub fn matches(&self, codebook: &Codebook) -> bool {
        self.entries == codebook.entries()
    }
}

/// Lookup table for the group-based query method.
pub fn build_lookup_table(codebook: &Codebook, w: &ObjectiveWeights) -> QuantizationTable {
    let entries = codebook.entries();
    let n = entries.len();
    let scale = entries
        .iter()
        .map(|e| w.a_nlos * e.amplitude * e.amplitude + w.a_los * e.amplitude)
        .fold(0.0, f64::max);
    let tol = VALID_INTERSECTION_RTOL * scale;

    let mut candidates = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for t in entry_intersections(entries[i], entries[j], w) {
                let fi = p3_objective(entries[i], t, w);
                let top = entries
                    .iter()
                    .map(|&e| p3_objective(e, t, w))
                    .fold(f64::NEG_INFINITY, f64::max);
                if top - fi <= tol {
                    candidates.push(t);
                }
            }
        }
    }
    QuantizationTable::from_candidates(entries, candidates, |t| argmax_entries(entries, t, w))
}

/// Partition induced by nearest-phase selection, for closed-form evaluation.
pub fn nearest_phase_table(codebook: &Codebook) -> QuantizationTable {
    let entries = codebook.entries();
    let n = entries.len();
    let candidates = (0..n)
        .map(|i| {
            let a = entries[i].phase;
            let b = if i + 1 < n {
                entries[i + 1].phase
            } else {
                entries[0].phase + TAU
            };
            0.5 * (a + b)
        })
        .collect();
    QuantizationTable::from_candidates(entries, candidates, |t| nearest_entry(entries, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantizerMethod {
    GroupQuery,
    NearestPhase,
    Exhaustive,
}

impl QuantizerMethod {
    pub fn name(self) -> &'static str {
        match self {
            QuantizerMethod::GroupQuery => "group_query",
            QuantizerMethod::NearestPhase => "nearest_phase",
            QuantizerMethod::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for QuantizerMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QuantizerMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "group_query" | "gq" => Ok(QuantizerMethod::GroupQuery),
            "nearest_phase" | "np" => Ok(QuantizerMethod::NearestPhase),
            "exhaustive" => Ok(QuantizerMethod::Exhaustive),
            _ => Err(Error::Config(format!("unknown quantizer method `{s}`"))),
        }
    }
}

/// A codebook bound to weights and a selection method.
#[derive(Debug, Clone)]
pub struct Quantizer {
    pub method: QuantizerMethod,
    pub codebook: Codebook,
    pub weights: ObjectiveWeights,
    /// The partition this quantizer realises: the envelope table for
    /// group query and exhaustive search, the Voronoi table for nearest phase.
    pub table: QuantizationTable,
}

impl Quantizer {
    pub fn new(codebook: Codebook, weights: ObjectiveWeights, method: QuantizerMethod) -> Self {
        let table = match method {
            QuantizerMethod::NearestPhase => nearest_phase_table(&codebook),
            _ => build_lookup_table(&codebook, &weights),
        };
        Self {
            method,
            codebook,
            weights,
            table,
        }
    }

    pub fn quantize(&self, theta_star: f64) -> usize {
        match self.method {
            QuantizerMethod::GroupQuery => self.table.lookup(theta_star),
            QuantizerMethod::NearestPhase => nearest_phase_quantize(&self.codebook, theta_star),
            QuantizerMethod::Exhaustive => {
                exhaustive_quantize(&self.codebook, theta_star, &self.weights)
            }
        }
    }

    pub fn configure(&self, scene: &SceneGeometry) -> ReflectionConfig {
        let entries = self.codebook.entries();
        let states = expected_phases(scene, 0.0)
            .into_iter()
            .map(|t| {
                let i = self.quantize(t);
                ElementState {
                    amplitude: entries[i].amplitude,
                    phase: entries[i].phase,
                    index: Some(i),
                }
            })
            .collect();
        ReflectionConfig { states }
    }
}

/// `θ*_m = (C - φ_m) mod 2π` with `φ_m = 2π(D_m + d_m)/λ`.
pub fn expected_phases(scene: &SceneGeometry, c: f64) -> Vec<f64> {
    scene
        .total_phases()
        .into_iter()
        .map(|phi| wrap_phase(c - phi))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementState {
    pub amplitude: f64,
    pub phase: f64,
    /// Codebook index, `None` for continuous phases.
    pub index: Option<usize>,
}

/// The diagonal reflection matrix `Φ = diag(A_m e^{-jθ_m})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionConfig {
    pub states: Vec<ElementState>,
}

impl ReflectionConfig {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn coefficients(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.states
            .iter()
            .map(|s| Complex64::from_polar(s.amplitude, -s.phase))
    }
}

pub fn configure_ris(
    scene: &SceneGeometry,
    codebook: &Codebook,
    w: &ObjectiveWeights,
    method: QuantizerMethod,
) -> ReflectionConfig {
    Quantizer::new(codebook.clone(), *w, method).configure(scene)
}

/// Ideal continuous phases with unit amplitude.
pub fn continuous_config(scene: &SceneGeometry) -> ReflectionConfig {
    let states = expected_phases(scene, 0.0)
        .into_iter()
        .map(|phase| ElementState {
            amplitude: 1.0,
            phase,
            index: None,
        })
        .collect();
    ReflectionConfig { states }
}
