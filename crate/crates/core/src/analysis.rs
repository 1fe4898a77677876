//! Closed-form long-term average received power (LARP).
//!
//! For fixed geometry and expectation over the NLoS fading,
//!
//! ```text
//! Γ = κ_nlos · Σ A_m² + κ_los · |Σ A_m e^{-j(φ_m + θ_m)}|²
//! κ_los  = K1 K2 η_los / ((K1+1)(K2+1))
//! κ_nlos = (K1 η_nlos1 + K2 η_nlos2 + η_nlos3) / ((K1+1)(K2+1))
//! ```
//!
//! The `η` constants are the power products of the channel amplitudes:
//!
//! ```text
//! η_los   = P_t G_a D_1^-α d_1^-α      η_nlos1 = P_t G_a D_1^-α L(d_1)²
//! η_nlos2 = P_t d_1^-α L(D_1)²         η_nlos3 = P_t L(D_1)² L(d_1)²
//! ```
//!
//! With `θ*` uniform on `[0, 2π)` and a partition `{c_i}` of expected
//! phases, the expected LARP of a quantized RIS is
//!
//! ```text
//! E = κ_nlos M Σ (μ_i/2π) A_i² + κ_los M²/(4π²) · |Σ_i A_i ∫_{c_i} e^{j(θ* - θ_i)} dθ*|²
//! ```
//!
//! which the special cases below (uniform grid, 1-bit pure LoS) reduce to.
//! Loss factors are reported in dB, `ε = 10 log10(E / Γ_max)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamformer::QuantizationTable;
use crate::channel::{nlos_gain, RicianConfig};
use crate::codebook::{is_sufficient, Codebook};
use crate::geometry::SceneGeometry;
use crate::units::{linear_power_to_db, mw_to_dbm};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AnalysisConstants {
    pub kappa_los: f64,
    pub kappa_nlos: f64,
    pub eta_los: f64,
    pub eta_nlos1: f64,
    pub eta_nlos2: f64,
    pub eta_nlos3: f64,
    /// Linear, mW.
    pub transmit_power: f64,
}

impl AnalysisConstants {
    /// Constants given directly by their `κ` values; the `η` fields are left at zero.
    pub fn from_kappas(kappa_los: f64, kappa_nlos: f64, transmit_power: f64) -> Self {
        Self {
            kappa_los,
            kappa_nlos,
            transmit_power,
            ..Self::default()
        }
    }

    /// Field-wise mean, e.g. over user placements.
    pub fn mean<'a>(items: impl IntoIterator<Item = &'a AnalysisConstants>) -> Self {
        let mut acc = Self::default();
        let mut n = 0usize;
        for c in items {
            acc.kappa_los += c.kappa_los;
            acc.kappa_nlos += c.kappa_nlos;
            acc.eta_los += c.eta_los;
            acc.eta_nlos1 += c.eta_nlos1;
            acc.eta_nlos2 += c.eta_nlos2;
            acc.eta_nlos3 += c.eta_nlos3;
            acc.transmit_power += c.transmit_power;
            n += 1;
        }
        if n == 0 {
            return acc;
        }
        let n = n as f64;
        Self {
            kappa_los: acc.kappa_los / n,
            kappa_nlos: acc.kappa_nlos / n,
            eta_los: acc.eta_los / n,
            eta_nlos1: acc.eta_nlos1 / n,
            eta_nlos2: acc.eta_nlos2 / n,
            eta_nlos3: acc.eta_nlos3 / n,
            transmit_power: acc.transmit_power / n,
        }
    }
}

pub fn analysis_constants(
    scene: &SceneGeometry,
    rician: &RicianConfig,
    transmit_power: f64,
) -> AnalysisConstants {
    let cfg = &scene.config;
    let big_d = scene.first_bs_distance();
    let small_d = scene.first_user_distance();
    let los_h = cfg.antenna_gain * big_d.powf(-cfg.path_loss_exponent);
    let los_f = small_d.powf(-cfg.path_loss_exponent);
    let nl_h = nlos_gain(rician.nlos_gain, big_d, cfg.wavelength).powi(2);
    let nl_f = nlos_gain(rician.nlos_gain, small_d, cfg.wavelength).powi(2);

    let eta_los = transmit_power * los_h * los_f;
    let eta_nlos1 = transmit_power * los_h * nl_f;
    let eta_nlos2 = transmit_power * los_f * nl_h;
    let eta_nlos3 = transmit_power * nl_h * nl_f;
    let (k1, k2) = (rician.k1, rician.k2);
    let denom = (k1 + 1.0) * (k2 + 1.0);
    AnalysisConstants {
        kappa_los: k1 * k2 * eta_los / denom,
        kappa_nlos: (k1 * eta_nlos1 + k2 * eta_nlos2 + eta_nlos3) / denom,
        eta_los,
        eta_nlos1,
        eta_nlos2,
        eta_nlos3,
        transmit_power,
    }
}

/// LARP of a given configuration; `total_phases[m] = φ_m + θ_m`.
pub fn larp(
    constants: &AnalysisConstants,
    amplitudes: &[f64],
    total_phases: &[f64],
) -> Result<f64> {
    if amplitudes.len() != total_phases.len() {
        return Err(Error::DimensionMismatch {
            expected: amplitudes.len(),
            found: total_phases.len(),
        });
    }
    let power: f64 = amplitudes.iter().map(|a| a * a).sum();
    let coherent: Complex64 = amplitudes
        .iter()
        .zip(total_phases)
        .map(|(&a, &p)| Complex64::from_polar(a, -p))
        .sum();
    Ok(constants.kappa_nlos * power + constants.kappa_los * coherent.norm_sqr())
}

/// `Γ_max = κ_nlos M + κ_los M²`, reached by continuous co-phasing.
pub fn larp_max_continuous(constants: &AnalysisConstants, m: usize) -> f64 {
    let m = m as f64;
    constants.kappa_nlos * m + constants.kappa_los * m * m
}

/// Parameters of the insufficient-capability uniform-grid expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsufficientGridParams {
    pub a: f64,
    pub b: f64,
    pub p1: f64,
    pub p2: f64,
}

impl InsufficientGridParams {
    pub fn new(k: u32, omega: f64) -> Self {
        let n = (1u64 << k) as f64;
        Self {
            a: PI - omega / 2.0,
            b: omega / (2.0 * (n - 1.0)),
            p1: n / TAU,
            p2: 1.0 / TAU,
        }
    }

    /// `|E[e^{jδ}]|²` for the insufficient branch.
    pub fn factor(&self) -> f64 {
        4.0 * (self.p1 * self.b.sin() + self.p2 * (self.a.sin() - self.b.sin())).powi(2)
    }
}

/// `|E[e^{jδ}]|²` for the unit-amplitude uniform grid.
pub fn uniform_coherence_factor(k: u32, omega: f64) -> f64 {
    if is_sufficient(k, omega) {
        let n = (1u64 << k) as f64;
        n * n / (PI * PI) * (PI / n).sin().powi(2)
    } else {
        InsufficientGridParams::new(k, omega).factor()
    }
}

/// Expected LARP with unit amplitudes on the `k`-bit uniform grid.
pub fn expected_larp_uniform(constants: &AnalysisConstants, m: usize, k: u32, omega: f64) -> f64 {
    let mf = m as f64;
    constants.kappa_nlos * mf + constants.kappa_los * mf * mf * uniform_coherence_factor(k, omega)
}

/// `Σ_i A_i ∫_{c_i} e^{j(θ* - θ_i)} dθ*`, integrated analytically per segment.
pub fn coherent_integral(table: &QuantizationTable) -> Complex64 {
    let entries = table.entries();
    table
        .segments()
        .map(|(s, e, i)| {
            let th = entries[i].phase;
            let c = (e - th).sin() - (s - th).sin();
            let si = (s - th).cos() - (e - th).cos();
            Complex64::new(c, si) * entries[i].amplitude
        })
        .sum()
}

/// Expected LARP for an arbitrary codebook and its selection partition.
pub fn expected_larp_general(
    constants: &AnalysisConstants,
    m: usize,
    codebook: &Codebook,
    table: &QuantizationTable,
) -> Result<f64> {
    if !table.matches(codebook) {
        return Err(Error::TableMismatch);
    }
    let mf = m as f64;
    let power: f64 = table
        .lengths()
        .iter()
        .zip(codebook.amplitudes())
        .map(|(mu, a)| mu / TAU * a * a)
        .sum();
    let coherent = coherent_integral(table).norm_sqr() / (4.0 * PI * PI);
    Ok(constants.kappa_nlos * mf * power + constants.kappa_los * mf * mf * coherent)
}

/// 1-bit, pure LoS expected LARP with state amplitudes `A1`, `A2`.
pub fn expected_larp_1bit_los(eta_los: f64, m: usize, a1: f64, a2: f64, omega: f64) -> f64 {
    let mf = m as f64;
    let w = omega.min(PI);
    eta_los * mf * mf / (PI * PI) * (a1 * a1 + a2 * a2 - 2.0 * a1 * a2 * w.cos())
}

/// `ε = 10 log10(E / Γ_max)` in dB.
pub fn loss_factor(expected: f64, larp_max: f64) -> f64 {
    linear_power_to_db(expected / larp_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LarpSource {
    ClosedForm,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LarpReport {
    /// Linear, mW.
    pub larp: f64,
    pub larp_dbm: f64,
    pub loss_factor_db: f64,
    pub method: String,
    pub source: LarpSource,
}

impl LarpReport {
    pub fn new(larp: f64, larp_max: f64, method: impl Into<String>, source: LarpSource) -> Self {
        Self {
            larp,
            larp_dbm: mw_to_dbm(larp),
            loss_factor_db: loss_factor(larp, larp_max),
            method: method.into(),
            source,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamformer::{build_lookup_table, nearest_phase_table, ObjectiveWeights};
    use crate::channel::NlosGainModel;
    use crate::codebook::{make_codebook, sufficient_threshold, Amplitudes};
    use crate::geometry::{build_scene, SceneConfig};
    use proptest::prelude::*;

    fn unit() -> AnalysisConstants {
        AnalysisConstants::from_kappas(1.0, 0.0, 1.0)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn scene() -> SceneGeometry {
        build_scene(&SceneConfig {
            bs_distance: 90.0,
            user_distance: 70.0,
            user_angle: 0.0,
            bs_azimuth: 0.0,
            bs_elevation: 0.0,
            elements: 1,
            pitch_h: 0.05,
            pitch_v: 0.05,
            wavelength: 0.1,
            path_loss_exponent: 2.0,
            antenna_gain: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn constants_limits() {
        let s = scene();
        let c = analysis_constants(&s, &RicianConfig::rayleigh(NlosGainModel::UmaNlos), 1.0);
        assert_eq!(c.kappa_los, 0.0);
        let c = analysis_constants(&s, &RicianConfig::pure_los(NlosGainModel::UmaNlos), 1.0);
        assert!(rel(c.kappa_los, c.eta_los) < 1e-8);
        assert!(c.kappa_nlos < 1e-8 * c.eta_los);
        // power product of the two LoS amplitudes at 90 m and 70 m
        assert!(rel(c.eta_los, 1.0 / (8100.0 * 4900.0)) < 1e-12);
    }

    #[test]
    fn larp_examples() {
        let k = AnalysisConstants::from_kappas(2.0, 3.0, 1.0);
        let m = 7;
        let v = larp(&k, &[1.0; 7], &[0.4; 7]).unwrap();
        assert!(rel(v, larp_max_continuous(&k, m)) < 1e-14);
        let v = larp(&k, &[1.0, 1.0], &[0.0, PI]).unwrap();
        assert!((v - 6.0).abs() < 1e-12);
        assert_eq!(larp_max_continuous(&k, 0), 0.0);
        assert!(larp(&k, &[1.0], &[]).is_err());
    }

    #[test]
    fn uniform_grid_anchors() {
        let f = uniform_coherence_factor(1, PI);
        assert!(rel(f, 4.0 / (PI * PI)) < 1e-14);
        assert!((loss_factor(f, 1.0) + 3.9224).abs() < 1e-3);
        assert!(uniform_coherence_factor(8, TAU) > 0.9999);
        for k in 1..=8 {
            let t = sufficient_threshold(k);
            let suff = uniform_coherence_factor(k, t);
            let insuff = InsufficientGridParams::new(k, t).factor();
            assert!(rel(suff, insuff) < 1e-12, "k={k}");
        }
    }

    #[test]
    fn one_bit_los_examples() {
        let full = expected_larp_1bit_los(1.0, 10, 1.0, 1.0, PI);
        assert!(rel(full, 400.0 / (PI * PI)) < 1e-14);
        let w30 = expected_larp_1bit_los(1.0, 10, 1.0, 1.0, 30f64.to_radians());
        assert!((loss_factor(w30, full) + 11.74).abs() < 0.01);
        let a = expected_larp_1bit_los(1.0, 10, 0.7, 1e-300, 0.3);
        let b = expected_larp_1bit_los(1.0, 10, 0.7, 1e-300, 2.9);
        assert!(rel(a, b) < 1e-12);
        assert_eq!(
            expected_larp_1bit_los(1.0, 10, 0.5, 0.8, 4.0),
            expected_larp_1bit_los(1.0, 10, 0.5, 0.8, 5.0)
        );
    }

    #[test]
    fn loss_factor_values() {
        assert_eq!(loss_factor(2.0, 2.0), 0.0);
        assert!((loss_factor(0.5, 1.0) + 3.0103).abs() < 1e-4);
    }

    #[test]
    fn single_entry_has_no_coherent_gain() {
        let cb = Codebook::from_entries(
            0,
            TAU,
            vec![crate::codebook::CodebookEntry {
                phase: 0.0,
                amplitude: 0.8,
            }],
        )
        .unwrap();
        let t = build_lookup_table(&cb, &ObjectiveWeights::pure_los());
        let e = expected_larp_general(&unit(), 100, &cb, &t).unwrap();
        assert!(e.abs() < 1e-20);
    }

    #[test]
    fn mismatched_table_is_rejected() {
        let a = make_codebook(2, TAU, Amplitudes::uniform(2)).unwrap();
        let b = make_codebook(2, PI, Amplitudes::uniform(2)).unwrap();
        let t = build_lookup_table(&a, &ObjectiveWeights::pure_los());
        assert!(matches!(
            expected_larp_general(&unit(), 4, &b, &t),
            Err(Error::TableMismatch)
        ));
    }

    #[test]
    fn general_matches_special_cases() {
        for k in 1..=4 {
            for w in [0.5, 1.5, 3.0, 4.5, TAU] {
                let cb = make_codebook(k, w, Amplitudes::uniform(k)).unwrap();
                let t = build_lookup_table(&cb, &ObjectiveWeights::pure_los());
                let g = expected_larp_general(&unit(), 64, &cb, &t).unwrap();
                let u = expected_larp_uniform(&unit(), 64, k, w);
                assert!(rel(g, u) < 1e-9, "k={k} w={w}: {g} vs {u}");
            }
        }
        for (a1, a2, w) in [
            (1.0, 0.5, 1.0),
            (0.4, 0.9, 2.0),
            (0.8, 0.8, PI),
            (0.3, 1.0, 5.0),
        ] {
            let cb = make_codebook(1, w, Amplitudes::Linear(vec![a1, a2])).unwrap();
            let t = build_lookup_table(&cb, &ObjectiveWeights::pure_los());
            let g = expected_larp_general(&unit(), 32, &cb, &t).unwrap();
            let c = expected_larp_1bit_los(1.0, 32, a1, a2, w);
            assert!(rel(g, c) < 1e-9, "{a1} {a2} {w}: {g} vs {c}");
        }
    }

    #[test]
    fn analytic_integral_matches_quadrature() {
        let cb = make_codebook(2, 3.5, Amplitudes::Db(vec![0.0, -6.0, -10.0, -3.0])).unwrap();
        for t in [
            build_lookup_table(&cb, &ObjectiveWeights::new(1.0, 0.4).unwrap()),
            nearest_phase_table(&cb),
        ] {
            let n = 200_000;
            let h = TAU / n as f64;
            let q: Complex64 = (0..n)
                .map(|j| {
                    let th = (j as f64 + 0.5) * h;
                    let e = t.entries()[t.lookup(th)];
                    Complex64::from_polar(e.amplitude, th - e.phase) * h
                })
                .sum();
            let a = coherent_integral(&t);
            assert!((q - a).norm() < 1e-4, "{q} vs {a}");
        }
    }

    #[test]
    fn double_sum_collapses() {
        // Σ_i Σ_i' A_i A_i' (S_i S_i' + C_i C_i') == |Σ A_i (C_i + j S_i)|²
        let cb = make_codebook(
            3,
            5.0,
            Amplitudes::Db(vec![0.0, -3.0, -6.0, -9.0, -10.0, -7.0, -3.0, -2.0]),
        )
        .unwrap();
        let t = build_lookup_table(&cb, &ObjectiveWeights::new(2.0, 1.0).unwrap());
        let e = t.entries();
        let per: Vec<Complex64> = (0..e.len())
            .map(|i| {
                t.segments()
                    .filter(|s| s.2 == i)
                    .map(|(s, f, _)| {
                        let th = e[i].phase;
                        Complex64::new(
                            (f - th).sin() - (s - th).sin(),
                            (s - th).cos() - (f - th).cos(),
                        )
                    })
                    .sum()
            })
            .collect();
        let mut dbl = 0.0;
        for i in 0..e.len() {
            for j in 0..e.len() {
                dbl += e[i].amplitude
                    * e[j].amplitude
                    * (per[i].im * per[j].im + per[i].re * per[j].re);
            }
        }
        assert!(rel(dbl, coherent_integral(&t).norm_sqr()) < 1e-12);
    }

    proptest! {
        #[test]
        fn double_sum_oracle(m in 1usize..64, kl in 0.0f64..5.0, kn in 0.0f64..5.0,
                             seed in proptest::collection::vec((0.05f64..1.0, 0.0f64..TAU), 64)) {
            let k = AnalysisConstants::from_kappas(kl, kn, 1.0);
            let (a, p): (Vec<f64>, Vec<f64>) = seed[..m].iter().copied().unzip();
            let mut lit = 0.0;
            for i in 0..m {
                lit += kn * a[i] * a[i];
                for j in 0..m {
                    lit += kl * a[i] * a[j] * (p[i] - p[j]).cos();
                }
            }
            let v = larp(&k, &a, &p).unwrap();
            prop_assert!((v - lit).abs() <= 1e-12 * lit.abs().max(1e-300) + 1e-12 * (kl + kn) * (m * m) as f64 * f64::EPSILON);
        }

        #[test]
        fn uniform_is_monotone_in_omega(k in 1u32..=4, a in 0.05f64..TAU, b in 0.05f64..TAU) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(uniform_coherence_factor(k, lo) <= uniform_coherence_factor(k, hi) + 1e-15);
        }

        #[test]
        fn general_is_bounded_by_continuous(k in 1u32..=3, w in 0.5f64..TAU, kl in 0.0f64..3.0, kn in 0.0f64..3.0,
                                            db in proptest::collection::vec(-10.0f64..0.0, 8)) {
            let cb = make_codebook(k, w, Amplitudes::Db(db[..1 << k].to_vec())).unwrap();
            let c = AnalysisConstants::from_kappas(kl, kn, 1.0);
            let t = build_lookup_table(&cb, &ObjectiveWeights::new(kl, kn).unwrap());
            let e = expected_larp_general(&c, 128, &cb, &t).unwrap();
            prop_assert!(e <= larp_max_continuous(&c, 128) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn uniform_is_monotone_in_bits() {
        for k in 1..8 {
            assert!(uniform_coherence_factor(k, TAU) <= uniform_coherence_factor(k + 1, TAU));
        }
    }
}
