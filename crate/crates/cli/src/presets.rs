//! Named experiments.
//!
//! The `fig*` presets use the reference urban macro setup: BS 90 m and user
//! 70 m from the surface centre, 4096 elements at 5 cm pitch, 2.6 GHz,
//! 20 dBm transmit power, -90 dBm noise, K1 = K2 = 4, 2000 trials and users
//! uniform on a quarter circle. The replay presets model the short-range
//! prototype links instead.

use ris_core::montecarlo::{Scheme, SweepVariable};
use ris_core::QuantizerMethod;

use crate::config::{
    ChannelModel, ChannelSection, CodebookSection, ExperimentConfig, PlacementSection,
    SceneSection, SweepSection,
};

pub const PRESET_NAMES: [&str; 6] = [
    "fig4",
    "fig5",
    "fig6",
    "fig7",
    "table1-replay",
    "fig13-replay",
];

/// Phase and amplitude differences between the two states of the 5.8 GHz
/// prototype, by incidence angle: `(angle_deg, phase_deg, amplitude_db)`.
pub const TABLE1: [(f64, f64, f64); 6] = [
    (10.0, 180.0, 2.0),
    (20.0, 160.0, 0.7),
    (30.0, 132.0, 0.1),
    (40.0, 117.0, 0.3),
    (50.0, 107.0, 2.3),
    (60.0, 76.0, 1.5),
];

/// Capabilities swept on the 2.6 GHz prototype, degrees.
pub const FIG13_OMEGAS: [f64; 6] = [180.0, 150.0, 120.0, 90.0, 60.0, 30.0];

pub const FIG6_2BIT_DB: [f64; 4] = [0.0, -6.0, -10.0, -3.0];
pub const FIG6_3BIT_DB: [f64; 8] = [0.0, -3.0, -6.0, -9.0, -10.0, -7.0, -3.0, -2.0];
pub const FIG7_CODEBOOK1_DB: [f64; 4] = [0.0, -5.0, -6.0, -2.0];
pub const FIG7_CODEBOOK2_DB: [f64; 4] = FIG6_2BIT_DB;

fn urban_scene() -> SceneSection {
    SceneSection {
        bs_distance_m: 90.0,
        user_distance_m: 70.0,
        user_angle_deg: 45.0,
        bs_azimuth_deg: 45.0,
        bs_elevation_deg: 15.0,
        elements: 4096,
        pitch_h_m: 0.05,
        pitch_v_m: 0.05,
        frequency_hz: 2.6e9,
        path_loss_exponent: 2.0,
        antenna_gain_db: 0.0,
    }
}

fn channel(label: &str, model: ChannelModel) -> ChannelSection {
    let k = (model == ChannelModel::Rician).then_some(4.0);
    ChannelSection {
        label: label.into(),
        model,
        k1: k,
        k2: k,
        nlos_gain: None,
    }
}

fn grid(label: &str, bits: u32, amplitudes_db: Option<&[f64]>) -> CodebookSection {
    CodebookSection::Grid {
        label: label.into(),
        bits,
        omega_deg: None,
        amplitudes_db: amplitudes_db.map(<[f64]>::to_vec),
    }
}

fn sweep(
    variable: SweepVariable,
    start: f64,
    stop: f64,
    step: f64,
    methods: Vec<Scheme>,
) -> SweepSection {
    SweepSection {
        variable,
        values: None,
        start: Some(start),
        stop: Some(stop),
        step: Some(step),
        methods,
    }
}

fn base(
    name: &str,
    channels: Vec<ChannelSection>,
    codebooks: Vec<CodebookSection>,
    sweep: SweepSection,
) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        trials: 2000,
        seed: 1,
        transmit_dbm: 20.0,
        noise_dbm: -90.0,
        scene: urban_scene(),
        placement: PlacementSection::default(),
        channels,
        codebooks,
        sweep,
    }
}

const GQ: Scheme = Scheme::Quantized(QuantizerMethod::GroupQuery);
const NP: Scheme = Scheme::Quantized(QuantizerMethod::NearestPhase);

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let cfg = match name {
        "fig4" => base(
            "fig4",
            vec![
                channel("pure_los", ChannelModel::PureLos),
                channel("rician", ChannelModel::Rician),
                channel("rayleigh", ChannelModel::Rayleigh),
            ],
            vec![],
            SweepSection {
                variable: SweepVariable::Elements,
                values: Some(vec![64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0]),
                start: None,
                stop: None,
                step: None,
                methods: vec![Scheme::Continuous],
            },
        ),
        "fig5" => base(
            "fig5",
            vec![channel("rician", ChannelModel::Rician)],
            vec![
                grid("1bit", 1, None),
                grid("2bit", 2, None),
                grid("3bit", 3, None),
            ],
            sweep(
                SweepVariable::Decrement,
                0.0,
                180.0,
                5.0,
                vec![Scheme::Continuous, GQ],
            ),
        ),
        "fig6" => base(
            "fig6",
            vec![channel("rician", ChannelModel::Rician)],
            vec![
                grid("2bit", 2, Some(&FIG6_2BIT_DB)),
                grid("3bit", 3, Some(&FIG6_3BIT_DB)),
            ],
            sweep(
                SweepVariable::Decrement,
                0.0,
                180.0,
                10.0,
                vec![Scheme::Continuous, GQ, NP],
            ),
        ),
        "fig7" => base(
            "fig7",
            vec![channel("rician", ChannelModel::Rician)],
            vec![
                grid("codebook1", 2, Some(&FIG7_CODEBOOK1_DB)),
                grid("codebook2", 2, Some(&FIG7_CODEBOOK2_DB)),
            ],
            sweep(
                SweepVariable::Decrement,
                0.0,
                260.0,
                5.0,
                vec![Scheme::Continuous, GQ],
            ),
        ),
        "table1-replay" => {
            let codebooks = TABLE1
                .iter()
                .map(|&(angle, dphase, damp)| CodebookSection::Measured {
                    label: format!("incidence{angle:.0}"),
                    file: None,
                    rows: Some(vec![[3.0, 0.0, 0.0], [7.0, dphase, -damp]]),
                    voltages: vec![3.0, 7.0],
                })
                .collect();
            let mut c = base(
                "table1-replay",
                vec![channel("pure_los", ChannelModel::PureLos)],
                codebooks,
                sweep(
                    SweepVariable::CodebookSet,
                    0.0,
                    5.0,
                    1.0,
                    vec![Scheme::Continuous, GQ],
                ),
            );
            c.scene = SceneSection {
                bs_distance_m: 2.5,
                user_distance_m: 2.5,
                elements: 1100,
                pitch_h_m: 0.0143,
                pitch_v_m: 0.01027,
                frequency_hz: 5.8e9,
                ..urban_scene()
            };
            c
        }
        "fig13-replay" => {
            let codebooks = FIG13_OMEGAS
                .iter()
                .map(|&w| CodebookSection::Grid {
                    label: format!("omega{w:.0}"),
                    bits: 1,
                    omega_deg: Some(w),
                    amplitudes_db: None,
                })
                .collect();
            let mut c = base(
                "fig13-replay",
                vec![channel("pure_los", ChannelModel::PureLos)],
                codebooks,
                sweep(
                    SweepVariable::CodebookSet,
                    0.0,
                    5.0,
                    1.0,
                    vec![Scheme::Continuous, GQ],
                ),
            );
            c.scene = SceneSection {
                bs_distance_m: 2.5,
                user_distance_m: 2.5,
                elements: 256,
                pitch_h_m: 0.045,
                pitch_v_m: 0.045,
                frequency_hz: 2.6e9,
                ..urban_scene()
            };
            c
        }
        _ => return None,
    };
    Some(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    #[test]
    fn every_preset_resolves() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            let spec = cfg.to_spec(Path::new(".")).unwrap();
            assert_eq!(spec.name, name);
            let text = cfg.to_toml().unwrap();
            assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
        }
        assert!(preset("fig99").is_none());
    }

    #[test]
    fn table1_codebooks_carry_the_measured_differences() {
        let spec = preset("table1-replay")
            .unwrap()
            .to_spec(Path::new("."))
            .unwrap();
        for (cb, &(_, dphase, damp)) in spec.codebooks.iter().zip(&TABLE1) {
            let ris_core::montecarlo::CodebookSource::Explicit(cb) = &cb.source else {
                panic!("measured codebooks resolve to explicit entries");
            };
            let e = cb.entries();
            assert!(((e[1].phase - e[0].phase).to_degrees() - dphase).abs() < 1e-9);
            assert!((20.0 * (e[0].amplitude / e[1].amplitude).log10() - damp).abs() < 1e-9);
        }
    }
}
