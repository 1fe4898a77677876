//! 3GPP TR 38.901 urban macro (UMa) path loss, used as the NLoS channel gain.
//!
//! Pinned constants (TR 38.901 Table 7.4.1-1):
//!
//! ```text
//! h_BS = 25 m, h_UT = 1.5 m, h_E = 1 m
//! d_3D  = sqrt(d_2D^2 + (h_BS - h_UT)^2)
//! d'_BP = 4 (h_BS - h_E)(h_UT - h_E) f_c / c
//! PL1   = 28.0 + 22 log10(d_3D) + 20 log10(f_c[GHz])                 10 m <= d_2D <= d'_BP
//! PL2   = 28.0 + 40 log10(d_3D) + 20 log10(f_c[GHz])
//!         - 9 log10(d'_BP^2 + (h_BS - h_UT)^2)                          d'_BP < d_2D <= 5 km
//! PL'   = 13.54 + 39.08 log10(d_3D) + 20 log10(f_c[GHz]) - 0.6 (h_UT - 1.5)
//! PL_NLOS = max(PL_LOS, PL')
//! ```
//!
//! The distance passed in is treated as the ground distance `d_2D`. Outside
//! `[10 m, 5 km]` the distance is clamped to the nearest bound and the result
//! is flagged. The loss in dB converts to a linear *amplitude* gain via
//! `10^(-PL/20)`.

use crate::units::{db_to_amplitude, SPEED_OF_LIGHT};

pub const UMA_BS_HEIGHT: f64 = 25.0;
pub const UMA_UT_HEIGHT: f64 = 1.5;
pub const UMA_ENV_HEIGHT: f64 = 1.0;
pub const UMA_MIN_DISTANCE: f64 = 10.0;
pub const UMA_MAX_DISTANCE: f64 = 5_000.0;

/// Result of a path-loss evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLoss {
    pub loss_db: f64,
    /// The distance was outside the model's validity range and was clamped.
    pub clamped: bool,
}

fn uma_los_db(d2d: f64, d3d: f64, fc_ghz: f64) -> f64 {
    let h = UMA_BS_HEIGHT - UMA_UT_HEIGHT;
    let d_bp =
        4.0 * (UMA_BS_HEIGHT - UMA_ENV_HEIGHT) * (UMA_UT_HEIGHT - UMA_ENV_HEIGHT) * fc_ghz * 1e9
            / SPEED_OF_LIGHT;
    if d2d <= d_bp {
        28.0 + 22.0 * d3d.log10() + 20.0 * fc_ghz.log10()
    } else {
        28.0 + 40.0 * d3d.log10() + 20.0 * fc_ghz.log10() - 9.0 * (d_bp * d_bp + h * h).log10()
    }
}

/// UMa NLoS path loss in dB at ground distance `distance` and wavelength `wavelength`.
pub fn uma_nlos_path_loss(distance: f64, wavelength: f64) -> PathLoss {
    let clamped_d = distance.clamp(UMA_MIN_DISTANCE, UMA_MAX_DISTANCE);
    let clamped = clamped_d != distance;
    let fc_ghz = SPEED_OF_LIGHT / wavelength / 1e9;
    let h = UMA_BS_HEIGHT - UMA_UT_HEIGHT;
    let d3d = (clamped_d * clamped_d + h * h).sqrt();
    let los = uma_los_db(clamped_d, d3d, fc_ghz);
    let nlos = 13.54 + 39.08 * d3d.log10() + 20.0 * fc_ghz.log10() - 0.6 * (UMA_UT_HEIGHT - 1.5);
    PathLoss {
        loss_db: los.max(nlos),
        clamped,
    }
}

/// Linear amplitude gain of the UMa NLoS model.
pub fn uma_nlos_amplitude(distance: f64, wavelength: f64) -> (f64, bool) {
    let pl = uma_nlos_path_loss(distance, wavelength);
    (db_to_amplitude(-pl.loss_db), pl.clamped)
}
