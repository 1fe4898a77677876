//! Unit conversions and phase helpers.

use std::f64::consts::TAU;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn db_to_linear_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_power_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Field (amplitude) convention: `10^(dB/20)`.
pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

pub fn amplitude_to_db(a: f64) -> f64 {
    20.0 * a.log10()
}

/// Milliwatts to dBm.
pub fn mw_to_dbm(mw: f64) -> f64 {
    linear_power_to_db(mw)
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear_power(dbm)
}

pub fn wavelength_from_hz(freq_hz: f64) -> f64 {
    SPEED_OF_LIGHT / freq_hz
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_phase(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid can return TAU itself for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Absolute angular distance on the circle, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_phase(a - b);
    d.min(TAU - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn amplitude_convention() {
        assert!((db_to_amplitude(-6.0) - 0.501187).abs() < 1e-6);
        assert!((db_to_amplitude(-10.0) - 0.316228).abs() < 1e-6);
        assert!((db_to_amplitude(-3.0) - 0.707946).abs() < 1e-6);
        assert!((amplitude_to_db(db_to_amplitude(-7.5)) + 7.5).abs() < 1e-12);
    }

    #[test]
    fn wrap_handles_edges() {
        assert_eq!(wrap_phase(0.0), 0.0);
        assert!(wrap_phase(-1e-18) < TAU);
        assert!((wrap_phase(-PI / 2.0) - 1.5 * PI).abs() < 1e-15);
        assert!((wrap_phase(5.0 * PI) - PI).abs() < 1e-12);
    }

    #[test]
    fn circular_distance_wraps() {
        assert!((circular_distance(TAU - 0.1, 0.0) - 0.1).abs() < 1e-12);
        assert!((circular_distance(0.0, PI) - PI).abs() < 1e-12);
    }
}
