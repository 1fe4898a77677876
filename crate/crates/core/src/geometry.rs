//! Scene layout: BS, RIS and user positions and the per-element distances.
//!
//! The RIS lies in the `x = 0` plane with its normal along `+x`. Elements sit
//! on a rectangular grid centred on the origin, indexed row-major with row 0
//! at the top (`+z`). The horizontal axis of the array is `y`.
//!
//! The user sits on a circle of radius `user_distance` in the horizontal
//! plane; `user_angle` is measured from broadside towards `+y`. The BS sits
//! at `bs_distance` in the direction given by `bs_azimuth` (from broadside,
//! towards `+y`) and `bs_elevation` (above the horizontal plane).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Geometry parameters from which a [`SceneGeometry`] is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    /// BS to RIS-centre distance `D_0`, meters.
    pub bs_distance: f64,
    /// User to RIS-centre distance `d_0`, meters.
    pub user_distance: f64,
    /// Radians from broadside.
    pub user_angle: f64,
    pub bs_azimuth: f64,
    pub bs_elevation: f64,
    /// Element count `M`; laid out as the most-square `rows × cols` grid.
    pub elements: usize,
    /// Horizontal element pitch `d_h`, meters.
    pub pitch_h: f64,
    /// Vertical element pitch `d_v`, meters.
    pub pitch_v: f64,
    pub wavelength: f64,
    /// Path loss exponent `α` of the LoS amplitude law.
    pub path_loss_exponent: f64,
    /// Linear antenna gain `G_a` on the BS→RIS LoS link.
    pub antenna_gain: f64,
}

impl SceneConfig {
    /// Same scene with the user moved to `angle` radians.
    pub fn with_user_angle(&self, angle: f64) -> Self {
        Self {
            user_angle: angle,
            ..self.clone()
        }
    }

    pub fn with_elements(&self, elements: usize) -> Self {
        Self {
            elements,
            ..self.clone()
        }
    }
}

/// A built scene with exact per-element distances.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneGeometry {
    pub config: SceneConfig,
    pub rows: usize,
    pub cols: usize,
    /// `D_m`, BS to element `m`.
    pub bs_distances: Vec<f64>,
    /// `d_m`, element `m` to user.
    pub user_distances: Vec<f64>,
}

/// Most-square factorisation `rows × cols = m` with `rows ≤ cols`.
pub fn grid_dims(m: usize) -> (usize, usize) {
    let mut rows = (m as f64).sqrt().floor() as usize;
    while rows > 1 && !m.is_multiple_of(rows) {
        rows -= 1;
    }
    let rows = rows.max(1);
    (rows, m / rows)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

/// Element centre positions, row-major.
pub fn element_positions(rows: usize, cols: usize, pitch_h: f64, pitch_v: f64) -> Vec<[f64; 3]> {
    let cy = (cols as f64 - 1.0) / 2.0;
    let cz = (rows as f64 - 1.0) / 2.0;
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            out.push([0.0, (c as f64 - cy) * pitch_h, (cz - r as f64) * pitch_v]);
        }
    }
    out
}

impl SceneConfig {
    pub fn bs_position(&self) -> [f64; 3] {
        let (se, ce) = self.bs_elevation.sin_cos();
        let (sa, ca) = self.bs_azimuth.sin_cos();
        [
            self.bs_distance * ce * ca,
            self.bs_distance * ce * sa,
            self.bs_distance * se,
        ]
    }

    pub fn user_position(&self) -> [f64; 3] {
        let (s, c) = self.user_angle.sin_cos();
        [self.user_distance * c, self.user_distance * s, 0.0]
    }
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Lays out the grid and computes `D_m`, `d_m` for every element.
pub fn build_scene(config: &SceneConfig) -> Result<SceneGeometry> {
    check_positive("bs_distance", config.bs_distance)?;
    check_positive("user_distance", config.user_distance)?;
    check_positive("pitch_h", config.pitch_h)?;
    check_positive("pitch_v", config.pitch_v)?;
    check_positive("wavelength", config.wavelength)?;
    check_positive("antenna_gain", config.antenna_gain)?;
    if !(config.path_loss_exponent.is_finite() && config.path_loss_exponent >= 0.0) {
        return Err(Error::Config(format!(
            "path_loss_exponent must be non-negative, got {}",
            config.path_loss_exponent
        )));
    }
    if config.elements == 0 {
        return Err(Error::Config("element count must be positive".into()));
    }
    if !config.user_angle.is_finite()
        || !config.bs_azimuth.is_finite()
        || !config.bs_elevation.is_finite()
    {
        return Err(Error::Config("angles must be finite".into()));
    }

    let (rows, cols) = grid_dims(config.elements);
    let positions = element_positions(rows, cols, config.pitch_h, config.pitch_v);
    let bs = config.bs_position();
    let user = config.user_position();
    let bs_distances: Vec<f64> = positions.iter().map(|&p| dist(p, bs)).collect();
    let user_distances: Vec<f64> = positions.iter().map(|&p| dist(p, user)).collect();

    if bs_distances
        .iter()
        .chain(&user_distances)
        .any(|&d| d.is_nan() || d <= 0.0)
    {
        return Err(Error::Config(
            "an element coincides with the BS or user".into(),
        ));
    }

    Ok(SceneGeometry {
        config: config.clone(),
        rows,
        cols,
        bs_distances,
        user_distances,
    })
}

impl SceneGeometry {
    pub fn element_count(&self) -> usize {
        self.bs_distances.len()
    }

    pub fn wavelength(&self) -> f64 {
        self.config.wavelength
    }

    /// `D_1`, the distance used for the common BS→RIS amplitude.
    pub fn first_bs_distance(&self) -> f64 {
        self.bs_distances[0]
    }

    /// `d_1`, the distance used for the common RIS→user amplitude.
    pub fn first_user_distance(&self) -> f64 {
        self.user_distances[0]
    }

    /// Half the physical array diagonal (`cols·d_h` by `rows·d_v`).
    pub fn half_diagonal(&self) -> f64 {
        let w = self.cols as f64 * self.config.pitch_h;
        let h = self.rows as f64 * self.config.pitch_v;
        0.5 * (w * w + h * h).sqrt()
    }

    /// Total LoS phase `φ_m = 2π(D_m + d_m)/λ`, not wrapped.
    pub fn total_phases(&self) -> Vec<f64> {
        let k = std::f64::consts::TAU / self.config.wavelength;
        self.bs_distances
            .iter()
            .zip(&self.user_distances)
            .map(|(big, small)| k * (big + small))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    pub(crate) fn base(elements: usize) -> SceneConfig {
        SceneConfig {
            bs_distance: 90.0,
            user_distance: 70.0,
            user_angle: FRAC_PI_4,
            bs_azimuth: FRAC_PI_4,
            bs_elevation: 15f64.to_radians(),
            elements,
            pitch_h: 0.05,
            pitch_v: 0.05,
            wavelength: crate::units::wavelength_from_hz(2.6e9),
            path_loss_exponent: 2.0,
            antenna_gain: 1.0,
        }
    }

    #[test]
    fn grid_is_most_square() {
        assert_eq!(grid_dims(1), (1, 1));
        assert_eq!(grid_dims(4096), (64, 64));
        assert_eq!(grid_dims(1100), (25, 44));
        assert_eq!(grid_dims(7), (1, 7));
        assert_eq!(grid_dims(12), (3, 4));
    }

    #[test]
    fn single_element_sits_at_centre() {
        let s = build_scene(&base(1)).unwrap();
        assert!((s.bs_distances[0] - 90.0).abs() < 1e-12);
        assert!((s.user_distances[0] - 70.0).abs() < 1e-12);
    }

    #[test]
    fn broadside_user_is_equidistant_from_2x2() {
        let s = build_scene(&base(4).with_user_angle(0.0)).unwrap();
        let d = &s.user_distances;
        for m in 1..4 {
            assert!((d[m] - d[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        let mut c = base(4);
        c.bs_distance = 0.0;
        assert!(matches!(build_scene(&c), Err(Error::Config(_))));
        let c = base(0);
        assert!(build_scene(&c).is_err());
        let mut c = base(4);
        c.pitch_v = -0.1;
        assert!(build_scene(&c).is_err());
    }

    #[test]
    fn mirrored_user_mirrors_columns() {
        let a = build_scene(&base(12).with_user_angle(0.3)).unwrap();
        let b = build_scene(&base(12).with_user_angle(-0.3)).unwrap();
        for r in 0..a.rows {
            for c in 0..a.cols {
                let m = r * a.cols + c;
                let mirror = r * a.cols + (a.cols - 1 - c);
                assert!((a.user_distances[m] - b.user_distances[mirror]).abs() < 1e-12);
            }
        }
    }
}
