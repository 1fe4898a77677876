//! Rician BS→RIS (`h`) and RIS→user (`f`) channels.
//!
//! LoS components share one amplitude across elements, taken from the first
//! element's distances (`D_1`, `d_1`); per-element phases use exact distances:
//!
//! ```text
//! h_los[m] = sqrt(G_a · D_1^-α) · exp(-j 2π D_m / λ)
//! f_los[m] = sqrt(d_1^-α)       · exp(-j 2π d_m / λ)
//! h_nlos[m] = L(D_1) · g_m,   f_nlos[m] = L(d_1) · b_m,   g_m, b_m ~ CN(0, 1)
//! h = sqrt(K1/(K1+1)) h_los + sqrt(1/(K1+1)) h_nlos
//! ```
//!
//! `f` holds the coefficients from each element to the user, so the cascade
//! seen at the receiver is `Σ_m f[m] Φ_m h[m]`.

use std::sync::atomic::{AtomicBool, Ordering};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::SceneGeometry;
use crate::pathloss::uma_nlos_amplitude;
use crate::rng::complex_normal;
use crate::units::db_to_linear_power;
use crate::{Error, Result};

/// K-factor used for the "pure LoS" preset.
pub const K_MAX: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NlosGainModel {
    /// 3GPP UMa NLoS path loss, see [`crate::pathloss`].
    UmaNlos,
    /// Constant linear amplitude gain in `(0, 1]`.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicianConfig {
    /// Linear Rician factor of `h`.
    pub k1: f64,
    /// Linear Rician factor of `f`.
    pub k2: f64,
    pub nlos_gain: NlosGainModel,
}

impl RicianConfig {
    pub fn new(k1: f64, k2: f64, nlos_gain: NlosGainModel) -> Result<Self> {
        let cfg = Self { k1, k2, nlos_gain };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_db(k1_db: f64, k2_db: f64, nlos_gain: NlosGainModel) -> Result<Self> {
        Self::new(
            db_to_linear_power(k1_db),
            db_to_linear_power(k2_db),
            nlos_gain,
        )
    }

    pub fn pure_los(nlos_gain: NlosGainModel) -> Self {
        Self {
            k1: K_MAX,
            k2: K_MAX,
            nlos_gain,
        }
    }

    pub fn rayleigh(nlos_gain: NlosGainModel) -> Self {
        Self {
            k1: 0.0,
            k2: 0.0,
            nlos_gain,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, k) in [("k1", self.k1), ("k2", self.k2)] {
            if !(k.is_finite() && k >= 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be finite and non-negative, got {k}"
                )));
            }
        }
        if let NlosGainModel::Fixed(g) = self.nlos_gain {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::Config(format!(
                    "fixed NLoS gain must be in (0, 1], got {g}"
                )));
            }
        }
        Ok(())
    }

    /// `(sqrt(K/(K+1)), sqrt(1/(K+1)))` for `h` and `f`.
    pub fn mixing(&self) -> ((f64, f64), (f64, f64)) {
        let mix = |k: f64| ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt());
        (mix(self.k1), mix(self.k2))
    }
}

static CLAMP_WARNED: AtomicBool = AtomicBool::new(false);

/// Linear amplitude gain `L(distance)` of the NLoS component.
///
/// Distances outside the UMa validity range are clamped; the first such
/// evaluation in a process logs a warning.
pub fn nlos_gain(model: NlosGainModel, distance: f64, wavelength: f64) -> f64 {
    match model {
        NlosGainModel::Fixed(g) => g,
        NlosGainModel::UmaNlos => {
            let (g, clamped) = uma_nlos_amplitude(distance, wavelength);
            if clamped && !CLAMP_WARNED.swap(true, Ordering::Relaxed) {
                log::warn!("distance {distance:.2} m outside UMa validity range; evaluated at the clamped bound");
            }
            g
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPair {
    pub h: Vec<Complex64>,
    pub f: Vec<Complex64>,
    pub h_los: Vec<Complex64>,
    pub f_los: Vec<Complex64>,
    pub h_nlos: Vec<Complex64>,
    pub f_nlos: Vec<Complex64>,
}

impl ChannelPair {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }
}

/// Deterministic LoS components `(h_los, f_los)`.
pub fn los_components(scene: &SceneGeometry) -> (Vec<Complex64>, Vec<Complex64>) {
    let cfg = &scene.config;
    let k = std::f64::consts::TAU / cfg.wavelength;
    let amp_h = (cfg.antenna_gain * scene.first_bs_distance().powf(-cfg.path_loss_exponent)).sqrt();
    let amp_f = scene
        .first_user_distance()
        .powf(-cfg.path_loss_exponent)
        .sqrt();
    let h = scene
        .bs_distances
        .iter()
        .map(|&d| Complex64::from_polar(amp_h, -k * d))
        .collect();
    let f = scene
        .user_distances
        .iter()
        .map(|&d| Complex64::from_polar(amp_f, -k * d))
        .collect();
    (h, f)
}

/// Random NLoS components `(h_nlos, f_nlos)`. Draws all of `g` before `b`.
pub fn nlos_components<R: Rng + ?Sized>(
    scene: &SceneGeometry,
    rician: &RicianConfig,
    rng: &mut R,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let m = scene.element_count();
    let lh = nlos_gain(
        rician.nlos_gain,
        scene.first_bs_distance(),
        scene.wavelength(),
    );
    let lf = nlos_gain(
        rician.nlos_gain,
        scene.first_user_distance(),
        scene.wavelength(),
    );
    let h = (0..m).map(|_| complex_normal(rng) * lh).collect();
    let f = (0..m).map(|_| complex_normal(rng) * lf).collect();
    (h, f)
}

/// Mixes LoS and NLoS parts with the Rician weights.
pub fn assemble_channel(
    los: (Vec<Complex64>, Vec<Complex64>),
    nlos: (Vec<Complex64>, Vec<Complex64>),
    rician: &RicianConfig,
) -> Result<ChannelPair> {
    rician.validate()?;
    let (h_los, f_los) = los;
    let (h_nlos, f_nlos) = nlos;
    let m = h_los.len();
    for v in [&f_los, &h_nlos, &f_nlos] {
        if v.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: v.len(),
            });
        }
    }
    let ((ah, bh), (af, bf)) = rician.mixing();
    let h = h_los
        .iter()
        .zip(&h_nlos)
        .map(|(l, n)| l * ah + n * bh)
        .collect();
    let f = f_los
        .iter()
        .zip(&f_nlos)
        .map(|(l, n)| l * af + n * bf)
        .collect();
    Ok(ChannelPair {
        h,
        f,
        h_los,
        f_los,
        h_nlos,
        f_nlos,
    })
}

/// One full channel realization for `scene`.
pub fn generate_channel<R: Rng + ?Sized>(
    scene: &SceneGeometry,
    rician: &RicianConfig,
    rng: &mut R,
) -> Result<ChannelPair> {
    let los = los_components(scene);
    let nlos = nlos_components(scene, rician, rng);
    assemble_channel(los, nlos, rician)
}
