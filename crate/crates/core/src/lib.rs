//! Simulation and analysis of RIS-aided links with realistic reflection
//! coefficients: discrete phase states, phase-dependent amplitude and a
//! limited phase-shift range.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`] and [`channel`] build the scene and the Rician BS→RIS and
//!   RIS→user channels.
//! - [`codebook`] describes the `2^k` reflection states an element can take,
//!   either from the uniform-grid model or from measured responses.
//! - [`beamformer`] picks a state per element. The group-based query method
//!   precomputes a lookup table of expected-phase ranges.
//! - [`analysis`] holds the closed-form average received power results.
//! - [`montecarlo`] runs trial-level simulations and sweeps.
//!
//! Power is carried in linear milliwatts internally; dBm only appears at
//! report boundaries.

pub mod analysis;
pub mod beamformer;
pub mod channel;
pub mod codebook;
pub mod geometry;
pub mod montecarlo;
pub mod pathloss;
pub mod rng;
pub mod units;

mod error;

pub use error::{Error, Result};

pub use analysis::{AnalysisConstants, LarpReport, LarpSource};
pub use beamformer::{ObjectiveWeights, QuantizationTable, QuantizerMethod, ReflectionConfig};
pub use channel::{ChannelPair, NlosGainModel, RicianConfig};
pub use codebook::{Codebook, CodebookEntry, MeasuredResponse};
pub use geometry::{SceneConfig, SceneGeometry};
pub use montecarlo::{ExperimentSpec, Scheme, SweepResult};
