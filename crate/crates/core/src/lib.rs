//! Baseband simulator for a single-channel chirp-sequence radar used for
//! indoor localization against passive ceiling reflectors.
//!
//! The pipeline runs scene → channel (ray tracing) + reflectors (radar
//! equation) → baseband synthesis → range/Doppler processing → detection →
//! particle-filter localization. [`scenario`] drives it from a config file.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`.

pub mod antenna;
pub mod baseband;
pub mod channel;
pub mod dsp;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod localization;
pub mod matrix_io;
pub mod reflector;
pub mod scalar;
pub mod scenario;
pub mod scene;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Vec3f64 = geometry::Vec3<f64>;
pub type Scene64 = scene::Scene<f64>;
pub type Pose64 = scene::Pose<f64>;
pub type Trajectory64 = scene::Trajectory<f64>;
pub type AntennaPattern64 = antenna::AntennaPattern<f64>;
pub type RcsTable64 = reflector::RcsTable<f64>;
pub type PathContribution64 = channel::PathContribution<f64>;
pub type RadarConfig64 = baseband::RadarConfig<f64>;
pub type BasebandFrame64 = baseband::BasebandFrame<f64>;
pub type RangeDopplerMap64 = dsp::RangeDopplerMap<f64>;
pub type Feature64 = dsp::Feature<f64>;
pub type ParticleFilter64 = localization::ParticleFilter<f64>;
