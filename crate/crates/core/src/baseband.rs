//! Real-valued chirp-sequence baseband synthesis.
//!
//! A frame is the M × N matrix
//!
//! ```text
//! x(m, n) = Σ_k A_k · cos(−2π·( 2·B·r_k/(T_chirp·c)·T_m·m + 2·f0·v_k/c·(T_m·m + T_n·n) + φ_k )) + ν(m, n)
//! ```
//!
//! with fast-time sample `m`, chirp index `n`, amplitude
//! `A_k = √(2·P_T·10^(−L_k/10)·R)` and white Gaussian noise of variance
//! `σ_N² = k_B·T0·F·B_R·R`, `B_R = 1/(2·T_m)`.
//!
//! # Noise stream layout
//!
//! Noise comes from ChaCha8 keyed with `seed_from_u64(seed)`. Frame `i` uses
//! stream id `i`; chirp column `n` starts at word position `n·2³²` of that
//! stream, so columns are synthesized independently and in any order.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::PathContribution;
use crate::error::{Error, Result};
use crate::scalar::{consts, db_to_linear, Real};

/// Word offset between the noise sub-streams of consecutive chirps.
const COLUMN_WORD_STRIDE: u128 = 1 << 32;

/// Chirp-sequence radar parameters (SI units).
#[derive(Debug, Clone, PartialEq)]
pub struct RadarConfig<T> {
    /// Chirp start frequency f0, Hz.
    pub f0: T,
    /// Chirp bandwidth B, Hz.
    pub bandwidth: T,
    /// Chirp duration T_chirp, s.
    pub chirp_duration: T,
    /// Fast-time sampling interval T_m, s.
    pub sample_interval: T,
    /// Slow-time (chirp repetition) interval T_n, s.
    pub chirp_interval: T,
    /// Fast-time samples per chirp M.
    pub samples_per_chirp: usize,
    /// Chirps per frame N.
    pub chirps_per_frame: usize,
    /// Transmit power P_T, W.
    pub tx_power: T,
    /// Receiver noise figure, dB.
    pub noise_figure_db: T,
    /// Impedance R, Ω.
    pub impedance: T,
    /// Master noise seed.
    pub seed: u64,
    /// When false, σ_N = 0 and frames are noise free.
    pub noise: bool,
}

impl<T: Real> RadarConfig<T> {
    /// Default preset at f0 = 59 GHz: M = 256, N = 64, T_chirp = 100 µs,
    /// T_m = T_chirp/M, T_n = 2·T_chirp, P_T = 1 mW, F = 10 dB, R = 50 Ω.
    pub fn preset(bandwidth: T) -> Self {
        let chirp = T::lit(100e-6);
        let m = 256;
        RadarConfig {
            f0: T::lit(59e9),
            bandwidth,
            chirp_duration: chirp,
            sample_interval: chirp / T::from_usize(m).unwrap(),
            chirp_interval: T::lit(2.0) * chirp,
            samples_per_chirp: m,
            chirps_per_frame: 64,
            tx_power: T::lit(1e-3),
            noise_figure_db: T::lit(10.0),
            impedance: T::lit(50.0),
            seed: 0,
            noise: true,
        }
    }

    /// Bandwidths with measured antenna patterns, Hz.
    pub const PRESET_BANDWIDTHS: [f64; 4] = [0.5e9, 1e9, 2e9, 4e9];

    /// All invariant violations, empty when the configuration is usable.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut d = Vec::new();
        let positive = [
            ("f0", self.f0),
            ("bandwidth", self.bandwidth),
            ("chirp_duration", self.chirp_duration),
            ("sample_interval", self.sample_interval),
            ("chirp_interval", self.chirp_interval),
            ("impedance", self.impedance),
        ];
        for (name, v) in positive {
            if !(v > T::zero() && v.is_finite()) {
                d.push(format!("{name} must be positive and finite (got {v})"));
            }
        }
        if !(self.tx_power >= T::zero() && self.tx_power.is_finite()) {
            d.push(format!("tx_power must be >= 0 (got {})", self.tx_power));
        }
        if !self.noise_figure_db.is_finite() {
            d.push("noise_figure must be finite".into());
        }
        if self.samples_per_chirp < 2 || self.samples_per_chirp % 2 != 0 {
            d.push(format!(
                "samples_per_chirp must be even and >= 2 (got {})",
                self.samples_per_chirp
            ));
        }
        if self.chirps_per_frame < 1 {
            d.push("chirps_per_frame must be >= 1".into());
        }
        let tol = T::one() + T::lit(1e-9);
        let sampled = self.sample_interval * T::from_usize(self.samples_per_chirp).unwrap_or(T::zero());
        if sampled > self.chirp_duration * tol {
            d.push(format!(
                "M·T_m = {sampled} s exceeds the chirp duration {} s",
                self.chirp_duration
            ));
        }
        if self.chirp_duration > self.chirp_interval * tol {
            d.push(format!(
                "chirp duration {} s exceeds the chirp interval {} s",
                self.chirp_duration, self.chirp_interval
            ));
        }
        if self.f0 > T::zero() && !(self.bandwidth / self.f0 < T::lit(0.2)) {
            d.push(format!(
                "narrowband assumption violated: B/f0 = {} (must be < 0.2)",
                self.bandwidth / self.f0
            ));
        }
        d
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.diagnostics();
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(d.join("; ")))
        }
    }

    /// Beat frequency of a target at range `r`, 2·B·r/(T_chirp·c), Hz.
    pub fn beat_frequency(&self, range: T) -> T {
        T::lit(2.0) * self.bandwidth * range / (self.chirp_duration * T::lit(consts::SPEED_OF_LIGHT))
    }

    /// Doppler frequency of radial velocity `v`, 2·f0·v/c, Hz.
    pub fn doppler_frequency(&self, velocity: T) -> T {
        T::lit(2.0) * self.f0 * velocity / T::lit(consts::SPEED_OF_LIGHT)
    }

    /// Range per range-FFT bin, T_chirp·c/(2·B·M·T_m), m.
    pub fn range_bin_size(&self) -> T {
        self.chirp_duration * T::lit(consts::SPEED_OF_LIGHT)
            / (T::lit(2.0)
                * self.bandwidth
                * T::from_usize(self.samples_per_chirp).unwrap()
                * self.sample_interval)
    }

    /// Velocity per Doppler bin, c/(2·f0·N·T_n), m/s.
    pub fn velocity_bin_size(&self) -> T {
        T::lit(consts::SPEED_OF_LIGHT)
            / (T::lit(2.0) * self.f0 * T::from_usize(self.chirps_per_frame).unwrap() * self.chirp_interval)
    }
}

/// Receiver noise standard deviation in volts,
/// `√(k_B·T0·10^(F/10)·B_R·R)` with `B_R = 1/(2·T_m)`. Zero when noise is disabled.
pub fn noise_sigma<T: Real>(cfg: &RadarConfig<T>) -> T {
    if !cfg.noise {
        return T::zero();
    }
    let receiver_bw = T::one() / (T::lit(2.0) * cfg.sample_interval);
    let power = T::lit(consts::BOLTZMANN) * T::lit(consts::T0) * db_to_linear(cfg.noise_figure_db) * receiver_bw;
    (power * cfg.impedance).sqrt()
}

/// Voltage amplitude of a path with loss `loss_db`: `√(2·P_T·10^(−L/10)·R)`.
pub fn amplitude_from_loss<T: Real>(loss_db: T, cfg: &RadarConfig<T>) -> T {
    (T::lit(2.0) * cfg.tx_power * db_to_linear(-loss_db) * cfg.impedance).sqrt()
}

/// One frame of baseband samples, rows = fast time (M), columns = chirps (N).
#[derive(Debug, Clone)]
pub struct BasebandFrame<T> {
    pub samples: Array2<T>,
    pub config: RadarConfig<T>,
    /// Frame start time, s.
    pub timestamp: T,
}

/// Per-path constants in cycles: per-sample increment, per-chirp increment, offset.
struct Tone<T> {
    amplitude: T,
    per_sample: T,
    per_chirp: T,
    phase: T,
}

#[inline]
fn frac<T: Real>(x: T) -> T {
    x - x.floor()
}

/// Synthesizes frame `frame_index` from the given contributions. Paths whose
/// beat frequency reaches the Nyquist rate 1/(2·T_m) are dropped.
pub fn synthesize_frame<T: Real>(
    contribs: &[PathContribution<T>],
    cfg: &RadarConfig<T>,
    frame_index: u64,
    timestamp: T,
) -> Result<BasebandFrame<T>> {
    cfg.validate()?;
    for (i, c) in contribs.iter().enumerate() {
        if !(c.loss_db.is_finite() && c.range.is_finite() && c.velocity.is_finite() && c.phase_cycles.is_finite()) {
            return Err(Error::Validation(format!("contribution {i} has non-finite fields")));
        }
    }
    let (m_len, n_len) = (cfg.samples_per_chirp, cfg.chirps_per_frame);
    // the IF anti-aliasing filter removes tones at or above Nyquist
    let tones: Vec<Tone<T>> = contribs
        .iter()
        .filter_map(|c| {
            let fb = cfg.beat_frequency(c.range);
            let fd = cfg.doppler_frequency(c.velocity);
            let per_sample = (fb + fd) * cfg.sample_interval;
            (per_sample.abs() < T::lit(0.5)).then(|| Tone {
                amplitude: amplitude_from_loss(c.loss_db, cfg),
                per_sample,
                per_chirp: fd * cfg.chirp_interval,
                phase: c.phase_cycles,
            })
        })
        .collect();
    let sigma = noise_sigma(cfg);
    let base_rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let columns: Vec<Vec<T>> = (0..n_len)
        .into_par_iter()
        .map(|n| {
            let nf = T::from_usize(n).unwrap();
            let mut col = vec![T::zero(); m_len];
            for tone in &tones {
                let offset = frac(tone.per_chirp * nf + tone.phase);
                for (m, x) in col.iter_mut().enumerate() {
                    let cycles = frac(tone.per_sample * T::from_usize(m).unwrap() + offset);
                    *x = *x + tone.amplitude * (-T::TAU() * cycles).cos();
                }
            }
            if sigma > T::zero() {
                let mut rng = base_rng.clone();
                rng.set_stream(frame_index);
                rng.set_word_pos(n as u128 * COLUMN_WORD_STRIDE);
                for x in col.iter_mut() {
                    *x = *x + sigma * T::standard_normal(&mut rng);
                }
            }
            col
        })
        .collect();

    let samples = Array2::from_shape_fn((m_len, n_len), |(m, n)| columns[n][m]);
    Ok(BasebandFrame {
        samples,
        config: cfg.clone(),
        timestamp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::PathSource;
    use crate::geometry::Vec3;

    pub(crate) fn contrib(range: f64, velocity: f64, loss_db: f64, phase: f64) -> PathContribution<f64> {
        PathContribution {
            loss_db,
            distance: 2.0 * range,
            range,
            velocity,
            aoa: (0.0, 0.0),
            phase_cycles: phase,
            source: PathSource::RayTraced,
            faces: vec![],
            departure: Vec3::unit_z(),
            arrival: Vec3::unit_z(),
        }
    }

    fn quiet(b: f64) -> RadarConfig<f64> {
        RadarConfig {
            noise: false,
            ..RadarConfig::preset(b)
        }
    }

    #[test]
    fn noise_sigma_reference() {
        let cfg = RadarConfig {
            noise_figure_db: 10.0,
            sample_interval: 0.25e-6,
            chirp_duration: 100e-6,
            impedance: 50.0,
            ..RadarConfig::preset(2e9)
        };
        let p_n: f64 = 1.380649e-23 * 290.0 * 10.0 * 2e6;
        assert!((p_n - 8.008e-14).abs() < 1e-17);
        let s = noise_sigma(&cfg);
        assert!((s - (p_n * 50.0f64).sqrt()).abs() < 1e-20);
        assert!((s - 2.001e-6).abs() < 1e-9);
        let s0 = noise_sigma(&RadarConfig { noise_figure_db: 0.0, ..cfg.clone() });
        assert!((s / s0 - 10f64.sqrt()).abs() < 1e-12);
        let half = noise_sigma(&RadarConfig { sample_interval: 0.125e-6, ..cfg.clone() });
        assert!((half / s - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn amplitude_reference() {
        let cfg = RadarConfig { tx_power: 1e-3, impedance: 50.0, ..RadarConfig::preset(2e9) };
        let a = amplitude_from_loss(80.0, &cfg);
        assert!((a - (2.0f64 * 1e-3 * 1e-8 * 50.0).sqrt()).abs() < 1e-18);
        assert!((a - 3.162e-5).abs() < 1e-8);
        assert!((amplitude_from_loss(100.0, &cfg) * 10.0 - a).abs() < 1e-18);
        let unit = RadarConfig { tx_power: 1.0, ..cfg };
        assert!((amplitude_from_loss(0.0, &unit) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn config_invariants() {
        assert!(RadarConfig::<f64>::preset(2e9).diagnostics().is_empty());
        let wide = RadarConfig { bandwidth: 29.5e9, ..RadarConfig::<f64>::preset(2e9) };
        assert_eq!(wide.diagnostics().len(), 1);
        let slow = RadarConfig { sample_interval: 1e-6, ..RadarConfig::<f64>::preset(2e9) };
        assert!(!slow.diagnostics().is_empty());
        let odd = RadarConfig { samples_per_chirp: 255, ..RadarConfig::<f64>::preset(2e9) };
        assert!(!odd.diagnostics().is_empty());
    }

    #[test]
    fn pure_noise_variance() {
        let cfg = RadarConfig { seed: 11, ..RadarConfig::<f64>::preset(2e9) };
        let f = synthesize_frame(&[], &cfg, 0, 0.0).unwrap();
        let n = f.samples.len() as f64;
        let mean = f.samples.sum() / n;
        let var = f.samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let s2 = noise_sigma(&cfg).powi(2);
        assert!((var / s2 - 1.0).abs() < 0.05, "{}", var / s2);
    }

    #[test]
    fn static_target_columns_identical() {
        let cfg = RadarConfig { chirp_duration: 100e-6, ..quiet(2e9) };
        assert!((cfg.beat_frequency(4.5) - 600e3).abs() < 0.5e3);
        let f = synthesize_frame(&[contrib(4.5, 0.0, 90.0, 0.3)], &cfg, 0, 0.0).unwrap();
        let first = f.samples.column(0).to_owned();
        for c in f.samples.columns() {
            assert_eq!(c, first);
        }
    }

    #[test]
    fn doppler_phase_increment_per_chirp() {
        let cfg = quiet(2e9);
        let fd = cfg.doppler_frequency(1.0);
        assert!((fd - 2.0 * 59e9 / 299_792_458.0).abs() < 1e-9);
        assert!((fd * 200e-6 - 7.87e-2).abs() < 1e-4);
        // sample m = 0 of each chirp follows cos(2π(fd·T_n·n + φ))
        let a = amplitude_from_loss(90.0, &cfg);
        let f = synthesize_frame(&[contrib(3.0, 1.0, 90.0, 0.1)], &cfg, 0, 0.0).unwrap();
        for n in 0..cfg.chirps_per_frame {
            let expect = a * (std::f64::consts::TAU * (fd * cfg.chirp_interval * n as f64 + 0.1)).cos();
            assert!((f.samples[[0, n]] - expect).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn seeded_frames_are_reproducible_and_streams_differ() {
        let cfg = RadarConfig { seed: 99, ..RadarConfig::<f64>::preset(1e9) };
        let a = synthesize_frame(&[contrib(2.0, 0.3, 85.0, 0.0)], &cfg, 3, 0.0).unwrap();
        let b = synthesize_frame(&[contrib(2.0, 0.3, 85.0, 0.0)], &cfg, 3, 0.0).unwrap();
        assert_eq!(a.samples, b.samples);
        let c = synthesize_frame(&[contrib(2.0, 0.3, 85.0, 0.0)], &cfg, 4, 0.0).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn f32_synthesis_matches_f64() {
        let c64 = quiet(2e9);
        let c32 = RadarConfig::<f32> { noise: false, ..RadarConfig::preset(2e9) };
        let p32 = PathContribution {
            loss_db: 60.0f32,
            distance: 6.0,
            range: 3.0,
            velocity: 0.5,
            aoa: (0.0, 0.0),
            phase_cycles: 0.2,
            source: PathSource::RayTraced,
            faces: vec![],
            departure: Vec3::unit_z(),
            arrival: Vec3::unit_z(),
        };
        let a = synthesize_frame(&[p32], &c32, 0, 0.0).unwrap();
        let b = synthesize_frame(&[contrib(3.0, 0.5, 60.0, 0.2)], &c64, 0, 0.0).unwrap();
        let amp = amplitude_from_loss(60.0, &c64);
        for (x, y) in a.samples.iter().zip(b.samples.iter()) {
            assert!((*x as f64 - y).abs() < 1e-3 * amp);
        }
    }

    #[test]
    fn tones_beyond_nyquist_are_filtered() {
        let cfg = quiet(2e9);
        let max_range = cfg.range_bin_size() * (cfg.samples_per_chirp / 2) as f64;
        let f = synthesize_frame(&[contrib(max_range + 0.5, 0.0, 60.0, 0.0)], &cfg, 0, 0.0).unwrap();
        assert!(f.samples.iter().all(|&x| x == 0.0));
        let g = synthesize_frame(&[contrib(max_range - 0.5, 0.0, 60.0, 0.0)], &cfg, 0, 0.0).unwrap();
        assert!(g.samples.iter().any(|&x| x != 0.0));
    }
}
