//! Range and Doppler processing of baseband frames.
//!
//! Range FFT over fast time keeps the non-negative half of the real-input
//! spectrum, `S(o, n)` for `0 ≤ o ≤ M/2`, and scales power so that a
//! rectangular window preserves signal energy:
//! `R(o, n) = |S|²/M` at `o ∈ {0, M/2}` and `2|S|²/M` otherwise.
//! The Doppler FFT over chirps applies the same rule with `N·M`.
//!
//! Doppler axis: the map is center-shifted so column `p` holds Doppler bin
//! `(p − N/2) mod N` and velocity `(p − N/2)·c/(2·f0·N·T_n)`. Closing targets
//! (v > 0) appear right of center.

mod blur;
mod detect;
pub mod window;

use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::baseband::{BasebandFrame, RadarConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;

pub use blur::{gaussian_blur, gaussian_kernel, DEFAULT_BLUR_SIGMA};
pub use detect::{detect_peaks, estimate_noise_floor, features_from_csv, features_to_csv, peak_amplitude, Feature};
pub use window::Window;

/// Range FFT output for one frame.
#[derive(Debug, Clone)]
pub struct RangeSpectrum<T> {
    /// S(o, n), (M/2+1) × N.
    pub spectrum: Array2<Complex<T>>,
    /// R(o, n), (M/2+1) × N.
    pub power: Array2<T>,
    pub window: Window,
    pub config: RadarConfig<T>,
}

/// Averaged range profile R̄(o).
#[derive(Debug, Clone)]
pub struct RangeProfile<T> {
    pub values: Array1<T>,
    /// Meters per bin.
    pub bin_size: T,
    /// Coherent gain of the range window.
    pub coherent_gain: T,
}

impl<T: Real> RangeProfile<T> {
    pub fn range(&self, bin: usize) -> T {
        T::from_usize(bin).unwrap() * self.bin_size
    }

    /// Power corrected for the window's coherent gain (divides by CG²).
    pub fn corrected(&self, value: T) -> T {
        value / (self.coherent_gain * self.coherent_gain)
    }
}

/// Center-shifted range-Doppler power map.
#[derive(Debug, Clone)]
pub struct RangeDopplerMap<T> {
    /// D(o, p), (M/2+1) × N, Doppler axis shifted.
    pub values: Array2<T>,
    /// Meters per range bin.
    pub range_bin: T,
    /// m/s per Doppler bin.
    pub velocity_bin: T,
}

impl<T: Real> RangeDopplerMap<T> {
    pub fn range(&self, row: usize) -> T {
        T::from_usize(row).unwrap() * self.range_bin
    }

    pub fn velocity(&self, col: usize) -> T {
        let center = (self.values.ncols() / 2) as isize;
        T::from_isize(col as isize - center).unwrap() * self.velocity_bin
    }

    /// Nearest (row, column) for a range and velocity; `None` outside the map.
    pub fn bin_of(&self, range: T, velocity: T) -> Option<(usize, usize)> {
        let row = (range / self.range_bin).round().to_isize()?;
        let col = (velocity / self.velocity_bin).round().to_isize()? + (self.values.ncols() / 2) as isize;
        if row < 0 || row as usize >= self.values.nrows() || col < 0 || col as usize >= self.values.ncols() {
            return None;
        }
        Some((row as usize, col as usize))
    }

    /// Map in dB, with a floor to avoid −∞.
    pub fn to_db(&self) -> Array2<T> {
        self.values.mapv(|v| T::lit(10.0) * v.max(T::lit(1e-300)).log10())
    }
}

fn energy_scale<T: Real>(o: usize, half: usize) -> T {
    if o == 0 || o == half {
        T::one()
    } else {
        T::lit(2.0)
    }
}

fn plan<T: Real>(len: usize) -> Arc<dyn Fft<T>> {
    FftPlanner::new().plan_fft_forward(len)
}

/// Windowed range FFT of every chirp.
pub fn range_fft<T: Real>(frame: &BasebandFrame<T>, window: Window) -> RangeSpectrum<T> {
    let (m_len, n_len) = frame.samples.dim();
    let half = m_len / 2;
    let w = window.coefficients::<T>(m_len);
    let fft = plan::<T>(m_len);
    let columns: Vec<Vec<Complex<T>>> = (0..n_len)
        .into_par_iter()
        .map(|n| {
            let mut buf: Vec<Complex<T>> = frame
                .samples
                .column(n)
                .iter()
                .zip(&w)
                .map(|(&x, &wm)| Complex::new(x * wm, T::zero()))
                .collect();
            fft.process(&mut buf);
            buf.truncate(half + 1);
            buf
        })
        .collect();
    let spectrum = Array2::from_shape_fn((half + 1, n_len), |(o, n)| columns[n][o]);
    let m = T::from_usize(m_len).unwrap();
    let power = Array2::from_shape_fn((half + 1, n_len), |(o, n)| {
        energy_scale::<T>(o, half) * spectrum[[o, n]].norm_sqr() / m
    });
    RangeSpectrum {
        spectrum,
        power,
        window,
        config: frame.config.clone(),
    }
}

/// Mean of the first `count` range profiles.
pub fn average_profiles<T: Real>(spec: &RangeSpectrum<T>, count: usize) -> Result<RangeProfile<T>> {
    let n = spec.power.ncols();
    if count == 0 || count > n {
        return Err(Error::Domain(format!("cannot average {count} of {n} profiles")));
    }
    let c = T::from_usize(count).unwrap();
    let values = Array1::from_shape_fn(spec.power.nrows(), |o| {
        (0..count).map(|k| spec.power[[o, k]]).sum::<T>() / c
    });
    Ok(RangeProfile {
        values,
        bin_size: spec.config.range_bin_size(),
        coherent_gain: spec.window.coherent_gain(spec.config.samples_per_chirp),
    })
}

/// Windowed Doppler FFT over chirps for each range bin, center-shifted.
pub fn doppler_fft<T: Real>(spec: &RangeSpectrum<T>, window: Window) -> Result<RangeDopplerMap<T>> {
    if window == Window::Flattop {
        return Err(Error::Validation("Doppler FFT supports rectangular or hamming windows".into()));
    }
    let (rows, n_len) = spec.spectrum.dim();
    let half = rows - 1;
    let m_len = spec.config.samples_per_chirp;
    let w = window.coefficients::<T>(n_len);
    let fft = plan::<T>(n_len);
    let scale = T::from_usize(n_len * m_len).unwrap();
    let shift = n_len / 2;
    let out_rows: Vec<Vec<T>> = (0..rows)
        .into_par_iter()
        .map(|o| {
            let mut buf: Vec<Complex<T>> = spec
                .spectrum
                .row(o)
                .iter()
                .zip(&w)
                .map(|(&s, &wn)| s * wn)
                .collect();
            fft.process(&mut buf);
            let e = energy_scale::<T>(o, half);
            let mut row = vec![T::zero(); n_len];
            for (p, t) in buf.iter().enumerate() {
                row[(p + shift) % n_len] = e * t.norm_sqr() / scale;
            }
            row
        })
        .collect();
    let values = Array2::from_shape_fn((rows, n_len), |(o, p)| out_rows[o][p]);
    Ok(RangeDopplerMap {
        values,
        range_bin: spec.config.range_bin_size(),
        velocity_bin: spec.config.velocity_bin_size(),
    })
}
