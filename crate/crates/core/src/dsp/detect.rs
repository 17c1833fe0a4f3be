use std::fmt::Write as _;

use super::{RangeDopplerMap, RangeProfile};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A detected peak of a range-Doppler map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feature<T> {
    /// m
    pub range: T,
    /// m/s, positive when closing.
    pub velocity: T,
    /// Map power at the peak.
    pub amplitude: T,
}

/// Noise floor of a map: its median scaled to the mean of an exponential
/// distribution (median = mean·ln 2).
pub fn estimate_noise_floor<T: Real>(map: &RangeDopplerMap<T>) -> T {
    let mut v: Vec<T> = map.values.iter().copied().collect();
    if v.is_empty() {
        return T::zero();
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    let median = if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
    };
    median / T::LN_2()
}

/// Local maxima over the 8-neighborhood above `noise_floor·10^(margin_db/10)`,
/// strongest first. On plateaus the first cell in raster order wins.
pub fn detect_peaks<T: Real>(map: &RangeDopplerMap<T>, noise_floor: T, margin_db: T) -> Result<Vec<Feature<T>>> {
    if !(margin_db >= T::zero()) {
        return Err(Error::Domain(format!("detection margin must be >= 0 dB (got {margin_db})")));
    }
    let threshold = noise_floor * T::lit(10.0).powf(margin_db / T::lit(10.0));
    let v = &map.values;
    let (rows, cols) = v.dim();
    let mut out = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let x = v[[r, c]];
            if !(x > threshold) || x <= T::zero() {
                continue;
            }
            let mut is_peak = true;
            'scan: for dr in -1isize..=1 {
                for dc in -1isize..=1 {
                    if dr == 0 && dc == 0 {
                        continue;
                    }
                    let (rr, cc) = (r as isize + dr, c as isize + dc);
                    if rr < 0 || cc < 0 || rr >= rows as isize || cc >= cols as isize {
                        continue;
                    }
                    let y = v[[rr as usize, cc as usize]];
                    // earlier raster neighbors must be strictly lower, later ones not higher
                    let earlier = dr < 0 || (dr == 0 && dc < 0);
                    if y > x || (earlier && y == x) {
                        is_peak = false;
                        break 'scan;
                    }
                }
            }
            if is_peak {
                out.push(Feature {
                    range: map.range(r),
                    velocity: map.velocity(c),
                    amplitude: x,
                });
            }
        }
    }
    out.sort_by(|a, b| b.amplitude.partial_cmp(&a.amplitude).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// Largest profile value within ±`tolerance_bins` of the bin nearest `expected_range`.
pub fn peak_amplitude<T: Real>(profile: &RangeProfile<T>, expected_range: T, tolerance_bins: usize) -> Result<T> {
    let len = profile.values.len();
    let span = profile.range(len - 1);
    if !(expected_range >= T::zero() && expected_range <= span) {
        return Err(Error::Domain(format!(
            "expected range {expected_range} m outside the profile span [0, {span}] m"
        )));
    }
    let center = (expected_range / profile.bin_size).round().to_usize().unwrap_or(0).min(len - 1);
    let lo = center.saturating_sub(tolerance_bins);
    let hi = (center + tolerance_bins).min(len - 1);
    Ok((lo..=hi).map(|o| profile.values[o]).fold(T::zero(), T::max))
}

/// CSV with header `range_m,velocity_mps,amplitude_db`.
pub fn features_to_csv<T: Real>(features: &[Feature<T>]) -> String {
    let mut s = String::from("range_m,velocity_mps,amplitude_db\n");
    for f in features {
        let db = 10.0 * f.amplitude.to_f64_lossy().log10();
        let _ = writeln!(s, "{:e},{:e},{:e}", f.range.to_f64_lossy(), f.velocity.to_f64_lossy(), db);
    }
    s
}

/// Parses the output of [`features_to_csv`] back into features.
pub fn features_from_csv<T: Real>(text: &str, origin: &str) -> Result<Vec<Feature<T>>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if i == 0 && line.starts_with("range") || line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 3 {
            return Err(Error::format(origin, i + 1, "expected 3 columns"));
        }
        let mut nums = [0.0f64; 3];
        for (n, c) in nums.iter_mut().zip(&cells) {
            *n = c
                .trim()
                .parse()
                .map_err(|_| Error::format(origin, i + 1, format!("bad number '{c}'")))?;
        }
        out.push(Feature {
            range: T::lit(nums[0]),
            velocity: T::lit(nums[1]),
            amplitude: T::lit(10f64.powf(nums[2] / 10.0)),
        });
    }
    Ok(out)
}
