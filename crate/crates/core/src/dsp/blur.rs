use ndarray::Array2;

use super::RangeDopplerMap;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_BLUR_SIGMA: f64 = 1.0;
const RADIUS: usize = 2;

/// Normalized 1D Gaussian taps for the 5-point kernel.
pub fn gaussian_kernel<T: Real>(sigma: T) -> [T; 2 * RADIUS + 1] {
    let mut k = [T::zero(); 2 * RADIUS + 1];
    let two_s2 = T::lit(2.0) * sigma * sigma;
    for (i, v) in k.iter_mut().enumerate() {
        let d = T::from_isize(i as isize - RADIUS as isize).unwrap();
        *v = (-(d * d) / two_s2).exp();
    }
    let sum: T = k.iter().copied().sum();
    k.map(|v| v / sum)
}

fn clamp_index(i: isize, len: usize) -> usize {
    i.clamp(0, len as isize - 1) as usize
}

/// 5×5 Gaussian blur with replicate padding. The kernel is separable, so
/// rows and columns are filtered in turn.
pub fn gaussian_blur<T: Real>(map: &RangeDopplerMap<T>, sigma: T) -> Result<RangeDopplerMap<T>> {
    let (rows, cols) = map.values.dim();
    if rows < 2 * RADIUS + 1 || cols < 2 * RADIUS + 1 {
        return Err(Error::Domain(format!("map {rows}x{cols} is smaller than the 5x5 blur kernel")));
    }
    if !(sigma > T::zero() && sigma.is_finite()) {
        return Err(Error::Domain(format!("blur sigma must be positive (got {sigma})")));
    }
    let k = gaussian_kernel(sigma);
    let src = &map.values;
    let tmp = Array2::from_shape_fn((rows, cols), |(r, c)| {
        (0..k.len())
            .map(|i| k[i] * src[[r, clamp_index(c as isize + i as isize - RADIUS as isize, cols)]])
            .sum::<T>()
    });
    let values = Array2::from_shape_fn((rows, cols), |(r, c)| {
        (0..k.len())
            .map(|i| k[i] * tmp[[clamp_index(r as isize + i as isize - RADIUS as isize, rows), c]])
            .sum::<T>()
    });
    Ok(RangeDopplerMap {
        values,
        range_bin: map.range_bin,
        velocity_bin: map.velocity_bin,
    })
}
