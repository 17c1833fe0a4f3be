//! Uniform angular grids and bilinear lookup shared by antenna patterns and
//! RCS tables.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative tolerance used when checking that a query lies on the grid span
/// and that declared grid steps divide the span.
const GRID_TOL: f64 = 1e-9;

/// Uniformly spaced axis `start + i·step`, `i < len`, in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformAxis<T> {
    pub start: T,
    pub step: T,
    pub len: usize,
}

impl<T: Real> UniformAxis<T> {
    /// Builds an axis from an inclusive `[start, stop]` range.
    pub fn from_range(start: T, stop: T, step: T) -> Result<Self> {
        if !(step > T::zero()) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
            return Err(Error::Validation(format!(
                "invalid grid range {start}..{stop} step {step}"
            )));
        }
        let cells = (stop - start) / step;
        let rounded = cells.round();
        if (cells - rounded).abs() > T::lit(1e-6) {
            return Err(Error::Validation(format!(
                "grid step {step} does not divide range {start}..{stop}"
            )));
        }
        let len = rounded.to_usize().unwrap_or(0) + 1;
        Ok(UniformAxis { start, step, len })
    }

    pub fn stop(&self) -> T {
        self.value(self.len - 1)
    }

    pub fn value(&self, i: usize) -> T {
        self.start + self.step * T::from_usize(i).unwrap()
    }

    /// Whether the axis spans a full turn (first and last node coincide modulo 360°).
    pub fn is_full_circle(&self) -> bool {
        ((self.stop() - self.start) - T::lit(360.0)).abs() <= T::lit(1e-6)
    }

    /// Locates `v` as (lower cell index, fraction in [0, 1]), or `None` when outside.
    pub fn locate(&self, v: T) -> Option<(usize, T)> {
        let tol = self.step * T::lit(GRID_TOL);
        if !v.is_finite() || v < self.start - tol || v > self.stop() + tol {
            return None;
        }
        if self.len == 1 {
            return Some((0, T::zero()));
        }
        let pos = ((v - self.start) / self.step).max(T::zero());
        let last_cell = self.len - 2;
        let i = pos.floor().to_usize().unwrap_or(0).min(last_cell);
        let frac = (pos - T::from_usize(i).unwrap()).min(T::one()).max(T::zero());
        Some((i, frac))
    }
}

/// Bilinear interpolation of `values` (rows along `rows`, columns along `cols`)
/// at an already-located position. Exact at grid nodes.
pub fn bilinear<T: Real>(values: &Array2<T>, row: (usize, T), col: (usize, T)) -> T {
    let (r, fr) = row;
    let (c, fc) = col;
    let r1 = (r + 1).min(values.nrows() - 1);
    let c1 = (c + 1).min(values.ncols() - 1);
    let v00 = values[[r, c]];
    if fr == T::zero() && fc == T::zero() {
        return v00;
    }
    let v01 = values[[r, c1]];
    let v10 = values[[r1, c]];
    let v11 = values[[r1, c1]];
    let one = T::one();
    (one - fr) * ((one - fc) * v00 + fc * v01) + fr * ((one - fc) * v10 + fc * v11)
}

/// Wraps an azimuth in degrees into the span of a full-circle axis starting at `start`.
pub fn wrap_degrees<T: Real>(az: T, start: T) -> T {
    let full = T::lit(360.0);
    let mut a = (az - start) % full;
    if a < T::zero() {
        a = a + full;
    }
    a + start
}
