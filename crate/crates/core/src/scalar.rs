//! Scalar abstraction shared by every numeric module.
//!
//! All physics and signal-processing code is written against [`Real`], which
//! is implemented for `f32` and `f64`. The crate root exposes `f64` aliases
//! for the common types.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftNum;

/// Floating-point scalar usable throughout the simulator.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Debug
    + Display
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal or constant into this type.
    fn lit(v: f64) -> Self;

    fn to_f64_lossy(self) -> f64;

    /// Draws one sample from N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Draws one sample from U[0, 1).
    fn standard_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn lit(v: f64) -> Self {
                v as $t
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }

            #[inline]
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                <StandardNormal as Distribution<$t>>::sample(&StandardNormal, rng)
            }

            #[inline]
            fn standard_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.random::<$t>()
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Physical constants (SI).
pub mod consts {
    /// Speed of light in vacuum, m/s.
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    /// Boltzmann constant, J/K.
    pub const BOLTZMANN: f64 = 1.380_649e-23;
    /// Standard noise reference temperature, K.
    pub const T0: f64 = 290.0;
    /// Vacuum permittivity, F/m.
    pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
}

/// Wavelength for a carrier frequency in Hz.
#[inline]
pub fn wavelength<T: Real>(frequency: T) -> T {
    T::lit(consts::SPEED_OF_LIGHT) / frequency
}

#[inline]
pub fn db_to_linear<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

#[inline]
pub fn linear_to_db<T: Real>(lin: T) -> T {
    T::lit(10.0) * lin.log10()
}

/// Wraps an angle in radians into [-pi, pi).
pub fn wrap_angle<T: Real>(a: T) -> T {
    if a >= -T::PI() && a < T::PI() {
        return a;
    }
    let two_pi = T::TAU();
    let mut w = (a + T::PI()) % two_pi;
    if w < T::zero() {
        w = w + two_pi;
    }
    let w = w - T::PI();
    // `%` can land exactly on +pi after the shift for inputs just below -pi.
    if w >= T::PI() {
        w - two_pi
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_interval() {
        for &a in &[-10.0f64, -3.5, -std::f64::consts::PI, 0.0, 3.0, std::f64::consts::PI, 7.0, 100.0] {
            let w = wrap_angle(a);
            assert!((-std::f64::consts::PI..std::f64::consts::PI).contains(&w), "{a} -> {w}");
            assert!(((w - a) / std::f64::consts::TAU).fract().abs() < 1e-12 || ((w - a) / std::f64::consts::TAU).fract().abs() > 1.0 - 1e-12);
        }
        assert_eq!(wrap_angle(std::f64::consts::PI), -std::f64::consts::PI);
    }

    #[test]
    fn db_roundtrip_f32() {
        let v: f32 = db_to_linear(-10.0f32);
        assert!((v - 0.1).abs() < 1e-7);
        assert!((linear_to_db(v) + 10.0).abs() < 1e-5);
    }
}
