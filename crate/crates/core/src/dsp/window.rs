use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::scalar::Real;

/// Five-term flat-top coefficients (a0..a4).
pub const FLATTOP_COEFFS: [f64; 5] = [0.21557895, 0.41663158, 0.277263158, 0.083578947, 0.006947368];

/// Spectral window. All windows are symmetric (denominator `len − 1`) and
/// applied with their raw coefficients; amplitude correction divides power
/// by the squared coherent gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Window {
    Rectangular,
    /// 0.54 − 0.46·cos(2πm/(M−1))
    Hamming,
    /// Σ_k (−1)^k a_k cos(2πkm/(M−1)) with [`FLATTOP_COEFFS`].
    Flattop,
}

impl Window {
    pub fn coefficients<T: Real>(self, len: usize) -> Vec<T> {
        if len == 1 {
            return vec![T::one()];
        }
        let denom = T::from_usize(len - 1).unwrap();
        (0..len)
            .map(|m| {
                let x = T::TAU() * T::from_usize(m).unwrap() / denom;
                match self {
                    Window::Rectangular => T::one(),
                    Window::Hamming => T::lit(0.54) - T::lit(0.46) * x.cos(),
                    Window::Flattop => FLATTOP_COEFFS
                        .iter()
                        .enumerate()
                        .map(|(k, &a)| {
                            let sign = if k % 2 == 0 { T::one() } else { -T::one() };
                            sign * T::lit(a) * (T::from_usize(k).unwrap() * x).cos()
                        })
                        .fold(T::zero(), |acc, v| acc + v),
                }
            })
            .collect()
    }

    /// Coherent gain Σw/len.
    pub fn coherent_gain<T: Real>(self, len: usize) -> T {
        let w = self.coefficients::<T>(len);
        w.iter().copied().sum::<T>() / T::from_usize(len).unwrap()
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Window::Rectangular => "rectangular",
            Window::Hamming => "hamming",
            Window::Flattop => "flattop",
        })
    }
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "rectangular" | "rect" | "none" => Ok(Window::Rectangular),
            "hamming" => Ok(Window::Hamming),
            "flattop" | "flat-top" => Ok(Window::Flattop),
            other => Err(Error::Validation(format!("unknown window '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamming_endpoints_and_center() {
        let w = Window::Hamming.coefficients::<f64>(9);
        assert!((w[0] - 0.08).abs() < 1e-12 && (w[8] - 0.08).abs() < 1e-12);
        assert!((w[4] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flattop_peak_and_symmetry() {
        let w = Window::Flattop.coefficients::<f64>(101);
        let sum: f64 = FLATTOP_COEFFS.iter().sum();
        assert!((w[50] - sum).abs() < 1e-12);
        for m in 0..101 {
            assert!((w[m] - w[100 - m]).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_gains() {
        assert_eq!(Window::Rectangular.coherent_gain::<f64>(64), 1.0);
        let g: f64 = Window::Hamming.coherent_gain(4096);
        assert!((g - 0.54).abs() < 1e-3);
        let g: f64 = Window::Flattop.coherent_gain(4096);
        assert!((g - FLATTOP_COEFFS[0]).abs() < 1e-3);
    }

    #[test]
    fn parse() {
        assert_eq!("Hamming".parse::<Window>().unwrap(), Window::Hamming);
        assert!("kaiser".parse::<Window>().is_err());
    }
}
