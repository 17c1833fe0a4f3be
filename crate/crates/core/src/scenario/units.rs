//! Physical quantities written as `<number> <unit>`, e.g. `59 GHz`, `100 us`.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Time,
    /// W, or dBm.
    Power,
    /// dB, returned as-is.
    Decibel,
    Resistance,
    Length,
    Velocity,
    Angle,
}

impl Dimension {
    /// Accepted unit symbols with their SI factor as multiplier and divisor,
    /// so that e.g. `100 us` becomes exactly `100/1e6`.
    fn units(self) -> &'static [(&'static str, f64, f64)] {
        match self {
            Dimension::Frequency => &[("Hz", 1.0, 1.0), ("kHz", 1e3, 1.0), ("MHz", 1e6, 1.0), ("GHz", 1e9, 1.0)],
            Dimension::Time => &[("s", 1.0, 1.0), ("ms", 1.0, 1e3), ("us", 1.0, 1e6), ("µs", 1.0, 1e6), ("ns", 1.0, 1e9)],
            Dimension::Power => &[("W", 1.0, 1.0), ("mW", 1.0, 1e3), ("uW", 1.0, 1e6), ("µW", 1.0, 1e6)],
            Dimension::Decibel => &[("dB", 1.0, 1.0)],
            Dimension::Resistance => &[("ohm", 1.0, 1.0), ("Ω", 1.0, 1.0), ("kohm", 1e3, 1.0)],
            Dimension::Length => &[("m", 1.0, 1.0), ("cm", 1.0, 1e2), ("mm", 1.0, 1e3)],
            Dimension::Velocity => &[("m/s", 1.0, 1.0), ("cm/s", 1.0, 1e2), ("km/h", 1.0, 3.6)],
            Dimension::Angle => &[("rad", 1.0, 1.0), ("deg", std::f64::consts::PI, 180.0)],
        }
    }

    /// Unit used when writing a value back out.
    pub fn si_unit(self) -> &'static str {
        match self {
            Dimension::Frequency => "Hz",
            Dimension::Time => "s",
            Dimension::Power => "W",
            Dimension::Decibel => "dB",
            Dimension::Resistance => "ohm",
            Dimension::Length => "m",
            Dimension::Velocity => "m/s",
            Dimension::Angle => "rad",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dimension::Frequency => "frequency",
            Dimension::Time => "time",
            Dimension::Power => "power",
            Dimension::Decibel => "decibel",
            Dimension::Resistance => "resistance",
            Dimension::Length => "length",
            Dimension::Velocity => "velocity",
            Dimension::Angle => "angle",
        };
        f.write_str(name)
    }
}

/// Parses a quantity into SI units. The unit is mandatory.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let s = text.trim();
    let number = |prefix: &str| prefix.trim().parse::<f64>().ok().filter(|v| v.is_finite());
    if dim == Dimension::Power {
        if let Some(prefix) = s.strip_suffix("dBm") {
            if let Some(v) = number(prefix) {
                return Ok(1e-3 * 10f64.powf(v / 10.0));
            }
        }
    }
    let mut units: Vec<(&str, f64, f64)> = dim.units().to_vec();
    units.sort_by_key(|(sym, _, _)| std::cmp::Reverse(sym.len()));
    for (sym, mul, div) in units {
        if let Some(prefix) = s.strip_suffix(sym) {
            if let Some(v) = number(prefix) {
                return Ok(v * mul / div);
            }
        }
    }
    let accepted: Vec<&str> = dim.units().iter().map(|(u, _, _)| *u).collect();
    Err(format!(
        "'{text}' is not a {dim} (expected a number followed by one of {})",
        accepted.join(", ")
    ))
}

/// Renders an SI value so that [`parse_quantity`] returns it exactly.
pub fn format_quantity(value: f64, dim: Dimension) -> String {
    format!("{value:?} {}", dim.si_unit())
}
