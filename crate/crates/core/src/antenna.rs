//! Measured two-way antenna gain patterns G² = G_T·G_R.
//!
//! Radar frame convention: boresight is +z (the radar faces the ceiling).
//! Elevation is the angle off boresight in degrees, 0° straight up and 90° on
//! the horizon. Azimuth is the bearing of the horizontal component, 0° along
//! the robot heading and increasing clockwise seen from above (+90° is to the
//! robot's right).
//!
//! # Pattern file
//!
//! ```text
//! receiver 1              # receive antenna id (1..=3)
//! f0 59e9                 # chirp start frequency, Hz
//! bandwidth 2e9           # chirp bandwidth, Hz
//! azimuth -180 180 2      # start stop step in degrees, or: azimuth_nodes a0 a1 ...
//! elevation 0 90 2        # start stop step in degrees, or: elevation_nodes e0 e1 ...
//! <one row per elevation node, one column per azimuth node, two-way gain in dB>
//! ```
//!
//! Patterns are renormalized on load so that the maximum cell is 0 dB.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::error::{read_text, Error, Result};
use crate::geometry::Vec3;
use crate::grid::{bilinear, wrap_degrees, UniformAxis};
use crate::scalar::{db_to_linear, Real};

/// Two-way gain assigned to directions outside the measured coverage, dB.
pub const DEFAULT_FLOOR_DB: f64 = -60.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternMeta<T> {
    pub receiver: u8,
    pub f0: T,
    pub bandwidth: T,
}

#[derive(Debug, Clone)]
pub struct AntennaPattern<T> {
    pub azimuth: UniformAxis<T>,
    pub elevation: UniformAxis<T>,
    /// Normalized two-way gain in dB, rows = elevation, columns = azimuth.
    gain_db: Array2<T>,
    pub meta: PatternMeta<T>,
    pub floor_db: T,
}

impl<T: Real> AntennaPattern<T> {
    /// Builds a pattern and renormalizes it to a 0 dB maximum.
    pub fn new(
        azimuth: UniformAxis<T>,
        elevation: UniformAxis<T>,
        gain_db: Array2<T>,
        meta: PatternMeta<T>,
    ) -> Result<Self> {
        if gain_db.dim() != (elevation.len, azimuth.len) {
            return Err(Error::Validation(format!(
                "gain array {:?} does not match grid {}x{}",
                gain_db.dim(),
                elevation.len,
                azimuth.len
            )));
        }
        if gain_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("antenna gain contains non-finite entries".into()));
        }
        let max = gain_db.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
        let gain_db = gain_db.mapv(|v| v - max);
        Ok(AntennaPattern {
            azimuth,
            elevation,
            gain_db,
            meta,
            floor_db: T::lit(DEFAULT_FLOOR_DB),
        })
    }

    /// Azimuthally symmetric cos^q(el) two-way pattern on a 2° grid covering
    /// the upper hemisphere; a stand-in when no measurement is available.
    pub fn synthetic_cosine(exponent: T, meta: PatternMeta<T>) -> Self {
        let az = UniformAxis::from_range(T::lit(-180.0), T::lit(180.0), T::lit(2.0)).unwrap();
        let el = UniformAxis::from_range(T::zero(), T::lit(90.0), T::lit(2.0)).unwrap();
        let floor = T::lit(DEFAULT_FLOOR_DB);
        let gain = Array2::from_shape_fn((el.len, az.len), |(r, _)| {
            let c = el.value(r).to_radians().cos().max(T::zero());
            (T::lit(10.0) * exponent * c.log10()).max(floor)
        });
        AntennaPattern::new(az, el, gain, meta).unwrap()
    }

    pub fn gain_db(&self) -> &Array2<T> {
        &self.gain_db
    }

    /// Interpolated two-way gain in dB; `None` outside coverage.
    pub fn gain_db_at(&self, az_deg: T, el_deg: T) -> Option<T> {
        let az = if self.azimuth.is_full_circle() {
            wrap_degrees(az_deg, self.azimuth.start)
        } else {
            az_deg
        };
        let row = self.elevation.locate(el_deg)?;
        let col = self.azimuth.locate(az)?;
        Some(bilinear(&self.gain_db, row, col))
    }

    /// Linear two-way gain G_T·G_R toward (az, el): bilinear in dB, then
    /// 10^(dB/10). Outside coverage the floor gain is returned.
    pub fn two_way_gain(&self, az_deg: T, el_deg: T) -> T {
        db_to_linear(self.gain_db_at(az_deg, el_deg).unwrap_or(self.floor_db))
    }

    /// Two-way gain toward a world-frame unit direction for a radar heading.
    pub fn gain_toward(&self, direction: Vec3<T>, heading: T) -> Result<T> {
        let (az, el) = world_to_radar_angles(direction, heading)?;
        Ok(self.two_way_gain(az, el))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut receiver = None;
        let mut f0 = None;
        let mut bandwidth = None;
        let mut az = None;
        let mut el = None;
        let mut rows: Vec<(usize, Vec<T>)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            let nums = |from: usize| -> Result<Vec<T>> {
                tok[from..]
                    .iter()
                    .map(|s| {
                        s.parse::<f64>()
                            .map(T::lit)
                            .map_err(|_| Error::format(origin, line_no, format!("bad number '{s}'")))
                    })
                    .collect()
            };
            let one = |from: usize| -> Result<T> {
                let v = nums(from)?;
                if v.len() != 1 {
                    return Err(Error::format(origin, line_no, format!("'{}' takes one value", tok[0])));
                }
                Ok(v[0])
            };
            match tok[0] {
                "receiver" => {
                    receiver = Some(
                        tok.get(1)
                            .and_then(|s| s.parse::<u8>().ok())
                            .ok_or_else(|| Error::format(origin, line_no, "receiver needs an integer id"))?,
                    )
                }
                "f0" => f0 = Some(one(1)?),
                "bandwidth" => bandwidth = Some(one(1)?),
                "azimuth" | "elevation" => {
                    let v = nums(1)?;
                    if v.len() != 3 {
                        return Err(Error::format(origin, line_no, "expected: start stop step"));
                    }
                    let axis = UniformAxis::from_range(v[0], v[1], v[2])?;
                    if tok[0] == "azimuth" {
                        az = Some(axis);
                    } else {
                        el = Some(axis);
                    }
                }
                "azimuth_nodes" | "elevation_nodes" => {
                    let axis = axis_from_nodes(&nums(1)?)?;
                    if tok[0] == "azimuth_nodes" {
                        az = Some(axis);
                    } else {
                        el = Some(axis);
                    }
                }
                _ => rows.push((line_no, nums(0)?)),
            }
        }

        let last = text.lines().count().max(1);
        let az = az.ok_or_else(|| Error::format(origin, last, "missing azimuth grid"))?;
        let el = el.ok_or_else(|| Error::format(origin, last, "missing elevation grid"))?;
        let meta = PatternMeta {
            receiver: receiver.ok_or_else(|| Error::format(origin, last, "missing receiver"))?,
            f0: f0.ok_or_else(|| Error::format(origin, last, "missing f0"))?,
            bandwidth: bandwidth.ok_or_else(|| Error::format(origin, last, "missing bandwidth"))?,
        };
        for (line_no, r) in &rows {
            if r.len() != az.len {
                return Err(Error::format(
                    origin,
                    *line_no,
                    format!("row has {} cells, expected {}", r.len(), az.len),
                ));
            }
        }
        if rows.len() != el.len {
            return Err(Error::format(
                origin,
                last,
                format!("pattern has {} rows, expected {}", rows.len(), el.len),
            ));
        }
        let flat: Vec<T> = rows.into_iter().flat_map(|(_, r)| r).collect();
        if let Some(pos) = flat.iter().position(|v| !v.is_finite()) {
            return Err(Error::format(
                origin,
                last,
                format!("missing cell at row {}, column {}", pos / az.len, pos % az.len),
            ));
        }
        let gain = Array2::from_shape_vec((el.len, az.len), flat).unwrap();
        AntennaPattern::new(az, el, gain, meta)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "receiver {}", self.meta.receiver).unwrap();
        writeln!(s, "f0 {}", self.meta.f0).unwrap();
        writeln!(s, "bandwidth {}", self.meta.bandwidth).unwrap();
        writeln!(s, "azimuth {} {} {}", self.azimuth.start, self.azimuth.stop(), self.azimuth.step).unwrap();
        writeln!(s, "elevation {} {} {}", self.elevation.start, self.elevation.stop(), self.elevation.step).unwrap();
        for row in self.gain_db.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(s, "{}", cells.join(" ")).unwrap();
        }
        s
    }
}

fn axis_from_nodes<T: Real>(nodes: &[T]) -> Result<UniformAxis<T>> {
    if nodes.len() < 2 {
        return Err(Error::Validation("grid needs at least 2 nodes".into()));
    }
    let step = nodes[1] - nodes[0];
    for w in nodes.windows(2) {
        if ((w[1] - w[0]) - step).abs() > step.abs() * T::lit(1e-6) {
            return Err(Error::Validation(format!(
                "non-uniform grid: step {} differs from {}",
                w[1] - w[0],
                step
            )));
        }
    }
    UniformAxis::from_range(nodes[0], nodes[nodes.len() - 1], step)
}

/// Converts a world-frame unit direction to radar (az, el) in degrees for a
/// robot heading in radians: rotate by −heading about +z, then
/// el = acos(z), az = atan2(−y, x).
pub fn world_to_radar_angles<T: Real>(direction: Vec3<T>, heading: T) -> Result<(T, T)> {
    if (direction.norm() - T::one()).abs() > T::lit(1e-9).max(T::epsilon() * T::lit(16.0)) {
        return Err(Error::Domain(format!(
            "direction must be a unit vector (norm {})",
            direction.norm()
        )));
    }
    let d = direction.rotate_z(-heading);
    let el = d.z.max(-T::one()).min(T::one()).acos().to_degrees();
    let az = if d.x == T::zero() && d.y == T::zero() {
        T::zero()
    } else {
        (-d.y).atan2(d.x).to_degrees()
    };
    Ok((az, el))
}

/// A set of patterns keyed on (receiver id, bandwidth).
#[derive(Debug, Clone, Default)]
pub struct PatternLibrary<T> {
    patterns: Vec<AntennaPattern<T>>,
}

impl<T: Real> PatternLibrary<T> {
    pub fn new(patterns: Vec<AntennaPattern<T>>) -> Self {
        PatternLibrary { patterns }
    }

    /// Pattern for a receiver whose bandwidth matches within 1 ppm.
    pub fn select(&self, receiver: u8, bandwidth: T) -> Option<&AntennaPattern<T>> {
        self.patterns.iter().find(|p| {
            p.meta.receiver == receiver
                && (p.meta.bandwidth - bandwidth).abs() <= bandwidth.abs() * T::lit(1e-6)
        })
    }
}
