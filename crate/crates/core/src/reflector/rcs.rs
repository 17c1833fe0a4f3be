//! Radar cross section models of the landmark reflectors.
//!
//! A tabulated model carries co- and cross-polarized σ patterns at the chirp
//! start and stop frequencies; the scalar σ used by the radar equation is the
//! mean of the two co-polarized channels, each averaged over both frequencies.
//!
//! # RCS table file
//!
//! ```text
//! # comment lines start with '#'
//! f0 59e9                 # chirp start frequency, Hz
//! bandwidth 2e9           # chirp bandwidth, Hz
//! azimuth -180 180 2      # start stop step, degrees
//! elevation 0 90 2        # start stop step, degrees (0 = reflector boresight)
//! block VV start          # one block per channel (VV HH VH HV) and frequency (start | end)
//! <rows = elevation, columns = azimuth, values in dBsm>
//! block VV end
//! ...
//! ```
//!
//! All eight blocks are required. Values are converted to m² on load.

use std::path::Path;
use std::sync::Arc;

use ndarray::Array2;

use crate::error::{read_text, Error, Result};
use crate::geometry::Vec3;
use crate::grid::{bilinear, wrap_degrees, UniformAxis};
use crate::scalar::{consts, db_to_linear, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    Vv,
    Hh,
    Vh,
    Hv,
}

impl Polarization {
    pub const ALL: [Polarization; 4] = [Self::Vv, Self::Hh, Self::Vh, Self::Hv];

    fn index(self) -> usize {
        self as usize
    }

    fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "VV" => Some(Self::Vv),
            "HH" => Some(Self::Hh),
            "VH" => Some(Self::Vh),
            "HV" => Some(Self::Hv),
            _ => None,
        }
    }
}

/// Which end of the chirp a table block was computed at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandEdge {
    Start,
    End,
}

/// Tabulated σ patterns in m² over (elevation, azimuth) of the reflector frame.
#[derive(Debug, Clone)]
pub struct RcsTable<T> {
    pub f0: T,
    pub bandwidth: T,
    pub azimuth: UniformAxis<T>,
    pub elevation: UniformAxis<T>,
    /// Indexed by `[polarization][band edge]`, each `elevation.len × azimuth.len`.
    channels: [[Array2<T>; 2]; 4],
}

impl<T: Real> RcsTable<T> {
    /// Builds a table from linear σ arrays, validating shapes and signs.
    pub fn new(
        f0: T,
        bandwidth: T,
        azimuth: UniformAxis<T>,
        elevation: UniformAxis<T>,
        channels: [[Array2<T>; 2]; 4],
    ) -> Result<Self> {
        for ch in channels.iter().flatten() {
            if ch.dim() != (elevation.len, azimuth.len) {
                return Err(Error::Validation(format!(
                    "RCS channel shape {:?} does not match grid {}x{}",
                    ch.dim(),
                    elevation.len,
                    azimuth.len
                )));
            }
            if ch.iter().any(|v| !(v.is_finite() && *v >= T::zero())) {
                return Err(Error::Validation("RCS values must be finite and >= 0".into()));
            }
        }
        Ok(RcsTable {
            f0,
            bandwidth,
            azimuth,
            elevation,
            channels,
        })
    }

    /// Table with the same σ in every cell of the co-polarized channels and
    /// zero cross-polarization.
    pub fn uniform(f0: T, bandwidth: T, sigma: T) -> Self {
        let az = UniformAxis::from_range(T::lit(-180.0), T::lit(180.0), T::lit(90.0)).unwrap();
        let el = UniformAxis::from_range(T::zero(), T::lit(90.0), T::lit(45.0)).unwrap();
        let full = Array2::from_elem((el.len, az.len), sigma);
        let zero = Array2::zeros((el.len, az.len));
        RcsTable::new(
            f0,
            bandwidth,
            az,
            el,
            [
                [full.clone(), full.clone()],
                [full.clone(), full],
                [zero.clone(), zero.clone()],
                [zero.clone(), zero],
            ],
        )
        .unwrap()
    }

    pub fn channel(&self, pol: Polarization, edge: BandEdge) -> &Array2<T> {
        &self.channels[pol.index()][edge as usize]
    }

    /// Interpolated σ (m²) of one channel; bilinear in linear units.
    pub fn sample(&self, pol: Polarization, edge: BandEdge, az_deg: T, el_deg: T) -> Result<T> {
        let (row, col) = self.locate(az_deg, el_deg)?;
        Ok(bilinear(self.channel(pol, edge), row, col))
    }

    fn locate(&self, az_deg: T, el_deg: T) -> Result<((usize, T), (usize, T))> {
        let az = if self.azimuth.is_full_circle() {
            wrap_degrees(az_deg, self.azimuth.start)
        } else {
            az_deg
        };
        match (self.elevation.locate(el_deg), self.azimuth.locate(az)) {
            (Some(r), Some(c)) => Ok((r, c)),
            _ => Err(Error::Domain(format!(
                "direction (az {az_deg}°, el {el_deg}°) outside RCS table coverage"
            ))),
        }
    }

    /// Bandwidth-averaged scalar σ: ¼·(σ_VV(f0) + σ_VV(f0+B) + σ_HH(f0) + σ_HH(f0+B)).
    pub fn scalar(&self, az_deg: T, el_deg: T) -> Result<T> {
        let (row, col) = self.locate(az_deg, el_deg)?;
        let get = |p: Polarization, e: BandEdge| bilinear(self.channel(p, e), row, col);
        let vv = (get(Polarization::Vv, BandEdge::Start) + get(Polarization::Vv, BandEdge::End))
            / T::lit(2.0);
        let hh = (get(Polarization::Hh, BandEdge::Start) + get(Polarization::Hh, BandEdge::End))
            / T::lit(2.0);
        Ok((vv + hh) / T::lit(2.0))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut f0 = None;
        let mut bandwidth = None;
        let mut az_axis = None;
        let mut el_axis = None;
        let mut blocks: [[Option<Array2<T>>; 2]; 4] = Default::default();
        let mut current: Option<(Polarization, BandEdge, usize, Vec<T>)> = None;

        let finish = |cur: Option<(Polarization, BandEdge, usize, Vec<T>)>,
                      blocks: &mut [[Option<Array2<T>>; 2]; 4],
                      el: Option<UniformAxis<T>>,
                      az: Option<UniformAxis<T>>,
                      line: usize|
         -> Result<()> {
            if let Some((pol, edge, start_line, vals)) = cur {
                let (el, az) = match (el, az) {
                    (Some(e), Some(a)) => (e, a),
                    _ => return Err(Error::format(origin, start_line, "grid must be declared before blocks")),
                };
                if vals.len() != el.len * az.len {
                    return Err(Error::format(
                        origin,
                        line,
                        format!(
                            "block {:?}/{:?} has {} values, expected {}",
                            pol,
                            edge,
                            vals.len(),
                            el.len * az.len
                        ),
                    ));
                }
                let lin = vals.into_iter().map(db_to_linear).collect();
                blocks[pol.index()][edge as usize] =
                    Some(Array2::from_shape_vec((el.len, az.len), lin).unwrap());
            }
            Ok(())
        };

        let mut row_len = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let mut tok = line.split_whitespace();
            let head = tok.next().unwrap();
            let num = |s: Option<&str>| -> Result<T> {
                s.and_then(|v| v.parse::<f64>().ok())
                    .map(T::lit)
                    .ok_or_else(|| Error::format(origin, line_no, format!("expected number in '{line}'")))
            };
            match head {
                "f0" => f0 = Some(num(tok.next())?),
                "bandwidth" => bandwidth = Some(num(tok.next())?),
                "azimuth" | "elevation" => {
                    let (a, b, s) = (num(tok.next())?, num(tok.next())?, num(tok.next())?);
                    let axis = UniformAxis::from_range(a, b, s)
                        .map_err(|e| Error::format(origin, line_no, e.to_string()))?;
                    if head == "azimuth" {
                        az_axis = Some(axis);
                    } else {
                        el_axis = Some(axis);
                    }
                }
                "block" => {
                    finish(current.take(), &mut blocks, el_axis, az_axis, line_no)?;
                    let pol = tok
                        .next()
                        .and_then(Polarization::parse)
                        .ok_or_else(|| Error::format(origin, line_no, "expected polarization VV|HH|VH|HV"))?;
                    let edge = match tok.next() {
                        Some("start") => BandEdge::Start,
                        Some("end") => BandEdge::End,
                        _ => return Err(Error::format(origin, line_no, "expected 'start' or 'end'")),
                    };
                    current = Some((pol, edge, line_no, Vec::new()));
                    row_len = None;
                }
                _ => {
                    let Some((_, _, _, vals)) = current.as_mut() else {
                        return Err(Error::format(origin, line_no, format!("unexpected line '{line}'")));
                    };
                    let mut n = 0;
                    for v in line.split_whitespace() {
                        let x: f64 = v
                            .parse()
                            .map_err(|_| Error::format(origin, line_no, format!("bad value '{v}'")))?;
                        vals.push(T::lit(x));
                        n += 1;
                    }
                    if let Some(az) = az_axis {
                        if n != az.len {
                            return Err(Error::format(
                                origin,
                                line_no,
                                format!("row has {n} values, expected {}", az.len),
                            ));
                        }
                    }
                    row_len.get_or_insert(n);
                }
            }
        }
        let end_line = text.lines().count();
        finish(current.take(), &mut blocks, el_axis, az_axis, end_line)?;

        let f0 = f0.ok_or_else(|| Error::format(origin, end_line, "missing f0"))?;
        let bandwidth = bandwidth.ok_or_else(|| Error::format(origin, end_line, "missing bandwidth"))?;
        let az = az_axis.ok_or_else(|| Error::format(origin, end_line, "missing azimuth grid"))?;
        let el = el_axis.ok_or_else(|| Error::format(origin, end_line, "missing elevation grid"))?;
        let mut out: Vec<[Array2<T>; 2]> = Vec::with_capacity(4);
        for pol in Polarization::ALL {
            let [s, e] = std::mem::take(&mut blocks[pol.index()]);
            match (s, e) {
                (Some(s), Some(e)) => out.push([s, e]),
                _ => {
                    return Err(Error::format(
                        origin,
                        end_line,
                        format!("missing block(s) for {pol:?}"),
                    ))
                }
            }
        }
        let channels: [[Array2<T>; 2]; 4] = out.try_into().map_err(|_| Error::Validation("channels".into()))?;
        RcsTable::new(f0, bandwidth, az, el, channels)
    }

    /// Writes the table in the documented text format (values in dBsm).
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        writeln!(s, "f0 {}", self.f0).unwrap();
        writeln!(s, "bandwidth {}", self.bandwidth).unwrap();
        writeln!(s, "azimuth {} {} {}", self.azimuth.start, self.azimuth.stop(), self.azimuth.step).unwrap();
        writeln!(s, "elevation {} {} {}", self.elevation.start, self.elevation.stop(), self.elevation.step).unwrap();
        for pol in Polarization::ALL {
            for (edge, name) in [(BandEdge::Start, "start"), (BandEdge::End, "end")] {
                writeln!(s, "block {} {}", format!("{pol:?}").to_uppercase(), name).unwrap();
                for row in self.channel(pol, edge).rows() {
                    let cells: Vec<String> = row
                        .iter()
                        .map(|v| format!("{}", T::lit(10.0) * v.max(T::lit(1e-30)).log10()))
                        .collect();
                    writeln!(s, "{}", cells.join(" ")).unwrap();
                }
            }
        }
        s
    }
}

/// Peak RCS of a triangular trihedral corner reflector, 4π·a⁴/(3λ²).
pub fn trihedral_peak_rcs<T: Real>(edge: T, wavelength: T) -> T {
    T::lit(4.0) * T::PI() * edge.powi(4) / (T::lit(3.0) * wavelength * wavelength)
}

/// RCS model attached to one reflector.
#[derive(Debug, Clone)]
pub enum RcsModel<T> {
    Table(Arc<RcsTable<T>>),
    /// Aspect-independent trihedral peak with edge length in meters.
    Trihedral { edge: T },
}

impl<T: Real> RcsModel<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            RcsModel::Trihedral { edge } if !(*edge > T::zero() && edge.is_finite()) => Err(
                Error::Validation(format!("trihedral edge length must be > 0, got {edge}")),
            ),
            _ => Ok(()),
        }
    }

    /// Scalar σ in m² toward (az, el) in the reflector frame. `f0` and
    /// `bandwidth` select the analytic model's center wavelength; table mode
    /// uses the frequencies the table was computed at.
    pub fn scalar(&self, az_deg: T, el_deg: T, f0: T, bandwidth: T) -> Result<T> {
        match self {
            RcsModel::Table(t) => t.scalar(az_deg, el_deg),
            RcsModel::Trihedral { edge } => {
                let lambda = T::lit(consts::SPEED_OF_LIGHT) / (f0 + bandwidth / T::lit(2.0));
                Ok(trihedral_peak_rcs(*edge, lambda))
            }
        }
    }
}

/// Direction angles in a reflector frame whose boresight points down (−z)
/// and whose azimuth reference is rotated by `yaw` radians about +z.
///
/// Elevation is the angle from boresight in degrees. Azimuth is
/// `atan2(-y, x)` of the yaw-compensated direction in degrees, the same
/// bearing convention as the radar antenna.
pub fn reflector_frame_angles<T: Real>(direction: Vec3<T>, yaw: T) -> (T, T) {
    let d = direction.rotate_z(-yaw);
    let el = (-d.z).max(-T::one()).min(T::one()).acos().to_degrees();
    let az = if d.x == T::zero() && d.y == T::zero() {
        T::zero()
    } else {
        (-d.y).atan2(d.x).to_degrees()
    };
    (az, el)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_with(vv: [f64; 2], hh: [f64; 2], cross: f64) -> RcsTable<f64> {
        let az = UniformAxis::from_range(-180.0, 180.0, 90.0).unwrap();
        let el = UniformAxis::from_range(0.0, 90.0, 45.0).unwrap();
        let c = |v: f64| Array2::from_elem((el.len, az.len), v);
        RcsTable::new(
            59e9,
            2e9,
            az,
            el,
            [[c(vv[0]), c(vv[1])], [c(hh[0]), c(hh[1])], [c(cross), c(cross)], [c(cross), c(cross)]],
        )
        .unwrap()
    }

    #[test]
    fn scalar_averages_co_pol_over_band() {
        let t = table_with([10.0, 20.0], [12.0, 18.0], 0.0);
        assert_eq!(t.scalar(0.0, 0.0).unwrap(), 15.0);
    }

    #[test]
    fn cross_pol_is_ignored() {
        let a = table_with([10.0, 20.0], [12.0, 18.0], 0.0);
        let b = table_with([10.0, 20.0], [12.0, 18.0], 500.0);
        assert_eq!(a.scalar(30.0, 20.0).unwrap(), b.scalar(30.0, 20.0).unwrap());
    }

    #[test]
    fn vv_hh_swap_symmetry() {
        let a = table_with([10.0, 20.0], [12.0, 18.0], 0.0);
        let b = table_with([12.0, 18.0], [10.0, 20.0], 0.0);
        assert_eq!(a.scalar(-45.0, 10.0).unwrap(), b.scalar(-45.0, 10.0).unwrap());
    }

    #[test]
    fn out_of_coverage_is_domain_error() {
        let t = table_with([1.0, 1.0], [1.0, 1.0], 0.0);
        assert!(matches!(t.scalar(0.0, 120.0), Err(Error::Domain(_))));
    }

    #[test]
    fn trihedral_formula() {
        let lambda: f64 = 5.081e-3;
        let expected = 4.0 * std::f64::consts::PI * 1e-4 / (3.0 * lambda * lambda);
        let got = trihedral_peak_rcs(0.1, lambda);
        assert!((got - expected).abs() < 1e-12 * expected);
        assert!((got - 16.2).abs() < 0.05);
    }

    #[test]
    fn text_roundtrip() {
        let t = table_with([10.0, 20.0], [12.0, 18.0], 1e-3);
        let back = RcsTable::<f64>::parse(&t.to_text(), "mem").unwrap();
        assert!((back.scalar(0.0, 0.0).unwrap() - 15.0).abs() < 1e-9);
    }

    #[test]
    fn missing_block_is_format_error() {
        let t = table_with([10.0, 20.0], [12.0, 18.0], 1e-3).to_text();
        let cut: String = t.split("block HV end").next().unwrap().to_string();
        assert!(matches!(RcsTable::<f64>::parse(&cut, "mem"), Err(Error::Format { .. })));
    }

    #[test]
    fn reflector_angles() {
        let (az, el) = reflector_frame_angles(Vec3::new(0.0, 0.0, -1.0), 0.3);
        assert_eq!((az, el), (0.0, 0.0));
        let d = Vec3::new(1.0, 0.0, -1.0f64).normalize();
        let (az, el) = reflector_frame_angles(d, 0.0);
        assert!(az.abs() < 1e-12 && (el - 45.0).abs() < 1e-12);
    }
}
