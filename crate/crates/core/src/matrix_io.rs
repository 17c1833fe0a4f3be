//! Binary and CSV export of frames and range-Doppler maps.
//!
//! # Binary matrix file
//!
//! All fields little-endian:
//!
//! | offset | type    | field                                         |
//! |--------|---------|-----------------------------------------------|
//! | 0      | [u8; 8] | magic `RSIMMAT1`                              |
//! | 8      | u32     | kind: 0 = baseband frame, 1 = power map       |
//! | 12     | u32     | reserved (0)                                  |
//! | 16     | u64     | rows                                          |
//! | 24     | u64     | columns                                       |
//! | 32     | u64     | M, fast-time samples per chirp                |
//! | 40     | u64     | N, chirps per frame                           |
//! | 48     | f64     | T_m, s                                        |
//! | 56     | f64     | T_n, s                                        |
//! | 64     | f64     | f0, Hz                                        |
//! | 72     | f64     | B, Hz                                         |
//! | 80     | f64     | T_chirp, s                                    |
//! | 88     | f64     | timestamp, s                                  |
//! | 96     | f64[]   | rows × columns values, row-major              |
//!
//! Frames have rows = M, columns = N; maps have rows = M/2+1, columns = N.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::baseband::RadarConfig;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAGIC: &[u8; 8] = b"RSIMMAT1";
const HEADER_LEN: usize = 96;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Frame = 0,
    PowerMap = 1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixHeader {
    pub kind: MatrixKind,
    pub rows: usize,
    pub cols: usize,
    pub samples_per_chirp: usize,
    pub chirps_per_frame: usize,
    pub sample_interval: f64,
    pub chirp_interval: f64,
    pub f0: f64,
    pub bandwidth: f64,
    pub chirp_duration: f64,
    pub timestamp: f64,
}

impl MatrixHeader {
    pub fn for_config<T: Real>(kind: MatrixKind, rows: usize, cols: usize, cfg: &RadarConfig<T>, timestamp: T) -> Self {
        MatrixHeader {
            kind,
            rows,
            cols,
            samples_per_chirp: cfg.samples_per_chirp,
            chirps_per_frame: cfg.chirps_per_frame,
            sample_interval: cfg.sample_interval.to_f64_lossy(),
            chirp_interval: cfg.chirp_interval.to_f64_lossy(),
            f0: cfg.f0.to_f64_lossy(),
            bandwidth: cfg.bandwidth.to_f64_lossy(),
            chirp_duration: cfg.chirp_duration.to_f64_lossy(),
            timestamp: timestamp.to_f64_lossy(),
        }
    }

    /// Radar configuration implied by the header; power and noise fields take preset values.
    pub fn radar_config<T: Real>(&self) -> RadarConfig<T> {
        RadarConfig {
            f0: T::lit(self.f0),
            bandwidth: T::lit(self.bandwidth),
            chirp_duration: T::lit(self.chirp_duration),
            sample_interval: T::lit(self.sample_interval),
            chirp_interval: T::lit(self.chirp_interval),
            samples_per_chirp: self.samples_per_chirp,
            chirps_per_frame: self.chirps_per_frame,
            ..RadarConfig::preset(T::lit(self.bandwidth))
        }
    }
}

pub fn write_matrix<T: Real, W: Write>(w: &mut W, header: &MatrixHeader, data: &Array2<T>) -> std::io::Result<()> {
    assert_eq!(data.dim(), (header.rows, header.cols), "header does not match data shape");
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * data.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(header.kind as u32).to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    for v in [header.rows, header.cols, header.samples_per_chirp, header.chirps_per_frame] {
        buf.extend_from_slice(&(v as u64).to_le_bytes());
    }
    for v in [
        header.sample_interval,
        header.chirp_interval,
        header.f0,
        header.bandwidth,
        header.chirp_duration,
        header.timestamp,
    ] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for v in data.iter() {
        buf.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn read_matrix<T: Real, R: Read>(r: &mut R, origin: &str) -> Result<(MatrixHeader, Array2<T>)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| Error::io(origin, e))?;
    let bad = |msg: &str| Error::format(origin, 0, msg.to_string());
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(bad("not a radarsim matrix file"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let kind = match u32_at(8) {
        0 => MatrixKind::Frame,
        1 => MatrixKind::PowerMap,
        k => return Err(bad(&format!("unknown matrix kind {k}"))),
    };
    let header = MatrixHeader {
        kind,
        rows: u64_at(16),
        cols: u64_at(24),
        samples_per_chirp: u64_at(32),
        chirps_per_frame: u64_at(40),
        sample_interval: f64_at(48),
        chirp_interval: f64_at(56),
        f0: f64_at(64),
        bandwidth: f64_at(72),
        chirp_duration: f64_at(80),
        timestamp: f64_at(88),
    };
    let n = header
        .rows
        .checked_mul(header.cols)
        .ok_or_else(|| bad("matrix dimensions overflow"))?;
    if bytes.len() != HEADER_LEN + 8 * n {
        return Err(bad(&format!(
            "expected {} data bytes, found {}",
            8 * n,
            bytes.len() - HEADER_LEN
        )));
    }
    let vals: Vec<T> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| T::lit(f64::from_le_bytes(c.try_into().unwrap())))
        .collect();
    let data = Array2::from_shape_vec((header.rows, header.cols), vals).unwrap();
    Ok((header, data))
}

pub fn save_matrix<T: Real>(path: &Path, header: &MatrixHeader, data: &Array2<T>) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_matrix(&mut f, header, data).map_err(|e| Error::io(path, e))
}

pub fn load_matrix<T: Real>(path: &Path) -> Result<(MatrixHeader, Array2<T>)> {
    let mut f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrix(&mut f, &path.display().to_string())
}

/// CSV rendering: one line per row, comma-separated, shortest round-trip formatting.
pub fn matrix_to_csv<T: Real>(data: &Array2<T>) -> String {
    let mut s = String::with_capacity(data.len() * 12);
    for row in data.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{:e}", v.to_f64_lossy())).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}
