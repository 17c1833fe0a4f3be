//! Multipath channel of the room (reflector landmarks excluded).

pub mod bundle;
pub mod fresnel;
pub mod trace;

use std::fmt::Write as _;

use crate::antenna::AntennaPattern;
use crate::error::Result;
use crate::geometry::Vec3;
use crate::scalar::{linear_to_db, Real};

pub use bundle::{launch_directions, RayBundle};
pub use trace::{path_loss, specular_path, trace_paths, Reception, TraceOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathSource {
    RayTraced,
    /// Direct return of the reflector with this id.
    Reflector(u32),
}

/// One point-target reflection of the received signal.
#[derive(Debug, Clone, PartialEq)]
pub struct PathContribution<T> {
    /// Path loss L_k, dB.
    pub loss_db: T,
    /// Propagation distance d_k = 2·r_k, m.
    pub distance: T,
    /// Equivalent monostatic range r_k, m.
    pub range: T,
    /// Radial velocity, m/s, positive when closing.
    pub velocity: T,
    /// Angle of arrival (azimuth, elevation) in degrees, radar frame.
    pub aoa: (T, T),
    /// Phase φ_k in cycles, reduced to [0, 1).
    pub phase_cycles: T,
    pub source: PathSource,
    /// Reflection-face sequence for ray-traced paths, empty otherwise.
    pub faces: Vec<usize>,
    /// World unit vector from the radar toward the first bounce.
    pub departure: Vec3<T>,
    /// World unit vector from the radar toward the direction of arrival.
    pub arrival: Vec3<T>,
}

/// Radial velocity of a path: projection of the radar velocity onto the
/// arrival direction. Positive when the radar moves toward the arrival.
pub fn ray_doppler<T: Real>(arrival: Vec3<T>, radar_velocity: Vec3<T>) -> T {
    radar_velocity.dot(arrival)
}

/// Adds the two-way antenna gain to ray-traced paths. The product pattern
/// G_T·G_R is only known for a common direction, so a path leaving along
/// `departure` and returning along `arrival` is weighted with the geometric
/// mean √(G²(dep)·G²(arr)).
pub fn apply_antenna_gain<T: Real>(
    paths: &mut [PathContribution<T>],
    pattern: &AntennaPattern<T>,
    heading: T,
) -> Result<()> {
    for p in paths.iter_mut().filter(|p| p.source == PathSource::RayTraced) {
        let g_dep = pattern.gain_toward(p.departure, heading)?;
        let g_arr = pattern.gain_toward(p.arrival, heading)?;
        p.loss_db = p.loss_db - linear_to_db((g_dep * g_arr).sqrt());
    }
    Ok(())
}

/// Text dump of contributions, one per line, for debugging and oracle comparison.
pub fn dump_paths<T: Real>(paths: &[PathContribution<T>]) -> String {
    let mut s = String::from(
        "# source loss_db distance_m range_m velocity_mps az_deg el_deg phase_cycles faces\n",
    );
    for p in paths {
        let source = match p.source {
            PathSource::RayTraced => "raytraced".to_string(),
            PathSource::Reflector(id) => format!("reflector:{id}"),
        };
        let faces = if p.faces.is_empty() {
            "-".to_string()
        } else {
            p.faces.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(",")
        };
        writeln!(
            s,
            "{source} {:.9} {:.9} {:.9} {:.9} {:.6} {:.6} {:.9} {faces}",
            p.loss_db, p.distance, p.range, p.velocity, p.aoa.0, p.aoa.1, p.phase_cycles
        )
        .unwrap();
    }
    s
}
