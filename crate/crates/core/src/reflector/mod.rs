//! Direct returns of the landmark reflectors, modeled with the radar equation.

pub mod rcs;

use crate::antenna::{world_to_radar_angles, AntennaPattern};
use crate::baseband::RadarConfig;
use crate::channel::{ray_doppler, PathContribution, PathSource};
use crate::error::Result;
use crate::scalar::{wavelength, Real};
use crate::scene::{Pose, Reflector, Scene};

pub use rcs::{reflector_frame_angles, trihedral_peak_rcs, RcsModel, RcsTable};

/// Two-way path loss of a point target from the radar equation,
/// `−10·log10(G_T·G_R·λ²·σ / ((4π)³·r⁴))` with unit polarization loss.
pub fn radar_equation_loss<T: Real>(two_way_gain: T, wavelength: T, rcs: T, range: T) -> T {
    let four_pi = T::lit(4.0) * T::PI();
    let ratio = two_way_gain * wavelength * wavelength * rcs / (four_pi.powi(3) * range.powi(4));
    -T::lit(10.0) * ratio.log10()
}

/// Contribution of one reflector seen from `radar`, or `None` when the
/// reflector has no line of sight (or its RCS table does not cover the
/// current aspect).
pub fn reflector_contribution<T: Real>(
    radar: &Pose<T>,
    reflector: &Reflector<T>,
    scene: &Scene<T>,
    pattern: &AntennaPattern<T>,
    cfg: &RadarConfig<T>,
) -> Result<Option<PathContribution<T>>> {
    if reflector.position == radar.position || !scene.los_visible(radar.position, reflector.position) {
        return Ok(None);
    }
    let offset = reflector.position - radar.position;
    let range = offset.norm();
    let toward = offset / range;
    let (az, el) = world_to_radar_angles(toward, radar.heading)?;
    let gain = pattern.two_way_gain(az, el);
    let (raz, rel) = reflector_frame_angles(-toward, reflector.yaw);
    let sigma = match reflector.rcs.scalar(raz, rel, cfg.f0, cfg.bandwidth) {
        Ok(s) => s,
        Err(_) => return Ok(None),
    };
    let lambda = wavelength(cfg.f0);
    let cycles = T::lit(2.0) * range / lambda;
    Ok(Some(PathContribution {
        loss_db: radar_equation_loss(gain, lambda, sigma, range),
        distance: T::lit(2.0) * range,
        range,
        velocity: ray_doppler(toward, radar.velocity),
        aoa: (az, el),
        phase_cycles: cycles - cycles.floor(),
        source: PathSource::Reflector(reflector.id),
        faces: Vec::new(),
        departure: toward,
        arrival: toward,
    }))
}

/// Contributions of every reflector in the scene, in scene order.
pub fn reflector_contributions<T: Real>(
    radar: &Pose<T>,
    scene: &Scene<T>,
    pattern: &AntennaPattern<T>,
    cfg: &RadarConfig<T>,
) -> Result<Vec<PathContribution<T>>> {
    let mut out = Vec::new();
    for r in scene.reflectors() {
        if let Some(c) = reflector_contribution(radar, r, scene, pattern, cfg)? {
            out.push(c);
        }
    }
    Ok(out)
}
