//! Shooting-and-bouncing-rays tracer with image-method path correction.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::antenna::world_to_radar_angles;
use crate::channel::bundle::RayBundle;
use crate::channel::fresnel::reflection_loss_db;
use crate::channel::{PathContribution, PathSource};
use crate::error::{Error, Result};
use crate::geometry::{Vec3, SEGMENT_EPSILON};
use crate::scalar::{wavelength, Real};
use crate::scene::{Material, Pose, Scene};

/// Highest supported reflection order.
pub const MAX_ORDER: usize = 3;

/// Capture policy for the reception sphere around the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reception<T> {
    /// Constant radius in meters.
    Fixed(T),
    /// Radius grows with the unfolded path length `d` as `d·tan(α)`, where α
    /// is the bundle's covering angle, so every direction on the sphere is
    /// within reach of at least one launched ray.
    Adaptive,
}

#[derive(Debug, Clone, Copy)]
pub struct TraceOptions<T> {
    pub max_order: usize,
    pub reception: Reception<T>,
    /// Carrier frequency for path loss, Fresnel coefficients and phase, Hz.
    pub f0: T,
}

/// Exact specular path for one face sequence.
#[derive(Debug, Clone)]
pub struct SpecularPath<T> {
    pub faces: Vec<usize>,
    /// Reflection points in propagation order.
    pub points: Vec<Vec3<T>>,
    pub distance: T,
    /// |cos θ| of the incidence angle at each bounce.
    pub cos_incidence: Vec<T>,
    /// Unit vector from the transmitter toward the first bounce.
    pub departure: Vec3<T>,
    /// Unit vector from the receiver toward the last bounce.
    pub arrival: Vec3<T>,
}

struct Hit<T> {
    t: T,
    face: usize,
}

fn nearest_hit<T: Real>(scene: &Scene<T>, origin: Vec3<T>, dir: Vec3<T>, skip: Option<usize>) -> Option<Hit<T>> {
    let eps = T::lit(SEGMENT_EPSILON);
    let mut best: Option<Hit<T>> = None;
    for (i, f) in scene.faces().iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        if let Some(t) = f.triangle.intersect(origin, dir) {
            if t > eps && best.as_ref().is_none_or(|b| t < b.t) {
                best = Some(Hit { t, face: i });
            }
        }
    }
    best
}

/// Follows one launched ray and returns the face sequences of every
/// reception-sphere capture along it.
fn shoot<T: Real>(
    scene: &Scene<T>,
    rx: Vec3<T>,
    start_dir: Vec3<T>,
    opts: &TraceOptions<T>,
    covering: T,
) -> Vec<Vec<usize>> {
    let mut captures = Vec::new();
    let mut pos = rx;
    let mut dir = start_dir;
    let mut travelled = T::zero();
    let mut faces = Vec::new();
    let mut hit = nearest_hit(scene, pos, dir, None);
    while faces.len() < opts.max_order {
        let Some(h) = hit else { break };
        travelled = travelled + h.t;
        pos = pos + dir * h.t;
        faces.push(h.face);
        let n = scene.faces()[h.face].triangle.normal();
        dir = dir.reflect(n).normalize();
        let next = nearest_hit(scene, pos, dir, Some(h.face));
        let to_rx = rx - pos;
        let s = to_rx.dot(dir);
        let limit = next.as_ref().map_or(T::infinity(), |n| n.t);
        if s > T::zero() && s < limit {
            let miss = (to_rx - dir * s).norm();
            let radius = match opts.reception {
                Reception::Fixed(r) => r,
                Reception::Adaptive => (travelled + s) * covering.tan(),
            };
            if miss <= radius {
                captures.push(faces.clone());
            }
        }
        hit = next;
    }
    captures
}

/// Image-method path for a face sequence between a colocated TX/RX, or
/// `None` when the sequence has no valid unobstructed specular path.
pub fn specular_path<T: Real>(scene: &Scene<T>, radar: Vec3<T>, faces: &[usize]) -> Option<SpecularPath<T>> {
    if faces.is_empty() {
        return None;
    }
    let tris: Vec<_> = faces.iter().map(|&f| scene.faces()[f].triangle).collect();
    let normals: Vec<_> = tris.iter().map(|t| t.normal()).collect();
    // images of the transmitter through the face planes
    let mut images = Vec::with_capacity(faces.len());
    let mut img = radar;
    for (t, n) in tris.iter().zip(&normals) {
        img = img - *n * (T::lit(2.0) * (img - t.a).dot(*n));
        images.push(img);
    }
    // walk back from the receiver through the images
    let eps = T::lit(1e-12);
    let mut points = vec![Vec3::zero(); faces.len()];
    let mut cur = radar;
    for j in (0..faces.len()).rev() {
        let d = images[j] - cur;
        let t = tris[j].intersect(cur, d)?;
        if !(t > eps && t < T::one() - eps) {
            return None;
        }
        cur = cur + d * t;
        points[j] = cur;
    }
    let mut nodes = Vec::with_capacity(faces.len() + 2);
    nodes.push(radar);
    nodes.extend_from_slice(&points);
    nodes.push(radar);
    let mut distance = T::zero();
    for w in nodes.windows(2) {
        let len = w[0].distance(w[1]);
        if !(len > T::lit(SEGMENT_EPSILON)) || !scene.los_visible(w[0], w[1]) {
            return None;
        }
        distance = distance + len;
    }
    let cos_incidence = (0..faces.len())
        .map(|j| {
            let inc = (nodes[j + 1] - nodes[j]).normalize();
            inc.dot(normals[j]).abs()
        })
        .collect();
    Some(SpecularPath {
        faces: faces.to_vec(),
        departure: (points[0] - radar).normalize(),
        arrival: (points[faces.len() - 1] - radar).normalize(),
        points,
        distance,
        cos_incidence,
    })
}

/// Path loss in dB: free-space spreading over the full propagation distance
/// plus the Fresnel loss of every bounce, `20·log10(4π·d/λ) + Σ −10·log10|Γ_i|²`.
pub fn path_loss<T: Real>(distance: T, bounces: &[(Material<T>, T)], f0: T) -> T {
    let lambda = wavelength(f0);
    let spreading = T::lit(20.0) * (T::lit(4.0) * T::PI() * distance / lambda).log10();
    bounces
        .iter()
        .fold(spreading, |acc, (m, c)| acc + reflection_loss_db(m, *c, f0))
}

fn same_geometry<T: Real>(a: &SpecularPath<T>, b: &SpecularPath<T>) -> bool {
    let tol = T::lit(1e-9);
    a.points.len() == b.points.len()
        && (a.distance - b.distance).abs() <= tol
        && a.points.iter().zip(&b.points).all(|(p, q)| p.distance(*q) <= tol)
}

/// Traces multipath between the colocated transmitter and receiver at the
/// radar pose. Each distinct reflection-face sequence captured by at least one
/// ray is replaced by its exact image-method path; sequences without a valid
/// specular path are dropped, and sequences that resolve to identical
/// geometry (reflection points on a shared triangle edge) are merged into the
/// lowest sequence. Output is ordered by face sequence and does not depend on
/// the number of worker threads.
pub fn trace_paths<T: Real>(
    scene: &Scene<T>,
    radar: &Pose<T>,
    bundle: &RayBundle<T>,
    opts: &TraceOptions<T>,
) -> Result<Vec<PathContribution<T>>> {
    if opts.max_order > MAX_ORDER {
        return Err(Error::Domain(format!(
            "max_order {} exceeds {MAX_ORDER}",
            opts.max_order
        )));
    }
    if scene.faces().is_empty() {
        return Ok(Vec::new());
    }
    let rx = radar.position;
    if !scene.contains_point(rx) {
        return Err(Error::Domain(format!(
            "radar at ({}, {}, {}) is outside the room geometry",
            rx.x, rx.y, rx.z
        )));
    }
    let per_ray: Vec<Vec<Vec<usize>>> = bundle
        .directions
        .par_iter()
        .map(|&d| shoot(scene, rx, d, opts, bundle.covering_angle))
        .collect();
    let sequences: BTreeSet<Vec<usize>> = per_ray.into_iter().flatten().collect();

    let exact: Vec<SpecularPath<T>> = sequences
        .into_par_iter()
        .filter_map(|seq| specular_path(scene, rx, &seq))
        .collect();
    let mut kept: Vec<SpecularPath<T>> = Vec::with_capacity(exact.len());
    for p in exact {
        if !kept.iter().any(|k| same_geometry(k, &p)) {
            kept.push(p);
        }
    }
    kept.into_iter()
        .map(|p| contribution_from_path(scene, radar, &p, opts.f0))
        .collect()
}

fn contribution_from_path<T: Real>(
    scene: &Scene<T>,
    radar: &Pose<T>,
    p: &SpecularPath<T>,
    f0: T,
) -> Result<PathContribution<T>> {
    let bounces: Vec<_> = p
        .faces
        .iter()
        .zip(&p.cos_incidence)
        .map(|(&f, &c)| (*scene.material(scene.faces()[f].material), c))
        .collect();
    let loss_db = path_loss(p.distance, &bounces, f0);
    let cycles = p.distance / wavelength(f0);
    Ok(PathContribution {
        loss_db,
        distance: p.distance,
        range: p.distance / T::lit(2.0),
        velocity: super::ray_doppler(p.arrival, radar.velocity),
        aoa: world_to_radar_angles(p.arrival, radar.heading)?,
        phase_cycles: cycles - cycles.floor(),
        source: PathSource::RayTraced,
        faces: p.faces.clone(),
        departure: p.departure,
        arrival: p.arrival,
    })
}
