use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scalar::Real;

/// Largest accepted icosphere subdivision level (655 362 rays).
pub const MAX_SUBDIVISION: u32 = 8;

/// Launch directions on a geodesic icosphere.
#[derive(Debug, Clone)]
pub struct RayBundle<T> {
    pub directions: Vec<Vec3<T>>,
    pub subdivision: u32,
    /// Largest angle (rad) between any point of the sphere and its nearest
    /// launch direction, i.e. the maximum circumradius of the spherical faces.
    pub covering_angle: T,
    /// Largest angular edge length (rad) of the triangulation.
    pub max_spacing: T,
}

impl<T: Real> RayBundle<T> {
    pub fn count(&self) -> usize {
        self.directions.len()
    }
}

/// Number of icosphere vertices at a subdivision level: 10·4ⁿ + 2.
pub fn icosphere_vertex_count(subdivision: u32) -> usize {
    10 * 4usize.pow(subdivision) + 2
}

/// Geodesic icosphere vertex directions; deterministic order (base vertices
/// first, then midpoints in creation order).
pub fn launch_directions<T: Real>(subdivision: u32) -> Result<RayBundle<T>> {
    if subdivision > MAX_SUBDIVISION {
        return Err(Error::Resource(format!(
            "subdivision {subdivision} exceeds the limit of {MAX_SUBDIVISION}"
        )));
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let base = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ];
    let mut verts: Vec<Vec3<T>> = base
        .iter()
        .map(|&(x, y, z)| Vec3::<T>::from_f64(x, y, z).normalize())
        .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivision {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Vec3<T>>| -> usize {
            let key = (a.min(b), a.max(b));
            *midpoints.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * T::lit(0.5)).normalize());
                verts.len() - 1
            })
        };
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }

    let angle = |a: Vec3<T>, b: Vec3<T>| a.cross(b).norm().atan2(a.dot(b));
    let mut covering = T::zero();
    let mut spacing = T::zero();
    for &[a, b, c] in &faces {
        let (va, vb, vc) = (verts[a], verts[b], verts[c]);
        let mut center = (vb - va).cross(vc - va).normalize();
        if center.dot(va) < T::zero() {
            center = -center;
        }
        covering = covering.max(angle(center, va));
        spacing = spacing.max(angle(va, vb)).max(angle(vb, vc)).max(angle(vc, va));
    }
    Ok(RayBundle {
        directions: verts,
        subdivision,
        covering_angle: covering,
        max_spacing: spacing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_follow_euler_formula() {
        for n in 0..=4 {
            let b = launch_directions::<f64>(n).unwrap();
            // Euler: V - E + F = 2 with F = 20·4ⁿ, E = 3F/2
            let f = 20 * 4usize.pow(n);
            let e = 3 * f / 2;
            assert_eq!(b.count(), 2 + e - f);
            assert_eq!(b.count(), icosphere_vertex_count(n));
        }
        assert_eq!(launch_directions::<f64>(0).unwrap().count(), 12);
        assert_eq!(launch_directions::<f64>(1).unwrap().count(), 42);
    }

    #[test]
    fn unit_norm() {
        let b = launch_directions::<f64>(3).unwrap();
        assert!(b.directions.iter().all(|d| (d.norm() - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn deterministic() {
        let a = launch_directions::<f64>(2).unwrap();
        let b = launch_directions::<f64>(2).unwrap();
        assert_eq!(a.directions, b.directions);
    }

    #[test]
    fn covering_angle_shrinks_with_subdivision() {
        let c0 = launch_directions::<f64>(0).unwrap().covering_angle;
        let c4 = launch_directions::<f64>(4).unwrap().covering_angle;
        // icosahedron circumradius angle ≈ 37.38°
        assert!((c0.to_degrees() - 37.377).abs() < 0.01, "{}", c0.to_degrees());
        assert!(c4 < c0 / 12.0 && c4 > c0 / 20.0);
    }

    #[test]
    fn covering_angle_bounds_nearest_direction() {
        // random probes: nearest launch direction within the covering angle
        use rand::{Rng, SeedableRng};
        let b = launch_directions::<f64>(2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let v = Vec3::new(
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
            )
            .normalize();
            let best = b
                .directions
                .iter()
                .map(|d| d.dot(v).min(1.0).acos())
                .fold(f64::MAX, f64::min);
            assert!(best <= b.covering_angle + 1e-12);
        }
    }

    #[test]
    fn too_large_is_resource_error() {
        assert!(matches!(launch_directions::<f64>(9), Err(Error::Resource(_))));
    }
}
