//! Programmatic room meshes: an axis-aligned box and the 20 × 20 × 5 m
//! L-shaped hall used by the demo scenario. Both use concrete walls.

use crate::error::Result;
use crate::geometry::{Triangle, Vec3};
use crate::scalar::Real;
use crate::scene::{Material, Reflector, Scene};

fn quad<T: Real>(a: Vec3<T>, b: Vec3<T>, c: Vec3<T>, d: Vec3<T>) -> [Triangle<T>; 2] {
    [Triangle::new(a, b, c), Triangle::new(a, c, d)]
}

/// Vertical walls along a closed floor-plan polygon, from z = 0 to `height`.
fn walls<T: Real>(plan: &[(f64, f64)], height: f64) -> Vec<Triangle<T>> {
    let mut out = Vec::new();
    for i in 0..plan.len() {
        let (x0, y0) = plan[i];
        let (x1, y1) = plan[(i + 1) % plan.len()];
        out.extend(quad(
            Vec3::from_f64(x0, y0, 0.0),
            Vec3::from_f64(x1, y1, 0.0),
            Vec3::from_f64(x1, y1, height),
            Vec3::from_f64(x0, y0, height),
        ));
    }
    out
}

/// Floor and ceiling slabs for an axis-aligned rectangle.
fn slabs<T: Real>((x0, y0, x1, y1): (f64, f64, f64, f64), height: f64) -> Vec<Triangle<T>> {
    let mut out = Vec::new();
    for z in [0.0, height] {
        out.extend(quad(
            Vec3::from_f64(x0, y0, z),
            Vec3::from_f64(x1, y0, z),
            Vec3::from_f64(x1, y1, z),
            Vec3::from_f64(x0, y1, z),
        ));
    }
    out
}

/// Triangles of a box room spanning `[0, size]` on each axis (12 triangles).
pub fn box_triangles<T: Real>(size: Vec3<f64>) -> Vec<Triangle<T>> {
    let plan = [(0.0, 0.0), (size.x, 0.0), (size.x, size.y), (0.0, size.y)];
    let mut tris = walls(&plan, size.z);
    tris.extend(slabs((0.0, 0.0, size.x, size.y), size.z));
    tris
}

/// Triangles of the L-shaped hall: 20 × 20 m footprint minus the
/// `[10, 20] × [10, 20]` quadrant, 5 m high. The inner corner is at (10, 10).
pub fn l_room_triangles<T: Real>() -> Vec<Triangle<T>> {
    let plan = [
        (0.0, 0.0),
        (20.0, 0.0),
        (20.0, 10.0),
        (10.0, 10.0),
        (10.0, 20.0),
        (0.0, 20.0),
    ];
    let mut tris = walls(&plan, 5.0);
    tris.extend(slabs((0.0, 0.0, 20.0, 10.0), 5.0));
    tris.extend(slabs((0.0, 10.0, 10.0, 20.0), 5.0));
    tris
}

pub fn box_room<T: Real>(size: Vec3<f64>, reflectors: Vec<Reflector<T>>) -> Result<Scene<T>> {
    Scene::with_single_material(box_triangles(size), "concrete", Material::concrete(), reflectors)
}

pub fn l_room<T: Real>(reflectors: Vec<Reflector<T>>) -> Result<Scene<T>> {
    Scene::with_single_material(l_room_triangles(), "concrete", Material::concrete(), reflectors)
}
