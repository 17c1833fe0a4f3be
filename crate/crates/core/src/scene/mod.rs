//! Static environment: triangle mesh room, materials, reflector landmarks.

mod io;
pub mod rooms;
mod trajectory;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::{segment_hits_triangle, Aabb, Triangle, Vec3};
use crate::reflector::rcs::RcsModel;
use crate::scalar::Real;

pub use io::{load_scenario, load_scene, parse_mesh, parse_scenario, write_mesh, Scenario};
pub use trajectory::{Pose, Trajectory};

/// Dielectric description of a wall material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material<T> {
    /// Relative permittivity ε_r.
    pub permittivity: T,
    /// Conductivity in S/m.
    pub conductivity: T,
}

impl<T: Real> Material<T> {
    /// Concrete at 60 GHz: ε_r = 5.31, σ = 0.48 S/m.
    pub fn concrete() -> Self {
        Material {
            permittivity: T::lit(5.31),
            conductivity: T::lit(0.48),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MaterialId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face<T> {
    pub triangle: Triangle<T>,
    pub material: MaterialId,
}

/// Passive reflector landmark.
#[derive(Debug, Clone)]
pub struct Reflector<T> {
    pub id: u32,
    pub position: Vec3<T>,
    pub rcs: RcsModel<T>,
    /// Rotation of the reflector frame about +z, radians.
    pub yaw: T,
}

#[derive(Debug, Clone)]
pub struct Scene<T> {
    faces: Vec<Face<T>>,
    material_names: Vec<String>,
    materials: Vec<Material<T>>,
    reflectors: Vec<Reflector<T>>,
    bounds: Aabb<T>,
}

impl<T: Real> Scene<T> {
    /// Assembles and validates a scene. `materials` maps names to parameters;
    /// faces reference materials by index into that map's iteration order.
    pub fn new(
        faces: Vec<Face<T>>,
        materials: BTreeMap<String, Material<T>>,
        reflectors: Vec<Reflector<T>>,
    ) -> Result<Self> {
        let (material_names, materials): (Vec<_>, Vec<_>) = materials.into_iter().unzip();
        let bounds = faces
            .iter()
            .fold(Aabb::empty(), |b, f| b.union(&f.triangle.bounds()));
        let scene = Scene {
            faces,
            material_names,
            materials,
            reflectors,
            bounds,
        };
        scene.validate()?;
        Ok(scene)
    }

    /// Scene built from faces that all use one named material.
    pub fn with_single_material(
        triangles: Vec<Triangle<T>>,
        name: &str,
        material: Material<T>,
        reflectors: Vec<Reflector<T>>,
    ) -> Result<Self> {
        let faces = triangles
            .into_iter()
            .map(|triangle| Face {
                triangle,
                material: MaterialId(0),
            })
            .collect();
        Scene::new(faces, BTreeMap::from([(name.to_string(), material)]), reflectors)
    }

    fn validate(&self) -> Result<()> {
        for (i, f) in self.faces.iter().enumerate() {
            if f.material.0 >= self.materials.len() {
                return Err(Error::Validation(format!(
                    "face {i} references unknown material id {}",
                    f.material.0
                )));
            }
            let t = &f.triangle;
            if !(t.a.is_finite() && t.b.is_finite() && t.c.is_finite()) {
                return Err(Error::Validation(format!("face {i} has non-finite vertices")));
            }
            if !(t.area() > T::zero()) {
                return Err(Error::Validation(format!("face {i} is degenerate (zero area)")));
            }
        }
        for (name, m) in self.material_names.iter().zip(&self.materials) {
            if !(m.permittivity >= T::one() && m.conductivity >= T::zero()) {
                return Err(Error::Validation(format!(
                    "material '{name}' needs eps_r >= 1 and conductivity >= 0"
                )));
            }
        }
        let mut ids = std::collections::BTreeSet::new();
        for r in &self.reflectors {
            if !r.position.is_finite() {
                return Err(Error::Validation(format!("reflector {} position not finite", r.id)));
            }
            if !ids.insert(r.id) {
                return Err(Error::Validation(format!("duplicate reflector id {}", r.id)));
            }
            if !self.bounds.contains(r.position) {
                return Err(Error::Validation(format!(
                    "reflector {} at ({}, {}, {}) lies outside the scene bounds",
                    r.id, r.position.x, r.position.y, r.position.z
                )));
            }
            r.rcs.validate()?;
        }
        Ok(())
    }

    pub fn faces(&self) -> &[Face<T>] {
        &self.faces
    }

    pub fn reflectors(&self) -> &[Reflector<T>] {
        &self.reflectors
    }

    pub fn bounds(&self) -> Aabb<T> {
        self.bounds
    }

    pub fn material(&self, id: MaterialId) -> &Material<T> {
        &self.materials[id.0]
    }

    pub fn material_name(&self, id: MaterialId) -> &str {
        &self.material_names[id.0]
    }

    pub fn material_id(&self, name: &str) -> Option<MaterialId> {
        self.material_names.iter().position(|n| n == name).map(MaterialId)
    }

    /// Returns a copy with one more face appended (the face must use an existing material).
    pub fn with_face(&self, face: Face<T>) -> Result<Self> {
        let mut s = self.clone();
        s.bounds = s.bounds.union(&face.triangle.bounds());
        s.faces.push(face);
        s.validate()?;
        Ok(s)
    }

    /// True iff the open segment between `a` and `b` crosses no scene
    /// triangle. Hits within 1e-9 m of either endpoint are ignored; edge and
    /// vertex hits count as occlusions.
    pub fn los_visible(&self, a: Vec3<T>, b: Vec3<T>) -> bool {
        debug_assert!(a != b && a.is_finite() && b.is_finite(), "degenerate LOS segment");
        !self
            .faces
            .iter()
            .any(|f| segment_hits_triangle(a, b, &f.triangle))
    }

    /// Whether `p` lies inside the closed room mesh (ray parity test), and
    /// inside the bounding box.
    pub fn contains_point(&self, p: Vec3<T>) -> bool {
        if !self.bounds.contains(p) {
            return false;
        }
        // An irrational-ish direction keeps the ray off mesh edges for axis-aligned rooms.
        let dir = Vec3::from_f64(0.234_567_1, 0.345_678_9, 0.908_123_4).normalize();
        let eps = T::lit(crate::geometry::SEGMENT_EPSILON);
        let crossings = self
            .faces
            .iter()
            .filter(|f| f.triangle.intersect(p, dir).is_some_and(|t| t > eps))
            .count();
        crossings % 2 == 1
    }
}
