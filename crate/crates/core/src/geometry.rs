//! Small 3D vector and triangle primitives.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::scalar::Real;

/// Distance in meters below which ray/segment intersections are ignored,
/// both at the start and at the end of a segment.
pub const SEGMENT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    #[inline]
    pub const fn new(x: T, y: T, z: T) -> Self {
        Vec3 { x, y, z }
    }

    pub fn zero() -> Self {
        Vec3::new(T::zero(), T::zero(), T::zero())
    }

    pub fn unit_z() -> Self {
        Vec3::new(T::zero(), T::zero(), T::one())
    }

    /// Builds a vector from `f64` components.
    pub fn from_f64(x: f64, y: f64, z: f64) -> Self {
        Vec3::new(T::lit(x), T::lit(y), T::lit(z))
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Returns the unit vector, or `None` for a zero-length input.
    pub fn try_normalize(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn normalize(self) -> Self {
        self / self.norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Mirror image of the vector direction about a plane with unit normal `n`.
    #[inline]
    pub fn reflect(self, n: Self) -> Self {
        self - n * (T::lit(2.0) * self.dot(n))
    }

    /// Rotates about the +z axis by `angle` radians (counter-clockwise seen from above).
    pub fn rotate_z(self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Vec3::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }

    pub fn component_min(self, o: Self) -> Self {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn component_max(self, o: Self) -> Self {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn cast<U: Real>(self) -> Vec3<U> {
        Vec3::new(
            U::lit(self.x.to_f64_lossy()),
            U::lit(self.y.to_f64_lossy()),
            U::lit(self.z.to_f64_lossy()),
        )
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Div<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle<T> {
    pub a: Vec3<T>,
    pub b: Vec3<T>,
    pub c: Vec3<T>,
}

impl<T: Real> Triangle<T> {
    pub fn new(a: Vec3<T>, b: Vec3<T>, c: Vec3<T>) -> Self {
        Triangle { a, b, c }
    }

    pub fn area(&self) -> T {
        (self.b - self.a).cross(self.c - self.a).norm() * T::lit(0.5)
    }

    /// Unit normal following the right-hand rule over (a, b, c).
    pub fn normal(&self) -> Vec3<T> {
        (self.b - self.a).cross(self.c - self.a).normalize()
    }

    /// Möller–Trumbore intersection of the line `origin + t·dir` with the
    /// triangle, edges and vertices included. Returns `t` in units of `dir`,
    /// or `None` when the line is parallel to (or lies in) the triangle plane.
    pub fn intersect(&self, origin: Vec3<T>, dir: Vec3<T>) -> Option<T> {
        let e1 = self.b - self.a;
        let e2 = self.c - self.a;
        let p = dir.cross(e2);
        let det = e1.dot(p);
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let s = origin - self.a;
        let q = s.cross(e1);
        // Barycentric tests on the undivided numerators so exactly-on-edge
        // inputs stay exact.
        let (u_num, v_num, det_abs) = if det > T::zero() {
            (s.dot(p), dir.dot(q), det)
        } else {
            (-s.dot(p), -dir.dot(q), -det)
        };
        if u_num < T::zero() || v_num < T::zero() || u_num + v_num > det_abs {
            return None;
        }
        Some(e2.dot(q) / det)
    }

    pub fn bounds(&self) -> Aabb<T> {
        Aabb {
            min: self.a.component_min(self.b).component_min(self.c),
            max: self.a.component_max(self.b).component_max(self.c),
        }
    }
}

/// Returns true when the open segment from `a` to `b` crosses the triangle,
/// ignoring hits within [`SEGMENT_EPSILON`] meters of either endpoint.
///
/// The endpoints are put in a canonical order first so the answer does not
/// depend on the direction the segment is walked.
pub fn segment_hits_triangle<T: Real>(a: Vec3<T>, b: Vec3<T>, tri: &Triangle<T>) -> bool {
    let (p, q) = if lexicographic_le(a, b) { (a, b) } else { (b, a) };
    let dir = q - p;
    let len = dir.norm();
    let Some(t) = tri.intersect(p, dir) else {
        return false;
    };
    let along = t * len;
    let eps = T::lit(SEGMENT_EPSILON);
    along >= eps && along <= len - eps
}

fn lexicographic_le<T: Real>(a: Vec3<T>, b: Vec3<T>) -> bool {
    (a.x, a.y, a.z) <= (b.x, b.y, b.z)
}

/// Axis-aligned bounding box. An empty box has `min > max` on every axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> Aabb<T> {
    pub fn empty() -> Self {
        let inf = T::infinity();
        Aabb {
            min: Vec3::new(inf, inf, inf),
            max: Vec3::new(-inf, -inf, -inf),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    pub fn union(&self, o: &Aabb<T>) -> Aabb<T> {
        Aabb {
            min: self.min.component_min(o.min),
            max: self.max.component_max(o.max),
        }
    }

    pub fn contains(&self, p: Vec3<T>) -> bool {
        !self.is_empty()
            && p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn extent(&self) -> Vec3<T> {
        if self.is_empty() {
            Vec3::zero()
        } else {
            self.max - self.min
        }
    }
}
