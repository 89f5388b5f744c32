//! Small fixed-size linear algebra: vectors, unit quaternions, rigid poses, boxes and rays.

use crate::scalar::Real;
use serde::de::{Deserialize, Deserializer};
use serde::ser::{Serialize, Serializer};
use std::ops::{Add, AddAssign, Div, Index, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    #[inline]
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn splat(v: T) -> Self {
        Self::new(v, v, v)
    }

    #[inline]
    pub fn unit_x() -> Self {
        Self::new(T::one(), T::zero(), T::zero())
    }

    #[inline]
    pub fn unit_y() -> Self {
        Self::new(T::zero(), T::one(), T::zero())
    }

    #[inline]
    pub fn unit_z() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Self::new(
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

    /// Returns `None` for zero-length (or non-finite) input.
    pub fn try_normalize(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    #[inline]
    pub fn normalize(self) -> Self {
        self / self.norm()
    }

    #[inline]
    pub fn min(self, o: Self) -> Self {
        Self::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    #[inline]
    pub fn max(self, o: Self) -> Self {
        Self::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    #[inline]
    pub fn mul_elem(self, o: Self) -> Self {
        Self::new(self.x * o.x, self.y * o.y, self.z * o.z)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn cast<U: Real>(self) -> Vec3<U> {
        Vec3::new(
            U::lit(self.x.to_f64_lossy()),
            U::lit(self.y.to_f64_lossy()),
            U::lit(self.z.to_f64_lossy()),
        )
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index out of range: {i}"),
        }
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
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
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> SubAssign for Vec3<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> MulAssign<T> for Vec3<T> {
    #[inline]
    fn mul_assign(&mut self, s: T) {
        *self = *self * s;
    }
}

impl<T: Real> Div<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real + Serialize> Serialize for Vec3<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y, self.z].serialize(s)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for Vec3<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y, z] = <[T; 3]>::deserialize(d)?;
        Ok(Self::new(x, y, z))
    }
}

/// Rotation quaternion, `w + xi + yj + zk`. Serialized as `[w, x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat<T> {
    pub w: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Default for Quat<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Real> Quat<T> {
    #[inline]
    pub const fn new(w: T, x: T, y: T, z: T) -> Self {
        Self { w, x, y, z }
    }

    #[inline]
    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::zero())
    }

    /// Rotation of `angle` radians about `axis` (normalized internally).
    pub fn from_axis_angle(axis: Vec3<T>, angle: T) -> Self {
        let a = axis.normalize();
        let half = angle / T::lit(2.0);
        let s = half.sin();
        Self::new(half.cos(), a.x * s, a.y * s, a.z * s)
    }

    /// Rotation about +z.
    pub fn from_yaw(yaw: T) -> Self {
        Self::from_axis_angle(Vec3::unit_z(), yaw)
    }

    /// Exponential-map increment for an angular displacement vector `omega_dt`.
    pub fn from_scaled_axis(v: Vec3<T>) -> Self {
        let angle = v.norm();
        if angle <= T::epsilon() {
            // first-order expansion near zero
            let h = T::lit(0.5);
            return Self::new(T::one(), v.x * h, v.y * h, v.z * h).normalize();
        }
        Self::from_axis_angle(v / angle, angle)
    }

    #[inline]
    pub fn norm(self) -> T {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalize(self) -> Self {
        let n = self.norm();
        Self::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    #[inline]
    pub fn conjugate(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    #[inline]
    pub fn vector(self) -> Vec3<T> {
        Vec3::new(self.x, self.y, self.z)
    }

    /// Rotates a vector by this (unit) quaternion.
    #[inline]
    pub fn rotate(self, v: Vec3<T>) -> Vec3<T> {
        let q = self.vector();
        let two = T::lit(2.0);
        let t = q.cross(v) * two;
        v + t * self.w + q.cross(t)
    }

    #[inline]
    pub fn inverse_rotate(self, v: Vec3<T>) -> Vec3<T> {
        self.conjugate().rotate(v)
    }

    /// Column-major rotation matrix as three column vectors.
    pub fn to_matrix_columns(self) -> [Vec3<T>; 3] {
        [
            self.rotate(Vec3::unit_x()),
            self.rotate(Vec3::unit_y()),
            self.rotate(Vec3::unit_z()),
        ]
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [T; 4] {
        [self.w, self.x, self.y, self.z]
    }
}

impl<T: Real> Mul for Quat<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

impl<T: Real + Serialize> Serialize for Quat<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.w, self.x, self.y, self.z].serialize(s)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for Quat<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [w, x, y, z] = <[T; 4]>::deserialize(d)?;
        Ok(Self::new(w, x, y, z))
    }
}

/// Rigid transform: rotate, then translate.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct Pose<T: Real> {
    pub position: Vec3<T>,
    pub orientation: Quat<T>,
}

impl<T: Real> Pose<T> {
    pub fn new(position: Vec3<T>, orientation: Quat<T>) -> Self {
        Self { position, orientation }
    }

    pub fn identity() -> Self {
        Self::new(Vec3::zero(), Quat::identity())
    }

    pub fn from_translation(t: Vec3<T>) -> Self {
        Self::new(t, Quat::identity())
    }

    #[inline]
    pub fn transform_point(&self, p: Vec3<T>) -> Vec3<T> {
        self.orientation.rotate(p) + self.position
    }

    #[inline]
    pub fn transform_vector(&self, v: Vec3<T>) -> Vec3<T> {
        self.orientation.rotate(v)
    }

    #[inline]
    pub fn inverse_transform_point(&self, p: Vec3<T>) -> Vec3<T> {
        self.orientation.inverse_rotate(p - self.position)
    }

    #[inline]
    pub fn inverse_transform_vector(&self, v: Vec3<T>) -> Vec3<T> {
        self.orientation.inverse_rotate(v)
    }
}

/// Axis-aligned box given by inclusive min/max corners.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct Aabb<T: Real> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> Aabb<T> {
    pub fn new(min: Vec3<T>, max: Vec3<T>) -> Self {
        Self { min, max }
    }

    /// An inverted box that any `grow` call replaces.
    pub fn empty() -> Self {
        Self::new(Vec3::splat(T::infinity()), Vec3::splat(T::neg_infinity()))
    }

    pub fn from_points<I: IntoIterator<Item = Vec3<T>>>(points: I) -> Self {
        points.into_iter().fold(Self::empty(), |b, p| b.grow(p))
    }

    #[inline]
    pub fn grow(self, p: Vec3<T>) -> Self {
        Self::new(self.min.min(p), self.max.max(p))
    }

    #[inline]
    pub fn union(self, o: Self) -> Self {
        Self::new(self.min.min(o.min), self.max.max(o.max))
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    pub fn extent(&self) -> Vec3<T> {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3<T> {
        (self.min + self.max) * T::lit(0.5)
    }

    pub fn contains(&self, p: Vec3<T>, tol: T) -> bool {
        p.x >= self.min.x - tol
            && p.y >= self.min.y - tol
            && p.z >= self.min.z - tol
            && p.x <= self.max.x + tol
            && p.y <= self.max.y + tol
            && p.z <= self.max.z + tol
    }

    /// The eight corners; bit `k` of the index selects max over min on axis `k`.
    pub fn corners(&self) -> [Vec3<T>; 8] {
        std::array::from_fn(|i| {
            Vec3::new(
                if i & 1 != 0 { self.max.x } else { self.min.x },
                if i & 2 != 0 { self.max.y } else { self.min.y },
                if i & 4 != 0 { self.max.z } else { self.min.z },
            )
        })
    }

    pub fn transformed(&self, pose: &Pose<T>) -> Self {
        Self::from_points(self.corners().iter().map(|&c| pose.transform_point(c)))
    }

    /// Index of the longest axis.
    pub fn largest_axis(&self) -> usize {
        let e = self.extent();
        if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        }
    }

    pub fn surface_area(&self) -> T {
        if self.is_empty() {
            return T::zero();
        }
        let e = self.extent();
        T::lit(2.0) * (e.x * e.y + e.y * e.z + e.z * e.x)
    }

    /// Slab test; returns the entry/exit parameters clipped to `[t_min, t_max]`.
    #[inline]
    pub fn intersect_ray(&self, ray: &Ray<T>, t_min: T, t_max: T) -> Option<(T, T)> {
        let mut t0 = t_min;
        let mut t1 = t_max;
        for axis in 0..3 {
            if ray.direction[axis] == T::zero() {
                // parallel to this slab pair: inside or never
                if ray.origin[axis] < self.min[axis] || ray.origin[axis] > self.max[axis] {
                    return None;
                }
                continue;
            }
            let inv = ray.inv_direction[axis];
            let mut near = (self.min[axis] - ray.origin[axis]) * inv;
            let mut far = (self.max[axis] - ray.origin[axis]) * inv;
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            if near > t0 {
                t0 = near;
            }
            if far < t1 {
                t1 = far;
            }
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Ray<T> {
    pub origin: Vec3<T>,
    /// Not necessarily unit length; hit parameters are in units of this vector.
    pub direction: Vec3<T>,
    pub inv_direction: Vec3<T>,
}

impl<T: Real> Ray<T> {
    pub fn new(origin: Vec3<T>, direction: Vec3<T>) -> Self {
        let inv = Vec3::new(
            T::one() / direction.x,
            T::one() / direction.y,
            T::one() / direction.z,
        );
        Self {
            origin,
            direction,
            inv_direction: inv,
        }
    }

    #[inline]
    pub fn at(&self, t: T) -> Vec3<T> {
        self.origin + self.direction * t
    }

    /// The same ray expressed in the local frame of `pose`.
    pub fn to_local(&self, pose: &Pose<T>) -> Self {
        Self::new(
            pose.inverse_transform_point(self.origin),
            pose.inverse_transform_vector(self.direction),
        )
    }
}

/// Möller–Trumbore ray/triangle test. Returns the ray parameter of a front- or back-face hit.
#[inline]
pub fn intersect_triangle<T: Real>(
    ray: &Ray<T>,
    a: Vec3<T>,
    b: Vec3<T>,
    c: Vec3<T>,
    t_min: T,
    t_max: T,
) -> Option<T> {
    let e1 = b - a;
    let e2 = c - a;
    let p = ray.direction.cross(e2);
    let det = e1.dot(p);
    if det.abs() <= T::min_positive_value() {
        return None;
    }
    let inv_det = T::one() / det;
    let s = ray.origin - a;
    let u = s.dot(p) * inv_det;
    if u < T::zero() || u > T::one() {
        return None;
    }
    let q = s.cross(e1);
    let v = ray.direction.dot(q) * inv_det;
    if v < T::zero() || u + v > T::one() {
        return None;
    }
    let t = e2.dot(q) * inv_det;
    (t > t_min && t < t_max).then_some(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quaternion_rotation_matches_axis_angle() {
        let q = Quat::<f64>::from_yaw(std::f64::consts::FRAC_PI_2);
        let v = q.rotate(Vec3::new(1.0, 0.0, 0.0));
        assert!((v - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        let back = q.inverse_rotate(v);
        assert!((back - Vec3::unit_x()).norm() < 1e-15);
    }

    #[test]
    fn quaternion_product_composes() {
        let a = Quat::<f64>::from_axis_angle(Vec3::new(1.0, 2.0, 3.0), 0.7);
        let b = Quat::<f64>::from_axis_angle(Vec3::new(-1.0, 0.5, 0.0), -1.3);
        let p = Vec3::new(0.3, -0.2, 0.9);
        let lhs = (a * b).rotate(p);
        let rhs = a.rotate(b.rotate(p));
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn triangle_hit_in_f32_and_f64() {
        fn check<T: Real>() {
            let ray = Ray::new(
                Vec3::new(T::lit(0.25), T::lit(0.25), T::lit(-1.0)),
                Vec3::unit_z(),
            );
            let t = intersect_triangle(
                &ray,
                Vec3::zero(),
                Vec3::unit_x(),
                Vec3::unit_y(),
                T::zero(),
                T::infinity(),
            )
            .unwrap();
            assert!((t - T::one()).abs() < T::lit(1e-6));
        }
        check::<f32>();
        check::<f64>();
    }

    #[test]
    fn slab_test_handles_axis_parallel_rays() {
        let b = Aabb::new(Vec3::splat(-1.0), Vec3::splat(1.0));
        let hit = Ray::new(Vec3::new(0.0, 0.0, -5.0), Vec3::unit_z());
        assert_eq!(b.intersect_ray(&hit, 0.0, f64::INFINITY), Some((4.0, 6.0)));
        let miss = Ray::new(Vec3::new(2.0, 0.0, -5.0), Vec3::unit_z());
        assert!(b.intersect_ray(&miss, 0.0, f64::INFINITY).is_none());
    }

    #[test]
    fn vec3_serializes_as_array() {
        let v = Vec3::new(1.0, 2.0, 3.5);
        assert_eq!(serde_json::to_string(&v).unwrap(), "[1.0,2.0,3.5]");
        let q: Quat<f64> = serde_json::from_str("[1,0,0,0]").unwrap();
        assert_eq!(q, Quat::identity());
    }
}
