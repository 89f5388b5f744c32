//! Thin bridge to `parry3d-f64` for convex hull construction and convex–convex queries.

use crate::{Pose, Vec3};
use parry3d_f64::math::{Pose as PPose, Rotation, Vector};
use parry3d_f64::query::{self, PointQuery};
use parry3d_f64::shape::ConvexPolyhedron;

#[inline]
pub(crate) fn to_p(v: Vec3) -> Vector {
    Vector::new(v.x, v.y, v.z)
}

#[inline]
pub(crate) fn from_p(v: Vector) -> Vec3 {
    Vec3::new(v.x, v.y, v.z)
}

pub(crate) fn to_ppose(p: &Pose) -> PPose {
    let q = p.orientation;
    let rot = Rotation::from_xyzw(q.x, q.y, q.z, q.w);
    PPose::from_parts(to_p(p.position), rot)
}

/// Convex hull of a point set as `(vertices, outward-wound triangles)`.
///
/// Returns `None` when the points are (nearly) coplanar and no solid hull exists.
pub fn convex_hull(points: &[Vec3]) -> Option<(Vec<Vec3>, Vec<[u32; 3]>)> {
    if points.len() < 4 || is_degenerate(points) {
        return None;
    }
    let pts: Vec<Vector> = points.iter().map(|&p| to_p(p)).collect();
    let (v, f) = parry3d_f64::transformation::convex_hull(&pts);
    if f.is_empty() {
        return None;
    }
    Some((v.into_iter().map(from_p).collect(), f))
}

fn is_degenerate(points: &[Vec3]) -> bool {
    let a = points[0];
    let Some(b) = points
        .iter()
        .copied()
        .max_by(|p, q| (*p - a).norm_squared().total_cmp(&(*q - a).norm_squared()))
    else {
        return true;
    };
    let ab = b - a;
    if ab.norm() < 1e-9 {
        return true;
    }
    let Some(c) = points
        .iter()
        .copied()
        .max_by(|p, q| ab.cross(*p - a).norm().total_cmp(&ab.cross(*q - a).norm()))
    else {
        return true;
    };
    let Some(n) = ab.cross(c - a).try_normalize() else {
        return true;
    };
    if ab.cross(c - a).norm() < 1e-12 {
        return true;
    }
    points.iter().all(|p| (*p - a).dot(n).abs() < 1e-9)
}

/// Convex collision shape in body coordinates.
#[derive(Clone)]
pub struct ConvexShape {
    poly: ConvexPolyhedron,
}

impl std::fmt::Debug for ConvexShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConvexShape")
            .field("points", &self.poly.points().len())
            .finish()
    }
}

/// Single contact between two convex shapes, in world coordinates.
#[derive(Debug, Clone, Copy)]
pub struct ConvexContact {
    pub point_a: Vec3,
    pub point_b: Vec3,
    /// Unit normal pointing from shape A toward shape B.
    pub normal: Vec3,
    /// Signed separation; negative when penetrating.
    pub dist: f64,
}

impl ConvexShape {
    pub fn new(points: &[Vec3]) -> Option<Self> {
        let pts: Vec<Vector> = points.iter().map(|&p| to_p(p)).collect();
        ConvexPolyhedron::from_convex_hull(&pts).map(|poly| Self { poly })
    }

    pub fn contact(
        &self,
        pose_a: &Pose,
        other: &ConvexShape,
        pose_b: &Pose,
        prediction: f64,
    ) -> Option<ConvexContact> {
        let c = query::contact(
            &to_ppose(pose_a),
            &self.poly,
            &to_ppose(pose_b),
            &other.poly,
            prediction,
        )
        .ok()??;
        Some(ConvexContact {
            point_a: from_p(c.point1),
            point_b: from_p(c.point2),
            normal: from_p(c.normal1),
            dist: c.dist,
        })
    }

    /// Euclidean distance between the shapes; 0 when they intersect.
    pub fn distance(&self, pose_a: &Pose, other: &ConvexShape, pose_b: &Pose) -> f64 {
        query::distance(
            &to_ppose(pose_a),
            &self.poly,
            &to_ppose(pose_b),
            &other.poly,
        )
        .map(|d| d.distance)
        .unwrap_or(f64::INFINITY)
    }

    /// Distance from `p` to the solid shape placed at `pose`; 0 inside.
    pub fn point_distance(&self, pose: &Pose, p: Vec3) -> f64 {
        self.poly.distance_to_point(&to_ppose(pose), to_p(p), true)
    }
}
