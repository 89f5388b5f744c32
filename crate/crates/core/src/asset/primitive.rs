//! Procedural stand-in assets built from closed, fixed-tessellation primitives.

use super::{FoodAsset, NutritionFacts, TriangleMesh};
use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::Vec3;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const SPHERE_RINGS: usize = 12;
const SPHERE_SEGMENTS: usize = 24;
const CYLINDER_SEGMENTS: usize = 24;

/// Primitive geometry, centred on the origin; the z axis is the primitive's polar/height axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PrimitiveShape {
    Sphere { radius_m: f64 },
    /// Full edge lengths.
    Box { extents_m: [f64; 3] },
    Ellipsoid { semi_axes_m: [f64; 3] },
    Cylinder { radius_m: f64, height_m: f64 },
}

impl PrimitiveShape {
    fn dimensions(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Self::Sphere { radius_m } => vec![("radius_m", radius_m)],
            Self::Box { extents_m } => extents_m.iter().map(|&e| ("extents_m", e)).collect(),
            Self::Ellipsoid { semi_axes_m } => {
                semi_axes_m.iter().map(|&e| ("semi_axes_m", e)).collect()
            }
            Self::Cylinder { radius_m, height_m } => {
                vec![("radius_m", radius_m), ("height_m", height_m)]
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.dimensions() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn tessellate(&self) -> TriangleMesh {
        match *self {
            Self::Sphere { radius_m } => uv_sphere(Vec3::splat(radius_m)),
            Self::Ellipsoid { semi_axes_m } => uv_sphere(Vec3::from_array(semi_axes_m)),
            Self::Box { extents_m } => cuboid(Vec3::from_array(extents_m) * 0.5),
            Self::Cylinder { radius_m, height_m } => cylinder(radius_m, height_m * 0.5),
        }
    }
}

/// Everything needed to build a primitive asset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimitiveSpec {
    pub asset_id: String,
    #[serde(default)]
    pub display_name: Option<String>,
    pub semantic_class: String,
    pub shape: PrimitiveShape,
    pub nutrition: NutritionFacts,
    /// Drawn from the seed when absent.
    #[serde(default)]
    pub albedo: Option<[f64; 3]>,
}

/// Builds a watertight primitive asset. Equal inputs give byte-identical meshes; `seed` only
/// affects the albedo when the primitive spec has none.
pub fn make_primitive_asset(spec: &PrimitiveSpec, seed: u64) -> Result<FoodAsset> {
    spec.shape.validate()?;
    spec.nutrition.validate()?;
    let albedo = spec.albedo.unwrap_or_else(|| {
        let mut rng = seeded(seed);
        std::array::from_fn(|_| rng.gen_range(0.25..0.95))
    });
    FoodAsset::from_mesh(
        spec.asset_id.clone(),
        spec.display_name.clone().unwrap_or_else(|| spec.asset_id.clone()),
        spec.semantic_class.clone(),
        spec.shape.tessellate(),
        albedo,
        spec.nutrition,
    )
}

fn uv_sphere(semi: Vec3) -> TriangleMesh {
    let mut positions = vec![Vec3::new(0.0, 0.0, semi.z)];
    for ring in 1..SPHERE_RINGS {
        let polar = PI * ring as f64 / SPHERE_RINGS as f64;
        let (sp, cp) = polar.sin_cos();
        for seg in 0..SPHERE_SEGMENTS {
            let az = 2.0 * PI * seg as f64 / SPHERE_SEGMENTS as f64;
            let (sa, ca) = az.sin_cos();
            positions.push(Vec3::new(semi.x * sp * ca, semi.y * sp * sa, semi.z * cp));
        }
    }
    positions.push(Vec3::new(0.0, 0.0, -semi.z));
    let bottom = (positions.len() - 1) as u32;
    let idx = |ring: usize, seg: usize| (1 + (ring - 1) * SPHERE_SEGMENTS + seg % SPHERE_SEGMENTS) as u32;

    let mut triangles = Vec::new();
    for seg in 0..SPHERE_SEGMENTS {
        triangles.push([0, idx(1, seg), idx(1, seg + 1)]);
    }
    for ring in 1..SPHERE_RINGS - 1 {
        for seg in 0..SPHERE_SEGMENTS {
            let (a, b) = (idx(ring, seg), idx(ring, seg + 1));
            let (c, d) = (idx(ring + 1, seg), idx(ring + 1, seg + 1));
            triangles.push([a, c, d]);
            triangles.push([a, d, b]);
        }
    }
    for seg in 0..SPHERE_SEGMENTS {
        let last = SPHERE_RINGS - 1;
        triangles.push([bottom, idx(last, seg + 1), idx(last, seg)]);
    }
    TriangleMesh { positions, triangles }
}

fn cuboid(h: Vec3) -> TriangleMesh {
    let positions = crate::Aabb::new(-h, h).corners().to_vec();
    // corner index bits: 1 = +x, 2 = +y, 4 = +z
    let quads: [[u32; 4]; 6] = [
        [0, 2, 3, 1], // -z
        [4, 5, 7, 6], // +z
        [0, 1, 5, 4], // -y
        [2, 6, 7, 3], // +y
        [0, 4, 6, 2], // -x
        [1, 3, 7, 5], // +x
    ];
    let triangles = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    TriangleMesh { positions, triangles }
}

fn cylinder(radius: f64, half_h: f64) -> TriangleMesh {
    let n = CYLINDER_SEGMENTS;
    let mut positions = Vec::with_capacity(2 * n + 2);
    for z in [-half_h, half_h] {
        for seg in 0..n {
            let az = 2.0 * PI * seg as f64 / n as f64;
            positions.push(Vec3::new(radius * az.cos(), radius * az.sin(), z));
        }
    }
    positions.push(Vec3::new(0.0, 0.0, -half_h));
    positions.push(Vec3::new(0.0, 0.0, half_h));
    let (bc, tc) = ((2 * n) as u32, (2 * n + 1) as u32);
    let lo = |s: usize| (s % n) as u32;
    let hi = |s: usize| (n + s % n) as u32;
    let mut triangles = Vec::with_capacity(4 * n);
    for s in 0..n {
        triangles.push([lo(s), lo(s + 1), hi(s + 1)]);
        triangles.push([lo(s), hi(s + 1), hi(s)]);
        triangles.push([bc, lo(s + 1), lo(s)]);
        triangles.push([tc, hi(s), hi(s + 1)]);
    }
    TriangleMesh { positions, triangles }
}

#[cfg(test)]
pub(crate) fn unit_cube_obj() -> String {
    let mut m = cuboid(Vec3::splat(0.5));
    for p in &mut m.positions {
        *p += Vec3::splat(0.5);
    }
    m.to_obj_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn nutrition() -> NutritionFacts {
        NutritionFacts::new(50.0, 40.0, 10.0, 0.1, 0.2)
    }

    fn spec(shape: PrimitiveShape) -> PrimitiveSpec {
        PrimitiveSpec {
            asset_id: "p".into(),
            display_name: None,
            semantic_class: "thing".into(),
            shape,
            nutrition: nutrition(),
            albedo: None,
        }
    }

    /// Every directed edge appears once and its reverse once.
    fn assert_watertight(m: &TriangleMesh) {
        let mut edges: HashMap<(u32, u32), usize> = HashMap::new();
        for t in &m.triangles {
            for k in 0..3 {
                *edges.entry((t[k], t[(k + 1) % 3])).or_default() += 1;
            }
        }
        for (&(a, b), &n) in &edges {
            assert_eq!(n, 1, "edge {a}->{b} repeated");
            assert_eq!(edges.get(&(b, a)), Some(&1), "edge {a}->{b} unmatched");
        }
        let (vol, _) = m.volume_and_centroid();
        assert!(vol > 0.0, "faces must wind outward");
    }

    #[test]
    fn sphere_vertices_on_radius() {
        let a = make_primitive_asset(&spec(PrimitiveShape::Sphere { radius_m: 0.04 }), 1).unwrap();
        for p in &a.mesh.positions {
            assert!((p.norm() - 0.04).abs() <= 1e-6);
        }
        assert_watertight(&a.mesh);
    }

    #[test]
    fn box_has_twelve_triangles_and_exact_aabb() {
        let a = make_primitive_asset(
            &spec(PrimitiveShape::Box {
                extents_m: [0.02, 0.02, 0.02],
            }),
            1,
        )
        .unwrap();
        assert_eq!(a.mesh.triangles.len(), 12);
        assert_eq!(a.aabb_object.extent(), Vec3::splat(0.02));
        assert_watertight(&a.mesh);
    }

    #[test]
    fn all_primitives_are_watertight() {
        for shape in [
            PrimitiveShape::Ellipsoid {
                semi_axes_m: [0.03, 0.02, 0.01],
            },
            PrimitiveShape::Cylinder {
                radius_m: 0.01,
                height_m: 0.05,
            },
        ] {
            let a = make_primitive_asset(&spec(shape), 3).unwrap();
            assert_watertight(&a.mesh);
        }
    }

    #[test]
    fn identical_inputs_give_identical_meshes() {
        let s = spec(PrimitiveShape::Cylinder {
            radius_m: 0.02,
            height_m: 0.01,
        });
        let a = make_primitive_asset(&s, 9).unwrap();
        let b = make_primitive_asset(&s, 9).unwrap();
        assert_eq!(a.mesh.to_obj_string().as_bytes(), b.mesh.to_obj_string().as_bytes());
        assert_eq!(a, b);
    }

    #[test]
    fn non_positive_extent_is_rejected() {
        let r = make_primitive_asset(
            &spec(PrimitiveShape::Box {
                extents_m: [0.02, 0.0, 0.02],
            }),
            1,
        );
        assert!(matches!(r, Err(Error::Validation { .. })));
        let r = make_primitive_asset(&spec(PrimitiveShape::Sphere { radius_m: -1.0 }), 1);
        assert!(matches!(r, Err(Error::Validation { .. })));
    }
}
