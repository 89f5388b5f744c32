#![allow(dead_code)]

pub mod nutrition;
pub mod physics;
pub mod rules;

use mealsynth::asset::{make_primitive_asset, AssetLibrary, FoodAsset, NutritionFacts, PrimitiveShape, PrimitiveSpec};
use mealsynth::camera::CameraPose;
use mealsynth::pipeline::PipelineConfig;
use mealsynth::plating::{PlateSpec, Scene, RIM_WIDTH_M};
use mealsynth::{Pose, Vec3};

// Frozen from an independent brute force over all 66 pairs (float64 atan2 of |a x b| and a.b).
// 40-digit references: 0.58100947295537394018 and 0.54949397445531592784.
pub const MIN_SEP_12_AT_10_DEG: f64 = 0.5810094729553748;
pub const MIN_SEP_12_AT_15_DEG: f64 = 0.5494939744553166;

pub fn sphere_asset(id: &str, class: &str, radius_m: f64) -> FoodAsset {
    primitive(id, class, PrimitiveShape::Sphere { radius_m })
}

pub fn primitive(id: &str, class: &str, shape: PrimitiveShape) -> FoodAsset {
    let spec = PrimitiveSpec {
        asset_id: id.into(),
        display_name: None,
        semantic_class: class.into(),
        shape,
        nutrition: NutritionFacts::new(10.0, 20.0, 3.0, 1.0, 0.5),
        albedo: Some([0.6, 0.5, 0.4]),
    };
    make_primitive_asset(&spec, 0).unwrap()
}

pub fn library(assets: Vec<FoodAsset>) -> AssetLibrary {
    AssetLibrary::new(assets).unwrap()
}

/// Camera at `position` looking at `look_at`, with `up` orthogonalised against the view axis.
pub fn camera(position: Vec3, look_at: Vec3, up: Vec3, size: u32, focal_mm: f64) -> CameraPose {
    let f = (look_at - position).normalize();
    let up = (up - f * up.dot(f)).normalize();
    CameraPose {
        position,
        look_at,
        up,
        focal_length_mm: focal_mm,
        sensor_width_mm: 36.0,
        image_width_px: size,
        image_height_px: size,
    }
}

/// Möller-Trumbore, returning the ray parameter of a front or back face hit.
pub fn ray_triangle(o: Vec3, d: Vec3, [a, b, c]: [Vec3; 3]) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let p = d.cross(e2);
    let det = e1.dot(p);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = 1.0 / det;
    let s = o - a;
    let u = s.dot(p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = d.dot(q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(q) * inv;
    (t > 0.0).then_some(t)
}

/// World-space triangles of every item in `scene`.
pub fn world_triangles(scene: &Scene, lib: &AssetLibrary) -> Vec<(u16, [Vec3; 3])> {
    let mut out = Vec::new();
    for item in &scene.items {
        let asset = lib.get(&item.asset_id).unwrap();
        for t in &asset.mesh.triangles {
            let tri = t.map(|i| item.pose.transform_point(asset.mesh.positions[i as usize]));
            out.push((item.instance_id, tri));
        }
    }
    out
}

/// Nearest hit over a triangle soup by exhaustive search.
pub fn brute_nearest(tris: &[(u16, [Vec3; 3])], o: Vec3, d: Vec3) -> Option<(u16, f64)> {
    tris.iter()
        .filter_map(|(id, tri)| ray_triangle(o, d, *tri).map(|t| (*id, t)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Analytic ray-sphere entry parameter.
pub fn ray_sphere(o: Vec3, d: Vec3, c: Vec3, r: f64) -> Option<f64> {
    let oc = o - c;
    let a = d.dot(d);
    let b = oc.dot(d);
    let disc = b * b - a * (oc.dot(oc) - r * r);
    if disc < 0.0 {
        return None;
    }
    let t = (-b - disc.sqrt()) / a;
    (t > 0.0).then_some(t)
}

fn closest_on_triangle(p: Vec3, [a, b, c]: [Vec3; 3]) -> Vec3 {
    // Ericson, Real-Time Collision Detection 5.1.5
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Distance from `p` to the solid convex hull of `asset` placed at `pose`; 0 inside.
pub fn distance_to_hull(p: Vec3, asset: &FoodAsset, pose: &Pose) -> f64 {
    let hull = &asset.collision_hull;
    let local = pose.inverse_transform_point(p);
    if hull.contains(local, 0.0) {
        return 0.0;
    }
    hull.faces
        .iter()
        .map(|f| {
            let tri = f.map(|i| hull.points[i as usize]);
            (closest_on_triangle(local, tri) - local).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Distance to the plate: a solid disk below `top_z_m` and a rim ring `RIM_WIDTH_M` wide.
pub fn plate_distance(p: Vec3, plate: &PlateSpec) -> f64 {
    let r = ((p.x - plate.center.x).powi(2) + (p.y - plate.center.y).powi(2)).sqrt();
    let outside = |lo: f64, hi: f64, v: f64| if v < lo { lo - v } else if v > hi { v - hi } else { 0.0 };
    let floor = (outside(0.0, plate.radius_m, r), outside(f64::NEG_INFINITY, plate.top_z_m, p.z));
    let rim = (
        outside(plate.radius_m - RIM_WIDTH_M, plate.radius_m, r),
        outside(plate.top_z_m, plate.top_z_m + plate.rim_height_m, p.z),
    );
    [floor, rim].iter().map(|(a, b)| (a * a + b * b).sqrt()).fold(f64::INFINITY, f64::min)
}

/// Items none of whose lowest hull points lies within `eps` of the plate or of another
/// item's hull. A body resting on a face has many vertices at the minimum height up to
/// numerical noise, so every vertex within `eps` of the minimum counts as lowest.
pub fn unsupported_items(scene: &Scene, lib: &AssetLibrary, plate: &PlateSpec, eps: f64) -> Vec<u16> {
    let mut bad = Vec::new();
    for item in &scene.items {
        let asset = lib.get(&item.asset_id).unwrap();
        let world: Vec<Vec3> = asset.collision_hull.points.iter().map(|&p| item.pose.transform_point(p)).collect();
        let z_min = world.iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
        let supported = world.iter().filter(|p| p.z <= z_min + eps).any(|&p| {
            plate_distance(p, plate) <= eps
                || scene.items.iter().any(|other| {
                    other.instance_id != item.instance_id
                        && distance_to_hull(p, lib.get(&other.asset_id).unwrap(), &other.pose) <= eps
                })
        });
        if !supported {
            bad.push(item.instance_id);
        }
    }
    bad
}

/// Default pipeline config at a reduced resolution.
pub fn small_config(size: u32) -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.render.resolution = Some([size, size]);
    cfg
}
