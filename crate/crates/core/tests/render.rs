use mealsynth::camera::CameraPose;
use mealsynth::plating::{PlateSpec, PlatingMode, Scene};
use mealsynth::render::{
    amodal_masks, bbox2d_from_mask, bbox3d_for_item, render_view, LightSpec, Raster, SceneGeometry, SemanticLegend,
};
use mealsynth::rng::seeded;
use mealsynth::asset::PrimitiveShape;
use mealsynth::{Aabb, Pose, Quat, Vec3};
use rand::Rng;

mod common;
use common::*;

const SIZE: u32 = 65;

/// Looks straight down the -z axis from `height`; +y is image up.
fn top_camera(height: f64, size: u32, focal_mm: f64) -> CameraPose {
    camera(Vec3::new(0.0, 0.0, height), Vec3::zero(), Vec3::unit_y(), size, focal_mm)
}

fn scene_with(items: &[(&str, Vec3)]) -> Scene {
    let mut s = Scene::new(PlatingMode::Procedural, PlateSpec::default(), 0);
    for (id, p) in items {
        s.push(*id, Pose::from_translation(*p));
    }
    s
}

fn geometry(scene: &Scene, lib: &mealsynth::asset::AssetLibrary, brightness: f64) -> SceneGeometry {
    let legend = SemanticLegend::from_library(lib);
    SceneGeometry::build(scene, lib, &legend, &vec![brightness; scene.items.len()]).unwrap()
}

#[test]
fn sphere_depth_matches_analytic_intersection() {
    let lib = library(vec![sphere_asset("ball", "fruit", 0.03)]);
    let cam = top_camera(1.0, SIZE, 50.0);
    // on the optical axis, 0.40 m in front of the camera
    let scene = scene_with(&[("ball", Vec3::new(0.0, 0.0, 0.6))]);
    let geom = geometry(&scene, &lib, 1.0);
    let out = render_view(&geom, &cam, &LightSpec::default());
    let centre = *out.depth.get(SIZE / 2, SIZE / 2) as f64;
    assert!((centre - 0.37).abs() <= 1e-3, "centre depth {centre}");
    assert_eq!(*out.instance.get(SIZE / 2, SIZE / 2), 1);

    // every foreground pixel re-intersected against the raw triangles
    let tris = world_triangles(&scene, &lib);
    let mut checked = 0;
    for (x, y, &id) in out.instance.pixels() {
        if id == 0 {
            continue;
        }
        let (hit_id, t) = brute_nearest(&tris, cam.position, cam.pixel_direction(x, y)).unwrap();
        assert_eq!(hit_id, id);
        let d = *out.depth.get(x, y) as f64;
        assert!(((d - t) / t).abs() <= 1e-6, "pixel ({x},{y}): {d} vs {t}");
        checked += 1;
    }
    assert!(checked > 100);
}

#[test]
fn random_foreground_pixels_reintersect() {
    let lib = mealsynth::asset::default_primitive_library();
    let mut rng = seeded(11);
    let mut scene = Scene::new(PlatingMode::Procedural, PlateSpec::default(), 0);
    for a in lib.assets().iter().take(6) {
        let p = Vec3::new(rng.gen_range(-0.06..0.06), rng.gen_range(-0.06..0.06), rng.gen_range(0.04..0.08));
        let q = Quat::from_axis_angle(Vec3::new(rng.gen(), rng.gen(), rng.gen::<f64>() + 0.1), rng.gen_range(0.0..6.0));
        scene.push(a.asset_id.clone(), Pose::new(p, q));
    }
    let cam = camera(Vec3::new(0.25, -0.3, 0.3), Vec3::new(0.0, 0.0, 0.02), Vec3::unit_z(), 128, 40.0);
    let geom = geometry(&scene, &lib, 1.3);
    let out = render_view(&geom, &cam, &LightSpec::default());
    let fg: Vec<(u32, u32)> = out.instance.pixels().filter(|p| *p.2 != 0).map(|p| (p.0, p.1)).collect();
    assert!(fg.len() > 200);
    let tris = world_triangles(&scene, &lib);
    for _ in 0..1000 {
        let (x, y) = fg[rng.gen_range(0..fg.len())];
        let (_, t) = brute_nearest(&tris, cam.position, cam.pixel_direction(x, y)).unwrap();
        let d = *out.depth.get(x, y) as f64;
        assert!(((d - t) / t).abs() <= 1e-6, "pixel ({x},{y}): {d} vs {t}");
    }
}

#[test]
fn empty_scene_is_all_background() {
    let lib = mealsynth::asset::default_primitive_library();
    let plate = PlateSpec::default();
    let scene = Scene::new(PlatingMode::Procedural, plate, 0);
    let cam = camera(Vec3::new(0.3, 0.0, 0.35), plate.surface_center(), Vec3::unit_z(), 64, 24.0);
    let out = render_view(&geometry(&scene, &lib, 1.0), &cam, &LightSpec::default());
    assert!(out.instance.data.iter().all(|&v| v == 0));
    assert!(out.semantic.data.iter().all(|&v| v == 0));
    assert!(out.amodal.is_empty());
    for (x, y, &d) in out.depth.pixels() {
        let dir = cam.pixel_direction(x, y);
        let table_t = (plate.table_z() - cam.position.z) / dir.z;
        if dir.z < 0.0 {
            // plate surfaces lie between the camera and the table plane
            assert!(d > 0.0 && d as f64 <= table_t * (1.0 + 1e-6), "({x},{y}) {d} vs table {table_t}");
        } else {
            assert_eq!(d, f32::INFINITY);
        }
    }
}

#[test]
fn brighter_item_is_never_darker() {
    let lib = library(vec![primitive("slab", "bread", PrimitiveShape::Box { extents_m: [0.05, 0.04, 0.02] })]);
    let scene = scene_with(&[("slab", Vec3::new(0.0, 0.0, 0.03))]);
    let cam = camera(Vec3::new(0.2, 0.1, 0.3), Vec3::new(0.0, 0.0, 0.03), Vec3::unit_z(), 64, 35.0);
    let a = render_view(&geometry(&scene, &lib, 1.0), &cam, &LightSpec::default());
    let b = render_view(&geometry(&scene, &lib, 2.0), &cam, &LightSpec::default());
    assert_eq!(a.instance, b.instance);
    let mut brighter = 0;
    for ((pa, pb), &id) in a.rgb.data.iter().zip(&b.rgb.data).zip(&a.instance.data) {
        if id == 1 {
            assert!(pa.iter().zip(pb).all(|(x, y)| y >= x));
            brighter += (pa != pb) as usize;
        } else {
            assert_eq!(pa, pb);
        }
    }
    assert!(brighter > 0);
}

#[test]
fn lone_item_amodal_equals_visible() {
    let lib = library(vec![sphere_asset("ball", "fruit", 0.03)]);
    let scene = scene_with(&[("ball", Vec3::new(0.0, 0.0, 0.05))]);
    let cam = top_camera(0.45, 64, 35.0);
    let geom = geometry(&scene, &lib, 1.0);
    let out = render_view(&geom, &cam, &LightSpec::default());
    let visible = Raster {
        width: 64,
        height: 64,
        data: out.instance.data.iter().map(|&v| v == 1).collect(),
    };
    assert!(visible.data.iter().any(|&b| b));
    assert_eq!(out.amodal[0], visible);
    assert_eq!(amodal_masks(&geom, &cam)[0], visible);
}

#[test]
fn hidden_sphere_has_amodal_but_no_visible_pixels() {
    let (r_front, r_back) = (0.03, 0.02);
    let (c_front, c_back) = (Vec3::new(0.0, 0.0, 0.7), Vec3::new(0.0, 0.0, 0.5));
    let lib = library(vec![sphere_asset("front", "a", r_front), sphere_asset("back", "b", r_back)]);
    let scene = scene_with(&[("front", c_front), ("back", c_back)]);
    let cam = top_camera(1.0, SIZE, 50.0);
    let out = render_view(&geometry(&scene, &lib, 1.0), &cam, &LightSpec::default());
    assert_eq!(out.items[1].visible_pixel_count, 0);
    assert_eq!(out.items[1].bbox2d, None);
    assert!(out.items[1].amodal_pixel_count > 0);

    // Tessellated spheres are inscribed: the mesh mask lies within the true sphere's disk and
    // covers the disk of a sphere shrunk by the facet inset.
    let inset = (std::f64::consts::PI / 12.0).cos() * (std::f64::consts::PI / 24.0).cos();
    for (k, (c, r)) in [(c_front, r_front), (c_back, r_back)].into_iter().enumerate() {
        for (x, y, &m) in out.amodal[k].pixels() {
            let d = cam.pixel_direction(x, y);
            let outer = ray_sphere(cam.position, d, c, r).is_some();
            let inner = ray_sphere(cam.position, d, c, r * inset * 0.999).is_some();
            assert!(!m || outer, "mask pixel ({x},{y}) outside sphere {k}");
            assert!(m || !inner, "pixel ({x},{y}) inside sphere {k} missing from mask");
        }
    }
    // brute force: the front sphere's true disk contains the back sphere's
    for (x, y, &m) in out.amodal[1].pixels() {
        if m {
            assert!(ray_sphere(cam.position, cam.pixel_direction(x, y), c_front, r_front * inset * 0.999).is_some());
        }
    }
}

#[test]
fn item_behind_camera_has_empty_amodal_mask() {
    let lib = library(vec![sphere_asset("ball", "fruit", 0.03)]);
    let scene = scene_with(&[("ball", Vec3::new(0.0, 0.0, 1.2))]);
    let cam = top_camera(1.0, 32, 35.0);
    let geom = geometry(&scene, &lib, 1.0);
    let out = render_view(&geom, &cam, &LightSpec::default());
    assert!(out.amodal[0].data.iter().all(|&b| !b));
    assert_eq!(out.items[0].amodal_pixel_count, 0);
    assert!(amodal_masks(&geom, &cam)[0].data.iter().all(|&b| !b));
}

#[test]
fn bbox2d_matches_min_max_scan() {
    let mut rng = seeded(99);
    for case in 0..1000 {
        let density = rng.gen_range(0.0..0.05);
        let mask = Raster {
            width: 64,
            height: 64,
            data: (0..64 * 64).map(|_| rng.gen_bool(density)).collect(),
        };
        let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
        let mut any = false;
        for y in 0..64u32 {
            for x in 0..64u32 {
                if mask.data[(y * 64 + x) as usize] {
                    any = true;
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        let bb = bbox2d_from_mask(&mask);
        assert_eq!(bb.is_some(), any, "case {case}");
        if let Some(b) = bb {
            assert_eq!((b.x_min, b.y_min, b.x_max, b.y_max), (x0, y0, x1, y1), "case {case}");
        }
    }
    let mut single = Raster::new(64, 64, false);
    single.data[20 * 64 + 10] = true;
    let b = bbox2d_from_mask(&single).unwrap();
    assert_eq!((b.x_min, b.y_min, b.x_max, b.y_max), (10, 20, 10, 20));
}

fn sorted(mut v: Vec<[f64; 3]>) -> Vec<[f64; 3]> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

#[test]
fn bbox3d_under_identity_translation_and_yaw() {
    let aabb = Aabb::new(Vec3::new(-0.01, -0.02, 0.0), Vec3::new(0.03, 0.02, 0.01));
    let id = bbox3d_for_item(&aabb, &Pose::identity());
    assert_eq!(id.center, aabb.center());
    assert_eq!(id.orientation, Quat::identity());

    let t = Vec3::new(0.1, -0.2, 0.3);
    let moved = bbox3d_for_item(&aabb, &Pose::from_translation(t));
    assert!((moved.center - (aabb.center() + t)).norm() < 1e-15);
    assert_eq!(moved.half_extents, id.half_extents);

    let yawed = bbox3d_for_item(&aabb, &Pose::new(Vec3::zero(), Quat::from_yaw(std::f64::consts::FRAC_PI_2)));
    // (x, y, z) -> (-y, x, z)
    let expected: Vec<[f64; 3]> = aabb.corners().iter().map(|c| [-c.y, c.x, c.z]).collect();
    let got: Vec<[f64; 3]> = yawed.corners().iter().map(|c| c.to_array()).collect();
    for (g, e) in sorted(got).iter().zip(sorted(expected)) {
        for k in 0..3 {
            assert!((g[k] - e[k]).abs() < 1e-9, "{g:?} vs {e:?}");
        }
    }
}
