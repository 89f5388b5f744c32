use mealsynth::asset::{default_primitive_library, load_asset, sample_items, AssetLibrary, PrimitiveShape};
use mealsynth::rng::seeded;
use mealsynth::{Error, Vec3};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

mod common;

const META: &str = r#"{
  "asset_id": "ico",
  "semantic_class": "dumpling",
  "albedo": [0.9, 0.85, 0.7],
  "nutrition": {"mass_g": 30, "calories_kcal": 60, "carbs_g": 8, "fat_g": 2, "protein_g": 3}
}"#;

const CUBE_OBJ: &str = "\
v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 0 1\nv 1 0 1\nv 1 1 1\nv 0 1 1\n\
f 1 3 2\nf 1 4 3\nf 5 6 7\nf 5 7 8\nf 1 2 6\nf 1 6 5\n\
f 2 3 7\nf 2 7 6\nf 3 4 8\nf 3 8 7\nf 4 1 5\nf 4 5 8\n";

/// Icosahedron subdivided `levels` times with vertices pushed onto the sphere.
fn icosphere(radius: f64, levels: usize) -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let unit = |v: [f64; 3]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    };
    let mut verts: Vec<[f64; 3]> = [
        [-1.0, t, 0.0], [1.0, t, 0.0], [-1.0, -t, 0.0], [1.0, -t, 0.0],
        [0.0, -1.0, t], [0.0, 1.0, t], [0.0, -1.0, -t], [0.0, 1.0, -t],
        [t, 0.0, -1.0], [t, 0.0, 1.0], [-t, 0.0, -1.0], [-t, 0.0, 1.0],
    ]
    .map(unit)
    .to_vec();
    let mut faces = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11], [1, 5, 9], [5, 11, 4],
        [11, 10, 2], [10, 7, 6], [7, 1, 8], [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8],
        [3, 8, 9], [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..levels {
        let mut mids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| {
            *mids.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (verts[a], verts[b]);
                verts.push(unit([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0]));
                verts.len() - 1
            })
        };
        faces = faces
            .iter()
            .flat_map(|&[a, b, c]| {
                let ab = mid(a, b, &mut verts);
                let bc = mid(b, c, &mut verts);
                let ca = mid(c, a, &mut verts);
                [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
            })
            .collect();
    }
    (verts.into_iter().map(|v| v.map(|c| c * radius)).collect(), faces)
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn unit_cube_asset() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = write(dir.path(), "cube.obj", CUBE_OBJ);
    let meta = write(dir.path(), "meta.json", META);
    let a = load_asset(&mesh, &meta).unwrap();
    assert_eq!(a.mesh.positions.len(), 8);
    assert_eq!(a.mesh.triangles.len(), 12);
    assert_eq!(a.aabb_object.extent(), Vec3::splat(1.0));
    assert_eq!(a.collision_hull.points.len(), 8);
    assert_eq!(a.display_name, "ico");
}

#[test]
fn negative_fat_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = write(dir.path(), "cube.obj", CUBE_OBJ);
    let meta = write(dir.path(), "meta.json", &META.replace("\"fat_g\": 2", "\"fat_g\": -1"));
    match load_asset(&mesh, &meta) {
        Err(Error::Validation { field, .. }) => assert_eq!(field, "fat_g"),
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn icosphere_extent() {
    let (verts, faces) = icosphere(0.05, 2);
    assert_eq!((verts.len(), faces.len()), (162, 320));
    let mut obj = String::from("# icosphere r=0.05\n");
    for v in &verts {
        obj += &format!("v {:.17e} {:.17e} {:.17e}\n", v[0], v[1], v[2]);
    }
    for f in &faces {
        obj += &format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    let dir = tempfile::tempdir().unwrap();
    let a = load_asset(&write(dir.path(), "ico.obj", &obj), &write(dir.path(), "meta.json", META)).unwrap();
    let e = a.aabb_object.extent();
    for k in 0..3 {
        let lo = verts.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min);
        let hi = verts.iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(e.to_array()[k], hi - lo);
        assert!((e.to_array()[k] - 0.1).abs() <= 1e-6);
    }
    // every vertex stays on the sphere through the text round trip
    for p in &a.mesh.positions {
        assert!((p.norm() - 0.05).abs() < 1e-12);
    }
}

#[test]
fn directory_library_loads_in_name_order() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["b_item", "a_item"] {
        let sub = dir.path().join(name);
        std::fs::create_dir(&sub).unwrap();
        write(&sub, "mesh.obj", CUBE_OBJ);
        write(&sub, "meta.json", &META.replace("\"ico\"", &format!("\"{name}\"")));
    }
    let lib = AssetLibrary::load_dir(dir.path()).unwrap();
    let ids: Vec<_> = lib.assets().iter().map(|a| a.asset_id.as_str()).collect();
    assert_eq!(ids, ["a_item", "b_item"]);
}

#[test]
fn primitives_have_exact_geometry() {
    let s = common::sphere_asset("s", "c", 0.04);
    assert!(s.mesh.positions.iter().all(|p| (p.norm() - 0.04).abs() <= 1e-6));
    let b = common::primitive("b", "c", PrimitiveShape::Box { extents_m: [0.02, 0.02, 0.02] });
    assert_eq!(b.mesh.triangles.len(), 12);
    assert_eq!(b.aabb_object.extent(), Vec3::splat(0.02));
    let again = common::sphere_asset("s", "c", 0.04);
    assert_eq!(s.mesh.to_obj_string(), again.mesh.to_obj_string());
}

#[test]
fn sampled_items_are_distinct_and_bounded() {
    let lib = default_primitive_library();
    let mut rng = seeded(5);
    for _ in 0..500 {
        let items = sample_items(&lib, 7, &mut rng).unwrap();
        assert!((1..=7).contains(&items.len()));
        assert_eq!(items.iter().collect::<BTreeSet<_>>().len(), items.len());
    }
    let one = common::library(vec![common::sphere_asset("only", "c", 0.02)]);
    assert_eq!(sample_items(&one, 7, &mut rng).unwrap(), ["only"]);
}

#[test]
fn sampling_repeats_per_seed() {
    let specs: Vec<_> = (0..10)
        .map(|i| common::sphere_asset(&format!("a{i}"), &format!("c{}", i % 3), 0.01 + 0.001 * i as f64))
        .collect();
    let lib = common::library(specs);
    let a = sample_items(&lib, 7, &mut seeded(42)).unwrap();
    let b = sample_items(&lib, 7, &mut seeded(42)).unwrap();
    assert_eq!(a, b);
}
