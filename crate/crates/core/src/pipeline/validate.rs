//! Integrity checks over a generated dataset directory.

use super::generate::ViewAnnotations;
use super::manifest::{read_json, sha256_hex, ImageRecord, Manifest, SceneRecord, MANIFEST_FILE};
use crate::error::{Error, Result};
use crate::nutrition::{aggregate_items, SceneNutrition};
use crate::render::{bbox2d_where, io, Raster};
use crate::rng::seeded;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// Failure messages kept in a report.
const MAX_FAILURES: usize = 200;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckCount {
    pub checked: u64,
    pub violations: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub images_total: usize,
    pub images_sampled: usize,
    pub checks: BTreeMap<String, CheckCount>,
    pub failures: Vec<String>,
}

impl ValidationReport {
    fn tally(&mut self, check: &str, checked: u64, violations: u64) {
        let c = self.checks.entry(check.to_owned()).or_default();
        c.checked += checked;
        c.violations += violations;
    }

    fn fail(&mut self, check: &str, message: String) {
        self.tally(check, 1, 1);
        if self.failures.len() < MAX_FAILURES {
            self.failures.push(format!("{check}: {message}"));
        }
    }

    fn ok(&mut self, check: &str) {
        self.tally(check, 1, 0);
    }

    fn expect(&mut self, check: &str, cond: bool, message: impl FnOnce() -> String) {
        if cond {
            self.ok(check)
        } else {
            self.fail(check, message())
        }
    }

    pub fn violations(&self, check: &str) -> u64 {
        self.checks.get(check).map_or(0, |c| c.violations)
    }
}

/// Validates the dataset in `dir`, inspecting rasters of a `sample` fraction of the images
/// (chosen reproducibly). File existence and nutrition are always checked in full.
pub fn validate(dir: &Path, sample: f64) -> Result<ValidationReport> {
    if !(sample > 0.0 && sample <= 1.0) {
        return Err(Error::validation("sample", format!("must lie in (0, 1], got {sample}")));
    }
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(Error::io(
            &manifest_path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "no manifest in dataset directory"),
        ));
    }
    let manifest = Manifest::read(&manifest_path)?;
    let root = manifest.root_for(&manifest_path);
    let mut report = ValidationReport {
        images_total: manifest.images.len(),
        ..Default::default()
    };

    let recomputed = manifest.compute_hash();
    report.expect("manifest_hash", recomputed == manifest.content_hash, || {
        format!("stored {} but content hashes to {recomputed}", manifest.content_hash)
    });

    let scenes: BTreeMap<&str, &SceneRecord> = manifest.scenes.iter().map(|s| (s.scene_id.as_str(), s)).collect();
    let mut keys = BTreeSet::new();
    for img in &manifest.images {
        report.expect("unique_views", keys.insert((&img.scene_id, &img.view_id)), || {
            format!("{}/{} listed twice", img.scene_id, img.view_id)
        });
        report.expect("scene_reference", scenes.contains_key(img.scene_id.as_str()), || {
            format!("image {}/{} names an unknown scene", img.scene_id, img.view_id)
        });
    }

    let mut missing_images = BTreeSet::new();
    for scene in &manifest.scenes {
        for f in [&scene.scene_path, &scene.nutrition_path] {
            let p = root.join(f);
            report.expect("files_exist", p.is_file(), || format!("missing {}", p.display()));
        }
    }
    for (k, img) in manifest.images.iter().enumerate() {
        for f in img.files.all() {
            let p = root.join(f);
            if p.is_file() {
                report.ok("files_exist");
            } else {
                report.fail("files_exist", format!("missing {}", p.display()));
                missing_images.insert(k);
            }
        }
    }

    for scene in &manifest.scenes {
        check_nutrition(&mut report, &manifest, &root, scene);
    }

    let mut order: Vec<usize> = (0..manifest.images.len()).collect();
    order.shuffle(&mut seeded(0));
    let n_sample = ((sample * order.len() as f64).ceil() as usize).min(order.len());
    let mut sampled: Vec<usize> = order.into_iter().take(n_sample).collect();
    sampled.sort_unstable();
    report.images_sampled = sampled.len();
    for k in sampled {
        if missing_images.contains(&k) {
            continue;
        }
        let img = &manifest.images[k];
        let Some(scene) = scenes.get(img.scene_id.as_str()) else {
            continue;
        };
        if let Err(e) = check_image(&mut report, &manifest, &root, scene, img) {
            report.fail("readable", format!("{}/{}: {e}", img.scene_id, img.view_id));
        }
    }

    report.passed = report.checks.values().all(|c| c.violations == 0);
    Ok(report)
}

fn check_nutrition(report: &mut ValidationReport, manifest: &Manifest, root: &Path, scene: &SceneRecord) {
    let path = root.join(&scene.nutrition_path);
    let on_disk: SceneNutrition = match read_json(&path) {
        Ok(n) => n,
        Err(e) => {
            report.fail("nutrition_additivity", e.to_string());
            return;
        }
    };
    let ids = on_disk.ingredients.iter().map(|i| i.asset_id.as_str());
    match aggregate_items(ids, &manifest.assets) {
        Ok(sum) => {
            let close = sum
                .totals
                .to_array()
                .iter()
                .zip(on_disk.totals.to_array())
                .all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0));
            report.expect(
                "nutrition_additivity",
                close && on_disk.ingredient_count == on_disk.ingredients.len() && on_disk == scene.nutrition,
                || format!("{}: totals do not match the sum of ingredients", path.display()),
            );
        }
        Err(e) => report.fail("nutrition_additivity", format!("{}: {e}", path.display())),
    }
}

fn check_image(
    report: &mut ValidationReport,
    manifest: &Manifest,
    root: &Path,
    scene: &SceneRecord,
    img: &ImageRecord,
) -> Result<()> {
    let label = format!("{}/{}", img.scene_id, img.view_id);
    for f in img.files.all() {
        let bytes = std::fs::read(root.join(f)).map_err(|e| Error::io(root.join(f), e))?;
        let expected = img.file_hashes.get(f);
        report.expect("file_integrity", expected == Some(&sha256_hex(&bytes)), || {
            format!("{f} does not match its recorded hash")
        });
    }
    let rgb = io::read_rgb_png(&root.join(&img.files.rgb))?;
    let depth = io::read_pfm(&root.join(&img.files.depth))?;
    let semantic = io::read_id_png(&root.join(&img.files.semantic))?;
    let instance = io::read_id_png(&root.join(&img.files.instance))?;
    let annotations: ViewAnnotations = read_json(&root.join(&img.files.annotations))?;
    let mut amodal = BTreeMap::new();
    for (&id, f) in &img.files.amodal {
        amodal.insert(id, io::read_mask_png(&root.join(f))?);
    }

    let dims = (img.width, img.height);
    let size = |w: u32, h: u32| (w, h) == dims;
    report.expect("raster_dimensions", size(rgb.width, rgb.height), || format!("{label}: rgb size"));
    report.expect("raster_dimensions", size(depth.width, depth.height), || format!("{label}: depth size"));
    report.expect("raster_dimensions", size(semantic.width, semantic.height), || format!("{label}: semantic size"));
    report.expect("raster_dimensions", size(instance.width, instance.height), || format!("{label}: instance size"));
    for (id, m) in &amodal {
        report.expect("raster_dimensions", size(m.width, m.height), || format!("{label}: amodal {id} size"));
    }
    let all_same = [depth.same_size(&rgb), semantic.same_size(&rgb), instance.same_size(&rgb)]
        .into_iter()
        .chain(amodal.values().map(|m| m.same_size(&rgb)))
        .all(|b| b);
    if !all_same {
        return Ok(());
    }

    check_masks(report, manifest, scene, &label, &semantic, &instance, &depth, &amodal);

    // annotations agree with the rasters
    let declared: BTreeSet<u16> = scene.instances.keys().copied().collect();
    let annotated: BTreeSet<u16> = annotations.items.iter().map(|i| i.instance_id).collect();
    report.expect(
        "mask_partition",
        annotated == declared && annotated.len() == annotations.items.len(),
        || format!("{label}: annotated instances differ from the scene legend"),
    );
    let mut counts: BTreeMap<u16, u64> = BTreeMap::new();
    for &v in &instance.data {
        *counts.entry(v).or_insert(0) += 1;
    }
    let foreground: u64 = counts.iter().filter(|(&k, _)| k != 0).map(|(_, &c)| c).sum();
    let background = counts.get(&0).copied().unwrap_or(0);
    let listed: u64 = annotations.items.iter().map(|i| i.visible_pixel_count).sum();
    report.expect(
        "mask_partition",
        listed == foreground && foreground + background == instance.data.len() as u64,
        || format!("{label}: visible counts {listed} + background {background} do not cover the image"),
    );
    for item in &annotations.items {
        let id = item.instance_id;
        let visible = counts.get(&id).copied().unwrap_or(0);
        report.expect("mask_partition", visible == item.visible_pixel_count, || {
            format!("{label}: item {id} visible count {} vs {visible} pixels", item.visible_pixel_count)
        });
        let tight = bbox2d_where(&instance, |&v| v == id);
        report.expect("bbox_tightness", tight == item.bbox2d, || {
            format!("{label}: item {id} box {:?} but mask spans {tight:?}", item.bbox2d)
        });
        if let Some(b) = item.bbox2d {
            let inside = b.x_max < img.width && b.y_max < img.height && b.x_min <= b.x_max && b.y_min <= b.y_max;
            report.expect("bbox_tightness", inside, || format!("{label}: item {id} box outside the image"));
        }
        if let Some(m) = amodal.get(&id) {
            let n = m.data.iter().filter(|&&b| b).count() as u64;
            report.expect("visible_in_amodal", n == item.amodal_pixel_count, || {
                format!("{label}: item {id} amodal count {} vs {n} pixels", item.amodal_pixel_count)
            });
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn check_masks(
    report: &mut ValidationReport,
    manifest: &Manifest,
    scene: &SceneRecord,
    label: &str,
    semantic: &Raster<u16>,
    instance: &Raster<u16>,
    depth: &Raster<f32>,
    amodal: &BTreeMap<u16, Raster<bool>>,
) {
    let mut tally = |check: &str, checked: u64, bad: u64, what: &dyn Fn() -> String| {
        report.tally(check, checked, bad);
        if bad > 0 && report.failures.len() < MAX_FAILURES {
            report.failures.push(format!("{check}: {label}: {bad} pixels {}", what()));
        }
    };
    let n = instance.data.len() as u64;
    let bad_sem = semantic
        .data
        .iter()
        .filter(|&&v| v != 0 && !manifest.semantic_legend.contains_key(&v))
        .count() as u64;
    let bad_inst = instance
        .data
        .iter()
        .filter(|&&v| v != 0 && !scene.instances.contains_key(&v))
        .count() as u64;
    tally("legend_closure", 2 * n, bad_sem + bad_inst, &|| "carry undeclared ids".to_owned());

    let (mut fg, mut bad_class, mut bad_amodal, mut bad_depth) = (0u64, 0u64, 0u64, 0u64);
    for ((&i, &s), (k, &d)) in instance.data.iter().zip(&semantic.data).zip(depth.data.iter().enumerate()) {
        if i == 0 {
            if s != 0 {
                bad_class += 1;
            }
            continue;
        }
        fg += 1;
        match scene.instances.get(&i) {
            Some(entry) if entry.semantic_id == s => {}
            _ => bad_class += 1,
        }
        if !amodal.get(&i).is_some_and(|m| m.data[k]) {
            bad_amodal += 1;
        }
        if !(d.is_finite() && d > 0.0) {
            bad_depth += 1;
        }
    }
    tally("semantic_consistency", n, bad_class, &|| "disagree with their instance class".to_owned());
    tally("visible_in_amodal", fg, bad_amodal, &|| "are visible outside the amodal mask".to_owned());
    tally("depth_foreground", fg, bad_depth, &|| "have no finite positive depth".to_owned());
}
