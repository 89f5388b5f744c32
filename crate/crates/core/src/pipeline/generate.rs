//! End-to-end dataset generation.

use super::config::PipelineConfig;
use super::manifest::{
    sha256_hex, write_json, ImageFiles, ImageRecord, InstanceLegendEntry, Manifest, SceneRecord, MANIFEST_FILE,
};
use crate::asset::AssetLibrary;
use crate::camera::{build_rig, select_views, CameraPose, RigConfig};
use crate::error::{Error, Result};
use crate::nutrition::{aggregate, catalog_of};
use crate::plating::dynamics::compose_dynamic_scene_with_report;
use crate::plating::{instantiate, PlatingMode, PlatingRuleSet, RejectedItem, Scene};
use crate::render::{io, render_view, ItemAnnotation, RenderBundle, SceneGeometry, SemanticLegend};
use crate::rng::{derive_seed, seeded, stream};
use crate::TOOL_VERSION;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub fn scene_id(index: u64) -> String {
    format!("scene_{index:05}")
}

pub fn view_id(index: usize) -> String {
    format!("view_{index:02}")
}

/// Physics outcome stored next to a dynamically plated scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettleSummary {
    pub planned: usize,
    pub settled: usize,
    pub rejected: Vec<RejectedItem>,
    pub steps_simulated: u64,
}

/// Contents of `scenes/<id>/scene.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub scene_id: String,
    pub scene: Scene,
    /// Per-item brightness factors, aligned with `scene.items`.
    pub brightness: Vec<f64>,
    pub cameras: Vec<CameraPose>,
    pub rendered_views: Vec<usize>,
    pub settle: Option<SettleSummary>,
}

/// Contents of a view's `annotations.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewAnnotations {
    pub scene_id: String,
    pub view_id: String,
    pub camera: CameraPose,
    pub intrinsics: [[f64; 3]; 3],
    pub extrinsics: [[f64; 4]; 3],
    pub semantic_legend: BTreeMap<u16, String>,
    pub instance_legend: BTreeMap<u16, InstanceLegendEntry>,
    pub items: Vec<ItemAnnotation>,
}

struct Context<'a> {
    config: &'a PipelineConfig,
    library: &'a AssetLibrary,
    legend: &'a SemanticLegend,
    rules: Option<PlatingRuleSet>,
    rig: RigConfig,
    views_per_scene: usize,
    master_seed: u64,
    out_dir: &'a Path,
}

/// Generates `scenes` scenes into `out_dir` on `workers` threads and writes the manifest.
/// The output does not depend on `workers`.
pub fn generate_dataset(
    config: &PipelineConfig,
    master_seed: u64,
    scenes: u64,
    out_dir: &Path,
    workers: usize,
) -> Result<Manifest> {
    config.validate()?;
    let library = config.load_library()?;
    let legend = SemanticLegend::from_library(&library);
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let ctx = Context {
        config,
        library: &library,
        legend: &legend,
        rules: config.rule_set()?,
        rig: config.effective_rig(),
        views_per_scene: config.views_per_scene(),
        master_seed,
        out_dir,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    let results: Vec<Result<(SceneRecord, Vec<ImageRecord>)>> =
        pool.install(|| (0..scenes).into_par_iter().map(|s| generate_scene(&ctx, s)).collect());

    let mut scene_records = Vec::with_capacity(scenes as usize);
    let mut images = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok((scene, imgs)) => {
                scene_records.push(scene);
                images.extend(imgs);
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    if !failures.is_empty() {
        return Err(Error::Generation(format!(
            "{} of {scenes} scenes failed: {}",
            failures.len(),
            failures.join("; ")
        )));
    }
    let mut manifest = Manifest {
        tool_version: TOOL_VERSION.to_owned(),
        master_seed,
        config: config.clone(),
        semantic_legend: legend.to_map(),
        assets: catalog_of(&library),
        views_per_scene: ctx.views_per_scene,
        scenes: scene_records,
        images,
        provenance: vec![format!("generated {scenes} scenes from master seed {master_seed}")],
        dataset_root: None,
        content_hash: String::new(),
    };
    manifest.seal();
    manifest.write(&out_dir.join(MANIFEST_FILE))?;
    log::info!(
        "wrote {} scenes, {} images to {}",
        manifest.scenes.len(),
        manifest.images.len(),
        out_dir.display()
    );
    Ok(manifest)
}

fn generate_scene(ctx: &Context, index: u64) -> Result<(SceneRecord, Vec<ImageRecord>)> {
    let base = derive_seed(ctx.master_seed, index);
    let budget = ctx.config.output.retry_budget;
    let mut last = None;
    for attempt in 0..=budget {
        let seed = if attempt == 0 {
            base
        } else {
            derive_seed(derive_seed(base, stream::RETRY), attempt as u64)
        };
        match try_scene(ctx, index, seed, attempt + 1) {
            Ok(r) => return Ok(r),
            Err(e) => {
                log::warn!("{} attempt {}: {e}", scene_id(index), attempt + 1);
                last = Some(e);
            }
        }
    }
    Err(Error::Generation(format!(
        "{} failed after {} attempts, last error: {}",
        scene_id(index),
        budget + 1,
        last.map(|e| e.to_string()).unwrap_or_default()
    )))
}

fn compose(ctx: &Context, seed: u64) -> Result<(Scene, Option<SettleSummary>)> {
    let compose_seed = derive_seed(seed, stream::COMPOSE);
    match ctx.config.plating.mode {
        PlatingMode::Dynamic => {
            let p = &ctx.config.plating;
            let (scene, plan, report) =
                compose_dynamic_scene_with_report(ctx.library, &p.plate, &p.sim, p.max_items, compose_seed)?;
            let summary = SettleSummary {
                planned: plan.entries.len(),
                settled: report.settled.len(),
                rejected: report.rejected,
                steps_simulated: report.steps_simulated,
            };
            Ok((scene, Some(summary)))
        }
        PlatingMode::Procedural => {
            let rules = ctx
                .rules
                .as_ref()
                .ok_or_else(|| Error::Config("procedural plating without rules".into()))?;
            Ok((instantiate(rules, ctx.library, compose_seed)?, None))
        }
    }
}

fn rel(parts: &[&str]) -> String {
    parts.join("/")
}

fn hash_file(root: &Path, relative: &str) -> Result<String> {
    let path = root.join(relative);
    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    Ok(sha256_hex(&bytes))
}

fn try_scene(ctx: &Context, index: u64, seed: u64, attempts: u32) -> Result<(SceneRecord, Vec<ImageRecord>)> {
    let sid = scene_id(index);
    let (scene, settle) = compose(ctx, seed)?;
    let cameras = build_rig(&scene.plate, &ctx.rig, &mut seeded(derive_seed(seed, stream::RIG)))?;
    let [b_lo, b_hi] = ctx.config.render.brightness_range;
    let mut brng = seeded(derive_seed(seed, stream::BRIGHTNESS));
    let brightness: Vec<f64> = scene
        .items
        .iter()
        .map(|_| if b_hi > b_lo { brng.gen_range(b_lo..=b_hi) } else { b_lo })
        .collect();
    let views = if ctx.views_per_scene == cameras.len() {
        (0..cameras.len()).collect()
    } else {
        select_views(
            cameras.len(),
            ctx.views_per_scene,
            &mut seeded(derive_seed(seed, stream::VIEWS)),
        )?
    };
    let nutrition = aggregate(&scene, ctx.library)?;
    let geometry = SceneGeometry::build(&scene, ctx.library, ctx.legend, &brightness)?;
    let instances: BTreeMap<u16, InstanceLegendEntry> = scene
        .items
        .iter()
        .map(|it| {
            let asset = ctx.library.require(&it.asset_id)?;
            Ok((
                it.instance_id,
                InstanceLegendEntry {
                    asset_id: it.asset_id.clone(),
                    semantic_class: asset.semantic_class.clone(),
                    semantic_id: ctx.legend.id(&asset.semantic_class).unwrap_or(0),
                },
            ))
        })
        .collect::<Result<_>>()?;

    let root = ctx.out_dir;
    let scene_dir = root.join("scenes").join(&sid);
    let image_dir = root.join("images").join(&sid);
    for dir in [&scene_dir, &image_dir] {
        if dir.exists() {
            std::fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let scene_path = rel(&["scenes", &sid, "scene.json"]);
    let nutrition_path = rel(&["scenes", &sid, "nutrition.json"]);
    write_json(
        &root.join(&scene_path),
        &SceneFile {
            scene_id: sid.clone(),
            scene: scene.clone(),
            brightness,
            cameras: cameras.clone(),
            rendered_views: views.clone(),
            settle,
        },
    )?;
    write_json(&root.join(&nutrition_path), &nutrition)?;

    let semantic_legend = ctx.legend.to_map();
    let mut images = Vec::with_capacity(views.len());
    for &v in &views {
        let vid = view_id(v);
        let camera = cameras[v];
        let bundle = render_view(&geometry, &camera, &ctx.config.render.light);
        let files = write_view(root, &sid, &vid, &bundle)?;
        let annotations = ViewAnnotations {
            scene_id: sid.clone(),
            view_id: vid.clone(),
            camera,
            intrinsics: camera.pinhole().matrix(),
            extrinsics: camera.extrinsics(),
            semantic_legend: semantic_legend.clone(),
            instance_legend: instances.clone(),
            items: bundle.items,
        };
        write_json(&root.join(&files.annotations), &annotations)?;
        let file_hashes = files
            .all()
            .map(|f| Ok((f.clone(), hash_file(root, f)?)))
            .collect::<Result<_>>()?;
        images.push(ImageRecord {
            scene_id: sid.clone(),
            view_id: vid,
            view_index: v,
            camera,
            width: camera.image_width_px,
            height: camera.image_height_px,
            files,
            file_hashes,
            nutrition_path: nutrition_path.clone(),
        });
    }
    log::debug!("{sid}: {} items, {} views", scene.items.len(), images.len());
    let record = SceneRecord {
        scene_id: sid,
        scene_index: index,
        seed,
        attempts,
        scene_path,
        nutrition_path,
        nutrition,
        instances,
        rig_views: cameras.len(),
    };
    Ok((record, images))
}

/// Writes every raster of one view; returns the relative paths (annotations not yet written).
fn write_view(root: &Path, sid: &str, vid: &str, bundle: &RenderBundle) -> Result<ImageFiles> {
    let dir: PathBuf = root.join("images").join(sid).join(vid);
    std::fs::create_dir_all(dir.join("amodal")).map_err(|e| Error::io(&dir, e))?;
    let files = ImageFiles {
        rgb: rel(&["images", sid, vid, "rgb.png"]),
        depth: rel(&["images", sid, vid, "depth.pfm"]),
        semantic: rel(&["images", sid, vid, "semantic.png"]),
        instance: rel(&["images", sid, vid, "instance.png"]),
        annotations: rel(&["images", sid, vid, "annotations.json"]),
        amodal: bundle
            .items
            .iter()
            .map(|it| {
                let name = format!("{}.png", it.instance_id);
                (it.instance_id, rel(&["images", sid, vid, "amodal", &name]))
            })
            .collect(),
    };
    io::write_rgb_png(&root.join(&files.rgb), &bundle.rgb)?;
    io::write_pfm(&root.join(&files.depth), &bundle.depth)?;
    io::write_id_png(&root.join(&files.semantic), &bundle.semantic)?;
    io::write_id_png(&root.join(&files.instance), &bundle.instance)?;
    for (item, mask) in bundle.items.iter().zip(&bundle.amodal) {
        io::write_mask_png(&root.join(&files.amodal[&item.instance_id]), mask)?;
    }
    Ok(files)
}
