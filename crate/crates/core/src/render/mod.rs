//! Lambertian raycasting of a plated scene with pixel-exact annotations.
//!
//! One ray per pixel centre. The nearest item, plate or table hit gives the colour and planar
//! depth; the nearest *item* hit gives the semantic and instance ids, and every item hit along
//! the ray sets that item's amodal mask. Plate and table are background (id 0) in all masks.

pub mod bvh;
pub mod io;

use crate::asset::AssetLibrary;
use crate::camera::CameraPose;
use crate::error::{Error, Result};
use crate::plating::{PlateSpec, Scene, RIM_WIDTH_M};
use crate::{Aabb, Pose, Quat, Ray, Vec3};
use bvh::Bvh;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

pub use bvh::Hit;

const TABLE_ALBEDO: [f64; 3] = [0.55, 0.42, 0.30];
const PLATE_ALBEDO: [f64; 3] = [0.93, 0.93, 0.90];
/// Facets used to tessellate the plate outline.
const PLATE_SEGMENTS: usize = 96;
/// Hits closer than this (in units of the forward-normalised ray) are ignored.
const T_MIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Raster<T> {
    pub width: u32,
    pub height: u32,
    /// Row-major, top row first.
    pub data: Vec<T>,
}

impl<T: Clone> Raster<T> {
    pub fn new(width: u32, height: u32, fill: T) -> Self {
        Self {
            width,
            height,
            data: vec![fill; width as usize * height as usize],
        }
    }
}

impl<T> Raster<T> {
    #[inline]
    pub fn get(&self, x: u32, y: u32) -> &T {
        &self.data[y as usize * self.width as usize + x as usize]
    }

    pub fn same_size<U>(&self, other: &Raster<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// `(x, y, value)` for every pixel in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (u32, u32, &T)> {
        let w = self.width.max(1);
        self.data
            .iter()
            .enumerate()
            .map(move |(i, v)| (i as u32 % w, i as u32 / w, v))
    }
}

/// Inclusive pixel box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bbox2D {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
}

impl Bbox2D {
    pub fn contains(&self, x: u32, y: u32) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }
}

/// Object-space box carried rigidly by the item pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bbox3D {
    pub center: Vec3,
    pub half_extents: Vec3,
    pub orientation: Quat,
}

impl Bbox3D {
    /// World-space corners; bit `k` of the index selects the positive half-extent on axis `k`.
    pub fn corners(&self) -> [Vec3; 8] {
        std::array::from_fn(|i| {
            let s = |bit: usize, h: f64| if i & bit != 0 { h } else { -h };
            let local = Vec3::new(
                s(1, self.half_extents.x),
                s(2, self.half_extents.y),
                s(4, self.half_extents.z),
            );
            self.center + self.orientation.rotate(local)
        })
    }
}

/// Tight box over the pixels where `pred` holds.
pub fn bbox2d_where<T>(raster: &Raster<T>, pred: impl Fn(&T) -> bool) -> Option<Bbox2D> {
    let mut bb: Option<Bbox2D> = None;
    for (x, y, v) in raster.pixels() {
        if !pred(v) {
            continue;
        }
        bb = Some(match bb {
            None => Bbox2D {
                x_min: x,
                y_min: y,
                x_max: x,
                y_max: y,
            },
            Some(b) => Bbox2D {
                x_min: b.x_min.min(x),
                y_min: b.y_min.min(y),
                x_max: b.x_max.max(x),
                y_max: b.y_max.max(y),
            },
        });
    }
    bb
}

pub fn bbox2d_from_mask(mask: &Raster<bool>) -> Option<Bbox2D> {
    bbox2d_where(mask, |&b| b)
}

pub fn bbox3d_for_item(aabb_object: &Aabb, pose: &Pose) -> Bbox3D {
    Bbox3D {
        center: pose.transform_point(aabb_object.center()),
        half_extents: aabb_object.extent() * 0.5,
        orientation: pose.orientation,
    }
}

/// Semantic ids: classes in sorted order numbered from 1; 0 is background.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticLegend {
    pub classes: Vec<String>,
}

impl SemanticLegend {
    pub fn from_library(library: &AssetLibrary) -> Self {
        Self {
            classes: library.classes().map(str::to_owned).collect(),
        }
    }

    pub fn id(&self, class: &str) -> Option<u16> {
        self.classes
            .iter()
            .position(|c| c == class)
            .map(|i| i as u16 + 1)
    }

    pub fn name(&self, id: u16) -> Option<&str> {
        (id as usize)
            .checked_sub(1)
            .and_then(|i| self.classes.get(i))
            .map(String::as_str)
    }

    /// `id -> class` map as written to legends.
    pub fn to_map(&self) -> BTreeMap<u16, String> {
        self.classes
            .iter()
            .enumerate()
            .map(|(i, c)| (i as u16 + 1, c.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LightSpec {
    /// Direction towards the light, world frame; normalised on use.
    pub direction: Vec3,
    pub ambient: f64,
    pub diffuse: f64,
}

impl Default for LightSpec {
    fn default() -> Self {
        Self {
            direction: Vec3::new(0.3, -0.4, 1.0),
            ambient: 0.35,
            diffuse: 0.65,
        }
    }
}

impl LightSpec {
    pub fn validate(&self) -> Result<()> {
        if self.direction.try_normalize().is_none() || !self.direction.is_finite() {
            return Err(Error::validation("render.light.direction", "must be a non-zero finite vector"));
        }
        if !(self.ambient >= 0.0 && self.diffuse >= 0.0 && (self.ambient + self.diffuse).is_finite()) {
            return Err(Error::validation("render.light", "ambient and diffuse must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct ItemGeometry {
    instance_id: u16,
    semantic_id: u16,
    asset_id: String,
    semantic_class: String,
    pose: Pose,
    world_bounds: Aabb,
    bvh: Arc<Bvh<f64>>,
    albedo: [f64; 3],
    brightness: f64,
    bbox3d: Bbox3D,
}

/// Everything a view needs from one scene; built once and shared by all views.
#[derive(Debug, Clone)]
pub struct SceneGeometry {
    items: Vec<ItemGeometry>,
    plate: Bvh<f64>,
    table_z: f64,
}

/// Brightness factors must lie in this range.
pub const BRIGHTNESS_RANGE: [f64; 2] = [1.0, 2.0];

impl SceneGeometry {
    /// `brightness[k]` is the factor for `scene.items[k]`.
    pub fn build(scene: &Scene, library: &AssetLibrary, legend: &SemanticLegend, brightness: &[f64]) -> Result<Self> {
        scene.validate(library)?;
        if brightness.len() != scene.items.len() {
            return Err(Error::validation(
                "brightness",
                format!("{} factors for {} items", brightness.len(), scene.items.len()),
            ));
        }
        let mut cache: BTreeMap<&str, Arc<Bvh<f64>>> = BTreeMap::new();
        let mut items = Vec::with_capacity(scene.items.len());
        for (item, &b) in scene.items.iter().zip(brightness) {
            if !(BRIGHTNESS_RANGE[0]..=BRIGHTNESS_RANGE[1]).contains(&b) {
                return Err(Error::validation(
                    "brightness",
                    format!("factor {b} for item {} outside [1, 2]", item.instance_id),
                ));
            }
            let asset = library.require(&item.asset_id)?;
            let bvh = cache
                .entry(asset.asset_id.as_str())
                .or_insert_with(|| {
                    Arc::new(Bvh::build(asset.mesh.positions.clone(), asset.mesh.triangles.clone()))
                })
                .clone();
            let semantic_id = legend.id(&asset.semantic_class).ok_or_else(|| {
                Error::Lookup(format!("class `{}` missing from the legend", asset.semantic_class))
            })?;
            items.push(ItemGeometry {
                instance_id: item.instance_id,
                semantic_id,
                asset_id: asset.asset_id.clone(),
                semantic_class: asset.semantic_class.clone(),
                pose: item.pose,
                world_bounds: bvh.bounds().transformed(&item.pose),
                bvh,
                albedo: asset.albedo,
                brightness: b,
                bbox3d: bbox3d_for_item(&asset.aabb_object, &item.pose),
            });
        }
        items.sort_by_key(|it| it.instance_id);
        let (positions, triangles) = plate_mesh(&scene.plate);
        Ok(Self {
            items,
            plate: Bvh::build(positions, triangles),
            table_z: scene.plate.table_z(),
        })
    }

    /// Nearest hit of `ray` on item `k` alone.
    fn item_hit(&self, k: usize, ray: &Ray) -> Option<(f64, Vec3)> {
        let it = &self.items[k];
        it.world_bounds.intersect_ray(ray, T_MIN, f64::INFINITY)?;
        let local = ray.to_local(&it.pose);
        let hit = it.bvh.intersect(&local, T_MIN, f64::INFINITY)?;
        Some((hit.t, it.pose.transform_vector(it.bvh.normal(hit.triangle))))
    }

    fn background_hit(&self, ray: &Ray) -> Option<(f64, Vec3, [f64; 3])> {
        let plate = self
            .plate
            .intersect(ray, T_MIN, f64::INFINITY)
            .map(|h| (h.t, self.plate.normal(h.triangle), PLATE_ALBEDO));
        let table = if ray.direction.z != 0.0 {
            let t = (self.table_z - ray.origin.z) / ray.direction.z;
            (t > T_MIN).then_some((t, Vec3::unit_z(), TABLE_ALBEDO))
        } else {
            None
        };
        match (plate, table) {
            (Some(p), Some(t)) => Some(if t.0 < p.0 { t } else { p }),
            (p, t) => p.or(t),
        }
    }

    /// Depth of the nearest surface along the primary ray through `(px, py)`, as stored in
    /// depth maps; infinite when the ray escapes.
    pub fn primary_depth(&self, camera: &CameraPose, px: u32, py: u32) -> f64 {
        let ray = Ray::new(camera.position, camera.pixel_direction(px, py));
        let mut best = self.background_hit(&ray).map_or(f64::INFINITY, |h| h.0);
        for k in 0..self.items.len() {
            if let Some((t, _)) = self.item_hit(k, &ray) {
                best = best.min(t);
            }
        }
        best
    }
}

/// Closed plate surface above the table: top disk, rim walls and rim top, outer wall.
pub fn plate_mesh(plate: &PlateSpec) -> (Vec<Vec3>, Vec<[u32; 3]>) {
    let c = plate.center;
    let r_out = plate.radius_m;
    let r_in = (plate.radius_m - RIM_WIDTH_M).max(0.0);
    let top = plate.top_z_m;
    let rim_top = top + plate.rim_height_m.max(0.0);
    // profile from the centre outwards: (radius, z)
    let profile = [(r_in, top), (r_in, rim_top), (r_out, rim_top), (r_out, plate.table_z())];
    let ring = |r: f64, z: f64, k: usize| {
        let a = std::f64::consts::TAU * (k % PLATE_SEGMENTS) as f64 / PLATE_SEGMENTS as f64;
        Vec3::new(c.x + r * a.cos(), c.y + r * a.sin(), z)
    };
    let mut positions = vec![Vec3::new(c.x, c.y, top)];
    for &(r, z) in &profile {
        positions.extend((0..PLATE_SEGMENTS).map(|k| ring(r, z, k)));
    }
    let idx = |ring: usize, k: usize| (1 + ring * PLATE_SEGMENTS + k % PLATE_SEGMENTS) as u32;
    let mut triangles = Vec::new();
    for k in 0..PLATE_SEGMENTS {
        triangles.push([0, idx(0, k), idx(0, k + 1)]);
        for ring in 0..profile.len() - 1 {
            let (a, b) = (idx(ring, k), idx(ring, k + 1));
            let (c2, d) = (idx(ring + 1, k), idx(ring + 1, k + 1));
            triangles.push([a, c2, b]);
            triangles.push([b, c2, d]);
        }
    }
    (positions, triangles)
}

/// Per-item annotation of one view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemAnnotation {
    pub instance_id: u16,
    pub asset_id: String,
    pub semantic_class: String,
    pub semantic_id: u16,
    /// Absent when the item is fully occluded or out of frame.
    pub bbox2d: Option<Bbox2D>,
    pub bbox3d: Bbox3D,
    pub brightness_factor: f64,
    pub visible_pixel_count: u64,
    pub amodal_pixel_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderBundle {
    pub rgb: Raster<[u8; 3]>,
    /// Planar depth in metres; `+inf` where nothing is hit.
    pub depth: Raster<f32>,
    pub semantic: Raster<u16>,
    pub instance: Raster<u16>,
    /// One mask per item, in instance-id order.
    pub amodal: Vec<Raster<bool>>,
    pub items: Vec<ItemAnnotation>,
}

struct Row {
    rgb: Vec<[u8; 3]>,
    depth: Vec<f32>,
    semantic: Vec<u16>,
    instance: Vec<u16>,
    amodal: Vec<Vec<bool>>,
}

fn shade(albedo: [f64; 3], brightness: f64, normal: Vec3, ray_dir: Vec3, light: &LightSpec, l: Vec3) -> [u8; 3] {
    let n = if normal.dot(ray_dir) > 0.0 { -normal } else { normal };
    let k = light.ambient + light.diffuse * n.dot(l).max(0.0);
    albedo.map(|a| ((a * brightness * k).clamp(0.0, 1.0) * 255.0).round() as u8)
}

fn render_row(geom: &SceneGeometry, camera: &CameraPose, light: &LightSpec, y: u32) -> Row {
    let w = camera.image_width_px as usize;
    let n_items = geom.items.len();
    let l = light.direction.normalize();
    let mut row = Row {
        rgb: Vec::with_capacity(w),
        depth: Vec::with_capacity(w),
        semantic: Vec::with_capacity(w),
        instance: Vec::with_capacity(w),
        amodal: vec![vec![false; w]; n_items],
    };
    for x in 0..camera.image_width_px {
        let ray = Ray::new(camera.position, camera.pixel_direction(x, y));
        let mut nearest: Option<(usize, f64, Vec3)> = None;
        for k in 0..n_items {
            if let Some((t, n)) = geom.item_hit(k, &ray) {
                row.amodal[k][x as usize] = true;
                // strict comparison: on equal distance the lower instance id, seen first, wins
                if nearest.is_none_or(|(_, best, _)| t < best) {
                    nearest = Some((k, t, n));
                }
            }
        }
        let background = geom.background_hit(&ray);
        match (nearest, background) {
            (Some((k, t, n)), bg) if bg.is_none_or(|b| t <= b.0) => {
                let it = &geom.items[k];
                row.rgb.push(shade(it.albedo, it.brightness, n, ray.direction, light, l));
                row.depth.push(t as f32);
                row.semantic.push(it.semantic_id);
                row.instance.push(it.instance_id);
            }
            (_, Some((t, n, albedo))) => {
                row.rgb.push(shade(albedo, 1.0, n, ray.direction, light, l));
                row.depth.push(t as f32);
                row.semantic.push(0);
                row.instance.push(0);
            }
            (_, None) => {
                row.rgb.push([0, 0, 0]);
                row.depth.push(f32::INFINITY);
                row.semantic.push(0);
                row.instance.push(0);
            }
        }
    }
    row
}

/// Renders one view. Rows are traced in parallel and assembled in order, so the output does
/// not depend on the thread count.
pub fn render_view(geom: &SceneGeometry, camera: &CameraPose, light: &LightSpec) -> RenderBundle {
    let (w, h) = (camera.image_width_px, camera.image_height_px);
    let rows: Vec<Row> = (0..h)
        .into_par_iter()
        .map(|y| render_row(geom, camera, light, y))
        .collect();
    let n_items = geom.items.len();
    let mut rgb = Vec::with_capacity(w as usize * h as usize);
    let mut depth = Vec::with_capacity(rgb.capacity());
    let mut semantic = Vec::with_capacity(rgb.capacity());
    let mut instance = Vec::with_capacity(rgb.capacity());
    let mut amodal: Vec<Vec<bool>> = vec![Vec::with_capacity(rgb.capacity()); n_items];
    for row in rows {
        rgb.extend(row.rgb);
        depth.extend(row.depth);
        semantic.extend(row.semantic);
        instance.extend(row.instance);
        for (dst, src) in amodal.iter_mut().zip(row.amodal) {
            dst.extend(src);
        }
    }
    let instance = Raster { width: w, height: h, data: instance };
    let amodal: Vec<Raster<bool>> = amodal
        .into_iter()
        .map(|data| Raster { width: w, height: h, data })
        .collect();
    let items = geom
        .items
        .iter()
        .zip(&amodal)
        .map(|(it, am)| {
            let id = it.instance_id;
            ItemAnnotation {
                instance_id: id,
                asset_id: it.asset_id.clone(),
                semantic_class: it.semantic_class.clone(),
                semantic_id: it.semantic_id,
                bbox2d: bbox2d_where(&instance, |&v| v == id),
                bbox3d: it.bbox3d,
                brightness_factor: it.brightness,
                visible_pixel_count: instance.data.iter().filter(|&&v| v == id).count() as u64,
                amodal_pixel_count: am.data.iter().filter(|&&b| b).count() as u64,
            }
        })
        .collect();
    RenderBundle {
        rgb: Raster { width: w, height: h, data: rgb },
        depth: Raster { width: w, height: h, data: depth },
        semantic: Raster { width: w, height: h, data: semantic },
        instance,
        amodal,
        items,
    }
}

/// Each item's full silhouette, ignoring every other surface; instance-id order.
pub fn amodal_masks(geom: &SceneGeometry, camera: &CameraPose) -> Vec<Raster<bool>> {
    let (w, h) = (camera.image_width_px, camera.image_height_px);
    (0..geom.items.len())
        .map(|k| {
            let data = (0..h)
                .into_par_iter()
                .flat_map_iter(|y| {
                    (0..w).map(move |x| {
                        let ray = Ray::new(camera.position, camera.pixel_direction(x, y));
                        geom.item_hit(k, &ray).is_some()
                    })
                })
                .collect();
            Raster { width: w, height: h, data }
        })
        .collect()
}
