//! Food assets: meshes, collision hulls and nutrition facts.

mod library;
mod obj;
mod primitive;

pub use library::{default_primitive_library, default_primitive_specs, sample_items, AssetLibrary, MIN_SCENE_ITEMS};
pub use obj::{parse_obj, read_obj, TriangleMesh};
pub use primitive::{make_primitive_asset, PrimitiveShape, PrimitiveSpec};

use crate::error::{Error, Result};
use crate::{Aabb, Vec3};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Tolerance for hull/box containment checks.
pub const HULL_TOLERANCE_M: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NutritionFacts {
    pub mass_g: f64,
    pub calories_kcal: f64,
    pub carbs_g: f64,
    pub fat_g: f64,
    pub protein_g: f64,
}

impl NutritionFacts {
    pub const FIELDS: [&'static str; 5] = ["mass_g", "calories_kcal", "carbs_g", "fat_g", "protein_g"];

    pub fn new(mass_g: f64, calories_kcal: f64, carbs_g: f64, fat_g: f64, protein_g: f64) -> Self {
        Self {
            mass_g,
            calories_kcal,
            carbs_g,
            fat_g,
            protein_g,
        }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [
            self.mass_g,
            self.calories_kcal,
            self.carbs_g,
            self.fat_g,
            self.protein_g,
        ]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4])
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in Self::FIELDS.iter().zip(self.to_array()) {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::validation(
                    *name,
                    format!("must be finite and non-negative, got {v}"),
                ));
            }
        }
        Ok(())
    }
}

impl std::ops::Add for NutritionFacts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (a, b) = (self.to_array(), o.to_array());
        Self::from_array(std::array::from_fn(|i| a[i] + b[i]))
    }
}

/// Convex point set covering a mesh, with outward-wound faces.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexHull {
    pub points: Vec<Vec3>,
    /// Empty for flat meshes, where the hull degenerates to the point set itself.
    pub faces: Vec<[u32; 3]>,
}

impl ConvexHull {
    pub fn of_points(points: &[Vec3]) -> Self {
        match crate::collide::convex_hull(points) {
            Some((points, faces)) => Self { points, faces },
            None => {
                let mut pts = points.to_vec();
                pts.sort_by(|a, b| {
                    a.to_array()
                        .partial_cmp(&b.to_array())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
                pts.dedup();
                Self {
                    points: pts,
                    faces: Vec::new(),
                }
            }
        }
    }

    /// Whether `p` lies inside or on the hull within `tol`.
    pub fn contains(&self, p: Vec3, tol: f64) -> bool {
        if self.faces.is_empty() {
            return self.points.iter().any(|q| (*q - p).norm() <= tol);
        }
        self.faces.iter().all(|f| {
            let a = self.points[f[0] as usize];
            let b = self.points[f[1] as usize];
            let c = self.points[f[2] as usize];
            match (b - a).cross(c - a).try_normalize() {
                Some(n) => (p - a).dot(n) <= tol,
                None => true,
            }
        })
    }

    pub fn centroid(&self) -> Vec3 {
        let n = self.points.len().max(1) as f64;
        self.points.iter().fold(Vec3::zero(), |acc, &p| acc + p) / n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoodAsset {
    pub asset_id: String,
    pub display_name: String,
    pub semantic_class: String,
    pub mesh: TriangleMesh,
    pub albedo: [f64; 3],
    pub collision_hull: ConvexHull,
    pub aabb_object: Aabb,
    pub nutrition: NutritionFacts,
}

impl FoodAsset {
    /// Builds an asset from a mesh, computing the bounding box and collision hull.
    pub fn from_mesh(
        asset_id: impl Into<String>,
        display_name: impl Into<String>,
        semantic_class: impl Into<String>,
        mesh: TriangleMesh,
        albedo: [f64; 3],
        nutrition: NutritionFacts,
    ) -> Result<Self> {
        let aabb_object = Aabb::from_points(mesh.positions.iter().copied());
        let collision_hull = ConvexHull::of_points(&mesh.positions);
        let asset = Self {
            asset_id: asset_id.into(),
            display_name: display_name.into(),
            semantic_class: semantic_class.into(),
            mesh,
            albedo,
            collision_hull,
            aabb_object,
            nutrition,
        };
        asset.validate()?;
        Ok(asset)
    }

    pub fn validate(&self) -> Result<()> {
        if self.asset_id.is_empty() {
            return Err(Error::validation("asset_id", "must be non-empty"));
        }
        if self.semantic_class.is_empty() {
            return Err(Error::validation("semantic_class", "must be non-empty"));
        }
        if self.mesh.triangles.is_empty() {
            return Err(Error::validation("mesh", "needs at least one triangle"));
        }
        if let Some(p) = self.mesh.positions.iter().find(|p| !p.is_finite()) {
            return Err(Error::validation("mesh", format!("non-finite vertex {p:?}")));
        }
        if self.albedo.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::validation("albedo", "components must lie in [0, 1]"));
        }
        self.nutrition.validate()?;
        for p in &self.mesh.positions {
            if !self.aabb_object.contains(*p, 0.0) {
                return Err(Error::validation("aabb_object", "does not contain every vertex"));
            }
            if !self.collision_hull.contains(*p, HULL_TOLERANCE_M) {
                return Err(Error::validation(
                    "collision_hull",
                    format!("vertex {p:?} lies outside the hull"),
                ));
            }
        }
        Ok(())
    }
}

/// Metadata sidecar (`meta.json`) as written by asset authors.
#[derive(Debug, Clone, Deserialize)]
struct RawMeta {
    asset_id: Option<String>,
    display_name: Option<String>,
    semantic_class: Option<String>,
    albedo: Option<[f64; 3]>,
    scale: Option<f64>,
    nutrition: Option<RawNutrition>,
}

#[derive(Debug, Clone, Deserialize)]
struct RawNutrition {
    mass_g: Option<f64>,
    calories_kcal: Option<f64>,
    carbs_g: Option<f64>,
    fat_g: Option<f64>,
    protein_g: Option<f64>,
}

const META_KEYS: [&str; 6] = [
    "asset_id",
    "display_name",
    "semantic_class",
    "albedo",
    "scale",
    "nutrition",
];

fn warn_unknown_keys(value: &serde_json::Value, known: &[&str], ctx: &str, path: &Path) {
    if let Some(obj) = value.as_object() {
        for key in obj.keys().filter(|k| !known.contains(&k.as_str())) {
            log::warn!("{}: ignoring unknown {ctx} key `{key}`", path.display());
        }
    }
}

/// Loads one asset from an OBJ mesh and its JSON metadata sidecar.
pub fn load_asset(mesh_file: &Path, metadata_file: &Path) -> Result<FoodAsset> {
    let mut mesh = read_obj(mesh_file)?;
    let text = std::fs::read_to_string(metadata_file).map_err(|e| Error::io(metadata_file, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: metadata_file.into(),
        source,
    })?;
    warn_unknown_keys(&value, &META_KEYS, "metadata", metadata_file);
    if let Some(n) = value.get("nutrition") {
        warn_unknown_keys(n, &NutritionFacts::FIELDS, "nutrition", metadata_file);
    }
    let raw: RawMeta = serde_json::from_value(value).map_err(|source| Error::Json {
        path: metadata_file.into(),
        source,
    })?;

    let asset_id = raw.asset_id.ok_or_else(|| Error::validation("asset_id", "missing"))?;
    let semantic_class = raw
        .semantic_class
        .ok_or_else(|| Error::validation("semantic_class", "missing"))?;
    let albedo = raw.albedo.ok_or_else(|| Error::validation("albedo", "missing"))?;
    let n = raw.nutrition.ok_or_else(|| Error::validation("nutrition", "missing"))?;
    let field = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::validation(name, "missing"));
    let nutrition = NutritionFacts::new(
        field(n.mass_g, "mass_g")?,
        field(n.calories_kcal, "calories_kcal")?,
        field(n.carbs_g, "carbs_g")?,
        field(n.fat_g, "fat_g")?,
        field(n.protein_g, "protein_g")?,
    );
    nutrition.validate()?;

    if let Some(scale) = raw.scale {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::validation("scale", format!("must be positive, got {scale}")));
        }
        for p in &mut mesh.positions {
            *p *= scale;
        }
    }
    let display_name = raw.display_name.unwrap_or_else(|| asset_id.clone());
    FoodAsset::from_mesh(asset_id, display_name, semantic_class, mesh, albedo, nutrition)
}
