use super::{load_asset, make_primitive_asset, FoodAsset, NutritionFacts, PrimitiveShape, PrimitiveSpec};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use rand::Rng;
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

/// Lower bound of the item-count draw in [`sample_items`].
pub const MIN_SCENE_ITEMS: usize = 3;

/// Immutable, ordered collection of assets with a class index.
#[derive(Debug, Clone, PartialEq)]
pub struct AssetLibrary {
    assets: Vec<FoodAsset>,
    by_id: HashMap<String, usize>,
    class_index: BTreeMap<String, Vec<String>>,
}

impl AssetLibrary {
    pub fn new(assets: Vec<FoodAsset>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(assets.len());
        let mut class_index: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (i, a) in assets.iter().enumerate() {
            a.validate()?;
            if by_id.insert(a.asset_id.clone(), i).is_some() {
                return Err(Error::validation(
                    "asset_id",
                    format!("duplicate asset id `{}`", a.asset_id),
                ));
            }
            class_index
                .entry(a.semantic_class.clone())
                .or_default()
                .push(a.asset_id.clone());
        }
        Ok(Self {
            assets,
            by_id,
            class_index,
        })
    }

    /// Loads every `<dir>/<asset>/{mesh.obj, meta.json}` pair, in lexicographic directory order.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut subdirs: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        subdirs.sort();
        let assets = subdirs
            .iter()
            .filter(|d| d.join("mesh.obj").is_file())
            .map(|d| load_asset(&d.join("mesh.obj"), &d.join("meta.json")))
            .collect::<Result<Vec<_>>>()?;
        if assets.is_empty() {
            return Err(Error::Config(format!("no assets found under {}", dir.display())));
        }
        Self::new(assets)
    }

    pub fn from_primitives(specs: &[PrimitiveSpec], seed: u64) -> Result<Self> {
        let assets = specs
            .iter()
            .enumerate()
            .map(|(i, s)| make_primitive_asset(s, crate::rng::derive_seed(seed, i as u64)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(assets)
    }

    pub fn assets(&self) -> &[FoodAsset] {
        &self.assets
    }

    pub fn len(&self) -> usize {
        self.assets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty()
    }

    pub fn get(&self, asset_id: &str) -> Option<&FoodAsset> {
        self.by_id.get(asset_id).map(|&i| &self.assets[i])
    }

    pub fn require(&self, asset_id: &str) -> Result<&FoodAsset> {
        self.get(asset_id).ok_or_else(|| Error::Lookup(asset_id.to_string()))
    }

    pub fn class_index(&self) -> &BTreeMap<String, Vec<String>> {
        &self.class_index
    }

    /// Semantic classes in sorted order.
    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.class_index.keys().map(String::as_str)
    }

    /// Asset ids matching a selector: an exact asset id, otherwise every asset of that class.
    pub fn resolve(&self, selector: &str) -> Vec<&FoodAsset> {
        if let Some(a) = self.get(selector) {
            return vec![a];
        }
        self.class_index
            .get(selector)
            .map(|ids| ids.iter().filter_map(|id| self.get(id)).collect())
            .unwrap_or_default()
    }
}

/// Draws between 1 and `max_items` distinct asset ids.
///
/// The count is uniform over `MIN_SCENE_ITEMS..=cap` where `cap = min(max_items, library size)`,
/// with the floor lowered to `cap` for small libraries or caps.
pub fn sample_items(library: &AssetLibrary, max_items: usize, rng: &mut SeededRng) -> Result<Vec<String>> {
    if library.is_empty() {
        return Err(Error::Config("cannot sample from an empty asset library".into()));
    }
    if max_items == 0 {
        return Err(Error::Config("max_items must be at least 1".into()));
    }
    let cap = max_items.min(library.len());
    let floor = MIN_SCENE_ITEMS.min(cap);
    let count = rng.gen_range(floor..=cap);
    let picks = rand::seq::index::sample(rng, library.len(), count);
    Ok(picks
        .into_iter()
        .map(|i| library.assets[i].asset_id.clone())
        .collect())
}

fn prim(id: &str, class: &str, shape: PrimitiveShape, n: [f64; 5], albedo: [f64; 3]) -> PrimitiveSpec {
    PrimitiveSpec {
        asset_id: id.into(),
        display_name: None,
        semantic_class: class.into(),
        shape,
        nutrition: NutritionFacts::from_array(n),
        albedo: Some(albedo),
    }
}

/// The built-in desk-scale library specs: 8 primitive assets in 4 classes.
pub fn default_primitive_specs() -> Vec<PrimitiveSpec> {
    use PrimitiveShape::*;
    vec![
        prim("apple_small", "apple", Sphere { radius_m: 0.026 }, [70.0, 36.0, 9.7, 0.1, 0.2], [0.80, 0.15, 0.12]),
        prim("apple_large", "apple", Sphere { radius_m: 0.032 }, [130.0, 68.0, 18.0, 0.2, 0.3], [0.70, 0.80, 0.20]),
        prim("bread_slice", "bread", Box { extents_m: [0.055, 0.05, 0.014] }, [28.0, 74.0, 13.8, 1.0, 2.6], [0.85, 0.68, 0.42]),
        prim("bread_roll", "bread", Ellipsoid { semi_axes_m: [0.034, 0.026, 0.018] }, [45.0, 130.0, 24.0, 2.0, 4.3], [0.78, 0.52, 0.25]),
        prim("carrot_chunk", "carrot", Cylinder { radius_m: 0.011, height_m: 0.036 }, [15.0, 6.0, 1.4, 0.0, 0.1], [0.95, 0.50, 0.10]),
        prim("carrot_coin", "carrot", Cylinder { radius_m: 0.015, height_m: 0.008 }, [6.0, 2.5, 0.6, 0.0, 0.1], [0.98, 0.58, 0.18]),
        prim("meatball", "meat", Sphere { radius_m: 0.017 }, [28.0, 55.0, 2.0, 3.5, 4.0], [0.45, 0.26, 0.16]),
        prim("steak_piece", "meat", Box { extents_m: [0.048, 0.034, 0.012] }, [40.0, 108.0, 0.0, 7.0, 11.0], [0.55, 0.22, 0.18]),
    ]
}

pub fn default_primitive_library() -> AssetLibrary {
    AssetLibrary::from_primitives(&default_primitive_specs(), 0)
        .expect("built-in primitive specs are valid")
}
