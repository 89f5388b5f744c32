//! Per-scene nutrition totals and per-class statistics.

use crate::asset::{AssetLibrary, NutritionFacts};
use crate::error::{Error, Result};
use crate::plating::Scene;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Source of per-asset class and nutrition: the asset library, or the asset table stored in a
/// manifest.
pub trait ItemCatalog {
    fn lookup(&self, asset_id: &str) -> Option<(&str, NutritionFacts)>;
}

impl ItemCatalog for AssetLibrary {
    fn lookup(&self, asset_id: &str) -> Option<(&str, NutritionFacts)> {
        self.get(asset_id)
            .map(|a| (a.semantic_class.as_str(), a.nutrition))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub semantic_class: String,
    pub nutrition: NutritionFacts,
}

impl ItemCatalog for BTreeMap<String, CatalogEntry> {
    fn lookup(&self, asset_id: &str) -> Option<(&str, NutritionFacts)> {
        self.get(asset_id)
            .map(|e| (e.semantic_class.as_str(), e.nutrition))
    }
}

/// Catalog snapshot of a library, as embedded in manifests.
pub fn catalog_of(library: &AssetLibrary) -> BTreeMap<String, CatalogEntry> {
    library
        .assets()
        .iter()
        .map(|a| {
            (
                a.asset_id.clone(),
                CatalogEntry {
                    semantic_class: a.semantic_class.clone(),
                    nutrition: a.nutrition,
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ingredient {
    pub asset_id: String,
    pub semantic_class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneNutrition {
    pub totals: NutritionFacts,
    pub ingredient_count: usize,
    pub ingredients: Vec<Ingredient>,
}

/// Sums nutrition over a list of asset ids.
pub fn aggregate_items<'a, C, I>(asset_ids: I, catalog: &C) -> Result<SceneNutrition>
where
    C: ItemCatalog + ?Sized,
    I: IntoIterator<Item = &'a str>,
{
    let mut totals = NutritionFacts::default();
    let mut ingredients = Vec::new();
    for id in asset_ids {
        let (class, facts) = catalog
            .lookup(id)
            .ok_or_else(|| Error::Lookup(id.to_owned()))?;
        totals = totals + facts;
        ingredients.push(Ingredient {
            asset_id: id.to_owned(),
            semantic_class: class.to_owned(),
        });
    }
    Ok(SceneNutrition {
        totals,
        ingredient_count: ingredients.len(),
        ingredients,
    })
}

pub fn aggregate<C: ItemCatalog + ?Sized>(scene: &Scene, catalog: &C) -> Result<SceneNutrition> {
    aggregate_items(scene.items.iter().map(|i| i.asset_id.as_str()), catalog)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassStat {
    /// Scenes containing at least one instance.
    pub scene_frequency: usize,
    pub instance_count: usize,
    pub mean_mass_g: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub total_scenes: usize,
    pub classes: BTreeMap<String, ClassStat>,
}

impl ClassStats {
    pub fn total_instances(&self) -> usize {
        self.classes.values().map(|c| c.instance_count).sum()
    }
}

/// Exact counts and mean masses over scenes given as asset-id lists.
pub fn class_stats_by_ids<'a, C, S, I>(scenes: S, catalog: &C) -> Result<ClassStats>
where
    C: ItemCatalog + ?Sized,
    S: IntoIterator<Item = I>,
    I: IntoIterator<Item = &'a str>,
{
    let mut total_scenes = 0;
    // class -> (scenes, instances, mass sum)
    let mut acc: BTreeMap<String, (usize, usize, f64)> = BTreeMap::new();
    for scene in scenes {
        total_scenes += 1;
        let mut seen = BTreeSet::new();
        for id in scene {
            let (class, facts) = catalog
                .lookup(id)
                .ok_or_else(|| Error::Lookup(id.to_owned()))?;
            let e = acc.entry(class.to_owned()).or_default();
            if seen.insert(class.to_owned()) {
                e.0 += 1;
            }
            e.1 += 1;
            e.2 += facts.mass_g;
        }
    }
    let classes = acc
        .into_iter()
        .map(|(class, (scenes, n, mass))| {
            (
                class,
                ClassStat {
                    scene_frequency: scenes,
                    instance_count: n,
                    mean_mass_g: mass / n as f64,
                },
            )
        })
        .collect();
    Ok(ClassStats {
        total_scenes,
        classes,
    })
}

pub fn class_stats<C: ItemCatalog + ?Sized>(scenes: &[Scene], catalog: &C) -> Result<ClassStats> {
    class_stats_by_ids(
        scenes
            .iter()
            .map(|s| s.items.iter().map(|i| i.asset_id.as_str())),
        catalog,
    )
}

/// Reference daily values drawn as guide lines in nutrition histograms. Context only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyReference {
    pub calories_kcal: f64,
    pub carbs_g: f64,
    pub fat_g: f64,
    pub protein_g: f64,
}

pub const DAILY_REFERENCE: DailyReference = DailyReference {
    calories_kcal: 2000.0,
    carbs_g: 275.0,
    fat_g: 78.0,
    protein_g: 50.0,
};

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog() -> BTreeMap<String, CatalogEntry> {
        let entry = |class: &str, f: NutritionFacts| CatalogEntry {
            semantic_class: class.into(),
            nutrition: f,
        };
        BTreeMap::from([
            ("a".to_owned(), entry("apple", NutritionFacts::new(100.0, 150.0, 20.0, 10.0, 8.0))),
            ("b".to_owned(), entry("bread", NutritionFacts::new(50.0, 200.0, 30.0, 3.0, 4.0))),
        ])
    }

    #[test]
    fn hand_summed_pair() {
        let n = aggregate_items(["a", "b"], &catalog()).unwrap();
        assert_eq!(n.totals.calories_kcal, 350.0);
        assert_eq!(n.totals.fat_g, 13.0);
        assert_eq!(n.ingredient_count, 2);
    }

    #[test]
    fn empty_scene_has_zero_totals() {
        let n = aggregate_items(std::iter::empty(), &catalog()).unwrap();
        assert_eq!(n.totals, NutritionFacts::default());
        assert_eq!(n.ingredient_count, 0);
        assert!(matches!(aggregate_items(["zzz"], &catalog()), Err(Error::Lookup(_))));
    }

    #[test]
    fn two_apples_in_one_scene() {
        let s = class_stats_by_ids([vec!["a", "a"]], &catalog()).unwrap();
        let apple = s.classes["apple"];
        assert_eq!((apple.scene_frequency, apple.instance_count), (1, 2));
        assert_eq!(apple.mean_mass_g, 100.0);
        let none = class_stats_by_ids(Vec::<Vec<&str>>::new(), &catalog()).unwrap();
        assert!(none.classes.is_empty());
    }
}
