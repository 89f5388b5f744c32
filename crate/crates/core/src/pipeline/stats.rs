//! Dataset statistics: nutrition histograms, ingredient counts and class frequencies.

use super::manifest::Manifest;
use crate::error::Result;
use crate::nutrition::{class_stats_by_ids, ClassStats, DailyReference, DAILY_REFERENCE};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Bins used for continuous quantities.
pub const HISTOGRAM_BINS: usize = 20;

/// Equal-width histogram; the last bin is closed on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize) -> Self {
        if values.is_empty() || bins == 0 {
            return Self {
                edges: Vec::new(),
                counts: Vec::new(),
            };
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            return Self {
                edges: vec![lo, hi],
                counts: vec![values.len()],
            };
        }
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| if i == bins { hi } else { lo + width * i as f64 }).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Self { edges, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub scene_count: usize,
    pub image_count: usize,
    pub total_items: usize,
    pub mean_items_per_scene: f64,
    /// Scenes containing each asset, averaged over the assets of the library.
    pub mean_scenes_per_food_item: f64,
    pub scenes_per_food_item: BTreeMap<String, usize>,
    pub calories_kcal: Histogram,
    pub carbs_g: Histogram,
    pub fat_g: Histogram,
    pub protein_g: Histogram,
    pub mass_g: Histogram,
    /// Ingredient count -> number of scenes.
    pub ingredient_count: BTreeMap<usize, usize>,
    pub class_stats: ClassStats,
    /// Guide lines for plots, not derived from the data.
    pub daily_reference: DailyReference,
}

pub fn stats(manifest: &Manifest) -> Result<StatsReport> {
    let scenes = &manifest.scenes;
    let column = |f: fn(&crate::asset::NutritionFacts) -> f64| -> Vec<f64> {
        scenes.iter().map(|s| f(&s.nutrition.totals)).collect()
    };
    let mut ingredient_count = BTreeMap::new();
    let mut scenes_per_food_item: BTreeMap<String, usize> =
        manifest.assets.keys().map(|k| (k.clone(), 0)).collect();
    for s in scenes {
        *ingredient_count.entry(s.nutrition.ingredient_count).or_insert(0) += 1;
        let distinct: BTreeSet<&str> = s
            .nutrition
            .ingredients
            .iter()
            .map(|i| i.asset_id.as_str())
            .collect();
        for id in distinct {
            *scenes_per_food_item.entry(id.to_owned()).or_insert(0) += 1;
        }
    }
    let total_items: usize = scenes.iter().map(|s| s.nutrition.ingredient_count).sum();
    let class_stats = class_stats_by_ids(
        scenes
            .iter()
            .map(|s| s.nutrition.ingredients.iter().map(|i| i.asset_id.as_str())),
        &manifest.assets,
    )?;
    let mean = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Ok(StatsReport {
        scene_count: scenes.len(),
        image_count: manifest.images.len(),
        total_items,
        mean_items_per_scene: mean(total_items, scenes.len()),
        mean_scenes_per_food_item: mean(scenes_per_food_item.values().sum(), scenes_per_food_item.len()),
        scenes_per_food_item,
        calories_kcal: Histogram::new(&column(|n| n.calories_kcal), HISTOGRAM_BINS),
        carbs_g: Histogram::new(&column(|n| n.carbs_g), HISTOGRAM_BINS),
        fat_g: Histogram::new(&column(|n| n.fat_g), HISTOGRAM_BINS),
        protein_g: Histogram::new(&column(|n| n.protein_g), HISTOGRAM_BINS),
        mass_g: Histogram::new(&column(|n| n.mass_g), HISTOGRAM_BINS),
        ingredient_count,
        class_stats,
        daily_reference: DAILY_REFERENCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_counts_every_value() {
        let h = Histogram::new(&[0.0, 1.0, 2.0, 10.0], 5);
        assert_eq!(h.edges.len(), 6);
        assert_eq!(h.counts, vec![2, 1, 0, 0, 1]);
        let flat = Histogram::new(&[3.0, 3.0], 5);
        assert_eq!(flat.counts, vec![2]);
        assert_eq!(Histogram::new(&[], 5).total(), 0);
    }
}
