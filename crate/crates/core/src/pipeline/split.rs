//! View subsampling and scene-level train/val/test splits.

use super::manifest::Manifest;
use crate::camera::select_views;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded, stream};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Keeps `k` views of every scene, chosen with a seed derived from `(seed, scene_index)`.
pub fn subsample_views(manifest: &Manifest, k: usize, seed: u64) -> Result<Manifest> {
    let mut images = Vec::with_capacity(manifest.scenes.len() * k);
    for scene in &manifest.scenes {
        let mut views: Vec<_> = manifest.images_of(&scene.scene_id).collect();
        views.sort_by_key(|r| r.view_index);
        if views.len() < k {
            return Err(Error::Range(format!(
                "scene `{}` has {} views, fewer than {k}",
                scene.scene_id,
                views.len()
            )));
        }
        let mut rng = seeded(derive_seed(derive_seed(seed, scene.scene_index), stream::VIEWS));
        let keep = select_views(views.len(), k, &mut rng)?;
        images.extend(keep.into_iter().map(|i| views[i].clone()));
    }
    let mut out = manifest.clone();
    out.images = images;
    out.views_per_scene = k;
    out.provenance
        .push(format!("subsampled to {k} views per scene with seed {seed}"));
    out.seal();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub seed: u64,
    pub ratios: [f64; 3],
    pub counts: BTreeMap<Split, usize>,
    pub scenes: BTreeMap<String, Split>,
}

impl SplitAssignment {
    pub fn scenes_in(&self, split: Split) -> impl Iterator<Item = &str> {
        self.scenes
            .iter()
            .filter(move |(_, &s)| s == split)
            .map(|(id, _)| id.as_str())
    }
}

/// Integer apportionment of `total` by `ratios`: floors first, then the leftover units go to
/// the largest fractional parts, ties to the earlier entry.
pub fn largest_remainder(total: usize, ratios: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = ratios.iter().map(|r| r * total as f64).collect();
    // tolerate representation error such as 0.6 * 1000 = 599.9999999999999
    let mut counts: Vec<usize> = quotas.iter().map(|q| (q + 1e-9).floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    let frac = |i: usize| quotas[i] - counts[i] as f64;
    order.sort_by(|&a, &b| frac(b).total_cmp(&frac(a)).then(a.cmp(&b)));
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

fn check_ratios(ratios: &[f64; 3]) -> Result<()> {
    if ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::validation("ratios", "must be finite and non-negative"));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::validation("ratios", format!("must sum to 1, got {sum}")));
    }
    Ok(())
}

/// Shuffles scene ids with `seed` and cuts them into train/val/test blocks.
pub fn split_scenes(scene_ids: &[String], ratios: [f64; 3], seed: u64) -> Result<SplitAssignment> {
    check_ratios(&ratios)?;
    let nonzero = ratios.iter().filter(|&&r| r > 0.0).count();
    if scene_ids.len() < nonzero {
        return Err(Error::Range(format!(
            "{} scenes cannot fill {nonzero} non-empty splits",
            scene_ids.len()
        )));
    }
    let mut ids = scene_ids.to_vec();
    ids.sort();
    ids.dedup();
    if ids.len() != scene_ids.len() {
        return Err(Error::validation("scene_ids", "contains duplicates"));
    }
    ids.shuffle(&mut seeded(seed));
    let counts = largest_remainder(ids.len(), &ratios);
    let mut scenes = BTreeMap::new();
    let mut it = ids.into_iter();
    for (split, &n) in Split::ALL.iter().zip(&counts) {
        for id in it.by_ref().take(n) {
            scenes.insert(id, *split);
        }
    }
    Ok(SplitAssignment {
        seed,
        ratios,
        counts: Split::ALL.iter().copied().zip(counts).collect(),
        scenes,
    })
}

pub fn split(manifest: &Manifest, ratios: [f64; 3], seed: u64) -> Result<SplitAssignment> {
    let ids: Vec<String> = manifest.scenes.iter().map(|s| s.scene_id.clone()).collect();
    split_scenes(&ids, ratios, seed)
}
