//! The dataset manifest: config snapshot, legends, scene and image records.

use super::config::PipelineConfig;
use crate::camera::CameraPose;
use crate::error::{Error, Result};
use crate::nutrition::{CatalogEntry, SceneNutrition};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceLegendEntry {
    pub asset_id: String,
    pub semantic_class: String,
    pub semantic_id: u16,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub scene_id: String,
    pub scene_index: u64,
    /// Seed of the attempt that produced the scene.
    pub seed: u64,
    pub attempts: u32,
    pub scene_path: String,
    pub nutrition_path: String,
    pub nutrition: SceneNutrition,
    /// Instance id -> item.
    pub instances: BTreeMap<u16, InstanceLegendEntry>,
    /// Number of rig views the scene was photographed from.
    pub rig_views: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageFiles {
    pub rgb: String,
    pub depth: String,
    pub semantic: String,
    pub instance: String,
    pub annotations: String,
    /// Instance id -> amodal mask.
    pub amodal: BTreeMap<u16, String>,
}

impl ImageFiles {
    pub fn all(&self) -> impl Iterator<Item = &String> {
        [&self.rgb, &self.depth, &self.semantic, &self.instance, &self.annotations]
            .into_iter()
            .chain(self.amodal.values())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub scene_id: String,
    pub view_id: String,
    pub view_index: usize,
    pub camera: CameraPose,
    pub width: u32,
    pub height: u32,
    pub files: ImageFiles,
    /// Relative path -> sha256 of the file contents.
    pub file_hashes: BTreeMap<String, String>,
    pub nutrition_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub master_seed: u64,
    pub config: PipelineConfig,
    /// Semantic id -> class name; 0 is background.
    pub semantic_legend: BTreeMap<u16, String>,
    pub assets: BTreeMap<String, CatalogEntry>,
    pub views_per_scene: usize,
    pub scenes: Vec<SceneRecord>,
    pub images: Vec<ImageRecord>,
    /// Derivation notes, e.g. view subsampling.
    pub provenance: Vec<String>,
    /// Directory the relative paths resolve against when it is not the manifest's own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_root: Option<PathBuf>,
    /// sha256 of the manifest serialised with this field empty.
    pub content_hash: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn compute_hash(&self) -> String {
        let mut copy = self.clone();
        copy.content_hash.clear();
        let bytes = serde_json::to_vec(&copy).expect("manifest serialises");
        sha256_hex(&bytes)
    }

    pub fn seal(&mut self) {
        self.content_hash = self.compute_hash();
    }

    pub fn read(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    /// Directory that relative record paths resolve against, given where the manifest was read.
    pub fn root_for(&self, manifest_path: &Path) -> PathBuf {
        match &self.dataset_root {
            Some(root) => root.clone(),
            None => manifest_path.parent().unwrap_or(Path::new(".")).to_path_buf(),
        }
    }

    pub fn images_of<'a>(&'a self, scene_id: &'a str) -> impl Iterator<Item = &'a ImageRecord> + 'a {
        self.images.iter().filter(move |r| r.scene_id == scene_id)
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}
