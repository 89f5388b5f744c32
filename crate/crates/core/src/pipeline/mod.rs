//! Dataset orchestration: generation, manifests, view subsampling, splits, statistics and
//! validation.

pub mod config;
pub mod generate;
pub mod manifest;
pub mod split;
pub mod stats;
pub mod validate;

pub use config::{AssetsConfig, OutputConfig, PipelineConfig, PlatingConfig, RenderConfig};
pub use generate::{generate_dataset, scene_id, view_id, SceneFile, SettleSummary, ViewAnnotations};
pub use manifest::{ImageFiles, ImageRecord, InstanceLegendEntry, Manifest, SceneRecord, MANIFEST_FILE};
pub use split::{largest_remainder, split, split_scenes, subsample_views, Split, SplitAssignment};
pub use stats::{stats, Histogram, StatsReport};
pub use validate::{validate, CheckCount, ValidationReport};
