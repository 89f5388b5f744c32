//! Deterministic synthetic meal-scene generation.
//!
//! Scenes are composed either by dropping randomly chosen food items onto a plate and letting
//! them settle ([`plating::dynamics`]) or from user-authored placement rules
//! ([`plating::procedural`]). Each scene is photographed by a hemisphere camera rig
//! ([`camera`]) and rendered by a raycaster that emits RGB, depth, semantic/instance/amodal
//! masks and 2D/3D boxes ([`render`]). [`pipeline`] ties everything into an on-disk dataset
//! with nutrition totals, view subsampling and scene-level splits.
//!
//! The geometry core ([`geom`], the BVH and the camera model) is generic over [`Real`]; the
//! aliases below fix it to `f64` for the rest of the pipeline.

pub mod asset;
pub mod camera;
pub mod collide;
pub mod error;
pub mod geom;
pub mod nutrition;
pub mod pipeline;
pub mod plating;
pub mod render;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result, RuleError};
pub use scalar::Real;

pub type Vec3 = geom::Vec3<f64>;
pub type Quat = geom::Quat<f64>;
pub type Pose = geom::Pose<f64>;
pub type Aabb = geom::Aabb<f64>;
pub type Ray = geom::Ray<f64>;

/// Version string recorded in manifests.
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
