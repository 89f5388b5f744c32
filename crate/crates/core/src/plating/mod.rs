//! Scene composition: physics-based dynamic plating and rule-based procedural plating.

pub mod dynamics;
pub mod procedural;
mod solver;

pub use dynamics::{
    compose_dynamic_scene, plan_drops, simulate, DropEntry, DropPlan, RejectReason, RejectedItem,
    RigidState, SettleReport, SettledItem, SimParams,
};
pub use procedural::{instantiate, parse_rules, parse_rules_bytes, serialize_rules, Jitter, PlatingRule, PlatingRuleSet, RuleGeometry};

use crate::error::{Error, Result};
use crate::{Pose, Vec3};
use serde::{Deserialize, Serialize};

/// Plate geometry. The table is the plane `z = center.z`; the plate is a disk of `radius_m`
/// whose food-bearing surface is at `top_z_m`, bounded by a rim of `rim_height_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlateSpec {
    #[serde(default = "PlateSpec::default_center")]
    pub center: Vec3,
    #[serde(default = "PlateSpec::default_radius")]
    pub radius_m: f64,
    #[serde(default = "PlateSpec::default_rim_height")]
    pub rim_height_m: f64,
    #[serde(default = "PlateSpec::default_top_z")]
    pub top_z_m: f64,
    #[serde(default = "PlateSpec::default_segments")]
    pub segment_count: u32,
}

/// Radial thickness of the rim wall.
pub const RIM_WIDTH_M: f64 = 0.006;

impl PlateSpec {
    fn default_center() -> Vec3 {
        Vec3::zero()
    }
    fn default_radius() -> f64 {
        0.12
    }
    fn default_rim_height() -> f64 {
        0.015
    }
    fn default_top_z() -> f64 {
        0.02
    }
    fn default_segments() -> u32 {
        8
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() {
            return Err(Error::validation("plate.center", "must be finite"));
        }
        if !(self.radius_m.is_finite() && self.radius_m > RIM_WIDTH_M) {
            return Err(Error::validation(
                "plate.radius_m",
                format!("must exceed the rim width {RIM_WIDTH_M}, got {}", self.radius_m),
            ));
        }
        if !(self.rim_height_m.is_finite() && self.rim_height_m >= 0.0) {
            return Err(Error::validation("plate.rim_height_m", "must be non-negative"));
        }
        if !(self.top_z_m.is_finite() && self.top_z_m > self.center.z) {
            return Err(Error::validation("plate.top_z_m", "must lie above the table plane"));
        }
        if self.segment_count == 0 {
            return Err(Error::validation("plate.segment_count", "must be at least 1"));
        }
        Ok(())
    }

    pub fn table_z(&self) -> f64 {
        self.center.z
    }

    /// Centre of the food-bearing surface; cameras look here.
    pub fn surface_center(&self) -> Vec3 {
        Vec3::new(self.center.x, self.center.y, self.top_z_m)
    }

    /// Horizontal distance of `p` from the plate axis.
    pub fn radial_distance(&self, p: Vec3) -> f64 {
        ((p.x - self.center.x).powi(2) + (p.y - self.center.y).powi(2)).sqrt()
    }

    /// Distance from `p` to the plate solid: the disk below `top_z_m` plus the rim annulus.
    pub fn distance_to_solid(&self, p: Vec3) -> f64 {
        let r = self.radial_distance(p);
        let disk = (r - self.radius_m).max(0.0).hypot((p.z - self.top_z_m).max(0.0));
        if self.rim_height_m <= 0.0 {
            return disk;
        }
        let dr = (self.radius_m - RIM_WIDTH_M - r).max(r - self.radius_m).max(0.0);
        let dz = (p.z - self.top_z_m - self.rim_height_m).max(self.top_z_m - p.z).max(0.0);
        disk.min(dr.hypot(dz))
    }
}

impl Default for PlateSpec {
    fn default() -> Self {
        Self {
            center: Self::default_center(),
            radius_m: Self::default_radius(),
            rim_height_m: Self::default_rim_height(),
            top_z_m: Self::default_top_z(),
            segment_count: Self::default_segments(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlatingMode {
    Dynamic,
    Procedural,
}

/// One food item placed in a scene. `pose` maps asset object space to world space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedItem {
    /// 1-based; 0 is reserved for background in instance masks.
    pub instance_id: u16,
    pub asset_id: String,
    pub pose: Pose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub mode: PlatingMode,
    pub plate: PlateSpec,
    pub items: Vec<PlacedItem>,
    /// Seed that produced this composition.
    pub seed: u64,
}

impl Scene {
    pub fn new(mode: PlatingMode, plate: PlateSpec, seed: u64) -> Self {
        Self {
            mode,
            plate,
            items: Vec::new(),
            seed,
        }
    }

    /// Appends an item with the next instance id.
    pub fn push(&mut self, asset_id: impl Into<String>, pose: Pose) {
        let instance_id = self.items.len() as u16 + 1;
        self.items.push(PlacedItem {
            instance_id,
            asset_id: asset_id.into(),
            pose,
        });
    }

    /// Checks poses are finite with unit quaternions and every asset resolves.
    pub fn validate(&self, library: &crate::asset::AssetLibrary) -> Result<()> {
        self.plate.validate()?;
        for item in &self.items {
            library.require(&item.asset_id)?;
            let q = item.pose.orientation;
            if !item.pose.position.is_finite() || !q.is_finite() || (q.norm() - 1.0).abs() > 1e-6 {
                return Err(Error::validation(
                    "scene.items.pose",
                    format!("instance {} has a non-finite or non-unit pose", item.instance_id),
                ));
            }
        }
        Ok(())
    }
}
