//! Dynamic plating: segment-planned drops, settling simulation and rejection of misplaced items.

use super::solver::{Body, World};
use super::{PlateSpec, PlatingMode, Scene};
use crate::asset::{sample_items, AssetLibrary};
use crate::collide::ConvexShape;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded, stream, SeededRng};
use crate::{Pose, Quat, Vec3};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Drop points are sampled between these fractions of the plate radius.
pub const DROP_ANNULUS_INNER: f64 = 0.2;
pub const DROP_ANNULUS_OUTER: f64 = 0.55;
/// Fraction of each segment's angular width kept clear at both edges.
pub const SEGMENT_ANGULAR_MARGIN: f64 = 0.1;
/// Rejected scenes are regenerated at most this many times.
pub const MAX_COMPOSE_RETRIES: u32 = 3;
/// Largest gap allowed between a settled item's lowest point and whatever holds it up.
pub const SUPPORT_EPS_M: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimParams {
    pub gravity: Vec3,
    pub timestep_s: f64,
    pub friction_coeff: f64,
    pub restitution: f64,
    pub settle_speed_eps: f64,
    pub settle_hold_s: f64,
    pub max_sim_s: f64,
    /// Height of the item centre above the plate surface at release.
    pub drop_height_range_m: [f64; 2],
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            gravity: Vec3::new(0.0, 0.0, -9.81),
            timestep_s: 1.0 / 240.0,
            friction_coeff: 0.5,
            restitution: 0.1,
            settle_speed_eps: 0.01,
            settle_hold_s: 0.5,
            max_sim_s: 10.0,
            drop_height_range_m: [0.10, 0.30],
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::validation(name, format!("must be positive, got {v}")))
            }
        };
        positive("sim.timestep_s", self.timestep_s)?;
        positive("sim.settle_hold_s", self.settle_hold_s)?;
        positive("sim.settle_speed_eps", self.settle_speed_eps)?;
        if !(self.max_sim_s >= self.settle_hold_s) {
            return Err(Error::validation("sim.max_sim_s", "must be at least settle_hold_s"));
        }
        if !(self.friction_coeff >= 0.0 && (0.0..=1.0).contains(&self.restitution)) {
            return Err(Error::validation(
                "sim.friction_coeff",
                "friction must be >= 0 and restitution within [0, 1]",
            ));
        }
        let [lo, hi] = self.drop_height_range_m;
        if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::validation("sim.drop_height_range_m", "need 0 <= min <= max"));
        }
        if !self.gravity.is_finite() {
            return Err(Error::validation("sim.gravity", "must be finite"));
        }
        Ok(())
    }
}

/// Rigid state of an item's object frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidState {
    pub position: Vec3,
    pub orientation: Quat,
    pub linear_velocity: Vec3,
    pub angular_velocity: Vec3,
}

impl RigidState {
    pub fn pose(&self) -> Pose {
        Pose::new(self.position, self.orientation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropEntry {
    pub asset_id: String,
    pub segment_index: u32,
    /// World xy over the plate.
    pub drop_point: [f64; 2],
    pub drop_height_m: f64,
    pub initial_orientation: Quat,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DropPlan {
    pub entries: Vec<DropEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    OffPlate,
    Unsettled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettledItem {
    pub asset_id: String,
    pub state: RigidState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedItem {
    pub asset_id: String,
    pub reason: RejectReason,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SettleReport {
    pub settled: Vec<SettledItem>,
    pub rejected: Vec<RejectedItem>,
    pub steps_simulated: u64,
    /// Total kinetic energy when the first contact of the run appeared.
    pub first_contact_energy_j: Option<f64>,
    pub final_energy_j: f64,
}

/// Angular bounds `[start, end)` of a plate segment, in radians from +x.
pub fn segment_bounds(segment: u32, segment_count: u32) -> (f64, f64) {
    let width = TAU / segment_count as f64;
    (segment as f64 * width, (segment + 1) as f64 * width)
}

/// Uniformly distributed rotation (Shoemake's subgroup algorithm).
pub fn random_rotation(rng: &mut SeededRng) -> Quat {
    let u1: f64 = rng.gen();
    let u2: f64 = rng.gen::<f64>() * TAU;
    let u3: f64 = rng.gen::<f64>() * TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    Quat::new(b * u3.cos(), a * u2.sin(), a * u2.cos(), b * u3.sin()).normalize()
}

/// Assigns each item its own angular plate segment and samples a release pose inside it.
pub fn plan_drops(items: &[String], plate: &PlateSpec, params: &SimParams, rng: &mut SeededRng) -> Result<DropPlan> {
    plate.validate()?;
    params.validate()?;
    let segments = plate.segment_count as usize;
    if items.len() > segments {
        return Err(Error::Planning(format!(
            "{} items need at least as many plate segments, plate has {segments}",
            items.len()
        )));
    }
    let picks = rand::seq::index::sample(rng, segments, items.len());
    let [h_lo, h_hi] = params.drop_height_range_m;
    let r_in = DROP_ANNULUS_INNER * plate.radius_m;
    let r_out = DROP_ANNULUS_OUTER * plate.radius_m;
    let entries = items
        .iter()
        .zip(picks)
        .map(|(id, seg)| {
            let (a0, a1) = segment_bounds(seg as u32, plate.segment_count);
            let margin = SEGMENT_ANGULAR_MARGIN * (a1 - a0);
            let angle = rng.gen_range(a0 + margin..a1 - margin);
            // uniform by area over the annulus
            let radius = rng.gen_range(r_in * r_in..=r_out * r_out).sqrt();
            let drop_height_m = if h_hi > h_lo { rng.gen_range(h_lo..=h_hi) } else { h_lo };
            DropEntry {
                asset_id: id.clone(),
                segment_index: seg as u32,
                drop_point: [
                    plate.center.x + radius * angle.cos(),
                    plate.center.y + radius * angle.sin(),
                ],
                drop_height_m,
                initial_orientation: random_rotation(rng),
            }
        })
        .collect();
    Ok(DropPlan { entries })
}

/// Release height of an item's mass centre: `drop_height` above the plate surface, lifted if
/// needed so the item starts fully clear of the rim.
pub(crate) fn drop_center_z(plate: &PlateSpec, drop_height: f64, bound_radius: f64) -> f64 {
    let clear = plate.top_z_m + plate.rim_height_m.max(0.0) + bound_radius + 1e-3;
    (plate.top_z_m + drop_height).max(clear)
}

/// Drops every planned item and steps the world until all bodies rest or time runs out.
pub fn simulate(plan: &DropPlan, plate: &PlateSpec, library: &AssetLibrary, params: &SimParams) -> Result<SettleReport> {
    plate.validate()?;
    params.validate()?;
    let mut bodies = Vec::with_capacity(plan.entries.len());
    for e in &plan.entries {
        let asset = library.require(&e.asset_id)?;
        let mut body = Body::new(asset)?;
        body.q = e.initial_orientation.normalize();
        body.x = Vec3::new(
            e.drop_point[0],
            e.drop_point[1],
            drop_center_z(plate, e.drop_height_m, body.bound_radius),
        );
        bodies.push(body);
    }
    if bodies.is_empty() {
        return Ok(SettleReport::default());
    }

    let mut world = World::new(bodies, plate, params);
    let max_steps = (params.max_sim_s / params.timestep_s).ceil() as u64;
    while world.step_index < max_steps && !world.all_settled() {
        world.step()?;
    }

    let mut report = SettleReport {
        steps_simulated: world.step_index,
        first_contact_energy_j: world.first_contact_energy,
        final_energy_j: world.total_kinetic_energy(),
        ..Default::default()
    };
    for body in &world.bodies {
        let reason = if body.still_time < params.settle_hold_s {
            Some(RejectReason::Unsettled)
        } else if plate.radial_distance(body.hull_centroid()) > plate.radius_m {
            Some(RejectReason::OffPlate)
        } else {
            None
        };
        match reason {
            Some(reason) => report.rejected.push(RejectedItem {
                asset_id: body.key.clone(),
                reason,
            }),
            None => {
                let pose = body.object_pose();
                report.settled.push(SettledItem {
                    asset_id: body.key.clone(),
                    state: RigidState {
                        position: pose.position,
                        orientation: pose.orientation,
                        linear_velocity: body.v,
                        angular_velocity: body.w,
                    },
                });
            }
        }
    }
    Ok(report)
}

/// Samples items, drops them and keeps the settled ones. Scenes where nothing settles, or where
/// an item is held up only by its sides (see [`unsupported_items`]), are regenerated from a
/// derived seed, up to [`MAX_COMPOSE_RETRIES`] times.
pub fn compose_dynamic_scene(
    library: &AssetLibrary,
    plate: &PlateSpec,
    params: &SimParams,
    max_items: usize,
    seed: u64,
) -> Result<Scene> {
    compose_dynamic_scene_with_report(library, plate, params, max_items, seed).map(|(s, _, _)| s)
}

/// As [`compose_dynamic_scene`], also returning the accepted plan and its settle report.
pub fn compose_dynamic_scene_with_report(
    library: &AssetLibrary,
    plate: &PlateSpec,
    params: &SimParams,
    max_items: usize,
    seed: u64,
) -> Result<(Scene, DropPlan, SettleReport)> {
    if library.is_empty() {
        return Err(Error::Config("cannot compose a scene from an empty library".into()));
    }
    for attempt in 0..=MAX_COMPOSE_RETRIES {
        let attempt_seed = if attempt == 0 {
            seed
        } else {
            derive_seed(derive_seed(seed, stream::RETRY), attempt as u64)
        };
        let mut rng = seeded(attempt_seed);
        let cap = max_items.min(plate.segment_count as usize);
        let items = sample_items(library, cap, &mut rng)?;
        let plan = plan_drops(&items, plate, params, &mut rng)?;
        let report = simulate(&plan, plate, library, params)?;
        if report.settled.is_empty() {
            log::warn!("seed {attempt_seed}: no item settled, regenerating (attempt {attempt})");
            continue;
        }
        let mut scene = Scene::new(PlatingMode::Dynamic, *plate, attempt_seed);
        for s in &report.settled {
            scene.push(s.asset_id.clone(), s.state.pose());
        }
        let unsupported = unsupported_items(&scene, library)?;
        if !unsupported.is_empty() {
            log::warn!("seed {attempt_seed}: items {unsupported:?} wedged off their lowest point, regenerating (attempt {attempt})");
            continue;
        }
        return Ok((scene, plan, report));
    }
    Err(Error::Generation(format!(
        "no acceptable scene after {} attempts from seed {seed}",
        MAX_COMPOSE_RETRIES + 1
    )))
}

/// Instance ids of items none of whose lowest hull vertices lies within [`SUPPORT_EPS_M`] of the
/// plate or of another item's hull. A body resting on a face has several vertices at the minimum
/// height up to noise, so every vertex within the tolerance of the minimum counts as lowest.
pub fn unsupported_items(scene: &Scene, library: &AssetLibrary) -> Result<Vec<u16>> {
    let mut shapes = Vec::with_capacity(scene.items.len());
    for item in &scene.items {
        let hull = &library.require(&item.asset_id)?.collision_hull;
        shapes.push(ConvexShape::new(&hull.points));
    }
    let mut bad = Vec::new();
    for (i, item) in scene.items.iter().enumerate() {
        let hull = &library.require(&item.asset_id)?.collision_hull;
        let world: Vec<Vec3> = hull.points.iter().map(|&p| item.pose.transform_point(p)).collect();
        let z_min = world.iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
        let supported = world.iter().filter(|p| p.z <= z_min + SUPPORT_EPS_M).any(|&p| {
            scene.plate.distance_to_solid(p) <= SUPPORT_EPS_M
                || scene.items.iter().zip(&shapes).enumerate().any(|(j, (other, shape))| {
                    j != i
                        && shape
                            .as_ref()
                            .is_some_and(|s| s.point_distance(&other.pose, p) <= SUPPORT_EPS_M)
                })
        });
        if !supported {
            bad.push(item.instance_id);
        }
    }
    Ok(bad)
}
