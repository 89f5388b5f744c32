use mealsynth::asset::AssetLibrary;
use mealsynth::nutrition::class_stats;
use mealsynth::plating::dynamics::compose_dynamic_scene_with_report;
use mealsynth::plating::{PlateSpec, Scene, SimParams};
use mealsynth::rng::derive_seed;

/// Support tolerance for settled items.
pub const CONTACT_EPS: f64 = 1e-3;

#[derive(Debug, Default)]
pub struct BatchOutcome {
    pub scenes: Vec<Scene>,
    pub planned: usize,
    pub settled: usize,
    /// `(scene index, instance id)` of items failing the support invariant.
    pub unsupported: Vec<(usize, u16)>,
    /// Scenes whose settled and rejected ids do not partition the planned ids.
    pub partition_violations: Vec<usize>,
    pub class_instance_mismatch: bool,
}

impl BatchOutcome {
    pub fn settle_rate(&self) -> f64 {
        self.settled as f64 / self.planned.max(1) as f64
    }
}

pub fn physics_batch(lib: &AssetLibrary, scenes: usize, master_seed: u64) -> BatchOutcome {
    let plate = PlateSpec::default();
    let params = SimParams::default();
    let mut out = BatchOutcome::default();
    for i in 0..scenes {
        let (scene, plan, report) =
            compose_dynamic_scene_with_report(lib, &plate, &params, 7, derive_seed(master_seed, i as u64)).unwrap();
        out.planned += plan.entries.len();
        out.settled += report.settled.len();

        let mut planned: Vec<&str> = plan.entries.iter().map(|e| e.asset_id.as_str()).collect();
        let mut accounted: Vec<&str> = report
            .settled
            .iter()
            .map(|s| s.asset_id.as_str())
            .chain(report.rejected.iter().map(|r| r.asset_id.as_str()))
            .collect();
        planned.sort_unstable();
        accounted.sort_unstable();
        let mut unique = accounted.clone();
        unique.dedup();
        let scene_ids: Vec<&str> = scene.items.iter().map(|it| it.asset_id.as_str()).collect();
        let settled_ids: Vec<&str> = report.settled.iter().map(|s| s.asset_id.as_str()).collect();
        if planned != accounted || unique.len() != accounted.len() || scene_ids != settled_ids {
            out.partition_violations.push(i);
        }
        for id in super::unsupported_items(&scene, lib, &plate, CONTACT_EPS) {
            out.unsupported.push((i, id));
        }
        out.scenes.push(scene);
    }
    let stats = class_stats(&out.scenes, lib).unwrap();
    let placed: usize = out.scenes.iter().map(|s| s.items.len()).sum();
    out.class_instance_mismatch = stats.total_instances() != placed;
    out
}
