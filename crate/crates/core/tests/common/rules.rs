use mealsynth::plating::{parse_rules_bytes, Jitter, PlateSpec, PlatingRule, PlatingRuleSet, RuleGeometry};
use mealsynth::rng::seeded;
use mealsynth::{Pose, Quat, Vec3};
use proptest::prelude::*;
use rand::{Rng, RngCore};

fn finite(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    lo..hi
}

fn xy() -> impl Strategy<Value = [f64; 2]> {
    [finite(-0.2, 0.2), finite(-0.2, 0.2)]
}

fn pose() -> impl Strategy<Value = Pose> {
    ([finite(-0.2, 0.2), finite(-0.2, 0.2), finite(0.0, 0.3)], finite(-3.2, 3.2), [finite(-1.0, 1.0), finite(-1.0, 1.0), finite(0.1, 1.0)])
        .prop_map(|(p, angle, axis)| Pose::new(Vec3::from_array(p), Quat::from_axis_angle(Vec3::from_array(axis), angle)))
}

fn geometry() -> impl Strategy<Value = (RuleGeometry, u32)> {
    prop_oneof![
        prop::collection::vec(pose(), 1..4).prop_map(|poses| {
            let n = poses.len() as u32;
            (RuleGeometry::Explicit { poses }, n)
        }),
        (xy(), finite(0.001, 0.2), finite(-7.0, 7.0), 1u32..9).prop_map(|(center, radius_m, start_angle, n)| {
            (RuleGeometry::Ring { center, radius_m, start_angle }, n)
        }),
        (xy(), 1u32..4, 1u32..4, finite(0.001, 0.1), any::<prop::sample::Index>()).prop_map(|(origin, rows, cols, pitch_m, k)| {
            let n = k.index((rows * cols) as usize) as u32 + 1;
            (RuleGeometry::Grid { origin, rows, cols, pitch_m }, n)
        }),
        (xy(), finite(0.0, 0.02), 1u32..5).prop_map(|(base, vertical_gap_m, n)| {
            (RuleGeometry::Stack { base, vertical_gap_m }, n)
        }),
    ]
}

fn rule() -> impl Strategy<Value = PlatingRule> {
    (
        "[a-z][a-z_]{0,11}",
        geometry(),
        prop::option::of((finite(0.0, 0.01), finite(0.0, 1.0))),
        any::<bool>(),
    )
        .prop_map(|(item, (geometry, count), jitter, on_plate)| PlatingRule {
            item,
            count,
            geometry,
            jitter: jitter.map(|(pos_m, yaw_rad)| Jitter { pos_m, yaw_rad }),
            on_plate,
        })
}

pub fn rule_set() -> impl Strategy<Value = PlatingRuleSet> {
    (
        [finite(-0.1, 0.1), finite(-0.1, 0.1), finite(-0.05, 0.0)],
        finite(0.01, 0.3),
        finite(0.0, 0.03),
        finite(0.001, 0.05),
        1u32..16,
        prop::option::of(any::<u64>()),
        prop::collection::vec(rule(), 1..5),
    )
        .prop_map(|(center, radius_m, rim_height_m, lift, segment_count, seed, rules)| PlatingRuleSet {
            plate: PlateSpec {
                center: Vec3::from_array(center),
                radius_m,
                rim_height_m,
                top_z_m: center[2] + lift,
                segment_count,
            },
            seed,
            rules,
        })
}

/// Mutated copies of valid documents reach deeper into the parser than uniform bytes.
fn mutate(seed_doc: &[u8], rng: &mut impl Rng) -> Vec<u8> {
    let mut out = seed_doc.to_vec();
    for _ in 0..rng.gen_range(1..8) {
        let pos = rng.gen_range(0..=out.len());
        match rng.gen_range(0..4) {
            0 if !out.is_empty() => {
                out.remove(pos.min(out.len() - 1));
            }
            1 => out.insert(pos, rng.gen()),
            2 => {
                let special = b":-[]{}#&*!|>'\"%@` \n\t0.e";
                out.insert(pos, special[rng.gen_range(0..special.len())]);
            }
            _ if !out.is_empty() => {
                let i = pos.min(out.len() - 1);
                out[i] = rng.gen();
            }
            _ => {}
        }
    }
    out
}

/// Outcome counts of a fuzz run over random and mutated byte strings.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct FuzzOutcome {
    pub parsed: usize,
    pub rejected: usize,
    /// Inputs that panicked or produced an error without a message.
    pub failures: Vec<Vec<u8>>,
}

pub fn fuzz_parser(cases: usize, seed: u64, valid: &[Vec<u8>]) -> FuzzOutcome {
    let mut rng = seeded(seed);
    let mut out = FuzzOutcome::default();
    for case in 0..cases {
        let bytes = if case % 2 == 0 || valid.is_empty() {
            let mut b = vec![0u8; rng.gen_range(0..256)];
            rng.fill_bytes(&mut b);
            b
        } else {
            mutate(&valid[case % valid.len()], &mut rng)
        };
        match std::panic::catch_unwind(|| parse_rules_bytes(&bytes)) {
            Ok(Ok(rs)) if !rs.rules.is_empty() => out.parsed += 1,
            Ok(Err(e)) if !e.to_string().is_empty() => out.rejected += 1,
            _ => out.failures.push(bytes),
        }
    }
    out
}

pub fn seed_documents() -> Vec<Vec<u8>> {
    vec![
        std::fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/rules/lunch.yaml")).unwrap(),
        b"plate: { radius_m: 0.12 }\nrules:\n  - kind: ring\n    item: apple\n    count: 4\n    radius_m: 0.08\n".to_vec(),
        b"rules: [{kind: grid, item: x, count: 2, origin: [0, 0], rows: 1, cols: 2, pitch_m: 0.03}]\n".to_vec(),
    ]
}
