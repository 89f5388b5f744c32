//! Procedural plating: a YAML rule language that pins items to rule-determined poses.
//!
//! ```yaml
//! plate: { radius_m: 0.12, top_z_m: 0.02 }
//! seed: 7
//! rules:
//!   - kind: ring
//!     item: apple          # asset id or semantic class
//!     count: 4
//!     radius_m: 0.08
//!     jitter: { pos_m: 0.004, yaw_rad: 0.2 }
//! ```

use super::{PlateSpec, PlatingMode, Scene};
use crate::asset::AssetLibrary;
use crate::error::{Error, Result, RuleError};
use crate::rng::seeded;
use crate::{Pose, Quat, Vec3};
use rand::Rng;
use serde_yaml::{Mapping, Value};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jitter {
    /// Maximum horizontal displacement from the nominal position.
    pub pos_m: f64,
    /// Maximum absolute yaw perturbation.
    pub yaw_rad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RuleGeometry {
    Explicit { poses: Vec<Pose> },
    Ring { center: [f64; 2], radius_m: f64, start_angle: f64 },
    /// Row-major fill starting at `origin`, cells `pitch_m` apart along +x (cols) and +y (rows).
    Grid { origin: [f64; 2], rows: u32, cols: u32, pitch_m: f64 },
    /// Items stacked on top of each other at `base`, separated by `vertical_gap_m`.
    Stack { base: [f64; 2], vertical_gap_m: f64 },
}

impl RuleGeometry {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Explicit { .. } => "explicit",
            Self::Ring { .. } => "ring",
            Self::Grid { .. } => "grid",
            Self::Stack { .. } => "stack",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlatingRule {
    /// Asset id, or semantic class whose assets are used in turn.
    pub item: String,
    pub count: u32,
    pub geometry: RuleGeometry,
    pub jitter: Option<Jitter>,
    /// Reject placements whose centre falls outside the plate radius.
    pub on_plate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlatingRuleSet {
    pub plate: PlateSpec,
    pub seed: Option<u64>,
    pub rules: Vec<PlatingRule>,
}

const TOP_KEYS: &[&str] = &["plate", "seed", "rules"];
const PLATE_KEYS: &[&str] = &["center", "radius_m", "rim_height_m", "top_z_m", "segment_count"];
const COMMON_KEYS: &[&str] = &["kind", "item", "count", "jitter", "on_plate"];
const JITTER_KEYS: &[&str] = &["pos_m", "yaw_rad"];
const POSE_KEYS: &[&str] = &["position", "orientation"];

fn kind_keys(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "explicit" => &["poses"],
        "ring" => &["center", "radius_m", "start_angle"],
        "grid" => &["origin", "rows", "cols", "pitch_m"],
        "stack" => &["base", "vertical_gap_m"],
        _ => return None,
    })
}

type RuleResult<T> = std::result::Result<T, RuleError>;

fn structure(location: &str, message: impl Into<String>) -> RuleError {
    RuleError::Structure {
        location: location.to_string(),
        message: message.into(),
    }
}

fn range(location: &str, field: &str, requirement: &str, value: impl std::fmt::Display) -> RuleError {
    RuleError::Range {
        location: location.to_string(),
        field: field.to_string(),
        requirement: requirement.to_string(),
        value: value.to_string(),
    }
}

fn as_mapping<'a>(v: &'a Value, location: &str) -> RuleResult<&'a Mapping> {
    v.as_mapping()
        .ok_or_else(|| structure(location, "expected a mapping"))
}

/// Rejects keys outside `allowed`; keys must be strings.
fn check_keys(map: &Mapping, allowed: &[&str], location: &str) -> RuleResult<()> {
    for k in map.keys() {
        let key = k
            .as_str()
            .ok_or_else(|| structure(location, "keys must be strings"))?;
        if !allowed.contains(&key) {
            return Err(RuleError::UnknownKey {
                location: location.to_string(),
                key: key.to_string(),
            });
        }
    }
    Ok(())
}

fn get_f64(map: &Mapping, key: &str, location: &str) -> RuleResult<Option<f64>> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => {
            let x = v
                .as_f64()
                .ok_or_else(|| structure(location, format!("`{key}` must be a number")))?;
            if !x.is_finite() {
                return Err(range(location, key, "finite", x));
            }
            Ok(Some(x))
        }
    }
}

fn get_u32(map: &Mapping, key: &str, location: &str) -> RuleResult<Option<u32>> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => {
            let x = v
                .as_i64()
                .ok_or_else(|| structure(location, format!("`{key}` must be an integer")))?;
            u32::try_from(x)
                .map(Some)
                .map_err(|_| range(location, key, "a non-negative 32-bit integer", x))
        }
    }
}

fn get_array<const N: usize>(map: &Mapping, key: &str, location: &str) -> RuleResult<Option<[f64; N]>> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => {
            let seq = v
                .as_sequence()
                .filter(|s| s.len() == N)
                .ok_or_else(|| structure(location, format!("`{key}` must be a list of {N} numbers")))?;
            let mut out = [0.0; N];
            for (o, item) in out.iter_mut().zip(seq) {
                *o = item
                    .as_f64()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| structure(location, format!("`{key}` must contain finite numbers")))?;
            }
            Ok(Some(out))
        }
    }
}

fn positive(x: f64, location: &str, field: &str) -> RuleResult<f64> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(range(location, field, "> 0", x))
    }
}

fn non_negative(x: f64, location: &str, field: &str) -> RuleResult<f64> {
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(range(location, field, ">= 0", x))
    }
}

fn parse_plate(v: Option<&Value>) -> RuleResult<PlateSpec> {
    let loc = "plate";
    let mut plate = PlateSpec::default();
    let Some(v) = v.filter(|v| !v.is_null()) else {
        return Ok(plate);
    };
    let map = as_mapping(v, loc)?;
    check_keys(map, PLATE_KEYS, loc)?;
    if let Some(c) = get_array::<3>(map, "center", loc)? {
        plate.center = Vec3::from_array(c);
    }
    if let Some(r) = get_f64(map, "radius_m", loc)? {
        plate.radius_m = positive(r, loc, "radius_m")?;
    }
    if let Some(h) = get_f64(map, "rim_height_m", loc)? {
        plate.rim_height_m = non_negative(h, loc, "rim_height_m")?;
    }
    if let Some(z) = get_f64(map, "top_z_m", loc)? {
        plate.top_z_m = z;
    }
    if let Some(n) = get_u32(map, "segment_count", loc)? {
        plate.segment_count = n;
    }
    plate.validate().map_err(|e| match e {
        Error::Validation { field, message } => range(loc, &field, "valid", message),
        other => structure(loc, other.to_string()),
    })?;
    Ok(plate)
}

fn parse_pose(v: &Value, location: &str) -> RuleResult<Pose> {
    let map = as_mapping(v, location)?;
    check_keys(map, POSE_KEYS, location)?;
    let position = get_array::<3>(map, "position", location)?
        .ok_or_else(|| structure(location, "pose needs `position`"))?;
    let q = get_array::<4>(map, "orientation", location)?.unwrap_or([1.0, 0.0, 0.0, 0.0]);
    let q = Quat::new(q[0], q[1], q[2], q[3]);
    if (q.norm() - 1.0).abs() > 1e-6 {
        return Err(range(location, "orientation", "a unit quaternion", q.norm()));
    }
    Ok(Pose::new(Vec3::from_array(position), q))
}

fn parse_rule(index: usize, v: &Value, plate: &PlateSpec) -> RuleResult<PlatingRule> {
    let loc = format!("rule {index}");
    let loc = loc.as_str();
    let map = as_mapping(v, loc)?;
    let missing = |field: &str| RuleError::MissingField {
        index,
        field: field.to_string(),
    };
    let kind = match map.get("kind") {
        None | Some(Value::Null) => return Err(missing("kind")),
        Some(k) => k
            .as_str()
            .ok_or_else(|| structure(loc, "`kind` must be a string"))?,
    };
    let specific = kind_keys(kind).ok_or_else(|| RuleError::UnknownKind {
        index,
        kind: kind.to_string(),
    })?;
    let allowed: Vec<&str> = COMMON_KEYS.iter().chain(specific).copied().collect();
    check_keys(map, &allowed, loc)?;

    let item = match map.get("item") {
        None | Some(Value::Null) => return Err(missing("item")),
        Some(Value::String(s)) if !s.is_empty() => s.clone(),
        Some(_) => return Err(structure(loc, "`item` must be a non-empty string")),
    };
    let count = get_u32(map, "count", loc)?;
    let plate_xy = [plate.center.x, plate.center.y];

    let geometry = match kind {
        "explicit" => {
            let seq = map
                .get("poses")
                .ok_or_else(|| missing("poses"))?
                .as_sequence()
                .ok_or_else(|| structure(loc, "`poses` must be a list"))?;
            let poses = seq
                .iter()
                .enumerate()
                .map(|(k, p)| parse_pose(p, &format!("rule {index}, pose {k}")))
                .collect::<RuleResult<Vec<_>>>()?;
            RuleGeometry::Explicit { poses }
        }
        "ring" => RuleGeometry::Ring {
            center: get_array::<2>(map, "center", loc)?.unwrap_or(plate_xy),
            radius_m: positive(
                get_f64(map, "radius_m", loc)?.ok_or_else(|| missing("radius_m"))?,
                loc,
                "radius_m",
            )?,
            start_angle: get_f64(map, "start_angle", loc)?.unwrap_or(0.0),
        },
        "grid" => {
            let rows = get_u32(map, "rows", loc)?.ok_or_else(|| missing("rows"))?;
            let cols = get_u32(map, "cols", loc)?.ok_or_else(|| missing("cols"))?;
            if rows == 0 {
                return Err(range(loc, "rows", ">= 1", rows));
            }
            if cols == 0 {
                return Err(range(loc, "cols", ">= 1", cols));
            }
            RuleGeometry::Grid {
                origin: get_array::<2>(map, "origin", loc)?.ok_or_else(|| missing("origin"))?,
                rows,
                cols,
                pitch_m: positive(
                    get_f64(map, "pitch_m", loc)?.ok_or_else(|| missing("pitch_m"))?,
                    loc,
                    "pitch_m",
                )?,
            }
        }
        "stack" => RuleGeometry::Stack {
            base: get_array::<2>(map, "base", loc)?.unwrap_or(plate_xy),
            vertical_gap_m: non_negative(
                get_f64(map, "vertical_gap_m", loc)?.unwrap_or(0.0),
                loc,
                "vertical_gap_m",
            )?,
        },
        _ => unreachable!("kind validated above"),
    };

    let count = match (&geometry, count) {
        (RuleGeometry::Explicit { poses }, None) => poses.len() as u32,
        (RuleGeometry::Explicit { poses }, Some(c)) if c as usize != poses.len() => {
            return Err(range(loc, "count", "equal to the number of poses", c));
        }
        (RuleGeometry::Grid { rows, cols, .. }, None) => rows.saturating_mul(*cols),
        (RuleGeometry::Grid { rows, cols, .. }, Some(c)) if c as u64 > *rows as u64 * *cols as u64 => {
            return Err(range(loc, "count", "<= rows * cols", c));
        }
        (_, Some(c)) => c,
        (_, None) => return Err(missing("count")),
    };
    if count == 0 {
        return Err(range(loc, "count", ">= 1", count));
    }

    let jitter = match map.get("jitter") {
        None | Some(Value::Null) => None,
        Some(j) => {
            let jloc = format!("rule {index}, jitter");
            let jm = as_mapping(j, &jloc)?;
            check_keys(jm, JITTER_KEYS, &jloc)?;
            Some(Jitter {
                pos_m: non_negative(get_f64(jm, "pos_m", &jloc)?.unwrap_or(0.0), &jloc, "pos_m")?,
                yaw_rad: non_negative(get_f64(jm, "yaw_rad", &jloc)?.unwrap_or(0.0), &jloc, "yaw_rad")?,
            })
        }
    };
    let on_plate = match map.get("on_plate") {
        None | Some(Value::Null) => true,
        Some(Value::Bool(b)) => *b,
        Some(_) => return Err(structure(loc, "`on_plate` must be a boolean")),
    };

    Ok(PlatingRule {
        item,
        count,
        geometry,
        jitter,
        on_plate,
    })
}

/// Parses and validates a rule document, materializing all defaults.
pub fn parse_rules(text: &str) -> RuleResult<PlatingRuleSet> {
    let doc: Value = serde_yaml::from_str(text).map_err(|e| {
        let (line, column) = e.location().map(|l| (l.line(), l.column())).unwrap_or((0, 0));
        RuleError::Syntax {
            line,
            column,
            message: e.to_string(),
        }
    })?;
    let top = as_mapping(&doc, "document")?;
    check_keys(top, TOP_KEYS, "document")?;
    let plate = parse_plate(top.get("plate"))?;
    let seed = match top.get("seed") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| structure("document", "`seed` must be a non-negative integer"))?,
        ),
    };
    let rules = top
        .get("rules")
        .ok_or_else(|| structure("document", "missing `rules`"))?
        .as_sequence()
        .ok_or_else(|| structure("document", "`rules` must be a list"))?
        .iter()
        .enumerate()
        .map(|(i, r)| parse_rule(i, r, &plate))
        .collect::<RuleResult<Vec<_>>>()?;
    if rules.is_empty() {
        return Err(structure("document", "at least one rule is required"));
    }
    Ok(PlatingRuleSet { plate, seed, rules })
}

/// Parses raw bytes; invalid UTF-8 is reported as an error rather than replaced.
pub fn parse_rules_bytes(bytes: &[u8]) -> RuleResult<PlatingRuleSet> {
    let text = std::str::from_utf8(bytes).map_err(|_| RuleError::Encoding)?;
    parse_rules(text)
}

fn key(s: &str) -> Value {
    Value::String(s.to_string())
}

fn floats(xs: &[f64]) -> Value {
    Value::Sequence(xs.iter().map(|&x| Value::from(x)).collect())
}

/// Renders a rule set as YAML with every default spelled out.
pub fn serialize_rules(rules: &PlatingRuleSet) -> String {
    let mut top = Mapping::new();
    let p = &rules.plate;
    let mut plate = Mapping::new();
    plate.insert(key("center"), floats(&p.center.to_array()));
    plate.insert(key("radius_m"), Value::from(p.radius_m));
    plate.insert(key("rim_height_m"), Value::from(p.rim_height_m));
    plate.insert(key("top_z_m"), Value::from(p.top_z_m));
    plate.insert(key("segment_count"), Value::from(p.segment_count));
    top.insert(key("plate"), Value::Mapping(plate));
    if let Some(seed) = rules.seed {
        top.insert(key("seed"), Value::from(seed));
    }
    let list = rules
        .rules
        .iter()
        .map(|r| {
            let mut m = Mapping::new();
            m.insert(key("kind"), key(r.geometry.kind()));
            m.insert(key("item"), key(&r.item));
            m.insert(key("count"), Value::from(r.count));
            match &r.geometry {
                RuleGeometry::Explicit { poses } => {
                    let ps = poses
                        .iter()
                        .map(|pose| {
                            let mut pm = Mapping::new();
                            pm.insert(key("position"), floats(&pose.position.to_array()));
                            pm.insert(key("orientation"), floats(&pose.orientation.to_array()));
                            Value::Mapping(pm)
                        })
                        .collect();
                    m.insert(key("poses"), Value::Sequence(ps));
                }
                RuleGeometry::Ring { center, radius_m, start_angle } => {
                    m.insert(key("center"), floats(center));
                    m.insert(key("radius_m"), Value::from(*radius_m));
                    m.insert(key("start_angle"), Value::from(*start_angle));
                }
                RuleGeometry::Grid { origin, rows, cols, pitch_m } => {
                    m.insert(key("origin"), floats(origin));
                    m.insert(key("rows"), Value::from(*rows));
                    m.insert(key("cols"), Value::from(*cols));
                    m.insert(key("pitch_m"), Value::from(*pitch_m));
                }
                RuleGeometry::Stack { base, vertical_gap_m } => {
                    m.insert(key("base"), floats(base));
                    m.insert(key("vertical_gap_m"), Value::from(*vertical_gap_m));
                }
            }
            if let Some(j) = r.jitter {
                let mut jm = Mapping::new();
                jm.insert(key("pos_m"), Value::from(j.pos_m));
                jm.insert(key("yaw_rad"), Value::from(j.yaw_rad));
                m.insert(key("jitter"), Value::Mapping(jm));
            }
            m.insert(key("on_plate"), Value::Bool(r.on_plate));
            Value::Mapping(m)
        })
        .collect();
    top.insert(key("rules"), Value::Sequence(list));
    serde_yaml::to_string(&Value::Mapping(top)).expect("yaml values always serialize")
}

/// Nominal (jitter-free) object poses of one rule.
pub fn nominal_poses(rule: &PlatingRule, plate: &PlateSpec, assets: &[&crate::asset::FoodAsset]) -> Vec<Pose> {
    let n = rule.count as usize;
    let asset_at = |k: usize| assets[k % assets.len()];
    // lift so the lowest point of the (upright) asset touches the plate surface
    let rest_z = |k: usize| plate.top_z_m - asset_at(k).aabb_object.min.z;
    match &rule.geometry {
        RuleGeometry::Explicit { poses } => poses.clone(),
        RuleGeometry::Ring { center, radius_m, start_angle } => (0..n)
            .map(|k| {
                let a = start_angle + TAU * k as f64 / n as f64;
                Pose::from_translation(Vec3::new(
                    center[0] + radius_m * a.cos(),
                    center[1] + radius_m * a.sin(),
                    rest_z(k),
                ))
            })
            .collect(),
        RuleGeometry::Grid { origin, cols, pitch_m, .. } => (0..n)
            .map(|k| {
                let (row, col) = (k / *cols as usize, k % *cols as usize);
                Pose::from_translation(Vec3::new(
                    origin[0] + col as f64 * pitch_m,
                    origin[1] + row as f64 * pitch_m,
                    rest_z(k),
                ))
            })
            .collect(),
        RuleGeometry::Stack { base, vertical_gap_m } => {
            let mut floor = plate.top_z_m;
            (0..n)
                .map(|k| {
                    let b = asset_at(k).aabb_object;
                    let pose = Pose::from_translation(Vec3::new(base[0], base[1], floor - b.min.z));
                    floor += b.extent().z + vertical_gap_m;
                    pose
                })
                .collect()
        }
    }
}

/// Places every rule's items at their nominal poses plus bounded jitter. No physics is applied.
///
/// Uses the rule set's own seed when it has one, otherwise `seed`.
pub fn instantiate(rules: &PlatingRuleSet, library: &AssetLibrary, seed: u64) -> Result<Scene> {
    let seed = rules.seed.unwrap_or(seed);
    let mut rng = seeded(seed);
    let plate = &rules.plate;
    let mut scene = Scene::new(PlatingMode::Procedural, *plate, seed);
    for (index, rule) in rules.rules.iter().enumerate() {
        let assets = library.resolve(&rule.item);
        if assets.is_empty() {
            return Err(RuleError::UnresolvedSelector {
                index,
                selector: rule.item.clone(),
            }
            .into());
        }
        for (k, nominal) in nominal_poses(rule, plate, &assets).into_iter().enumerate() {
            let mut pose = nominal;
            if let Some(j) = rule.jitter {
                let r = j.pos_m * rng.gen::<f64>().sqrt();
                let phi = rng.gen::<f64>() * TAU;
                let yaw = if j.yaw_rad > 0.0 {
                    rng.gen_range(-j.yaw_rad..=j.yaw_rad)
                } else {
                    0.0
                };
                pose.position += Vec3::new(r * phi.cos(), r * phi.sin(), 0.0);
                pose.orientation = (Quat::from_yaw(yaw) * pose.orientation).normalize();
            }
            let distance = plate.radial_distance(pose.position);
            if rule.on_plate && distance > plate.radius_m {
                return Err(RuleError::Placement {
                    index,
                    item: k,
                    distance,
                    radius: plate.radius_m,
                }
                .into());
            }
            scene.push(assets[k % assets.len()].asset_id.clone(), pose);
        }
    }
    warn_overlaps(&scene, library);
    Ok(scene)
}

fn warn_overlaps(scene: &Scene, library: &AssetLibrary) {
    let boxes: Vec<_> = scene
        .items
        .iter()
        .filter_map(|i| library.get(&i.asset_id).map(|a| a.aabb_object.transformed(&i.pose)))
        .collect();
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            let (a, b) = (boxes[i], boxes[j]);
            let overlap = (0..3).all(|k| a.min[k] < b.max[k] && b.min[k] < a.max[k]);
            if overlap {
                log::warn!(
                    "procedural items {} and {} have overlapping bounds; placing as requested",
                    scene.items[i].instance_id,
                    scene.items[j].instance_id
                );
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asset::default_primitive_library;

    const RING: &str = "
plate: { radius_m: 0.12, top_z_m: 0.02 }
seed: 5
rules:
  - kind: ring
    item: apple_small
    count: 4
    radius_m: 0.08
";

    #[test]
    fn ring_rule_parses() {
        let r = parse_rules(RING).unwrap();
        assert_eq!(r.rules.len(), 1);
        assert_eq!(r.rules[0].count, 4);
        assert_eq!(r.seed, Some(5));
        assert!(matches!(r.rules[0].geometry, RuleGeometry::Ring { start_angle, .. } if start_angle == 0.0));
    }

    #[test]
    fn unknown_kind_is_named() {
        let err = parse_rules(&RING.replace("ring", "spiral")).unwrap_err();
        assert_eq!(
            err,
            RuleError::UnknownKind {
                index: 0,
                kind: "spiral".into()
            }
        );
    }

    #[test]
    fn missing_field_names_index_and_field() {
        let err = parse_rules(&RING.replace("    radius_m: 0.08\n", "")).unwrap_err();
        assert_eq!(
            err,
            RuleError::MissingField {
                index: 0,
                field: "radius_m".into()
            }
        );
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse_rules(&RING.replace("count: 4", "count: 4\n    colour: red")).unwrap_err();
        assert!(matches!(err, RuleError::UnknownKey { key, .. } if key == "colour"));
        let err = parse_rules(&RING.replace("seed: 5", "sead: 5")).unwrap_err();
        assert!(matches!(err, RuleError::UnknownKey { key, .. } if key == "sead"));
    }

    #[test]
    fn non_positive_radius_is_range_error() {
        let err = parse_rules(&RING.replace("0.08", "-0.08")).unwrap_err();
        assert!(matches!(err, RuleError::Range { field, .. } if field == "radius_m"));
    }

    #[test]
    fn syntax_error_has_location() {
        let err = parse_rules("rules: [\n  - kind: ring\n  bad").unwrap_err();
        match err {
            RuleError::Syntax { line, .. } => assert!(line >= 1),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn ring_positions_are_equally_spaced() {
        let rules = parse_rules(RING).unwrap();
        let lib = default_primitive_library();
        let scene = instantiate(&rules, &lib, 0).unwrap();
        assert_eq!(scene.items.len(), 4);
        for (k, item) in scene.items.iter().enumerate() {
            let p = item.pose.position;
            let angle = p.y.atan2(p.x).rem_euclid(TAU);
            let expected = TAU * k as f64 / 4.0;
            assert!((angle - expected).abs() < 1e-9 || (angle - expected).abs() > TAU - 1e-9);
            assert!((p.x.hypot(p.y) - 0.08).abs() < 1e-9);
        }
    }

    #[test]
    fn explicit_pose_passes_through() {
        let text = "
rules:
  - kind: explicit
    item: meatball
    poses:
      - { position: [0.01, -0.02, 0.05], orientation: [0.0, 1.0, 0.0, 0.0] }
";
        let rules = parse_rules(text).unwrap();
        let scene = instantiate(&rules, &default_primitive_library(), 1).unwrap();
        assert_eq!(scene.items.len(), 1);
        assert_eq!(
            scene.items[0].pose,
            Pose::new(Vec3::new(0.01, -0.02, 0.05), Quat::new(0.0, 1.0, 0.0, 0.0))
        );
    }

    #[test]
    fn unresolvable_selector_is_named() {
        let rules = parse_rules(&RING.replace("apple_small", "durian")).unwrap();
        let err = instantiate(&rules, &default_primitive_library(), 0).unwrap_err();
        assert!(matches!(err, Error::Rule(RuleError::UnresolvedSelector { selector, .. }) if selector == "durian"));
    }

    #[test]
    fn off_plate_ring_is_a_placement_error() {
        let rules = parse_rules(&RING.replace("0.08", "0.5")).unwrap();
        let err = instantiate(&rules, &default_primitive_library(), 0).unwrap_err();
        assert!(matches!(err, Error::Rule(RuleError::Placement { .. })));
    }

    #[test]
    fn stack_items_rest_on_each_other() {
        let text = "
rules:
  - { kind: stack, item: bread_slice, count: 3, vertical_gap_m: 0.0 }
";
        let scene = instantiate(&parse_rules(text).unwrap(), &default_primitive_library(), 0).unwrap();
        let zs: Vec<f64> = scene.items.iter().map(|i| i.pose.position.z).collect();
        assert!((zs[1] - zs[0] - 0.014).abs() < 1e-12);
        assert!((zs[2] - zs[1] - 0.014).abs() < 1e-12);
    }

    #[test]
    fn class_selector_cycles_assets() {
        let text = "rules: [ { kind: ring, item: bread, count: 4, radius_m: 0.05 } ]";
        let scene = instantiate(&parse_rules(text).unwrap(), &default_primitive_library(), 0).unwrap();
        let ids: Vec<&str> = scene.items.iter().map(|i| i.asset_id.as_str()).collect();
        assert_eq!(ids, ["bread_slice", "bread_roll", "bread_slice", "bread_roll"]);
    }
}
