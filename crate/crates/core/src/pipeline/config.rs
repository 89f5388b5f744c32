//! Pipeline YAML configuration.

use crate::asset::{default_primitive_specs, AssetLibrary, PrimitiveSpec};
use crate::camera::RigConfig;
use crate::error::{Error, Result};
use crate::plating::{parse_rules, PlateSpec, PlatingMode, PlatingRuleSet, SimParams};
use crate::render::{LightSpec, BRIGHTNESS_RANGE};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssetsConfig {
    /// Directory of `<id>.obj` + `<id>.json` pairs. When absent the primitive set is used.
    pub dir: Option<PathBuf>,
    /// Primitive asset specs; the built-in set of eight when empty.
    pub primitives: Vec<PrimitiveSpec>,
    pub primitive_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlatingConfig {
    pub mode: PlatingMode,
    pub max_items: usize,
    pub plate: PlateSpec,
    pub sim: SimParams,
    /// Procedural rules file; read at load time into `rules`.
    pub rules_file: Option<PathBuf>,
    /// Procedural rules as YAML text.
    pub rules: Option<String>,
}

impl Default for PlatingConfig {
    fn default() -> Self {
        Self {
            mode: PlatingMode::Dynamic,
            max_items: 7,
            plate: PlateSpec::default(),
            sim: SimParams::default(),
            rules_file: None,
            rules: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderConfig {
    /// `[width, height]`; overrides the rig's image size when set.
    pub resolution: Option<[u32; 2]>,
    pub light: LightSpec,
    pub brightness_range: [f64; 2],
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            resolution: None,
            light: LightSpec::default(),
            brightness_range: BRIGHTNESS_RANGE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Views rendered per scene; all rig views when absent.
    pub views_per_scene: Option<usize>,
    /// Regeneration attempts after a failed scene.
    pub retry_budget: u32,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            views_per_scene: None,
            retry_budget: 3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub assets: AssetsConfig,
    pub plating: PlatingConfig,
    pub rig: RigConfig,
    pub render: RenderConfig,
    pub output: OutputConfig,
}

impl PipelineConfig {
    pub fn from_yaml(text: &str) -> Result<Self> {
        let cfg: Self = serde_yaml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Reads a config file, resolving relative paths against its directory and inlining the
    /// procedural rules so that the result is self-contained.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_yaml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(dir) = &cfg.assets.dir {
            if dir.is_relative() {
                cfg.assets.dir = Some(base.join(dir));
            }
        }
        if let Some(file) = cfg.plating.rules_file.take() {
            if cfg.plating.rules.is_some() {
                return Err(Error::Config("give either plating.rules or plating.rules_file, not both".into()));
            }
            let file = if file.is_relative() { base.join(file) } else { file };
            cfg.plating.rules = Some(std::fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Rig settings with the render resolution applied.
    pub fn effective_rig(&self) -> RigConfig {
        let mut rig = self.rig;
        if let Some([w, h]) = self.render.resolution {
            rig.image_width_px = w;
            rig.image_height_px = h;
        }
        rig
    }

    pub fn views_per_scene(&self) -> usize {
        self.output.views_per_scene.unwrap_or(self.rig.n_views)
    }

    pub fn rule_set(&self) -> Result<Option<PlatingRuleSet>> {
        match &self.plating.rules {
            Some(text) => Ok(Some(parse_rules(text)?)),
            None => Ok(None),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.plating.plate.validate()?;
        self.plating.sim.validate()?;
        self.effective_rig().validate()?;
        self.render.light.validate()?;
        if self.plating.max_items == 0 {
            return Err(Error::validation("plating.max_items", "must be at least 1"));
        }
        let [lo, hi] = self.render.brightness_range;
        if !(BRIGHTNESS_RANGE[0] <= lo && lo <= hi && hi <= BRIGHTNESS_RANGE[1]) {
            return Err(Error::validation(
                "render.brightness_range",
                format!("need 1 <= min <= max <= 2, got [{lo}, {hi}]"),
            ));
        }
        if self.views_per_scene() == 0 || self.views_per_scene() > self.rig.n_views {
            return Err(Error::validation(
                "output.views_per_scene",
                format!("must lie in [1, {}]", self.rig.n_views),
            ));
        }
        match (self.plating.mode, self.rule_set()?) {
            (PlatingMode::Procedural, None) => {
                return Err(Error::Config("procedural plating needs plating.rules or plating.rules_file".into()))
            }
            (PlatingMode::Dynamic, Some(_)) => log::warn!("plating rules are ignored in dynamic mode"),
            _ => {}
        }
        Ok(())
    }

    pub fn load_library(&self) -> Result<AssetLibrary> {
        match &self.assets.dir {
            Some(dir) => AssetLibrary::load_dir(dir),
            None if self.assets.primitives.is_empty() => {
                AssetLibrary::from_primitives(&default_primitive_specs(), self.assets.primitive_seed)
            }
            None => AssetLibrary::from_primitives(&self.assets.primitives, self.assets.primitive_seed),
        }
    }
}
