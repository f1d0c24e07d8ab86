use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use granular::table::MissingPolicy;
use granular::{GrowthLawParams, MetaConfig, SplitSpec, SyntheticConfig};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Sonfis,
    Sorst,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Csv {
        path: PathBuf,
        decision_column: String,
        #[serde(default)]
        missing: MissingPolicy,
    },
    Synthetic(SyntheticConfig),
}

fn holdout_split() -> SplitSpec {
    SplitSpec::holdout_150_19()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    #[serde(default = "holdout_split")]
    pub split: SplitSpec,
    pub algorithm: Algorithm,
    pub meta: MetaConfig,
    #[serde(default)]
    pub growth: GrowthLawParams,
    /// Starting rule-strength threshold for SORST.
    #[serde(default)]
    pub initial_strength: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// Raw JSON document plus the directory relative paths resolve against.
pub struct RawConfig {
    pub value: Value,
    pub base_dir: PathBuf,
}

impl RawConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
                let value = serde_json::from_str(&text).with_context(|| format!("config {} is not valid JSON", path.display()))?;
                let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
                Ok(Self { value, base_dir })
            }
            None => Ok(Self {
                value: Value::Object(Map::new()),
                base_dir: PathBuf::new(),
            }),
        }
    }

    /// Applies `key.path=value` overrides. The value is parsed as JSON when
    /// possible and taken as a string otherwise.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for item in overrides {
            let Some((key, raw)) = item.split_once('=') else {
                bail!("override `{item}` is not of the form key=value");
            };
            let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            set_path(&mut self.value, key, value).with_context(|| format!("cannot apply override `{item}`"))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: Value) -> Result<()> {
        set_path(&mut self.value, key, value)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        bail!("empty segment in key `{key}`");
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        if !node.is_object() {
            bail!("`{part}` is below a non-object value");
        }
        node = node
            .as_object_mut()
            .unwrap()
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    match node.as_object_mut() {
        Some(map) => {
            map.insert(parts[parts.len() - 1].to_string(), value);
            Ok(())
        }
        None => bail!("parent of `{key}` is not an object"),
    }
}

impl ExperimentConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let mut config: ExperimentConfig =
            serde_json::from_value(raw.value.clone()).context("invalid experiment config")?;
        if let DataSource::Csv { path, .. } = &mut config.data {
            *path = raw.resolve(path);
        }
        if let Some(dir) = &config.output_dir {
            config.output_dir = Some(raw.resolve(dir));
        }
        config.meta.validate().context("invalid meta section")?;
        config.growth.validate().context("invalid growth section")?;
        if !(0.0..=1.0).contains(&config.initial_strength) {
            bail!("initial_strength must lie in [0, 1], got {}", config.initial_strength);
        }
        Ok(config)
    }
}
