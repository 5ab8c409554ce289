//! Pipeline configuration, loaded from JSON or TOML.
//!
//! ```toml
//! strategy = "calipers_full"        # medoid_prior | calipers_full | medoid_calipers
//! source = "lidar"                  # lidar | depth
//! dbscan_enabled = true
//! stride = 4
//! classes = ["car", "pedestrian"]
//! shape_priors = "priors.json"      # relative to the config file
//!
//! [dbscan]
//! eps = 0.75
//! min_pts = 5
//!
//! [per_class_dbscan.pedestrian]
//! eps = 0.3
//! min_pts = 3
//!
//! [fog]
//! beta = 0.03
//! ambient = [255, 255, 255]
//!
//! [eval]
//! dist_thresholds = [0.5, 1.0, 2.0, 4.0]
//! tp_threshold = 2.0
//! ```
//!
//! Every key is optional; unknown keys are rejected.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boxes::{InflationStrategy, ShapePriorTable, StrategyKind};
use crate::cluster::DbscanParams;
use crate::error::{Error, Result};
use crate::eval::MatchConfig;
use crate::fog::FogParams;

/// Where segment points come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointSource {
    Lidar,
    Depth,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DbscanFile {
    eps: f64,
    min_pts: usize,
}

impl DbscanFile {
    fn resolve(self, what: &str) -> Result<DbscanParams> {
        DbscanParams::new(self.eps, self.min_pts).map_err(|e| Error::Config(format!("{what}: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FogFile {
    beta: f64,
    ambient: [f64; 3],
}

impl Default for FogFile {
    fn default() -> Self {
        let p = FogParams::default();
        Self {
            beta: p.beta(),
            ambient: p.ambient(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ConfigFile {
    strategy: StrategyKind,
    source: PointSource,
    dbscan_enabled: bool,
    dbscan: Option<DbscanFile>,
    per_class_dbscan: BTreeMap<String, DbscanFile>,
    stride: usize,
    fog: FogFile,
    eval: MatchConfig,
    classes: Option<Vec<String>>,
    shape_priors: Option<PathBuf>,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            strategy: StrategyKind::CalipersFull,
            source: PointSource::Lidar,
            dbscan_enabled: true,
            dbscan: None,
            per_class_dbscan: BTreeMap::new(),
            stride: crate::lift::DEFAULT_STRIDE,
            fog: FogFile::default(),
            eval: MatchConfig::default(),
            classes: None,
            shape_priors: None,
        }
    }
}

/// Validated pipeline settings.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub strategy: InflationStrategy,
    pub source: PointSource,
    pub dbscan_enabled: bool,
    pub dbscan: DbscanParams,
    pub per_class_dbscan: BTreeMap<String, DbscanParams>,
    pub stride: usize,
    pub fog: FogParams,
    pub eval: MatchConfig,
    /// Classes to keep and evaluate; `None` keeps every detection label.
    pub classes: Option<Vec<String>>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            strategy: InflationStrategy::CalipersFull,
            source: PointSource::Lidar,
            dbscan_enabled: true,
            dbscan: DbscanParams::default(),
            per_class_dbscan: BTreeMap::new(),
            stride: crate::lift::DEFAULT_STRIDE,
            fog: FogParams::default(),
            eval: MatchConfig::default(),
            classes: None,
        }
    }
}

impl PipelineConfig {
    /// DBSCAN parameters for `label`, or `None` when clustering is off.
    pub fn dbscan_for(&self, label: &str) -> Option<DbscanParams> {
        self.dbscan_enabled
            .then(|| self.per_class_dbscan.get(label).copied().unwrap_or(self.dbscan))
    }

    /// Loads a `.toml` file as TOML and anything else as JSON.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let file: ConfigFile = if is_toml {
            toml::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?
        } else {
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?
        };
        Self::resolve(file, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn from_json_str(text: &str, base_dir: &Path) -> Result<Self> {
        let file = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::resolve(file, base_dir)
    }

    fn resolve(file: ConfigFile, base_dir: &Path) -> Result<Self> {
        if file.stride == 0 {
            return Err(Error::Config("stride must be at least 1".into()));
        }
        file.eval.validate().map_err(|e| Error::Config(e.to_string()))?;
        let fog = FogParams::new(file.fog.beta, file.fog.ambient).map_err(|e| Error::Config(e.to_string()))?;
        let dbscan = match file.dbscan {
            Some(d) => d.resolve("dbscan")?,
            None => DbscanParams::default(),
        };
        let per_class_dbscan = file
            .per_class_dbscan
            .into_iter()
            .map(|(label, d)| Ok((label.clone(), d.resolve(&format!("per_class_dbscan.{label}"))?)))
            .collect::<Result<_>>()?;
        if let Some(classes) = &file.classes {
            if classes.is_empty() || classes.iter().any(String::is_empty) {
                return Err(Error::Config("classes must be a non-empty list of non-empty names".into()));
            }
        }
        let strategy = match file.strategy {
            StrategyKind::CalipersFull => InflationStrategy::CalipersFull,
            StrategyKind::MedoidCalipers => InflationStrategy::MedoidCalipers,
            StrategyKind::MedoidPrior => {
                let rel = file
                    .shape_priors
                    .as_ref()
                    .ok_or_else(|| Error::Config("strategy medoid_prior needs shape_priors".into()))?;
                let path = base_dir.join(rel);
                let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                let table = ShapePriorTable::from_json_str(&text).map_err(|e| Error::parse(&path, e.to_string()))?;
                let strategy = InflationStrategy::MedoidPrior(table);
                let classes = file
                    .classes
                    .as_ref()
                    .ok_or_else(|| Error::Config("strategy medoid_prior needs an explicit class list".into()))?;
                strategy
                    .check_classes(classes.iter().map(String::as_str))
                    .map_err(|e| Error::Config(e.to_string()))?;
                strategy
            }
        };
        Ok(Self {
            strategy,
            source: file.source,
            dbscan_enabled: file.dbscan_enabled,
            dbscan,
            per_class_dbscan,
            stride: file.stride,
            fog,
            eval: file.eval,
            classes: file.classes,
        })
    }
}
