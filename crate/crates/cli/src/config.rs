//! Run configuration. Precedence is CLI flags, then the `--config` TOML
//! file, then the defaults below. The effective configuration is written
//! to `<output_dir>/run_config.toml` by every command that takes one.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mulberry_core::dataset::{
    soil_schema, validate_schema, ColumnRole, ColumnSchema, YIELD_COLUMN,
};
use mulberry_core::forest::ForestParams;
use mulberry_core::model::ModelKind;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelSelection {
    Mlr,
    Ridge,
    Forest,
    All,
}

impl ModelSelection {
    pub fn kinds(self) -> Vec<ModelKind> {
        match self {
            ModelSelection::Mlr => vec![ModelKind::Mlr],
            ModelSelection::Ridge => vec![ModelKind::Ridge],
            ModelSelection::Forest => vec![ModelKind::Forest],
            ModelSelection::All => ModelKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestOverrides {
    pub trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_split: Option<usize>,
    pub min_leaf: Option<usize>,
    pub max_features: Option<usize>,
    pub bootstrap: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub target: String,
    pub test_ratio: f64,
    pub seed: u64,
    pub model: ModelSelection,
    pub lambda: f64,
    /// Forest worker threads; never changes any output.
    pub workers: Option<usize>,
    pub forest: ForestOverrides,
    /// Raw header name -> schema name.
    pub renames: BTreeMap<String, String>,
    /// Added or replaced schema columns (role, kind, unit).
    pub columns: Vec<ColumnSchema>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            output_dir: PathBuf::from("out"),
            target: YIELD_COLUMN.to_string(),
            test_ratio: 0.2,
            seed: 42,
            model: ModelSelection::All,
            lambda: 1.0,
            workers: None,
            forest: ForestOverrides::default(),
            renames: BTreeMap::new(),
            columns: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> CliResult<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn input(&self) -> CliResult<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::Config("no input file (use --input)".into()))
    }

    pub fn forest_params(&self) -> ForestParams {
        let base = ForestParams {
            seed: self.seed,
            ..ForestParams::default()
        };
        let f = &self.forest;
        ForestParams {
            n_trees: f.trees.unwrap_or(base.n_trees),
            max_depth: f.max_depth.or(base.max_depth),
            min_samples_split: f.min_split.unwrap_or(base.min_samples_split),
            min_samples_leaf: f.min_leaf.unwrap_or(base.min_samples_leaf),
            max_features: f.max_features.or(base.max_features),
            bootstrap: f.bootstrap.unwrap_or(base.bootstrap),
            ..base
        }
    }

    /// Canonical soil schema with the configured target and column overrides.
    pub fn training_schema(&self) -> CliResult<Vec<ColumnSchema>> {
        let mut schema = soil_schema(true);
        if self.target != YIELD_COLUMN {
            if let Some(y) = schema.iter_mut().find(|c| c.name == YIELD_COLUMN) {
                y.role = ColumnRole::Ignored;
                y.optional = true;
            }
            if !schema.iter().any(|c| c.name == self.target) {
                schema.push(ColumnSchema::target(&self.target));
            }
            for c in schema.iter_mut().filter(|c| c.name == self.target) {
                c.role = ColumnRole::Target;
                c.optional = false;
            }
        }
        for over in &self.columns {
            match schema.iter_mut().find(|c| c.name == over.name) {
                Some(c) => *c = over.clone(),
                None => schema.push(over.clone()),
            }
        }
        validate_schema(&schema, true)?;
        Ok(schema)
    }

    pub fn validate(&self) -> CliResult<()> {
        if !(self.test_ratio > 0.0 && self.test_ratio < 1.0) {
            return Err(mulberry_core::Error::InvalidRatio(self.test_ratio).into());
        }
        if !(self.lambda >= 0.0) {
            return Err(mulberry_core::Error::NegativeLambda(self.lambda).into());
        }
        Ok(())
    }
}
