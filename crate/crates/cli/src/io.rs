use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use boltzknn::data::{load_auto, load_points, read_header};
use boltzknn::{CovariateMatrix, Dataset, Labels, LoadOptions, Standardizer};

use crate::{ConfigError, DataArgs};

fn load_any(path: &Path, opts: &LoadOptions) -> Result<Dataset> {
    load_auto(path, opts).with_context(|| format!("loading {}", path.display()))
}

/// Points to classify, with labels when the file carries them.
pub struct TestPoints {
    pub x: CovariateMatrix,
    pub y: Option<Labels>,
}

/// Training data plus the transform applied to it.
pub struct Training {
    pub args: DataArgs,
    pub ds: Dataset,
    pub standardizer: Option<Standardizer>,
}

impl Training {
    pub fn load(args: &DataArgs) -> Result<Self> {
        let opts = LoadOptions {
            label_column: args.label_column.clone(),
            class_order: None,
        };
        let raw = load_any(&args.train, &opts)?;
        let (ds, standardizer) = if args.standardize {
            let (ds, s) = boltzknn::data::standardize(&raw)?;
            (ds, Some(s))
        } else {
            (raw, None)
        };
        Ok(Self {
            args: args.clone(),
            ds,
            standardizer,
        })
    }

    /// Loads points in the training covariate scale; a file holding only
    /// the training covariate columns is read as unlabelled.
    pub fn load_points(&self, path: &Path) -> Result<TestPoints> {
        let header = read_header(path).with_context(|| format!("loading {}", path.display()))?;
        if header.len() > self.ds.feature_names.len() {
            let ds = self.load_test(path)?;
            return Ok(TestPoints { x: ds.x, y: Some(ds.y) });
        }
        let x = load_points(path, &self.ds.feature_names)
            .with_context(|| format!("loading {}", path.display()))?;
        let x = match &self.standardizer {
            Some(s) => s.apply(&x)?,
            None => x,
        };
        Ok(TestPoints { x, y: None })
    }

    /// Loads labelled points in the training class order and covariate scale.
    pub fn load_test(&self, path: &Path) -> Result<Dataset> {
        let opts = LoadOptions {
            label_column: self.args.label_column.clone(),
            class_order: Some(self.ds.class_names.clone()),
        };
        let ds = load_any(path, &opts)?;
        if ds.x.cols() != self.ds.x.cols() {
            return Err(boltzknn::Error::DimensionMismatch {
                expected: self.ds.x.cols(),
                got: ds.x.cols(),
            })
            .with_context(|| format!("covariates of {}", path.display()));
        }
        match &self.standardizer {
            Some(s) => Ok(s.apply_dataset(&ds)?),
            None => Ok(ds),
        }
    }

    pub fn min_class_size(&self) -> usize {
        self.ds
            .y
            .class_counts()
            .into_iter()
            .filter(|&c| c > 0)
            .min()
            .unwrap_or(0)
    }
}

/// Creates the output directory and returns `dir/name`, refusing to
/// replace an existing file unless `force`.
pub fn output(dir: &Path, name: &str, force: bool) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    if path.exists() && !force {
        return Err(ConfigError(format!(
            "{} exists; pass --force to overwrite",
            path.display()
        ))
        .into());
    }
    Ok(path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}
