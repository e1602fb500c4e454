//! Sweep manifests: one hyperparameter axis, an ordered list of runs.
//!
//! ```json
//! {"axis_name": "temperature", "ordered": true,
//!  "runs": [{"run_id": "t0.1", "hp_value": 0.1, "rank": 512.3},
//!           {"run_id": "t0.2", "hp_value": 0.2, "embeddings_path": "t0.2.npy", "clip_cap": 2048}]}
//! ```

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::IngestError;

/// A hyperparameter value, numeric or free text (e.g. an optimizer name).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HpValue {
    Number(f64),
    Text(String),
}

impl HpValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            HpValue::Number(v) => Some(*v),
            HpValue::Text(s) => s.trim().parse().ok(),
        }
    }
}

impl fmt::Display for HpValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HpValue::Number(v) => write!(f, "{v}"),
            HpValue::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub run_id: String,
    pub hp_value: HpValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_cap: Option<f64>,
    /// Precomputed eigenspectrum decay exponent, used by alpha-based selection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl RunRecord {
    pub fn with_rank(run_id: impl Into<String>, hp_value: HpValue, rank: f64) -> Self {
        Self {
            run_id: run_id.into(),
            hp_value,
            rank: Some(rank),
            embeddings_path: None,
            clip_cap: None,
            alpha: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub axis_name: String,
    pub ordered: bool,
    pub runs: Vec<RunRecord>,
    /// Directory relative embeddings paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl RunManifest {
    /// Checks every invariant a loaded manifest must satisfy.
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.runs.is_empty() {
            return Err(IngestError::EmptyManifest);
        }
        let mut seen = HashSet::new();
        for (i, run) in self.runs.iter().enumerate() {
            if !seen.insert(run.run_id.as_str()) {
                return Err(IngestError::DuplicateRunId(run.run_id.clone()));
            }
            if run.rank.is_none() && run.embeddings_path.is_none() {
                return Err(IngestError::SchemaError(format!(
                    "run {i} ({:?}) needs a rank or an embeddings_path",
                    run.run_id
                )));
            }
            if let Some(r) = run.rank {
                if !(r.is_finite() && r >= 0.0) {
                    return Err(IngestError::SchemaError(format!(
                        "run {:?}: rank must be a nonnegative number, got {r}",
                        run.run_id
                    )));
                }
            }
            if let Some(c) = run.clip_cap {
                if !(c.is_finite() && c > 0.0) {
                    return Err(IngestError::SchemaError(format!(
                        "run {:?}: clip_cap must be positive, got {c}",
                        run.run_id
                    )));
                }
            }
            if let Some(a) = run.alpha {
                if !a.is_finite() {
                    return Err(IngestError::SchemaError(format!(
                        "run {:?}: alpha must be finite",
                        run.run_id
                    )));
                }
            }
        }
        if self.ordered {
            self.check_monotone()?;
        }
        Ok(())
    }

    fn check_monotone(&self) -> Result<(), IngestError> {
        let values = self
            .runs
            .iter()
            .map(|r| {
                r.hp_value.as_f64().filter(|v| v.is_finite()).ok_or_else(|| {
                    IngestError::SchemaError(format!(
                        "run {:?}: ordered axis needs numeric hp_value, got {:?}",
                        r.run_id, r.hp_value
                    ))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if values.len() < 2 {
            return Ok(());
        }
        let increasing = values[1] > values[0];
        for (i, w) in values.windows(2).enumerate() {
            let ok = if increasing { w[1] > w[0] } else { w[1] < w[0] };
            if !ok {
                return Err(IngestError::UnorderedValues { index: i + 1 });
            }
        }
        Ok(())
    }

    /// Absolute (or manifest-relative) location of a run's embeddings.
    pub fn embeddings_path(&self, run: &RunRecord) -> Option<PathBuf> {
        let p = run.embeddings_path.as_ref()?;
        Some(match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.clone(),
        })
    }

    pub fn position(&self, run_id: &str) -> Option<usize> {
        self.runs.iter().position(|r| r.run_id == run_id)
    }
}

pub fn parse_manifest(text: &str) -> Result<RunManifest, IngestError> {
    let manifest: RunManifest =
        serde_json::from_str(text).map_err(|e| IngestError::SchemaError(e.to_string()))?;
    manifest.validate()?;
    Ok(manifest)
}

pub fn load_manifest(path: &Path) -> Result<RunManifest, IngestError> {
    let text = fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    let mut manifest = parse_manifest(&text)?;
    manifest.base_dir = path.parent().map(Path::to_path_buf);
    Ok(manifest)
}
