use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::weights::{read_weight_tensor, WeightTensor};
use crate::{Error, Result};

/// Filters with a norm below this are left out of the pairwise mean.
pub const MIN_FILTER_NORM: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterSimilarity {
    /// Mean cosine over unordered pairs `i < j` of usable filters.
    pub mean: f64,
    pub filters: usize,
    pub pairs: usize,
    /// Indices of zero-norm filters that were skipped.
    pub excluded: Vec<usize>,
}

/// Mean pairwise cosine similarity among the `O` filters of a layer.
pub fn filter_similarity(tensor: &WeightTensor) -> Result<FilterSimilarity> {
    let mut units: Vec<Vec<f64>> = Vec::with_capacity(tensor.filter_count());
    let mut excluded = Vec::new();
    for (i, filter) in tensor.filters().enumerate() {
        let norm = filter.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < MIN_FILTER_NORM || !norm.is_finite() {
            excluded.push(i);
        } else {
            units.push(filter.iter().map(|x| x / norm).collect());
        }
    }
    if units.len() < 2 {
        return Err(Error::Analysis(format!(
            "filter similarity needs at least 2 non-zero filters, have {} of {} (excluded {:?})",
            units.len(),
            tensor.filter_count(),
            excluded
        )));
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..units.len() {
        for j in i + 1..units.len() {
            let dot: f64 = units[i].iter().zip(&units[j]).map(|(a, b)| a * b).sum();
            sum += dot.clamp(-1.0, 1.0);
            pairs += 1;
        }
    }
    Ok(FilterSimilarity {
        mean: sum / pairs as f64,
        filters: tensor.filter_count(),
        pairs,
        excluded,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSimilarity {
    pub layer: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<[usize; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub similarity: Option<FilterSimilarity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub layers: Vec<LayerSimilarity>,
    /// Unweighted mean over the layers that succeeded.
    pub model_mean: Option<f64>,
    pub failed_layers: usize,
}

impl SimilarityReport {
    pub fn from_layers(layers: Vec<LayerSimilarity>) -> Self {
        let values: Vec<f64> = layers
            .iter()
            .filter_map(|l| l.similarity.as_ref().map(|s| s.mean))
            .collect();
        let model_mean = (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64);
        SimilarityReport {
            failed_layers: layers.len() - values.len(),
            layers,
            model_mean,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.failed_layers == 0 && self.model_mean.is_some()
    }
}

/// Per-layer similarity over WT01 files, in the order given.
pub fn model_report(paths: &[PathBuf]) -> SimilarityReport {
    let layers = paths
        .par_iter()
        .map(|path| {
            let layer = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            let tensor = read_weight_tensor(path);
            let dims = tensor.as_ref().ok().map(WeightTensor::dims);
            match tensor.and_then(|t| filter_similarity(&t)) {
                Ok(s) => LayerSimilarity {
                    layer,
                    dims,
                    similarity: Some(s),
                    error: None,
                },
                Err(e) => LayerSimilarity {
                    layer,
                    dims,
                    similarity: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    SimilarityReport::from_layers(layers)
}

/// Every regular file in `dir` is a layer; layers are ordered by file name.
pub fn model_report_dir(dir: &Path) -> Result<SimilarityReport> {
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() {
            paths.push(path);
        }
    }
    if paths.is_empty() {
        return Err(Error::Dataset {
            path: dir.to_path_buf(),
            message: "no layer files found".into(),
        });
    }
    paths.sort();
    Ok(model_report(&paths))
}
