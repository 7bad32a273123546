use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::{Layer, MlpModel, MlpSpec};
use crate::error::{Result, TrimError};
use crate::numeric::NdArray;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// On-disk form of a model. Weights are nested out×in arrays.
///
/// `serde_json` writes the shortest decimal that parses back to the same
/// `f64`, so a save/load cycle reproduces parameters bit for bit.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCheckpoint {
    pub format_version: u32,
    pub spec: MlpSpec,
    pub weights: Vec<Vec<Vec<f64>>>,
    pub biases: Vec<Vec<f64>>,
}

impl From<&MlpModel> for ModelCheckpoint {
    fn from(model: &MlpModel) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            spec: model.spec.clone(),
            weights: model
                .layers
                .iter()
                .map(|l| {
                    (0..l.out_width())
                        .map(|o| l.weights.row(o).to_vec())
                        .collect()
                })
                .collect(),
            biases: model.layers.iter().map(|l| l.bias.clone()).collect(),
        }
    }
}

impl TryFrom<ModelCheckpoint> for MlpModel {
    type Error = TrimError;

    fn try_from(ck: ModelCheckpoint) -> Result<Self> {
        if ck.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(TrimError::format(
                "model checkpoint",
                format!("unsupported format_version {}", ck.format_version),
            ));
        }
        if ck.weights.len() != ck.biases.len() {
            return Err(TrimError::format(
                "model checkpoint",
                "weights and biases list different layer counts",
            ));
        }
        let layers = ck
            .weights
            .iter()
            .zip(ck.biases)
            .map(|(w, bias)| {
                Ok(Layer {
                    weights: NdArray::from_rows(w)?,
                    bias,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MlpModel::from_layers(ck.spec, layers)
    }
}

pub fn save_model(model: &MlpModel, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(&ModelCheckpoint::from(model))
        .map_err(|e| TrimError::format("model checkpoint", e))?;
    fs::write(path, json).map_err(|e| TrimError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    let text = fs::read_to_string(path).map_err(|e| TrimError::io(path, e))?;
    let ck: ModelCheckpoint = serde_json::from_str(&text)
        .map_err(|e| TrimError::format(path.display().to_string(), e))?;
    MlpModel::try_from(ck)
}
