use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attribution::{MethodKind, ShapleyConfig};
use crate::error::{Result, TrimError};
use crate::experiments::SyntheticConfig;
use crate::model::{OutputHead, TrainConfig};
use crate::transforms::DictionaryConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Identity,
    Dft1d,
    Dft2d,
    Dictionary,
}

/// Architecture trained by `train`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub hidden: Vec<usize>,
    pub head: OutputHead,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            hidden: vec![128, 128],
            head: OutputHead::Logit,
        }
    }
}

/// What `attribute` and `bands` score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuerySection {
    pub transform: TransformKind,
    /// `[height, width]` for `dft2d`.
    pub image_shape: Option<[usize; 2]>,
    pub method: MethodKind,
    /// Frequency-group labels scored jointly by `attribute`; each group is
    /// scored on its own when absent.
    pub groups: Option<Vec<usize>>,
    pub band_width: usize,
    pub ig_steps: usize,
    pub shapley: ShapleyConfig,
}

impl Default for QuerySection {
    fn default() -> Self {
        Self {
            transform: TransformKind::Dft1d,
            image_shape: None,
            method: MethodKind::Cd,
            groups: None,
            band_width: 4,
            ig_steps: crate::engine::DEFAULT_IG_STEPS,
            shapley: ShapleyConfig::default(),
        }
    }
}

/// Input and artifact paths. Relative paths resolve against the working
/// directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// Training table for `train`: features with the target in the last
    /// column.
    pub train: Option<PathBuf>,
    /// Inputs to explain, one per row.
    pub input: Option<PathBuf>,
    /// Model checkpoint for `attribute`, `bands` and the TRIM penalty of
    /// `learn-transform`.
    pub model: Option<PathBuf>,
    /// Dictionary checkpoint for the `dictionary` transform.
    pub dictionary: Option<PathBuf>,
    /// Samples for `learn-transform`.
    pub samples: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; when set it replaces every section's own seed.
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub benchmark: SyntheticConfig,
    pub model: ModelSection,
    pub train: TrainConfig,
    pub query: QuerySection,
    pub dictionary: DictionaryConfig,
    pub data: DataSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            out: PathBuf::from("trim-out"),
            format: OutputFormat::Both,
            benchmark: SyntheticConfig::default(),
            model: ModelSection::default(),
            train: TrainConfig::default(),
            query: QuerySection::default(),
            dictionary: DictionaryConfig::default(),
            data: DataSection::default(),
        }
    }
}

impl RunConfig {
    /// Parses a TOML document; errors name the offending key path.
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| TrimError::Config(e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner().to_string();
            let inner = inner.trim_end();
            if path == "." {
                TrimError::Config(inner.to_string())
            } else {
                TrimError::Config(format!("at `{path}`: {inner}"))
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| TrimError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            TrimError::Config(m) => TrimError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Default configuration rendered as TOML.
    pub fn defaults_toml() -> String {
        toml::to_string(&RunConfig::default()).expect("default config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn defaults_round_trip() {
        let text = RunConfig::defaults_toml();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), RunConfig::default());
    }

    #[test]
    fn sections_override_fields() {
        let cfg = RunConfig::from_toml(
            "seed = 3\nformat = \"json\"\n[benchmark]\nn_datasets = 7\nmethods = [\"cd\", \"ig\"]\n[benchmark.train]\nepochs = 2\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(3));
        assert_eq!(cfg.format, OutputFormat::Json);
        assert_eq!(cfg.benchmark.n_datasets, 7);
        assert_eq!(cfg.benchmark.methods, vec![MethodKind::Cd, MethodKind::Ig]);
        assert_eq!(cfg.benchmark.train.epochs, 2);
        assert_eq!(cfg.benchmark.d, 32);
    }

    #[test]
    fn unknown_key_names_its_path() {
        let err = RunConfig::from_toml("[benchmark.train]\nepochz = 2\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("benchmark.train"), "{err}");
        assert!(err.contains("epochz"), "{err}");
    }

    #[test]
    fn bad_type_names_its_path() {
        let err = RunConfig::from_toml("[query]\nband_width = \"wide\"\n")
            .unwrap_err()
            .to_string();
        assert!(err.contains("query.band_width"), "{err}");
    }
}
