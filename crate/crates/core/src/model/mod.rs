//! Fully connected ReLU networks: the model `f` whose predictions are explained.

mod checkpoint;
mod mlp;
mod train;

pub use checkpoint::{load_model, save_model, ModelCheckpoint, CHECKPOINT_FORMAT_VERSION};
pub use mlp::{grad_input, init_params, ForwardCache, Layer, MlpModel, MlpSpec, OutputHead};
pub use train::{train, Optimizer, TrainConfig, TrainOutcome};
