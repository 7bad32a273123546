//! Feature attribution for ReLU networks in transformed input spaces.
//!
//! A model trained on raw inputs is explained in terms of coefficients of an
//! invertible (or pseudo-invertible) transform such as the unitary DFT or a
//! learned dictionary. See [`engine::trim_score`].

pub mod attribution;
pub mod cli;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod io;
pub mod model;
pub mod numeric;
pub mod transforms;

pub use attribution::{AttributionResult, MethodKind, ScalarFunction, ShapleyConfig, ShapleyMode};
pub use engine::{
    band_sweep, group_scores, trim_score, BandCurve, GroupScores, MethodOptions, TrimQuery,
    TrimScore,
};
pub use error::{Result, TrimError};
pub use model::{MlpModel, MlpSpec, OutputHead};
pub use numeric::{NdArray, SeededRng};
pub use transforms::{BandSpec, CoefficientVector, Layout, Mask, Transform};
