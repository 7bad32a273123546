//! Local attribution methods.
//!
//! Contextual decomposition works on the layer structure of an [`MlpModel`];
//! the other methods only need a scalar function with gradients, so they take
//! any [`ScalarFunction`]. That lets the same code explain `f` on raw inputs
//! and the reparametrized `f ∘ T⁻¹` on transform coefficients.

mod cd;
mod gradient;
mod shapley;

use serde::{Deserialize, Serialize};

use crate::model::MlpModel;

pub use cd::{cd_forward, cd_group_scores, Decomposition, CD_TIE_EPS};
pub use gradient::{input_x_gradient, integrated_gradients};
pub use shapley::{shapley, ShapleyConfig, ShapleyMode, MAX_EXACT_GROUPS};

/// Which attribution backend to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    /// Contextual decomposition.
    Cd,
    /// Integrated gradients.
    Ig,
    /// Input × gradient, the DeepLIFT-rescale stand-in.
    InputXGradient,
    /// Baseline Shapley values.
    Shapley,
}

impl MethodKind {
    pub const ALL: [MethodKind; 4] = [
        MethodKind::Cd,
        MethodKind::Ig,
        MethodKind::InputXGradient,
        MethodKind::Shapley,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MethodKind::Cd => "cd",
            MethodKind::Ig => "ig",
            MethodKind::InputXGradient => "input_x_gradient",
            MethodKind::Shapley => "shapley",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cd" => Some(MethodKind::Cd),
            "ig" | "integrated_gradients" => Some(MethodKind::Ig),
            "input_x_gradient" | "ixg" | "deeplift" => Some(MethodKind::InputXGradient),
            "shapley" | "shap" => Some(MethodKind::Shapley),
            _ => None,
        }
    }
}

impl std::fmt::Display for MethodKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-feature (or per-group) attributions with completeness diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributionResult {
    pub method: MethodKind,
    pub scores: Vec<f64>,
    /// `|Σ scores − (output − baseline_output)|`, for methods where that sum
    /// is expected to vanish.
    pub completeness_gap: Option<f64>,
    pub output: f64,
    pub baseline_output: f64,
    /// Per-score standard errors of a sampled estimator.
    pub standard_errors: Option<Vec<f64>>,
}

impl AttributionResult {
    pub fn total(&self) -> f64 {
        self.scores.iter().sum()
    }
}

/// A differentiable scalar function of a flat input.
pub trait ScalarFunction: Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Values for `xs.len() / dim()` row-major inputs.
    fn values(&self, xs: &[f64]) -> Vec<f64> {
        xs.chunks(self.dim()).map(|x| self.value(x)).collect()
    }

    /// Row-major gradients for row-major inputs.
    fn gradients(&self, xs: &[f64]) -> Vec<f64> {
        xs.chunks(self.dim())
            .flat_map(|x| self.gradient(x))
            .collect()
    }
}

/// One output of an MLP viewed as a scalar function (the logit for a
/// classification head).
#[derive(Clone, Copy, Debug)]
pub struct ModelOutput<'a> {
    pub model: &'a MlpModel,
    pub index: usize,
}

impl<'a> ModelOutput<'a> {
    pub fn new(model: &'a MlpModel) -> Self {
        Self { model, index: 0 }
    }
}

impl ScalarFunction for ModelOutput<'_> {
    fn dim(&self) -> usize {
        self.model.input_width()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.model.eval_single(x)[self.index]
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.model.grad_single(x, self.index)
    }

    fn values(&self, xs: &[f64]) -> Vec<f64> {
        let batch = xs.len() / self.dim();
        let cache = self.model.forward_batch(xs, batch);
        let w = self.model.output_width();
        cache.output().chunks(w).map(|o| o[self.index]).collect()
    }

    fn gradients(&self, xs: &[f64]) -> Vec<f64> {
        let batch = xs.len() / self.dim();
        let cache = self.model.forward_batch(xs, batch);
        self.model.backward_input(&cache, self.index)
    }
}
