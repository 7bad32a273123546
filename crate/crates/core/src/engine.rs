//! Attribution of masked transform coefficients.
//!
//! Given a model `f` on raw inputs and a transform `T`, the model is
//! reparametrized as `f′(s) = f(T⁻¹(s) + r)` where `r = x − T⁻¹(T(x))` is the
//! residual the transform cannot represent. A mask `M` picks the coefficients
//! to score.
//!
//! - CD scores the relevant part `β = T⁻¹(M ⊙ T(x))` against `γ = x − β`, so
//!   any residual belongs to γ.
//! - Gradient methods and Shapley values run on `f′` with a baseline equal to
//!   `T(x)` with the masked coefficients zeroed; the unmasked coefficients keep
//!   their actual values and the residual stays fixed.

use serde::{Deserialize, Serialize};

use crate::attribution::{
    cd_forward, input_x_gradient, integrated_gradients, shapley, AttributionResult, Decomposition,
    MethodKind, ScalarFunction, ShapleyConfig,
};
use crate::error::{Result, TrimError};
use crate::model::MlpModel;
use crate::numeric::NdArray;
use crate::transforms::{band_mask, label_end, tile_bands, BandSpec, Mask, Transform};

pub const DEFAULT_IG_STEPS: usize = 256;

/// Settings for the non-CD backends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodOptions {
    pub ig_steps: usize,
    pub shapley: ShapleyConfig,
}

impl Default for MethodOptions {
    fn default() -> Self {
        Self {
            ig_steps: DEFAULT_IG_STEPS,
            shapley: ShapleyConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrimQuery {
    pub transform: Transform,
    pub mask: Mask,
    pub method: MethodKind,
    pub options: MethodOptions,
}

impl TrimQuery {
    pub fn new(transform: Transform, mask: Mask, method: MethodKind) -> Self {
        Self {
            transform,
            mask,
            method,
            options: MethodOptions::default(),
        }
    }

    pub fn with_options(mut self, options: MethodOptions) -> Self {
        self.options = options;
        self
    }
}

/// Score of one masked coefficient set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimScore {
    pub method: MethodKind,
    pub score: f64,
    /// `f(x)`.
    pub prediction: f64,
    /// CD: the irrelevant contribution γ. Other methods: `f′` at the baseline.
    pub complement: f64,
    pub completeness_gap: Option<f64>,
    pub standard_error: Option<f64>,
    /// Per-coefficient (gradient methods) or per-group (Shapley) attributions
    /// in coefficient space.
    pub attribution: Option<AttributionResult>,
}

/// `f′(s) = f(T⁻¹(s) + r)`.
pub struct Reparametrized<'a> {
    model: &'a MlpModel,
    transform: &'a Transform,
    residual: Vec<f64>,
    output_index: usize,
}

impl<'a> Reparametrized<'a> {
    /// Reparametrization around `x`, carrying its residual.
    pub fn around(model: &'a MlpModel, transform: &'a Transform, x: &NdArray) -> Result<Self> {
        check_compatible(model, transform, x)?;
        Ok(Self {
            model,
            transform,
            residual: transform.residual(x)?.into_data(),
            output_index: 0,
        })
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    fn raw(&self, s: &[f64]) -> Vec<f64> {
        let mut x = self.transform.inverse_raw(s);
        x.iter_mut().zip(&self.residual).for_each(|(a, r)| *a += r);
        x
    }
}

impl ScalarFunction for Reparametrized<'_> {
    fn dim(&self) -> usize {
        self.transform.coef_len()
    }

    fn value(&self, s: &[f64]) -> f64 {
        self.model.eval_single(&self.raw(s))[self.output_index]
    }

    fn gradient(&self, s: &[f64]) -> Vec<f64> {
        let g = self.model.grad_single(&self.raw(s), self.output_index);
        self.transform.pullback(&g)
    }

    fn values(&self, ss: &[f64]) -> Vec<f64> {
        let raw: Vec<f64> = ss.chunks(self.dim()).flat_map(|s| self.raw(s)).collect();
        let batch = ss.len() / self.dim();
        let cache = self.model.forward_batch(&raw, batch);
        let w = self.model.output_width();
        cache
            .output()
            .chunks(w)
            .map(|o| o[self.output_index])
            .collect()
    }

    fn gradients(&self, ss: &[f64]) -> Vec<f64> {
        let raw: Vec<f64> = ss.chunks(self.dim()).flat_map(|s| self.raw(s)).collect();
        let batch = ss.len() / self.dim();
        let cache = self.model.forward_batch(&raw, batch);
        let grads = self.model.backward_input(&cache, self.output_index);
        grads
            .chunks(self.transform.raw_len())
            .flat_map(|g| self.transform.pullback(g))
            .collect()
    }
}

fn check_compatible(model: &MlpModel, transform: &Transform, x: &NdArray) -> Result<()> {
    if model.input_width() != transform.raw_len() {
        return Err(TrimError::Contract(format!(
            "model input width {} does not match transform raw width {}",
            model.input_width(),
            transform.raw_len()
        )));
    }
    if x.len() != transform.raw_len() {
        return Err(TrimError::dim("TRIM input", transform.raw_len(), x.len()));
    }
    Ok(())
}

/// Attribution of the coefficients selected by `q.mask` to the prediction
/// `f(x)`.
pub fn trim_score(model: &MlpModel, x: &NdArray, q: &TrimQuery) -> Result<TrimScore> {
    check_compatible(model, &q.transform, x)?;
    let groups = q.transform.groups();
    q.mask.validate(&groups, q.transform.coef_len())?;
    let prediction = model.predict_one(x.data(), 0)?;
    let s = q.transform.apply(x)?;

    if q.method == MethodKind::Cd {
        let relevant = q.transform.invert(&s.masked(&q.mask))?;
        let d = Decomposition::from_input(x, relevant)?;
        let (beta, gamma) = cd_forward(model, &d, 0)?;
        return Ok(TrimScore {
            method: MethodKind::Cd,
            score: beta,
            prediction,
            complement: gamma,
            completeness_gap: Some((beta + gamma - prediction).abs()),
            standard_error: None,
            attribution: None,
        });
    }

    let f = Reparametrized::around(model, &q.transform, x)?;
    let baseline = q.mask.complement().apply(&s.values);
    let (result, score, standard_error) = match q.method {
        MethodKind::Ig | MethodKind::InputXGradient => {
            let r = if q.method == MethodKind::Ig {
                integrated_gradients(&f, &s.values, &baseline, q.options.ig_steps)?
            } else {
                input_x_gradient(&f, &s.values, &baseline)?
            };
            let score = r
                .scores
                .iter()
                .zip(q.mask.entries())
                .filter(|(_, &m)| m)
                .map(|(v, _)| v)
                .sum();
            (r, score, None)
        }
        MethodKind::Shapley => {
            let players: Vec<Vec<usize>> = groups.iter().map(|g| g.indices.clone()).collect();
            let r = shapley(&f, &s.values, &players, &baseline, &q.options.shapley)?;
            let selected: Vec<usize> = groups
                .iter()
                .enumerate()
                .filter(|(_, g)| q.mask.get(g.indices[0]))
                .map(|(i, _)| i)
                .collect();
            let score = selected.iter().map(|&i| r.scores[i]).sum();
            let se = r
                .standard_errors
                .as_ref()
                .map(|e| selected.iter().map(|&i| e[i] * e[i]).sum::<f64>().sqrt());
            (r, score, se)
        }
        MethodKind::Cd => unreachable!(),
    };
    Ok(TrimScore {
        method: q.method,
        score,
        prediction,
        complement: result.baseline_output,
        completeness_gap: result.completeness_gap,
        standard_error,
        attribution: Some(result),
    })
}

/// One score per coefficient group of the transform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupScores {
    pub method: MethodKind,
    pub labels: Vec<usize>,
    pub scores: Vec<f64>,
    pub prediction: f64,
}

impl GroupScores {
    /// Label of the highest-scoring group (first one on ties).
    pub fn argmax_label(&self) -> usize {
        self.labels[argmax(&self.scores)]
    }

    pub fn normalized(&self) -> Vec<f64> {
        self.scores.iter().map(|s| s / self.prediction).collect()
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Scores every coefficient group of `transform` on its own.
pub fn group_scores(
    model: &MlpModel,
    x: &NdArray,
    transform: &Transform,
    method: MethodKind,
    options: &MethodOptions,
) -> Result<GroupScores> {
    let groups = transform.groups();
    let n = transform.coef_len();
    let mut query =
        TrimQuery::new(transform.clone(), Mask::zeros(n), method).with_options(*options);
    let mut scores = Vec::with_capacity(groups.len());
    let mut prediction = 0.0;
    for g in &groups {
        query.mask = Mask::from_groups(n, [g]);
        let r = trim_score(model, x, &query)?;
        prediction = r.prediction;
        scores.push(r.score);
    }
    Ok(GroupScores {
        method,
        labels: groups.iter().map(|g| g.label).collect(),
        scores,
        prediction,
    })
}

/// Band importances normalized by the prediction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandCurve {
    pub method: MethodKind,
    pub bands: Vec<BandSpec>,
    pub centers: Vec<f64>,
    pub scores: Vec<f64>,
    /// `score / f(x)`, signed.
    pub normalized: Vec<f64>,
    pub prediction: f64,
}

impl BandCurve {
    pub fn argmax_band(&self) -> usize {
        argmax(&self.normalized)
    }
}

/// Tiles the spectrum into bands of `width` frequencies, scores each band and
/// divides by `f(x)`.
///
/// A zero prediction yields [`TrimError::ZeroPrediction`] carrying the raw
/// band scores.
pub fn band_sweep(
    model: &MlpModel,
    x: &NdArray,
    transform: &Transform,
    width: usize,
    method: MethodKind,
    options: &MethodOptions,
) -> Result<BandCurve> {
    let bands = tile_bands(label_end(transform)?, width)?;
    let mut query = TrimQuery::new(transform.clone(), Mask::zeros(transform.coef_len()), method)
        .with_options(*options);
    let mut scores = Vec::with_capacity(bands.len());
    let mut prediction = model.predict_one(x.data(), 0)?;
    for &band in &bands {
        query.mask = band_mask(transform, band)?;
        let r = trim_score(model, x, &query)?;
        prediction = r.prediction;
        scores.push(r.score);
    }
    if prediction == 0.0 {
        return Err(TrimError::ZeroPrediction { raw_scores: scores });
    }
    Ok(BandCurve {
        method,
        centers: bands.iter().map(|b| b.center()).collect(),
        normalized: scores.iter().map(|s| s / prediction).collect(),
        bands,
        scores,
        prediction,
    })
}
