//! Learning a linear dictionary transform by gradient descent.
//!
//! Parameters are an analysis matrix (k×n) producing codes `c = A x` and a
//! synthesis matrix (n×k) reconstructing `x̂ = S c`. The objective, averaged
//! over samples, is
//!
//! ```text
//! λ_sparse·‖A x‖₁ + λ_recon·‖x − S A x‖₂² + λ_trim·‖c ⊙ (Sᵀ ∇f(x))‖₁
//! ```
//!
//! The last term is the ℓ1 norm of input×gradient attributions of the model
//! in code space. Reconstruction is a penalty rather than a hard constraint.
//! `∇f(x)` does not depend on the parameters and is treated as a constant.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Transform;
use crate::error::{Result, TrimError};
use crate::model::MlpModel;
use crate::numeric::{NdArray, SeededRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionaryInit {
    /// Gaussian analysis (variance 1/n) with its pseudo-inverse as synthesis.
    Random,
    /// Analysis = synthesis = I; requires `atoms == n`.
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DictionaryConfig {
    pub atoms: usize,
    pub lambda_sparse: f64,
    pub lambda_recon: f64,
    pub lambda_trim: f64,
    pub steps: usize,
    pub learning_rate: f64,
    pub init: DictionaryInit,
}

impl Default for DictionaryConfig {
    fn default() -> Self {
        Self {
            atoms: 8,
            lambda_sparse: 0.05,
            lambda_recon: 1.0,
            lambda_trim: 0.0,
            steps: 500,
            learning_rate: 0.1,
            init: DictionaryInit::Random,
        }
    }
}

/// Mean per-sample objective terms (unweighted) and the weighted total.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub l1: f64,
    pub reconstruction: f64,
    pub trim_l1: f64,
    pub total: f64,
}

#[derive(Clone, Debug)]
pub struct LearnedDictionary {
    pub transform: Transform,
    /// Loss before each step, plus the final loss; `steps + 1` entries.
    pub trace: Vec<LossTerms>,
    pub seed: u64,
}

struct Params {
    analysis: NdArray,
    synthesis: NdArray,
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn evaluate(
    p: &Params,
    x: &NdArray,
    grads: Option<&NdArray>,
    cfg: &DictionaryConfig,
) -> Result<(LossTerms, Option<Params>)> {
    let n_samples = x.rows() as f64;
    // codes: samples×k, recon: samples×n
    let codes = x.matmul(&p.analysis.transpose()?)?;
    let recon = codes.matmul(&p.synthesis.transpose()?)?;
    let resid = x.sub(&recon)?;
    // h = Sᵀ g per sample, as rows: G·S (samples×k)
    let h = match grads {
        Some(g) => Some(g.matmul(&p.synthesis)?),
        None => None,
    };

    let l1 = codes.data().iter().map(|v| v.abs()).sum::<f64>() / n_samples;
    let reconstruction = resid.data().iter().map(|v| v * v).sum::<f64>() / n_samples;
    let trim_l1 = h.as_ref().map_or(0.0, |h| {
        codes
            .data()
            .iter()
            .zip(h.data())
            .map(|(c, hv)| (c * hv).abs())
            .sum::<f64>()
            / n_samples
    });
    let total =
        cfg.lambda_sparse * l1 + cfg.lambda_recon * reconstruction + cfg.lambda_trim * trim_l1;
    let terms = LossTerms {
        l1,
        reconstruction,
        trim_l1,
        total,
    };
    if !total.is_finite() {
        return Ok((terms, None));
    }

    // d/dc of each term, rows per sample.
    let d_resid_c = resid.matmul(&p.synthesis)?; // r·S = (Sᵀ r)ᵀ
    let mut d_codes = codes.map(|c| cfg.lambda_sparse * sign(c));
    d_codes
        .data_mut()
        .iter_mut()
        .zip(d_resid_c.data())
        .for_each(|(d, r)| *d -= 2.0 * cfg.lambda_recon * r);
    let mut trim_weight = None;
    if let (Some(h), true) = (&h, cfg.lambda_trim > 0.0) {
        // u = sign(c ⊙ h); d/dc = λ u h; d/dh = λ u c
        let u = codes.zip_with(h, |c, hv| sign(c * hv))?;
        d_codes
            .data_mut()
            .iter_mut()
            .zip(u.data().iter().zip(h.data()))
            .for_each(|(d, (uv, hv))| *d += cfg.lambda_trim * uv * hv);
        trim_weight = Some(u.zip_with(&codes, |uv, c| uv * c)?);
    }

    let grad_analysis = d_codes.transpose()?.matmul(x)?.scale(1.0 / n_samples);
    let mut grad_synthesis = resid
        .transpose()?
        .matmul(&codes)?
        .scale(-2.0 * cfg.lambda_recon / n_samples);
    if let (Some(w), Some(g)) = (trim_weight, grads) {
        let extra = g
            .transpose()?
            .matmul(&w)?
            .scale(cfg.lambda_trim / n_samples);
        grad_synthesis = grad_synthesis.add(&extra)?;
    }
    Ok((
        terms,
        Some(Params {
            analysis: grad_analysis,
            synthesis: grad_synthesis,
        }),
    ))
}

/// Learns a dictionary transform from `x` (samples×n).
///
/// `model` is required when `lambda_trim > 0`; its input width must be n.
pub fn learn_dictionary(
    x: &NdArray,
    cfg: &DictionaryConfig,
    model: Option<&MlpModel>,
    rng: &mut SeededRng,
) -> Result<LearnedDictionary> {
    if x.ndim() != 2 {
        return Err(TrimError::InvalidArgument(
            "training data must be samples×n".into(),
        ));
    }
    let n = x.cols();
    let k = cfg.atoms;
    if k == 0 {
        return Err(TrimError::InvalidArgument(
            "atom count must be positive".into(),
        ));
    }
    let lambdas = [cfg.lambda_sparse, cfg.lambda_recon, cfg.lambda_trim];
    if lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(TrimError::InvalidArgument(
            "penalty weights must be finite and non-negative".into(),
        ));
    }
    if !(cfg.learning_rate.is_finite() && cfg.learning_rate >= 0.0) {
        return Err(TrimError::InvalidArgument(
            "learning rate must be finite and non-negative".into(),
        ));
    }
    let grads = if cfg.lambda_trim > 0.0 {
        let model = model.ok_or_else(|| {
            TrimError::InvalidArgument("lambda_trim > 0 needs a model to attribute".into())
        })?;
        if model.input_width() != n {
            return Err(TrimError::dim("model input width", n, model.input_width()));
        }
        let mut g = Vec::with_capacity(x.len());
        for r in 0..x.rows() {
            g.extend(model.grad_single(x.row(r), 0));
        }
        Some(NdArray::new(vec![x.rows(), n], g)?)
    } else {
        None
    };

    let mut params = match cfg.init {
        DictionaryInit::Identity => {
            if k != n {
                return Err(TrimError::InvalidArgument(format!(
                    "identity initialization needs atoms == n ({k} != {n})"
                )));
            }
            Params {
                analysis: NdArray::identity(n),
                synthesis: NdArray::identity(n),
            }
        }
        DictionaryInit::Random => {
            let std = 1.0 / (n as f64).sqrt();
            let analysis =
                NdArray::new(vec![k, n], (0..k * n).map(|_| std * rng.normal()).collect())?;
            let synthesis = super::pseudo_inverse(&analysis)?;
            Params {
                analysis,
                synthesis,
            }
        }
    };

    let mut trace = Vec::with_capacity(cfg.steps + 1);
    for step in 0..=cfg.steps {
        let (terms, grad) = evaluate(&params, x, grads.as_ref(), cfg)?;
        trace.push(terms);
        let Some(grad) = grad else {
            return Err(TrimError::LearningDiverged { step });
        };
        if step == cfg.steps {
            break;
        }
        let lr = cfg.learning_rate;
        params
            .analysis
            .data_mut()
            .iter_mut()
            .zip(grad.analysis.data())
            .for_each(|(p, g)| *p -= lr * g);
        params
            .synthesis
            .data_mut()
            .iter_mut()
            .zip(grad.synthesis.data())
            .for_each(|(p, g)| *p -= lr * g);
    }

    Ok(LearnedDictionary {
        transform: Transform::dictionary_with_synthesis(params.analysis, params.synthesis)?,
        trace,
        seed: rng.seed(),
    })
}

pub const DICTIONARY_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionaryCheckpoint {
    pub format_version: u32,
    pub atoms: usize,
    pub n: usize,
    pub analysis: Vec<Vec<f64>>,
    pub synthesis: Vec<Vec<f64>>,
    pub lambda_sparse: f64,
    pub lambda_recon: f64,
    pub lambda_trim: f64,
    pub learning_rate: f64,
    pub steps: usize,
    pub seed: u64,
}

fn rows_of(a: &NdArray) -> Vec<Vec<f64>> {
    (0..a.rows()).map(|r| a.row(r).to_vec()).collect()
}

impl DictionaryCheckpoint {
    pub fn new(learned: &LearnedDictionary, cfg: &DictionaryConfig) -> Result<Self> {
        let Transform::LinearDictionary {
            analysis,
            synthesis,
        } = &learned.transform
        else {
            return Err(TrimError::InvalidArgument(
                "not a dictionary transform".into(),
            ));
        };
        Ok(Self {
            format_version: DICTIONARY_FORMAT_VERSION,
            atoms: analysis.rows(),
            n: analysis.cols(),
            analysis: rows_of(analysis),
            synthesis: rows_of(synthesis),
            lambda_sparse: cfg.lambda_sparse,
            lambda_recon: cfg.lambda_recon,
            lambda_trim: cfg.lambda_trim,
            learning_rate: cfg.learning_rate,
            steps: cfg.steps,
            seed: learned.seed,
        })
    }

    pub fn into_transform(self) -> Result<Transform> {
        if self.format_version != DICTIONARY_FORMAT_VERSION {
            return Err(TrimError::format(
                "dictionary checkpoint",
                format!("unsupported format_version {}", self.format_version),
            ));
        }
        let analysis = NdArray::from_rows(&self.analysis)?;
        let synthesis = NdArray::from_rows(&self.synthesis)?;
        if analysis.shape() != [self.atoms, self.n] {
            return Err(TrimError::format(
                "dictionary checkpoint",
                "analysis shape disagrees with atoms/n",
            ));
        }
        Transform::dictionary_with_synthesis(analysis, synthesis)
    }
}

pub fn save_dictionary(ck: &DictionaryCheckpoint, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(ck).map_err(|e| TrimError::format("dictionary", e))?;
    fs::write(path, json).map_err(|e| TrimError::io(path, e))
}

pub fn load_dictionary(path: &Path) -> Result<Transform> {
    let text = fs::read_to_string(path).map_err(|e| TrimError::io(path, e))?;
    let ck: DictionaryCheckpoint = serde_json::from_str(&text)
        .map_err(|e| TrimError::format(path.display().to_string(), e))?;
    ck.into_transform()
}
