//! Contextual decomposition for ReLU MLPs.
//!
//! Activations are split into a relevant part β and an irrelevant part γ that
//! always sum to the ordinary activations:
//!
//! - affine layer: `β' = Wβ + b·|Wβ|/(|Wβ|+|Wγ|)`, `γ' = Wγ + (rest of b)`;
//!   when both magnitudes fall below [`CD_TIE_EPS`] the bias is split evenly.
//! - ReLU: `β' = ReLU(β)`, `γ' = ReLU(β+γ) − ReLU(β)`.

use super::{AttributionResult, MethodKind};
use crate::error::{Result, TrimError};
use crate::model::MlpModel;
use crate::numeric::NdArray;

pub const CD_TIE_EPS: f64 = 1e-12;

/// Input split into relevant and irrelevant parts.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub relevant: NdArray,
    pub irrelevant: NdArray,
}

impl Decomposition {
    pub fn new(relevant: NdArray, irrelevant: NdArray) -> Result<Self> {
        if relevant.len() != irrelevant.len() {
            return Err(TrimError::dim(
                "decomposition",
                relevant.len(),
                irrelevant.len(),
            ));
        }
        Ok(Self {
            relevant,
            irrelevant,
        })
    }

    /// β = `relevant`, γ = `x − relevant`.
    pub fn from_input(x: &NdArray, relevant: NdArray) -> Result<Self> {
        let irrelevant = x.sub(&relevant)?;
        Self::new(relevant, irrelevant)
    }

    /// β keeps the coordinates where `mask` is true.
    pub fn masked(x: &NdArray, mask: &[bool]) -> Result<Self> {
        if mask.len() != x.len() {
            return Err(TrimError::dim("decomposition mask", x.len(), mask.len()));
        }
        let relevant = x
            .data()
            .iter()
            .zip(mask)
            .map(|(&v, &m)| if m { v } else { 0.0 })
            .collect();
        Self::from_input(x, NdArray::from_vec(relevant))
    }
}

pub(crate) fn propagate(model: &MlpModel, beta: &[f64], gamma: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let last = model.layers.len() - 1;
    let mut beta = beta.to_vec();
    let mut gamma = gamma.to_vec();
    for (l, layer) in model.layers.iter().enumerate() {
        let zb = layer.linear(&beta);
        let zg = layer.linear(&gamma);
        let mut nb = Vec::with_capacity(zb.len());
        let mut ng = Vec::with_capacity(zb.len());
        for ((&b_lin, &g_lin), &bias) in zb.iter().zip(&zg).zip(&layer.bias) {
            let (ab, ag) = (b_lin.abs(), g_lin.abs());
            let share = if ab < CD_TIE_EPS && ag < CD_TIE_EPS {
                0.5
            } else {
                ab / (ab + ag)
            };
            nb.push(b_lin + bias * share);
            ng.push(g_lin + bias * (1.0 - share));
        }
        if l < last {
            for (b, g) in nb.iter_mut().zip(ng.iter_mut()) {
                let rb = b.max(0.0);
                let rall = (*b + *g).max(0.0);
                *g = rall - rb;
                *b = rb;
            }
        }
        beta = nb;
        gamma = ng;
    }
    (beta, gamma)
}

/// Propagates a decomposition through `model` and returns the relevant and
/// irrelevant contributions to output `output_index`. Their sum equals the
/// ordinary forward pass.
pub fn cd_forward(model: &MlpModel, d: &Decomposition, output_index: usize) -> Result<(f64, f64)> {
    let width = model.input_width();
    if d.relevant.len() != width {
        return Err(TrimError::dim("cd_forward input", width, d.relevant.len()));
    }
    if output_index >= model.output_width() {
        return Err(TrimError::InvalidArgument(format!(
            "output index {output_index} out of range"
        )));
    }
    let (b, g) = propagate(model, d.relevant.data(), d.irrelevant.data());
    Ok((b[output_index], g[output_index]))
}

/// CD score of each group of raw input coordinates, scored one group at a
/// time with the rest of the input irrelevant.
pub fn cd_group_scores(
    model: &MlpModel,
    x: &NdArray,
    groups: &[Vec<usize>],
) -> Result<AttributionResult> {
    let mut scores = Vec::with_capacity(groups.len());
    for g in groups {
        let mut mask = vec![false; x.len()];
        for &i in g {
            *mask.get_mut(i).ok_or_else(|| {
                TrimError::InvalidArgument(format!("group index {i} out of range"))
            })? = true;
        }
        scores.push(cd_forward(model, &Decomposition::masked(x, &mask)?, 0)?.0);
    }
    Ok(AttributionResult {
        method: MethodKind::Cd,
        scores,
        completeness_gap: None,
        output: model.predict_one(x.data(), 0)?,
        baseline_output: 0.0,
        standard_errors: None,
    })
}
