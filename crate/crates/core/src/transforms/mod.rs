//! Transformations between the raw input space and an interpretation space.
//!
//! A [`Transform`] maps a raw input `x` to coefficients `s = T(x)` and back.
//! Fourier variants are exact orthonormal maps; a [`Transform::LinearDictionary`]
//! may lose the out-of-span part of `x`, which [`Transform::residual`] returns.

mod dft;
mod dictionary;
mod mask;

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrimError};
use crate::numeric::{is_power_of_two, NdArray};

pub use dictionary::{
    learn_dictionary, load_dictionary, save_dictionary, DictionaryCheckpoint, DictionaryConfig,
    DictionaryInit, LearnedDictionary, LossTerms,
};
pub use mask::{
    band_mask, frequency_groups, label_end, tile_bands, BandSpec, FrequencyGroup, Mask,
};

/// Tolerance on `‖A·A⁻¹ − I‖_max` for user-supplied inverse pairs.
pub const INVERSE_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum Transform {
    Identity {
        n: usize,
    },
    /// Real 1-D DFT on signals of length `n` (a power of two).
    Dft1d {
        n: usize,
    },
    /// Real 2-D DFT on `height × width` images flattened row-major.
    Dft2d {
        height: usize,
        width: usize,
    },
    /// `s = A x`, `x = A⁻¹ s`.
    LinearInvertible {
        forward: NdArray,
        inverse: NdArray,
    },
    /// `s = analysis · x` (k×n), `x̂ = synthesis · s` (n×k).
    LinearDictionary {
        analysis: NdArray,
        synthesis: NdArray,
    },
}

/// Identifies which transform produced a coefficient vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Layout {
    Identity { n: usize },
    Dft1d { n: usize },
    Dft2d { height: usize, width: usize },
    Linear { n: usize },
    Dictionary { atoms: usize, n: usize },
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Layout::Identity { n } => write!(f, "identity({n})"),
            Layout::Dft1d { n } => write!(f, "dft1d({n})"),
            Layout::Dft2d { height, width } => write!(f, "dft2d({height}x{width})"),
            Layout::Linear { n } => write!(f, "linear({n})"),
            Layout::Dictionary { atoms, n } => write!(f, "dictionary({atoms}x{n})"),
        }
    }
}

/// Coefficients `s = T(x)` tagged with the transform that produced them.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector {
    pub values: Vec<f64>,
    pub layout: Layout,
}

impl CoefficientVector {
    pub fn new(values: Vec<f64>, layout: Layout) -> Self {
        Self { values, layout }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn masked(&self, mask: &Mask) -> Self {
        Self {
            values: mask.apply(&self.values),
            layout: self.layout,
        }
    }
}

fn to_dmatrix(a: &NdArray) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.data())
}

fn from_dmatrix(m: &DMatrix<f64>) -> NdArray {
    let (r, c) = m.shape();
    let mut data = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            data.push(m[(i, j)]);
        }
    }
    NdArray::new(vec![r, c], data).expect("nalgebra matrices are never empty here")
}

/// Moore-Penrose pseudo-inverse.
pub fn pseudo_inverse(a: &NdArray) -> Result<NdArray> {
    to_dmatrix(a)
        .pseudo_inverse(1e-12)
        .map(|m| from_dmatrix(&m))
        .map_err(|e| TrimError::InvalidArgument(format!("pseudo-inverse failed: {e}")))
}

impl Transform {
    pub fn identity(n: usize) -> Self {
        Transform::Identity { n }
    }

    pub fn dft1d(n: usize) -> Result<Self> {
        if !is_power_of_two(n) || n < 2 {
            return Err(TrimError::NotPowerOfTwo(n));
        }
        Ok(Transform::Dft1d { n })
    }

    pub fn dft2d(height: usize, width: usize) -> Result<Self> {
        for d in [height, width] {
            if !is_power_of_two(d) || d < 2 {
                return Err(TrimError::NotPowerOfTwo(d));
            }
        }
        Ok(Transform::Dft2d { height, width })
    }

    /// Invertible linear map; the inverse is computed by LU decomposition.
    pub fn linear(forward: NdArray) -> Result<Self> {
        if forward.ndim() != 2 || forward.rows() != forward.cols() {
            return Err(TrimError::dim(
                "linear transform",
                "square matrix",
                format!("{:?}", forward.shape()),
            ));
        }
        let inv = to_dmatrix(&forward)
            .try_inverse()
            .ok_or_else(|| TrimError::InvalidArgument("matrix is singular".into()))?;
        Self::linear_with_inverse(forward, from_dmatrix(&inv))
    }

    pub fn linear_with_inverse(forward: NdArray, inverse: NdArray) -> Result<Self> {
        let n = forward.rows();
        if forward.shape() != [n, n] || inverse.shape() != [n, n] {
            return Err(TrimError::dim(
                "linear transform",
                format!("{n}x{n} pair"),
                format!("{:?} and {:?}", forward.shape(), inverse.shape()),
            ));
        }
        let err = forward
            .matmul(&inverse)?
            .max_abs_diff(&NdArray::identity(n))?;
        if err.is_nan() || err >= INVERSE_TOLERANCE {
            return Err(TrimError::InvalidArgument(format!(
                "A·A_inv deviates from the identity by {err:e}"
            )));
        }
        Ok(Transform::LinearInvertible { forward, inverse })
    }

    /// Dictionary whose synthesis is the pseudo-inverse of `analysis`.
    pub fn dictionary(analysis: NdArray) -> Result<Self> {
        let synthesis = pseudo_inverse(&analysis)?;
        Self::dictionary_with_synthesis(analysis, synthesis)
    }

    pub fn dictionary_with_synthesis(analysis: NdArray, synthesis: NdArray) -> Result<Self> {
        if analysis.ndim() != 2 || synthesis.ndim() != 2 {
            return Err(TrimError::InvalidArgument(
                "dictionary matrices must be 2-D".into(),
            ));
        }
        let (k, n) = (analysis.rows(), analysis.cols());
        if synthesis.shape() != [n, k] {
            return Err(TrimError::dim(
                "dictionary synthesis",
                format!("[{n}, {k}]"),
                format!("{:?}", synthesis.shape()),
            ));
        }
        Ok(Transform::LinearDictionary {
            analysis,
            synthesis,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Transform::Identity { .. } => "identity",
            Transform::Dft1d { .. } => "dft1d",
            Transform::Dft2d { .. } => "dft2d",
            Transform::LinearInvertible { .. } => "linear",
            Transform::LinearDictionary { .. } => "dictionary",
        }
    }

    pub fn layout(&self) -> Layout {
        match self {
            Transform::Identity { n } => Layout::Identity { n: *n },
            Transform::Dft1d { n } => Layout::Dft1d { n: *n },
            Transform::Dft2d { height, width } => Layout::Dft2d {
                height: *height,
                width: *width,
            },
            Transform::LinearInvertible { forward, .. } => Layout::Linear { n: forward.rows() },
            Transform::LinearDictionary { analysis, .. } => Layout::Dictionary {
                atoms: analysis.rows(),
                n: analysis.cols(),
            },
        }
    }

    /// Length of a raw input.
    pub fn raw_len(&self) -> usize {
        match self {
            Transform::Identity { n } | Transform::Dft1d { n } => *n,
            Transform::Dft2d { height, width } => height * width,
            Transform::LinearInvertible { forward, .. } => forward.cols(),
            Transform::LinearDictionary { analysis, .. } => analysis.cols(),
        }
    }

    /// Number of coefficients.
    pub fn coef_len(&self) -> usize {
        match self {
            Transform::LinearDictionary { analysis, .. } => analysis.rows(),
            _ => self.raw_len(),
        }
    }

    /// Whether `invert(apply(x)) == x` for every `x`.
    pub fn is_invertible(&self) -> bool {
        !matches!(self, Transform::LinearDictionary { .. })
    }

    fn check_raw(&self, len: usize) -> Result<()> {
        if len != self.raw_len() {
            return Err(TrimError::dim("transform input", self.raw_len(), len));
        }
        Ok(())
    }

    /// `s = T(x)`.
    pub fn apply(&self, x: &NdArray) -> Result<CoefficientVector> {
        self.check_raw(x.len())?;
        Ok(CoefficientVector::new(
            self.forward_raw(x.data()),
            self.layout(),
        ))
    }

    /// `T⁻¹(s)`: exact for invertible transforms, `synthesis · s` for a
    /// dictionary.
    pub fn invert(&self, s: &CoefficientVector) -> Result<NdArray> {
        if s.layout != self.layout() {
            return Err(TrimError::Layout {
                expected: self.layout().to_string(),
                actual: s.layout.to_string(),
            });
        }
        if s.values.len() != self.coef_len() {
            return Err(TrimError::dim(
                "coefficient vector",
                self.coef_len(),
                s.values.len(),
            ));
        }
        Ok(NdArray::from_vec(self.inverse_raw(&s.values)))
    }

    /// `x − T⁻¹(T(x))`; zero up to rounding for invertible transforms.
    pub fn residual(&self, x: &NdArray) -> Result<NdArray> {
        self.check_raw(x.len())?;
        let back = self.inverse_raw(&self.forward_raw(x.data()));
        Ok(NdArray::from_vec(
            x.data().iter().zip(&back).map(|(a, b)| a - b).collect(),
        ))
    }

    /// Inverse together with the largest imaginary part left by the complex
    /// inverse FFT (zero for non-Fourier transforms).
    pub fn invert_with_leakage(&self, s: &[f64]) -> Result<(Vec<f64>, f64)> {
        if s.len() != self.coef_len() {
            return Err(TrimError::dim(
                "coefficient vector",
                self.coef_len(),
                s.len(),
            ));
        }
        Ok(match self {
            Transform::Dft1d { .. } => dft::irfft_packed(s),
            Transform::Dft2d { height, width } => {
                dft::irfft2_packed(s, *height, *width, &dft::slots_2d(*height, *width))
            }
            _ => (self.inverse_raw(s), 0.0),
        })
    }

    pub(crate) fn forward_raw(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Transform::Identity { .. } => x.to_vec(),
            Transform::Dft1d { .. } => dft::rfft_packed(x),
            Transform::Dft2d { height, width } => {
                dft::rfft2_packed(x, *height, *width, &dft::slots_2d(*height, *width))
            }
            Transform::LinearInvertible { forward, .. } => {
                forward.matvec(x).expect("length checked")
            }
            Transform::LinearDictionary { analysis, .. } => {
                analysis.matvec(x).expect("length checked")
            }
        }
    }

    pub(crate) fn inverse_raw(&self, s: &[f64]) -> Vec<f64> {
        match self {
            Transform::Identity { .. } => s.to_vec(),
            Transform::Dft1d { .. } => dft::irfft_packed(s).0,
            Transform::Dft2d { height, width } => {
                dft::irfft2_packed(s, *height, *width, &dft::slots_2d(*height, *width)).0
            }
            Transform::LinearInvertible { inverse, .. } => {
                inverse.matvec(s).expect("length checked")
            }
            Transform::LinearDictionary { synthesis, .. } => {
                synthesis.matvec(s).expect("length checked")
            }
        }
    }

    /// Gradient with respect to coefficients given the gradient with respect
    /// to the reconstructed input: the adjoint of the inverse map.
    pub(crate) fn pullback(&self, grad_x: &[f64]) -> Vec<f64> {
        match self {
            // The packings are orthogonal, so the adjoint of the inverse is
            // the forward map.
            Transform::Identity { .. } | Transform::Dft1d { .. } | Transform::Dft2d { .. } => {
                self.forward_raw(grad_x)
            }
            Transform::LinearInvertible { inverse, .. } => {
                inverse.matvec_t(grad_x).expect("length checked")
            }
            Transform::LinearDictionary { synthesis, .. } => {
                synthesis.matvec_t(grad_x).expect("length checked")
            }
        }
    }

    /// Coefficient groups that masks must respect: frequencies for Fourier
    /// transforms, singletons otherwise.
    pub fn groups(&self) -> Vec<FrequencyGroup> {
        match self {
            Transform::Dft1d { n } => (0..=n / 2)
                .map(|k| FrequencyGroup {
                    id: k,
                    label: k,
                    indices: dft::group_indices_1d(*n, k),
                })
                .collect(),
            Transform::Dft2d { height, width } => {
                let (h, w) = (*height, *width);
                let slots = dft::slots_2d(h, w);
                let max_bin = slots
                    .iter()
                    .map(|s| dft::radial_bin(s.u, s.v, h, w))
                    .max()
                    .unwrap_or(0);
                let mut by_bin: Vec<Vec<usize>> = vec![Vec::new(); max_bin + 1];
                for (i, s) in slots.iter().enumerate() {
                    by_bin[dft::radial_bin(s.u, s.v, h, w)].push(i);
                }
                by_bin
                    .into_iter()
                    .enumerate()
                    .filter(|(_, idx)| !idx.is_empty())
                    .enumerate()
                    .map(|(id, (label, indices))| FrequencyGroup { id, label, indices })
                    .collect()
            }
            _ => (0..self.coef_len())
                .map(|i| FrequencyGroup {
                    id: i,
                    label: i,
                    indices: vec![i],
                })
                .collect(),
        }
    }

    /// `(u, v)` frequency of each 2-D packing slot; `None` for other transforms.
    pub fn slot_frequencies_2d(&self) -> Option<Vec<(usize, usize)>> {
        match self {
            Transform::Dft2d { height, width } => Some(
                dft::slots_2d(*height, *width)
                    .iter()
                    .map(|s| (s.u, s.v))
                    .collect(),
            ),
            _ => None,
        }
    }
}
