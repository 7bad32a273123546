use serde::{Deserialize, Serialize};

use super::Transform;
use crate::error::{Result, TrimError};

/// Coefficients that must be selected together.
///
/// For Fourier transforms this is one real-signal frequency: the `{Re_k,
/// Im_k}` pair, or a single coefficient for DC and Nyquist. Masking a pair
/// jointly keeps the inverse real. For other transforms every coefficient is
/// its own group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyGroup {
    pub id: usize,
    /// Physical index: cycles per record (1-D) or rounded radius (2-D).
    pub label: usize,
    pub indices: Vec<usize>,
}

/// Half-open band `[lo, hi)` of frequency labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandSpec {
    pub lo: usize,
    pub hi: usize,
}

impl BandSpec {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo >= hi {
            return Err(TrimError::InvalidArgument(format!(
                "band [{lo}, {hi}) is empty"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> usize {
        self.hi - self.lo
    }

    pub fn contains(&self, label: usize) -> bool {
        (self.lo..self.hi).contains(&label)
    }

    pub fn center(&self) -> f64 {
        (self.lo + self.hi - 1) as f64 / 2.0
    }
}

/// Consecutive bands of `width` labels covering `[0, label_end)`; the last
/// band may be narrower.
pub fn tile_bands(label_end: usize, width: usize) -> Result<Vec<BandSpec>> {
    if width == 0 {
        return Err(TrimError::InvalidArgument(
            "band width must be at least 1".into(),
        ));
    }
    Ok((0..label_end)
        .step_by(width)
        .map(|lo| BandSpec {
            lo,
            hi: (lo + width).min(label_end),
        })
        .collect())
}

/// Binary selector over transform coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mask {
    entries: Vec<bool>,
}

impl Mask {
    pub fn new(entries: Vec<bool>) -> Self {
        Self { entries }
    }

    /// Mask from 0/1 values; anything else is rejected.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        values
            .iter()
            .map(|&v| match v {
                0.0 => Ok(false),
                1.0 => Ok(true),
                other => Err(TrimError::InvalidArgument(format!(
                    "mask entries must be 0 or 1, got {other}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn ones(n: usize) -> Self {
        Self::new(vec![true; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![false; n])
    }

    /// Mask selecting every coefficient of the given groups.
    pub fn from_groups<'a>(n: usize, groups: impl IntoIterator<Item = &'a FrequencyGroup>) -> Self {
        let mut entries = vec![false; n];
        for g in groups {
            for &i in &g.indices {
                entries[i] = true;
            }
        }
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[bool] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> bool {
        self.entries[i]
    }

    pub fn count(&self) -> usize {
        self.entries.iter().filter(|&&e| e).count()
    }

    pub fn complement(&self) -> Self {
        Self::new(self.entries.iter().map(|e| !e).collect())
    }

    /// `M ⊙ s`
    pub fn apply(&self, s: &[f64]) -> Vec<f64> {
        s.iter()
            .zip(&self.entries)
            .map(|(&v, &m)| if m { v } else { 0.0 })
            .collect()
    }

    pub fn as_values(&self) -> Vec<f64> {
        self.entries
            .iter()
            .map(|&m| if m { 1.0 } else { 0.0 })
            .collect()
    }

    /// Checks the length and that no group is partially selected.
    pub fn validate(&self, groups: &[FrequencyGroup], coef_len: usize) -> Result<()> {
        if self.entries.len() != coef_len {
            return Err(TrimError::Contract(format!(
                "mask has {} entries but the transform has {coef_len} coefficients",
                self.entries.len()
            )));
        }
        for g in groups {
            let first = self.entries[g.indices[0]];
            if g.indices.iter().any(|&i| self.entries[i] != first) {
                return Err(TrimError::Contract(format!(
                    "mask splits frequency group {} (label {})",
                    g.id, g.label
                )));
            }
        }
        Ok(())
    }
}

/// Groups of a Fourier transform, ordered by label.
pub fn frequency_groups(t: &Transform) -> Result<Vec<FrequencyGroup>> {
    match t {
        Transform::Dft1d { .. } | Transform::Dft2d { .. } => Ok(t.groups()),
        other => Err(TrimError::InvalidArgument(format!(
            "frequency groups are defined for Fourier transforms, not {}",
            other.name()
        ))),
    }
}

/// One past the largest frequency label of a Fourier transform
/// (`n/2 + 1` in 1-D).
pub fn label_end(t: &Transform) -> Result<usize> {
    Ok(frequency_groups(t)?
        .iter()
        .map(|g| g.label)
        .max()
        .unwrap_or(0)
        + 1)
}

/// Mask that is one on every group whose frequency lies in `band` and zero
/// elsewhere.
pub fn band_mask(t: &Transform, band: BandSpec) -> Result<Mask> {
    let groups = frequency_groups(t)?;
    let end = label_end(t)?;
    if band.lo >= band.hi || band.hi > end {
        return Err(TrimError::InvalidArgument(format!(
            "band [{}, {}) must satisfy lo < hi <= {end}",
            band.lo, band.hi
        )));
    }
    Ok(Mask::from_groups(
        t.coef_len(),
        groups.iter().filter(|g| band.contains(g.label)),
    ))
}
