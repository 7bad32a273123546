use serde::{Deserialize, Serialize};

use crate::error::{Result, TrimError};

/// Dense row-major tensor of `f64`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NdArray {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl NdArray {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(TrimError::InvalidArgument(format!(
                "shape must be non-empty with positive extents, got {shape:?}"
            )));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(TrimError::dim("NdArray::new", expected, data.len()));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; len],
        }
    }

    /// 1-D array owning `data`.
    pub fn from_vec(data: Vec<f64>) -> Self {
        Self {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(TrimError::InvalidArgument("no rows".into()));
        };
        let cols = first.len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(TrimError::dim("NdArray::from_rows", cols, row.len()));
            }
            data.extend_from_slice(row);
        }
        Self::new(vec![rows.len(), cols], data)
    }

    pub fn identity(n: usize) -> Self {
        let mut out = Self::zeros(&[n, n]);
        for i in 0..n {
            out.data[i * n + i] = 1.0;
        }
        out
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    /// Rows of a 2-D array (a 1-D array counts as a single row).
    pub fn rows(&self) -> usize {
        match self.shape.len() {
            1 => 1,
            _ => self.shape[0],
        }
    }

    pub fn cols(&self) -> usize {
        *self.shape.last().expect("shape is never empty")
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.cols();
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let c = self.cols();
        self.data[i * c + j] = v;
    }

    pub fn reshape(self, shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, self.data)
    }

    fn require_matrix(&self, context: &'static str) -> Result<(usize, usize)> {
        if self.shape.len() != 2 {
            return Err(TrimError::dim(
                context,
                "rank 2",
                format!("rank {}", self.shape.len()),
            ));
        }
        Ok((self.shape[0], self.shape[1]))
    }

    /// Matrix product. Each output entry accumulates over the inner index in
    /// ascending order, so results are bitwise reproducible.
    pub fn matmul(&self, other: &NdArray) -> Result<NdArray> {
        let (m, k) = self.require_matrix("matmul lhs")?;
        let (k2, n) = other.require_matrix("matmul rhs")?;
        if k != k2 {
            return Err(TrimError::dim("matmul inner dimension", k, k2));
        }
        let mut out = vec![0.0; m * n];
        gemm_acc(&self.data, &other.data, &mut out, m, k, n);
        NdArray::new(vec![m, n], out)
    }

    pub fn transpose(&self) -> Result<NdArray> {
        let (m, n) = self.require_matrix("transpose")?;
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                out[j * m + i] = self.data[i * n + j];
            }
        }
        NdArray::new(vec![n, m], out)
    }

    /// Matrix-vector product `self · v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let (m, n) = self.require_matrix("matvec")?;
        if v.len() != n {
            return Err(TrimError::dim("matvec", n, v.len()));
        }
        Ok((0..m)
            .map(|i| dot(&self.data[i * n..(i + 1) * n], v))
            .collect())
    }

    /// `selfᵀ · v` without materializing the transpose.
    pub fn matvec_t(&self, v: &[f64]) -> Result<Vec<f64>> {
        let (m, n) = self.require_matrix("matvec_t")?;
        if v.len() != m {
            return Err(TrimError::dim("matvec_t", m, v.len()));
        }
        let mut out = vec![0.0; n];
        for (i, &vi) in v.iter().enumerate() {
            axpy(vi, &self.data[i * n..(i + 1) * n], &mut out);
        }
        Ok(out)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> NdArray {
        NdArray {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, a: f64) -> NdArray {
        self.map(|v| a * v)
    }

    pub fn zip_with(&self, other: &NdArray, f: impl Fn(f64, f64) -> f64) -> Result<NdArray> {
        if self.shape != other.shape {
            return Err(TrimError::dim(
                "elementwise op",
                format!("{:?}", self.shape),
                format!("{:?}", other.shape),
            ));
        }
        Ok(NdArray {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &NdArray) -> Result<NdArray> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &NdArray) -> Result<NdArray> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn max_abs_diff(&self, other: &NdArray) -> Result<f64> {
        Ok(self
            .zip_with(other, |a, b| (a - b).abs())?
            .data
            .iter()
            .fold(0.0, |m, &v| m.max(v)))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (&x, &y)| acc + x * y)
}

/// `y += a · x`
#[inline]
pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `c += a · b` for row-major `a` (m×k), `b` (k×n), `c` (m×n).
///
/// The i-k-j loop order keeps the inner loop contiguous while still summing
/// over `k` left to right for every output entry.
pub(crate) fn gemm_acc(a: &[f64], b: &[f64], c: &mut [f64], m: usize, k: usize, n: usize) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    for i in 0..m {
        let crow = &mut c[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip != 0.0 {
                axpy(aip, &b[p * n..(p + 1) * n], crow);
            }
        }
    }
}
