use std::f64::consts::PI;

use crate::error::{Result, TrimError};

/// Complex sequence stored as split real/imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSeq {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexSeq {
    pub fn new(re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        if re.len() != im.len() {
            return Err(TrimError::dim("ComplexSeq", re.len(), im.len()));
        }
        Ok(Self { re, im })
    }

    pub fn from_real(re: Vec<f64>) -> Self {
        let im = vec![0.0; re.len()];
        Self { re, im }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            re: vec![0.0; n],
            im: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| r * r + i * i)
            .sum()
    }
}

pub fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

/// Unitary radix-2 decimation-in-time FFT.
///
/// Both directions are scaled by `1/√n`, so `fft(fft(x, false), true) == x`
/// and the transform preserves energy.
pub fn fft(x: &ComplexSeq, inverse: bool) -> Result<ComplexSeq> {
    let mut out = x.clone();
    fft_in_place(&mut out.re, &mut out.im, inverse)?;
    Ok(out)
}

pub fn fft_in_place(re: &mut [f64], im: &mut [f64], inverse: bool) -> Result<()> {
    let n = re.len();
    if im.len() != n {
        return Err(TrimError::dim("fft", n, im.len()));
    }
    if !is_power_of_two(n) {
        return Err(TrimError::NotPowerOfTwo(n));
    }
    if n == 1 {
        return Ok(());
    }

    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        // Twiddles are evaluated directly rather than by recurrence so the
        // error does not grow with the stage length.
        let step = sign * 2.0 * PI / len as f64;
        for j in 0..half {
            let (wi, wr) = (step * j as f64).sin_cos();
            let mut start = 0;
            while start < n {
                let a = start + j;
                let b = a + half;
                let tr = wr * re[b] - wi * im[b];
                let ti = wr * im[b] + wi * re[b];
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                start += len;
            }
        }
        len <<= 1;
    }

    let scale = 1.0 / (n as f64).sqrt();
    re.iter_mut().for_each(|v| *v *= scale);
    im.iter_mut().for_each(|v| *v *= scale);
    Ok(())
}
