//! Orthonormal real packings of the 1-D and 2-D DFT.
//!
//! A real signal of length n maps to n real coefficients. Self-conjugate
//! frequencies (DC, Nyquist) contribute their real part; every other
//! conjugate pair contributes `√2·Re` and `√2·Im` of one representative. With
//! the unitary FFT this makes the packing an orthogonal matrix.

use std::f64::consts::SQRT_2;

use crate::numeric::fft_in_place;

/// Slot index of frequency `k`'s real part in a length-`n` packing.
pub(crate) fn re_index(n: usize, k: usize) -> usize {
    if k == 0 {
        0
    } else if k == n / 2 {
        n - 1
    } else {
        2 * k - 1
    }
}

/// Coefficient indices of frequency `k` (one for DC/Nyquist, two otherwise).
pub(crate) fn group_indices_1d(n: usize, k: usize) -> Vec<usize> {
    if k == 0 || k == n / 2 {
        vec![re_index(n, k)]
    } else {
        vec![2 * k - 1, 2 * k]
    }
}

/// Forward packed transform of a real signal whose length is a power of two ≥ 2.
pub(crate) fn rfft_packed(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut re = x.to_vec();
    let mut im = vec![0.0; n];
    fft_in_place(&mut re, &mut im, false).expect("length checked by caller");
    let mut s = vec![0.0; n];
    s[0] = re[0];
    s[n - 1] = re[n / 2];
    for k in 1..n / 2 {
        s[2 * k - 1] = SQRT_2 * re[k];
        s[2 * k] = SQRT_2 * im[k];
    }
    s
}

/// Inverse packed transform. Also returns the largest imaginary magnitude
/// left after the complex inverse FFT, which is rounding noise only.
pub(crate) fn irfft_packed(s: &[f64]) -> (Vec<f64>, f64) {
    let n = s.len();
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    re[0] = s[0];
    re[n / 2] = s[n - 1];
    for k in 1..n / 2 {
        let (a, b) = (s[2 * k - 1] / SQRT_2, s[2 * k] / SQRT_2);
        re[k] = a;
        im[k] = b;
        re[n - k] = a;
        im[n - k] = -b;
    }
    fft_in_place(&mut re, &mut im, true).expect("length checked by caller");
    let leak = im.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (re, leak)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Part {
    Re,
    Im,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Slot {
    pub u: usize,
    pub v: usize,
    pub part: Part,
    pub paired: bool,
}

/// Packing order for an h×w real image.
pub(crate) fn slots_2d(h: usize, w: usize) -> Vec<Slot> {
    let mut slots = Vec::with_capacity(h * w);
    for u in 0..h {
        for v in 0..w {
            let (cu, cv) = ((h - u) % h, (w - v) % w);
            if (cu, cv) == (u, v) {
                slots.push(Slot {
                    u,
                    v,
                    part: Part::Re,
                    paired: false,
                });
            } else if u * w + v < cu * w + cv {
                slots.push(Slot {
                    u,
                    v,
                    part: Part::Re,
                    paired: true,
                });
                slots.push(Slot {
                    u,
                    v,
                    part: Part::Im,
                    paired: true,
                });
            }
        }
    }
    slots
}

/// Signed frequency of index `u` on an axis of length `n`.
pub(crate) fn signed_freq(u: usize, n: usize) -> f64 {
    if u <= n / 2 {
        u as f64
    } else {
        u as f64 - n as f64
    }
}

/// Integer-rounded radial frequency of slot `(u, v)`.
pub(crate) fn radial_bin(u: usize, v: usize, h: usize, w: usize) -> usize {
    signed_freq(u, h).hypot(signed_freq(v, w)).round() as usize
}

fn fft2(re: &mut [f64], im: &mut [f64], h: usize, w: usize, inverse: bool) {
    for r in 0..h {
        fft_in_place(
            &mut re[r * w..(r + 1) * w],
            &mut im[r * w..(r + 1) * w],
            inverse,
        )
        .expect("row length checked by caller");
    }
    let mut cr = vec![0.0; h];
    let mut ci = vec![0.0; h];
    for c in 0..w {
        for r in 0..h {
            cr[r] = re[r * w + c];
            ci[r] = im[r * w + c];
        }
        fft_in_place(&mut cr, &mut ci, inverse).expect("column length checked by caller");
        for r in 0..h {
            re[r * w + c] = cr[r];
            im[r * w + c] = ci[r];
        }
    }
}

pub(crate) fn rfft2_packed(x: &[f64], h: usize, w: usize, slots: &[Slot]) -> Vec<f64> {
    let mut re = x.to_vec();
    let mut im = vec![0.0; h * w];
    fft2(&mut re, &mut im, h, w, false);
    slots
        .iter()
        .map(|s| {
            let scale = if s.paired { SQRT_2 } else { 1.0 };
            let idx = s.u * w + s.v;
            match s.part {
                Part::Re => scale * re[idx],
                Part::Im => scale * im[idx],
            }
        })
        .collect()
}

pub(crate) fn irfft2_packed(s: &[f64], h: usize, w: usize, slots: &[Slot]) -> (Vec<f64>, f64) {
    let mut re = vec![0.0; h * w];
    let mut im = vec![0.0; h * w];
    for (slot, &val) in slots.iter().zip(s) {
        let idx = slot.u * w + slot.v;
        let cidx = ((h - slot.u) % h) * w + (w - slot.v) % w;
        if !slot.paired {
            re[idx] = val;
            continue;
        }
        let v = val / SQRT_2;
        match slot.part {
            Part::Re => {
                re[idx] = v;
                re[cidx] = v;
            }
            Part::Im => {
                im[idx] = v;
                im[cidx] = -v;
            }
        }
    }
    fft2(&mut re, &mut im, h, w, true);
    let leak = im.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (re, leak)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_preserves_energy() {
        let x: Vec<f64> = (0..16).map(|i| ((i * i) as f64 * 0.3).sin()).collect();
        let s = rfft_packed(&x);
        let ex: f64 = x.iter().map(|v| v * v).sum();
        let es: f64 = s.iter().map(|v| v * v).sum();
        assert!((ex - es).abs() < 1e-12 * ex);
        let (back, leak) = irfft_packed(&s);
        assert!(leak < 1e-14);
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn slots_cover_image() {
        for (h, w) in [(2, 2), (4, 8), (8, 8), (16, 4)] {
            let slots = slots_2d(h, w);
            assert_eq!(slots.len(), h * w);
            assert_eq!(slots.iter().filter(|s| !s.paired).count(), 4);
        }
    }

    #[test]
    fn two_d_round_trip() {
        let (h, w) = (4, 8);
        let slots = slots_2d(h, w);
        let x: Vec<f64> = (0..h * w)
            .map(|i| (i as f64 * 0.71).cos() + 0.1 * i as f64)
            .collect();
        let s = rfft2_packed(&x, h, w, &slots);
        let es: f64 = s.iter().map(|v| v * v).sum();
        let ex: f64 = x.iter().map(|v| v * v).sum();
        assert!((es - ex).abs() < 1e-12 * ex);
        let (back, leak) = irfft2_packed(&s, h, w, &slots);
        assert!(leak < 1e-13);
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
