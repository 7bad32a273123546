//! Independent reference computations for integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use trim::model::{init_params, Layer};
use trim::{MlpModel, MlpSpec, NdArray, OutputHead, SeededRng};

/// Unitary DFT by the defining sum, `X_k = n^{-1/2} Σ_j x_j e^{-2πi jk/n}`.
pub fn dense_dft(re: &[f64], im: &[f64], inverse: bool) -> (Vec<f64>, Vec<f64>) {
    let n = re.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    let scale = 1.0 / (n as f64).sqrt();
    let mut out_re = vec![0.0; n];
    let mut out_im = vec![0.0; n];
    for k in 0..n {
        for j in 0..n {
            // Reduce jk mod n first so the angle stays accurate for large n.
            let angle = sign * 2.0 * PI * ((j * k) % n) as f64 / n as f64;
            let (s, c) = angle.sin_cos();
            out_re[k] += re[j] * c - im[j] * s;
            out_im[k] += re[j] * s + im[j] * c;
        }
        out_re[k] *= scale;
        out_im[k] *= scale;
    }
    (out_re, out_im)
}

/// Packed orthonormal real spectrum built from the dense DFT:
/// `[Re0, √2Re1, √2Im1, …, Re_{n/2}]`.
pub fn dense_packed(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let (re, im) = dense_dft(x, &vec![0.0; n], false);
    let r2 = 2f64.sqrt();
    let mut s = vec![re[0]];
    for k in 1..n / 2 {
        s.push(r2 * re[k]);
        s.push(r2 * im[k]);
    }
    s.push(re[n / 2]);
    s
}

/// Triple-loop matrix product of row-major `a` (m×k) and `b` (k×n).
pub fn naive_matmul(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            for p in 0..k {
                c[i * n + j] += a[i * k + p] * b[p * n + j];
            }
        }
    }
    c
}

/// Central differences of `f` at `x` with step `h`.
pub fn finite_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let up = f(&xp);
            xp[i] = x[i] - h;
            let down = f(&xp);
            xp[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Plain forward pass written out layer by layer.
pub fn reference_forward(model: &MlpModel, x: &[f64]) -> Vec<f64> {
    let mut a = x.to_vec();
    let last = model.layers.len() - 1;
    for (l, layer) in model.layers.iter().enumerate() {
        let (out, inp) = (layer.weights.rows(), layer.weights.cols());
        let mut z = naive_matmul(layer.weights.data(), &a, out, inp, 1);
        for (zi, b) in z.iter_mut().zip(&layer.bias) {
            *zi += b;
        }
        if l < last {
            z.iter_mut().for_each(|v| *v = v.max(0.0));
        }
        a = z;
    }
    a
}

/// He-initialized ReLU net with small random biases.
pub fn random_net(widths: &[usize], rng: &mut SeededRng) -> MlpModel {
    let spec = MlpSpec::new(widths.to_vec(), OutputHead::Identity).unwrap();
    let mut m = init_params(&spec, rng).unwrap();
    for layer in &mut m.layers {
        layer.bias.iter_mut().for_each(|b| *b = 0.2 * rng.normal());
    }
    m
}

/// Random widths `[d, h1, (h2), 1]`.
pub fn random_widths(d: usize, rng: &mut SeededRng) -> Vec<usize> {
    let mut w = vec![d];
    for _ in 0..rng.range(1, 3) {
        w.push(rng.range(4, 17));
    }
    w.push(1);
    w
}

pub fn linear_model(w: &[f64], bias: f64) -> MlpModel {
    let spec = MlpSpec::new(vec![w.len(), 1], OutputHead::Identity).unwrap();
    MlpModel::from_layers(
        spec,
        vec![Layer {
            weights: NdArray::new(vec![1, w.len()], w.to_vec()).unwrap(),
            bias: vec![bias],
        }],
    )
    .unwrap()
}

pub fn normals(rng: &mut SeededRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.normal()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Signs of every hidden pre-activation.
pub fn activation_pattern(model: &MlpModel, x: &[f64]) -> Vec<bool> {
    let mut a = x.to_vec();
    let mut pattern = Vec::new();
    for layer in &model.layers[..model.layers.len() - 1] {
        let (out, inp) = (layer.weights.rows(), layer.weights.cols());
        let mut z = naive_matmul(layer.weights.data(), &a, out, inp, 1);
        for (zi, b) in z.iter_mut().zip(&layer.bias) {
            *zi += b;
        }
        pattern.extend(z.iter().map(|v| *v > 0.0));
        a = z.iter().map(|v| v.max(0.0)).collect();
    }
    pattern
}

/// Keeps DFT frequencies `lo ≤ min(k, n−k) < hi` of a real signal, computed
/// with the dense DFT.
pub fn dense_bandpass(x: &[f64], lo: usize, hi: usize) -> Vec<f64> {
    let n = x.len();
    let (re, im) = dense_dft(x, &vec![0.0; n], false);
    let keep = |k: usize| (lo..hi).contains(&k.min(n - k));
    let re: Vec<f64> = (0..n).map(|k| if keep(k) { re[k] } else { 0.0 }).collect();
    let im: Vec<f64> = (0..n).map(|k| if keep(k) { im[k] } else { 0.0 }).collect();
    dense_dft(&re, &im, true).0
}
