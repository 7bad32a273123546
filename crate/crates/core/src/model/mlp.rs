use serde::{Deserialize, Serialize};

use crate::error::{Result, TrimError};
use crate::numeric::array::{axpy, dot, gemm_acc};
use crate::numeric::{NdArray, SeededRng};

/// How the last layer's output is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputHead {
    /// Regression: the output is used as is.
    Identity,
    /// Binary classification: the single output is a logit trained with
    /// sigmoid cross-entropy. Attribution always targets the logit.
    Logit,
}

/// Architecture of a ReLU multilayer perceptron.
///
/// `layer_widths` lists the input width first and the output width last, so a
/// network with three weight layers has four entries. Every hidden layer uses
/// ReLU.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub layer_widths: Vec<usize>,
    pub head: OutputHead,
}

impl MlpSpec {
    pub fn new(layer_widths: Vec<usize>, head: OutputHead) -> Result<Self> {
        let spec = Self { layer_widths, head };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_widths.len() < 2 {
            return Err(TrimError::InvalidArgument(
                "an MLP needs at least an input and an output width".into(),
            ));
        }
        if self.layer_widths.contains(&0) {
            return Err(TrimError::InvalidArgument(
                "layer widths must be positive".into(),
            ));
        }
        if self.head == OutputHead::Logit && self.output_width() != 1 {
            return Err(TrimError::InvalidArgument(
                "a logit head has exactly one output".into(),
            ));
        }
        Ok(())
    }

    pub fn input_width(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.layer_widths.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.layer_widths.len() - 1
    }
}

/// One affine layer, `W · a + b` with `W` stored out×in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: NdArray,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn in_width(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_width(&self) -> usize {
        self.weights.rows()
    }

    pub(crate) fn affine(&self, a: &[f64]) -> Vec<f64> {
        let n = self.in_width();
        self.bias
            .iter()
            .enumerate()
            .map(|(o, &b)| dot(&self.weights.data()[o * n..(o + 1) * n], a) + b)
            .collect()
    }

    /// `W · a` without the bias.
    pub(crate) fn linear(&self, a: &[f64]) -> Vec<f64> {
        let n = self.in_width();
        (0..self.out_width())
            .map(|o| dot(&self.weights.data()[o * n..(o + 1) * n], a))
            .collect()
    }
}

/// A trained (or initialized) network: architecture plus parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel {
    pub spec: MlpSpec,
    pub layers: Vec<Layer>,
}

/// Per-layer values from a forward pass, one row per sample.
///
/// `pre[l]` holds layer `l`'s affine output; `post[l]` the input fed to layer
/// `l` (so `post[0]` is the network input).
#[derive(Clone, Debug)]
pub struct ForwardCache {
    pub batch: usize,
    pub pre: Vec<Vec<f64>>,
    pub post: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.pre.last().unwrap()
    }
}

/// He-normal weights (std `√(2/fan_in)`) and zero biases.
pub fn init_params(spec: &MlpSpec, rng: &mut SeededRng) -> Result<MlpModel> {
    spec.validate()?;
    let layers = spec
        .layer_widths
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let std = (2.0 / fan_in as f64).sqrt();
            let data = (0..fan_in * fan_out).map(|_| std * rng.normal()).collect();
            Layer {
                weights: NdArray::new(vec![fan_out, fan_in], data).expect("consistent shape"),
                bias: vec![0.0; fan_out],
            }
        })
        .collect();
    Ok(MlpModel {
        spec: spec.clone(),
        layers,
    })
}

#[inline]
pub(crate) fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

/// Row-major `W`ᵀ (in×out) of an out×in weight matrix.
pub(crate) fn transposed(w: &NdArray) -> Vec<f64> {
    let (o, i) = (w.rows(), w.cols());
    let src = w.data();
    let mut out = vec![0.0; o * i];
    for r in 0..o {
        for c in 0..i {
            out[c * o + r] = src[r * i + c];
        }
    }
    out
}

impl MlpModel {
    pub fn from_layers(spec: MlpSpec, layers: Vec<Layer>) -> Result<Self> {
        spec.validate()?;
        if layers.len() != spec.n_layers() {
            return Err(TrimError::dim(
                "MlpModel layers",
                spec.n_layers(),
                layers.len(),
            ));
        }
        for (l, (layer, w)) in layers.iter().zip(spec.layer_widths.windows(2)).enumerate() {
            if layer.weights.shape() != [w[1], w[0]] || layer.bias.len() != w[1] {
                return Err(TrimError::dim(
                    "MlpModel layer shape",
                    format!("layer {l}: {}x{} weights, {} biases", w[1], w[0], w[1]),
                    format!(
                        "{:?} weights, {} biases",
                        layer.weights.shape(),
                        layer.bias.len()
                    ),
                ));
            }
            if !layer.weights.is_finite() || layer.bias.iter().any(|b| !b.is_finite()) {
                return Err(TrimError::InvalidArgument(format!(
                    "layer {l} has non-finite parameters"
                )));
            }
        }
        Ok(Self { spec, layers })
    }

    pub fn input_width(&self) -> usize {
        self.spec.input_width()
    }

    pub fn output_width(&self) -> usize {
        self.spec.output_width()
    }

    fn check_width(&self, width: usize) -> Result<()> {
        if width != self.input_width() {
            return Err(TrimError::dim(
                "model input width",
                self.input_width(),
                width,
            ));
        }
        Ok(())
    }

    /// Forward pass over a single sample (1-D) or a batch (2-D, rows are
    /// samples). Returns the raw outputs (logits for a classification head)
    /// shaped batch×outputs together with the cache needed for backward and
    /// decomposition passes.
    pub fn forward(&self, x: &NdArray) -> Result<(NdArray, ForwardCache)> {
        self.check_width(x.cols())?;
        let cache = self.forward_batch(x.data(), x.rows());
        let out = NdArray::new(
            vec![cache.batch, self.output_width()],
            cache.output().to_vec(),
        )?;
        Ok((out, cache))
    }

    /// Scalar output `output_index` for one sample.
    pub fn predict_one(&self, x: &[f64], output_index: usize) -> Result<f64> {
        self.check_width(x.len())?;
        if output_index >= self.output_width() {
            return Err(TrimError::InvalidArgument(format!(
                "output index {output_index} out of range for {} outputs",
                self.output_width()
            )));
        }
        Ok(self.eval_single(x)[output_index])
    }

    pub(crate) fn eval_single(&self, x: &[f64]) -> Vec<f64> {
        let last = self.layers.len() - 1;
        let mut a = x.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            a = layer.affine(&a);
            if l < last {
                a.iter_mut().for_each(|v| *v = relu(*v));
            }
        }
        a
    }

    pub(crate) fn forward_batch(&self, x: &[f64], batch: usize) -> ForwardCache {
        let last = self.layers.len() - 1;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post = Vec::with_capacity(self.layers.len());
        post.push(x.to_vec());
        for (l, layer) in self.layers.iter().enumerate() {
            let (n_in, n_out) = (layer.in_width(), layer.out_width());
            let input = post.last().unwrap();
            let mut z = Vec::with_capacity(batch * n_out);
            for _ in 0..batch {
                z.extend_from_slice(&layer.bias);
            }
            if batch == 1 {
                let w = layer.weights.data();
                for (o, zo) in z.iter_mut().enumerate() {
                    *zo = dot(&w[o * n_in..(o + 1) * n_in], input) + layer.bias[o];
                }
            } else {
                let mut lin = vec![0.0; batch * n_out];
                gemm_acc(
                    input,
                    &transposed(&layer.weights),
                    &mut lin,
                    batch,
                    n_in,
                    n_out,
                );
                z.iter_mut().zip(&lin).for_each(|(zi, li)| *zi += li);
            }
            if l < last {
                post.push(z.iter().map(|&v| relu(v)).collect());
            }
            pre.push(z);
        }
        ForwardCache { batch, pre, post }
    }

    /// Gradients of output `output_index` with respect to the inputs, one row
    /// per cached sample. ReLU′(0) is taken as 0.
    pub(crate) fn backward_input(&self, cache: &ForwardCache, output_index: usize) -> Vec<f64> {
        let batch = cache.batch;
        let n_out = self.output_width();
        let mut delta = vec![0.0; batch * n_out];
        for b in 0..batch {
            delta[b * n_out + output_index] = 1.0;
        }
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let (n_in, n_o) = (layer.in_width(), layer.out_width());
            let mut grad = vec![0.0; batch * n_in];
            gemm_acc(&delta, layer.weights.data(), &mut grad, batch, n_o, n_in);
            if l > 0 {
                let z = &cache.pre[l - 1];
                grad.iter_mut().zip(z).for_each(|(g, &zv)| {
                    if zv <= 0.0 {
                        *g = 0.0;
                    }
                });
            }
            delta = grad;
        }
        delta
    }

    /// Gradient of one output for one sample, computed layer by layer with
    /// matrix-vector products.
    pub(crate) fn grad_single(&self, x: &[f64], output_index: usize) -> Vec<f64> {
        let last = self.layers.len() - 1;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut a = x.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            let z = layer.affine(&a);
            if l < last {
                a = z.iter().map(|&v| relu(v)).collect();
            }
            pre.push(z);
        }
        let mut delta = vec![0.0; self.output_width()];
        delta[output_index] = 1.0;
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let n_in = layer.in_width();
            let mut grad = vec![0.0; n_in];
            for (o, &d) in delta.iter().enumerate() {
                if d != 0.0 {
                    axpy(
                        d,
                        &layer.weights.data()[o * n_in..(o + 1) * n_in],
                        &mut grad,
                    );
                }
            }
            if l > 0 {
                grad.iter_mut().zip(&pre[l - 1]).for_each(|(g, &zv)| {
                    if zv <= 0.0 {
                        *g = 0.0;
                    }
                });
            }
            delta = grad;
        }
        delta
    }

    pub fn n_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }
}

/// Exact reverse-mode gradient of output `output_index` (the logit for a
/// classification head) with respect to a single input sample.
pub fn grad_input(model: &MlpModel, x: &NdArray, output_index: usize) -> Result<NdArray> {
    if x.rows() != 1 {
        return Err(TrimError::InvalidArgument(
            "grad_input takes a single sample".into(),
        ));
    }
    model.check_width(x.cols())?;
    if output_index >= model.output_width() {
        return Err(TrimError::InvalidArgument(format!(
            "output index {output_index} out of range for {} outputs",
            model.output_width()
        )));
    }
    Ok(NdArray::from_vec(model.grad_single(x.data(), output_index)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_two_one() -> MlpModel {
        // h = ReLU([[1, -1], [0.5, 2]] x + [0, -1]); y = [2, -3] h + 0.5
        let spec = MlpSpec::new(vec![2, 2, 1], OutputHead::Identity).unwrap();
        MlpModel::from_layers(
            spec,
            vec![
                Layer {
                    weights: NdArray::new(vec![2, 2], vec![1.0, -1.0, 0.5, 2.0]).unwrap(),
                    bias: vec![0.0, -1.0],
                },
                Layer {
                    weights: NdArray::new(vec![1, 2], vec![2.0, -3.0]).unwrap(),
                    bias: vec![0.5],
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn hand_computed_forward() {
        // x = (3, 1): h = ReLU(2, 2.5) = (2, 2.5); y = 4 - 7.5 + 0.5
        let m = two_two_one();
        let (y, _) = m.forward(&NdArray::from_vec(vec![3.0, 1.0])).unwrap();
        assert_eq!(y.data(), &[-3.0]);
        // x = (0, 1): h = ReLU(-1, 1) = (0, 1); y = -3 + 0.5
        let (y, _) = m.forward(&NdArray::from_vec(vec![0.0, 1.0])).unwrap();
        assert_eq!(y.data(), &[-2.5]);
    }

    #[test]
    fn zero_weights_give_bias() {
        let spec = MlpSpec::new(vec![3, 4, 2], OutputHead::Identity).unwrap();
        let mut m = init_params(&spec, &mut SeededRng::new(0)).unwrap();
        for layer in &mut m.layers {
            layer.weights = NdArray::zeros(layer.weights.shape());
        }
        m.layers[1].bias = vec![1.5, -2.0];
        let (y, _) = m.forward(&NdArray::from_vec(vec![7.0, -1.0, 3.0])).unwrap();
        assert_eq!(y.data(), &[1.5, -2.0]);
    }

    #[test]
    fn batch_matches_single() {
        let spec = MlpSpec::new(vec![4, 8, 8, 1], OutputHead::Logit).unwrap();
        let m = init_params(&spec, &mut SeededRng::new(5)).unwrap();
        let mut rng = SeededRng::new(6);
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..4).map(|_| rng.normal()).collect())
            .collect();
        let (batch, _) = m.forward(&NdArray::from_rows(&rows).unwrap()).unwrap();
        for (i, row) in rows.iter().enumerate() {
            let single = m.predict_one(row, 0).unwrap();
            assert!((batch.data()[i] - single).abs() < 1e-12);
        }
    }

    #[test]
    fn width_mismatch() {
        let m = two_two_one();
        assert!(matches!(
            m.forward(&NdArray::from_vec(vec![1.0; 3])),
            Err(TrimError::Dimension { .. })
        ));
        assert!(grad_input(&m, &NdArray::from_vec(vec![1.0, 2.0]), 1).is_err());
    }

    #[test]
    fn linear_gradient_is_weights() {
        let spec = MlpSpec::new(vec![3, 1], OutputHead::Identity).unwrap();
        let m = MlpModel::from_layers(
            spec,
            vec![Layer {
                weights: NdArray::new(vec![1, 3], vec![0.5, -2.0, 4.0]).unwrap(),
                bias: vec![1.0],
            }],
        )
        .unwrap();
        let g = grad_input(&m, &NdArray::from_vec(vec![9.0, 1.0, -3.0]), 0).unwrap();
        assert_eq!(g.data(), &[0.5, -2.0, 4.0]);
    }

    #[test]
    fn dead_relu_blocks_gradient() {
        // x = (0, 1): first hidden unit has pre-activation -1 and is dead.
        let m = two_two_one();
        let g = grad_input(&m, &NdArray::from_vec(vec![0.0, 1.0]), 0).unwrap();
        // Only unit 2 (weights [0.5, 2], out weight -3) contributes.
        assert_eq!(g.data(), &[-1.5, -6.0]);
    }

    #[test]
    fn batched_backward_matches_single() {
        let spec = MlpSpec::new(vec![5, 7, 6, 1], OutputHead::Identity).unwrap();
        let m = init_params(&spec, &mut SeededRng::new(11)).unwrap();
        let mut rng = SeededRng::new(12);
        let xs: Vec<f64> = (0..4 * 5).map(|_| rng.normal()).collect();
        let cache = m.forward_batch(&xs, 4);
        let grads = m.backward_input(&cache, 0);
        for b in 0..4 {
            let single = m.grad_single(&xs[b * 5..(b + 1) * 5], 0);
            for i in 0..5 {
                assert!((grads[b * 5 + i] - single[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn init_is_deterministic_with_zero_bias() {
        let spec = MlpSpec::new(vec![4, 1], OutputHead::Identity).unwrap();
        let a = init_params(&spec, &mut SeededRng::new(1)).unwrap();
        let b = init_params(&spec, &mut SeededRng::new(1)).unwrap();
        let c = init_params(&spec, &mut SeededRng::new(2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.layers[0].bias, vec![0.0]);
        assert_eq!(a.layers[0].weights.shape(), &[1, 4]);
    }

    #[test]
    fn he_init_scale() {
        let spec = MlpSpec::new(vec![64, 128, 128, 1], OutputHead::Logit).unwrap();
        let m = init_params(&spec, &mut SeededRng::new(7)).unwrap();
        for (layer, fan_in) in m.layers.iter().zip([64.0f64, 128.0, 128.0]) {
            let w = layer.weights.data();
            let mean = w.iter().sum::<f64>() / w.len() as f64;
            let std = (w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / w.len() as f64).sqrt();
            let target = (2.0 / fan_in).sqrt();
            assert!(
                (std / target - 1.0).abs() < 0.15,
                "std {std} target {target}"
            );
        }
    }

    #[test]
    fn spec_validation() {
        assert!(MlpSpec::new(vec![3], OutputHead::Identity).is_err());
        assert!(MlpSpec::new(vec![3, 0, 1], OutputHead::Identity).is_err());
        assert!(MlpSpec::new(vec![3, 2], OutputHead::Logit).is_err());
    }
}
