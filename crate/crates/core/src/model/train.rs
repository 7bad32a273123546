use serde::{Deserialize, Serialize};

use super::mlp::{init_params, MlpModel, MlpSpec, OutputHead};
use crate::error::{Result, TrimError};
use crate::numeric::array::gemm_acc;
use crate::numeric::{NdArray, SeededRng};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Optimizer {
    Adam {
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
    SgdMomentum {
        #[serde(default = "default_momentum")]
        momentum: f64,
    },
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}
fn default_momentum() -> f64 {
    0.9
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::Adam {
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_eps(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            optimizer: Optimizer::default(),
            learning_rate: 1e-3,
            epochs: 30,
            batch_size: 64,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(TrimError::InvalidArgument(format!(
                "learning_rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(TrimError::InvalidArgument(
                "epochs and batch_size must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: MlpModel,
    /// Mean per-sample loss of each epoch.
    pub loss_history: Vec<f64>,
}

struct Moments {
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl Moments {
    fn zeros_like(params: &[Vec<f64>]) -> Self {
        Self {
            first: params.iter().map(|p| vec![0.0; p.len()]).collect(),
            second: params.iter().map(|p| vec![0.0; p.len()]).collect(),
        }
    }
}

/// Minibatch training with seeded initialization and per-epoch shuffling.
///
/// `y` holds one target row per sample: labels in {0, 1} for a logit head,
/// real targets for an identity head. Classification minimizes sigmoid
/// cross-entropy on the logit, regression the mean squared error.
pub fn train(spec: &MlpSpec, x: &NdArray, y: &NdArray, cfg: &TrainConfig) -> Result<TrainOutcome> {
    spec.validate()?;
    cfg.validate()?;
    let n = x.rows();
    let d = spec.input_width();
    let n_out = spec.output_width();
    if x.cols() != d {
        return Err(TrimError::dim("train features", d, x.cols()));
    }
    if y.len() != n * n_out {
        return Err(TrimError::dim("train targets", n * n_out, y.len()));
    }
    if spec.head == OutputHead::Logit && y.data().iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(TrimError::InvalidArgument(
            "classification labels must be 0 or 1".into(),
        ));
    }

    let root = SeededRng::new(cfg.seed);
    let mut model = init_params(spec, &mut root.child("init"))?;
    let mut shuffle_rng = root.child("shuffle");

    // Parameters are flattened per layer as [weights..., bias...] for the
    // optimizer state.
    let n_layers = model.layers.len();
    let shapes: Vec<(usize, usize)> = model
        .layers
        .iter()
        .map(|l| (l.out_width(), l.in_width()))
        .collect();
    let mut velocity: Vec<Vec<f64>> = shapes.iter().map(|&(o, i)| vec![0.0; o * i + o]).collect();
    let mut moments = Moments::zeros_like(&velocity);
    let mut step: i32 = 0;

    let mut order: Vec<usize> = (0..n).collect();
    let mut loss_history = Vec::with_capacity(cfg.epochs);
    let mut xb = Vec::with_capacity(cfg.batch_size * d);
    let mut yb = Vec::with_capacity(cfg.batch_size * n_out);

    for epoch in 0..cfg.epochs {
        shuffle_rng.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let b = chunk.len();
            xb.clear();
            yb.clear();
            for &i in chunk {
                xb.extend_from_slice(x.row(i));
                yb.extend_from_slice(&y.data()[i * n_out..(i + 1) * n_out]);
            }
            let cache = model.forward_batch(&xb, b);
            let z = cache.output();

            let mut delta = vec![0.0; b * n_out];
            match spec.head {
                OutputHead::Logit => {
                    for ((dz, &zi), &yi) in delta.iter_mut().zip(z).zip(&yb) {
                        // log(1 + e^z) - y z, evaluated stably
                        epoch_loss += zi.max(0.0) - zi * yi + (-zi.abs()).exp().ln_1p();
                        *dz = (sigmoid(zi) - yi) / b as f64;
                    }
                }
                OutputHead::Identity => {
                    let scale = 1.0 / (b * n_out) as f64;
                    for ((dz, &zi), &yi) in delta.iter_mut().zip(z).zip(&yb) {
                        let r = zi - yi;
                        epoch_loss += r * r / n_out as f64;
                        *dz = 2.0 * r * scale;
                    }
                }
            }

            let mut grads: Vec<Vec<f64>> = Vec::with_capacity(n_layers);
            for l in (0..n_layers).rev() {
                let (o, i) = shapes[l];
                let mut g = vec![0.0; o * i + o];
                let mut delta_t = vec![0.0; o * b];
                for r in 0..b {
                    for c in 0..o {
                        delta_t[c * b + r] = delta[r * o + c];
                    }
                }
                gemm_acc(&delta_t, &cache.post[l], &mut g[..o * i], o, b, i);
                for c in 0..o {
                    g[o * i + c] = delta_t[c * b..(c + 1) * b].iter().sum();
                }
                if l > 0 {
                    let mut prev = vec![0.0; b * i];
                    gemm_acc(&delta, model.layers[l].weights.data(), &mut prev, b, o, i);
                    prev.iter_mut().zip(&cache.pre[l - 1]).for_each(|(p, &zv)| {
                        if zv <= 0.0 {
                            *p = 0.0;
                        }
                    });
                    delta = prev;
                }
                grads.push(g);
            }
            grads.reverse();

            step += 1;
            for (l, g) in grads.iter().enumerate() {
                let (o, i) = shapes[l];
                let update = match cfg.optimizer {
                    Optimizer::Adam { beta1, beta2, eps } => {
                        let m = &mut moments.first[l];
                        let v = &mut moments.second[l];
                        let c1 = 1.0 - beta1.powi(step);
                        let c2 = 1.0 - beta2.powi(step);
                        let upd = &mut velocity[l];
                        for k in 0..g.len() {
                            m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
                            v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
                            upd[k] = cfg.learning_rate * (m[k] / c1) / ((v[k] / c2).sqrt() + eps);
                        }
                        &velocity[l]
                    }
                    Optimizer::SgdMomentum { momentum } => {
                        let vel = &mut velocity[l];
                        for k in 0..g.len() {
                            vel[k] = momentum * vel[k] + cfg.learning_rate * g[k];
                        }
                        &velocity[l]
                    }
                };
                let layer = &mut model.layers[l];
                layer
                    .weights
                    .data_mut()
                    .iter_mut()
                    .zip(&update[..o * i])
                    .for_each(|(w, u)| *w -= u);
                layer
                    .bias
                    .iter_mut()
                    .zip(&update[o * i..])
                    .for_each(|(bv, u)| *bv -= u);
            }
        }
        let mean_loss = epoch_loss / n as f64;
        if !mean_loss.is_finite() {
            return Err(TrimError::TrainingDiverged { epoch: epoch + 1 });
        }
        loss_history.push(mean_loss);
    }

    let diverged = model
        .layers
        .iter()
        .any(|l| !l.weights.is_finite() || l.bias.iter().any(|b| !b.is_finite()));
    if diverged {
        return Err(TrimError::TrainingDiverged { epoch: cfg.epochs });
    }
    Ok(TrainOutcome {
        model,
        loss_history,
    })
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
