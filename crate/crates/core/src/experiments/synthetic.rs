//! Frequency-recovery benchmark.
//!
//! Each trial draws white-noise signals, picks a target frequency `k` and
//! labels a signal positive when the magnitude of its frequency-`k`
//! coefficient exceeds the dataset median. A network is trained on the raw
//! signals; an attribution method recovers `k` when frequency `k` receives the
//! largest mean absolute TRIM score.

use std::f64::consts::PI;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attribution::{MethodKind, ShapleyConfig};
use crate::engine::{argmax, group_scores, GroupScores, MethodOptions};
use crate::error::{Result, TrimError};
use crate::model::{init_params, train, Layer, MlpModel, MlpSpec, OutputHead, TrainConfig};
use crate::numeric::{is_power_of_two, NdArray, SeededRng};
use crate::transforms::Transform;

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// How per-point group scores are combined before taking the argmax.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    /// Mean absolute score.
    Absolute,
    /// Mean signed score.
    Signed,
}

/// Where a trial's model comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSource {
    /// Trained on the trial's data.
    Trained,
    /// Freshly initialized, never trained.
    Untrained,
    /// Analytic network computing the target-frequency magnitude.
    Oracle,
}

/// Which test points are scored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringSet {
    /// Correctly classified points of the positive class.
    Positive,
    /// Any correctly classified point.
    Correct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    /// Signal length.
    pub d: usize,
    /// Samples per dataset, split 80/20 into train and test.
    pub n_samples: usize,
    pub n_datasets: usize,
    /// Hidden widths; the network is `[d, hidden.., 1]` with a logit head.
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
    pub methods: Vec<MethodKind>,
    pub master_seed: u64,
    pub model_source: ModelSource,
    pub scoring_set: ScoringSet,
    pub aggregate: Aggregate,
    /// Upper bound on scored test points per trial.
    pub scoring_points: usize,
    pub ig_steps: usize,
    pub shapley_permutations: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            d: 32,
            n_samples: 2000,
            n_datasets: 100,
            hidden: vec![128, 128],
            train: TrainConfig::default(),
            methods: MethodKind::ALL.to_vec(),
            master_seed: 0,
            model_source: ModelSource::Trained,
            scoring_set: ScoringSet::Correct,
            aggregate: Aggregate::Absolute,
            scoring_points: 50,
            ig_steps: 64,
            shapley_permutations: 500,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(TrimError::InvalidArgument(m));
        if !is_power_of_two(self.d) || self.d < 8 {
            return bad(format!("d must be a power of two >= 8, got {}", self.d));
        }
        if self.n_samples < 10 {
            return bad(format!(
                "n_samples must be at least 10, got {}",
                self.n_samples
            ));
        }
        if self.n_datasets == 0 {
            return bad("n_datasets must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return bad(format!("method {} listed twice", m.as_str()));
            }
        }
        if self.hidden.contains(&0) {
            return bad("hidden widths must be positive".into());
        }
        if self.scoring_points == 0 || self.ig_steps == 0 || self.shapley_permutations == 0 {
            return bad(
                "scoring_points, ig_steps and shapley_permutations must be positive".into(),
            );
        }
        self.train.validate()
    }

    pub fn net_spec(&self) -> Result<MlpSpec> {
        let mut widths = vec![self.d];
        widths.extend(&self.hidden);
        widths.push(1);
        MlpSpec::new(widths, OutputHead::Logit)
    }

    fn n_train(&self) -> usize {
        self.n_samples * 4 / 5
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticDataset {
    /// `n × d` standard normal signals.
    pub x: NdArray,
    /// Labels in {0, 1}.
    pub y: NdArray,
    /// Target frequency, in `1..d/2`.
    pub target_group: usize,
    /// Magnitude of the target coefficient pair per signal.
    pub magnitudes: Vec<f64>,
    pub median: f64,
}

/// White-noise signals labelled by whether the magnitude of a random
/// frequency exceeds its median over the dataset.
///
/// The magnitude is `√(s₂ₖ₋₁² + s₂ₖ²)` in the packed orthonormal real
/// spectrum, i.e. `√2·|X_k|` for the unitary DFT `X`.
pub fn generate_dataset(d: usize, n: usize, rng: &mut SeededRng) -> Result<SyntheticDataset> {
    if !is_power_of_two(d) || d < 4 {
        return Err(TrimError::InvalidArgument(format!(
            "d must be a power of two >= 4, got {d}"
        )));
    }
    if n < 4 {
        return Err(TrimError::InvalidArgument(format!(
            "need at least 4 samples, got {n}"
        )));
    }
    let k = rng.range(1, d / 2);
    let data: Vec<f64> = (0..n * d).map(|_| rng.normal()).collect();
    let x = NdArray::new(vec![n, d], data)?;
    let t = Transform::dft1d(d)?;
    let magnitudes: Vec<f64> = (0..n)
        .map(|r| {
            let s = t.forward_raw(x.row(r));
            s[2 * k - 1].hypot(s[2 * k])
        })
        .collect();
    let median = median(&magnitudes);
    let y = NdArray::from_vec(
        magnitudes
            .iter()
            .map(|&m| if m > median { 1.0 } else { 0.0 })
            .collect(),
    );
    Ok(SyntheticDataset {
        x,
        y,
        target_group: k,
        magnitudes,
        median,
    })
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Network `[d, 2m, 2m, 1]` whose logit approximates `|z_k| − threshold`,
/// where `z_k` is the packed frequency-`k` coefficient pair.
///
/// The first layer projects the pair onto `m` directions `θ_j = πj/m` with
/// both signs, so each ReLU pair yields `|r cos(θ_j − φ)|`; the sum over `j`,
/// scaled by `π/(2m)`, approximates `r`. The middle layer is the identity.
pub fn oracle_model(d: usize, k: usize, threshold: f64, angles: usize) -> Result<MlpModel> {
    if k == 0 || k >= d / 2 {
        return Err(TrimError::InvalidArgument(format!(
            "oracle frequency must lie in 1..{}, got {k}",
            d / 2
        )));
    }
    if angles == 0 {
        return Err(TrimError::InvalidArgument(
            "oracle needs at least one angle".into(),
        ));
    }
    let t = Transform::dft1d(d)?;
    let h = 2 * angles;
    let mut first = Vec::with_capacity(h * d);
    for j in 0..angles {
        let theta = PI * j as f64 / angles as f64;
        let mut s = vec![0.0; d];
        s[2 * k - 1] = theta.cos();
        s[2 * k] = theta.sin();
        let row = t.inverse_raw(&s);
        first.extend(&row);
        first.extend(row.iter().map(|v| -v));
    }
    let layers = vec![
        Layer {
            weights: NdArray::new(vec![h, d], first)?,
            bias: vec![0.0; h],
        },
        Layer {
            weights: NdArray::identity(h),
            bias: vec![0.0; h],
        },
        Layer {
            weights: NdArray::new(vec![1, h], vec![PI / h as f64; h])?,
            bias: vec![-threshold],
        },
    ];
    MlpModel::from_layers(MlpSpec::new(vec![d, h, h, 1], OutputHead::Logit)?, layers)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: MethodKind,
    pub argmax_group: usize,
    pub correct: bool,
    /// Group scores averaged over the scored points (absolute values first
    /// under [`Aggregate::Absolute`]).
    pub scores: GroupScores,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial_index: usize,
    pub target_group: usize,
    pub test_accuracy: f64,
    pub scored_points: usize,
    /// Training produced a non-finite loss; every method counts as wrong.
    pub diverged: bool,
    pub methods: Vec<MethodOutcome>,
}

/// Runs one trial; the outcome depends only on `(cfg, trial_index)`.
pub fn run_trial(cfg: &SyntheticConfig, trial_index: usize) -> Result<TrialOutcome> {
    cfg.validate()?;
    let rng = SeededRng::new(cfg.master_seed).child_index(trial_index as u64);
    let data = generate_dataset(cfg.d, cfg.n_samples, &mut rng.child("data"))?;
    let k = data.target_group;
    let n_train = cfg.n_train();
    let spec = cfg.net_spec()?;

    let model = match cfg.model_source {
        ModelSource::Oracle => oracle_model(cfg.d, k, data.median, 16)?,
        ModelSource::Untrained => init_params(&spec, &mut rng.child("init"))?,
        ModelSource::Trained => {
            let x_train = NdArray::new(
                vec![n_train, cfg.d],
                data.x.data()[..n_train * cfg.d].to_vec(),
            )?;
            let y_train = NdArray::from_vec(data.y.data()[..n_train].to_vec());
            let train_cfg = TrainConfig {
                seed: rng.child("train").next_u64(),
                ..cfg.train.clone()
            };
            match train(&spec, &x_train, &y_train, &train_cfg) {
                Ok(outcome) => outcome.model,
                Err(TrimError::TrainingDiverged { .. }) => {
                    return Ok(diverged_outcome(cfg, trial_index, k));
                }
                Err(e) => return Err(e),
            }
        }
    };

    let test: Vec<usize> = (n_train..cfg.n_samples).collect();
    let mut hits = 0usize;
    let mut scored = Vec::new();
    for &i in &test {
        let predicted = model.predict_one(data.x.row(i), 0)? > 0.0;
        let label = data.y.data()[i] == 1.0;
        if predicted == label {
            hits += 1;
            let wanted = cfg.scoring_set == ScoringSet::Correct || label;
            if wanted && scored.len() < cfg.scoring_points {
                scored.push(i);
            }
        }
    }
    if scored.is_empty() {
        scored = test.iter().copied().take(cfg.scoring_points).collect();
    }

    let transform = Transform::dft1d(cfg.d)?;
    let shapley_rng = rng.child("shapley");
    let mut methods = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let mut sum: Option<GroupScores> = None;
        for (p, &i) in scored.iter().enumerate() {
            let options = MethodOptions {
                ig_steps: cfg.ig_steps,
                shapley: ShapleyConfig::sampled(
                    cfg.shapley_permutations,
                    shapley_rng.child_index(p as u64).seed(),
                ),
            };
            let x = NdArray::from_vec(data.x.row(i).to_vec());
            let mut gs = group_scores(&model, &x, &transform, method, &options)?;
            if cfg.aggregate == Aggregate::Absolute {
                gs.scores.iter_mut().for_each(|v| *v = v.abs());
            }
            match sum.as_mut() {
                None => sum = Some(gs),
                Some(acc) => {
                    acc.scores
                        .iter_mut()
                        .zip(&gs.scores)
                        .for_each(|(a, b)| *a += b);
                    acc.prediction += gs.prediction;
                }
            }
        }
        let mut mean = sum.expect("at least one scored point");
        let n = scored.len() as f64;
        mean.scores.iter_mut().for_each(|s| *s /= n);
        mean.prediction /= n;
        let argmax_group = mean.labels[argmax(&mean.scores)];
        methods.push(MethodOutcome {
            method,
            argmax_group,
            correct: argmax_group == k,
            scores: mean,
        });
    }

    Ok(TrialOutcome {
        trial_index,
        target_group: k,
        test_accuracy: hits as f64 / test.len() as f64,
        scored_points: scored.len(),
        diverged: false,
        methods,
    })
}

fn diverged_outcome(cfg: &SyntheticConfig, trial_index: usize, k: usize) -> TrialOutcome {
    let labels: Vec<usize> = (0..=cfg.d / 2).collect();
    TrialOutcome {
        trial_index,
        target_group: k,
        test_accuracy: 0.0,
        scored_points: 0,
        diverged: true,
        methods: cfg
            .methods
            .iter()
            .map(|&method| MethodOutcome {
                method,
                argmax_group: 0,
                correct: false,
                scores: GroupScores {
                    method,
                    scores: vec![0.0; labels.len()],
                    labels: labels.clone(),
                    prediction: 0.0,
                },
            })
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: MethodKind,
    pub correct: usize,
    pub trials: usize,
    pub error_pct: f64,
    pub stderr_pct: f64,
}

impl MethodSummary {
    fn from_counts(method: MethodKind, correct: usize, trials: usize) -> Self {
        let p = correct as f64 / trials as f64;
        Self {
            method,
            correct,
            trials,
            error_pct: 100.0 * (1.0 - p),
            stderr_pct: 100.0 * (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub format_version: u32,
    pub tool_version: String,
    pub config: SyntheticConfig,
    pub methods: Vec<MethodSummary>,
    pub mean_test_accuracy: f64,
    pub diverged_trials: usize,
    pub trials: Vec<TrialOutcome>,
    /// Wall-clock time; left out of the serialized report so that reports are
    /// byte-for-byte reproducible.
    #[serde(skip)]
    pub runtime: Duration,
}

impl BenchmarkReport {
    pub fn summary(&self, method: MethodKind) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == method)
    }
}

/// Runs all trials on the current rayon pool and aggregates them in trial
/// order.
pub fn run_benchmark(cfg: &SyntheticConfig) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let trials = (0..cfg.n_datasets)
        .into_par_iter()
        .map(|i| run_trial(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    let n = trials.len();
    let methods = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(j, &m)| {
            let correct = trials.iter().filter(|t| t.methods[j].correct).count();
            MethodSummary::from_counts(m, correct, n)
        })
        .collect();
    Ok(BenchmarkReport {
        format_version: REPORT_FORMAT_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        methods,
        mean_test_accuracy: trials.iter().map(|t| t.test_accuracy).sum::<f64>() / n as f64,
        diverged_trials: trials.iter().filter(|t| t.diverged).count(),
        trials,
        runtime: start.elapsed(),
    })
}
