//! Baseline Shapley values over groups of input coordinates.
//!
//! The value of a coalition `S` is `f` evaluated at `x` with every coordinate
//! outside the groups in `S` replaced by the baseline. Groups whose
//! coordinates already equal the baseline are dummies: their presence never
//! changes the evaluated input, so they receive exactly zero and are left out
//! of the enumeration.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{AttributionResult, MethodKind, ScalarFunction};
use crate::error::{Result, TrimError};
use crate::numeric::SeededRng;

/// Largest group count accepted by exact enumeration.
pub const MAX_EXACT_GROUPS: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapleyMode {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapleyConfig {
    pub mode: ShapleyMode,
    /// Random permutations drawn in sampled mode.
    pub permutations: usize,
    pub seed: u64,
}

impl Default for ShapleyConfig {
    fn default() -> Self {
        Self {
            mode: ShapleyMode::Sampled,
            permutations: 500,
            seed: 0,
        }
    }
}

impl ShapleyConfig {
    pub fn exact() -> Self {
        Self {
            mode: ShapleyMode::Exact,
            ..Self::default()
        }
    }

    pub fn sampled(permutations: usize, seed: u64) -> Self {
        Self {
            mode: ShapleyMode::Sampled,
            permutations,
            seed,
        }
    }
}

struct Game<'a, F: ScalarFunction + ?Sized> {
    f: &'a F,
    x: &'a [f64],
    baseline: &'a [f64],
    groups: &'a [Vec<usize>],
    /// Indices into `groups` of the non-dummy players.
    active: Vec<usize>,
}

impl<F: ScalarFunction + ?Sized> Game<'_, F> {
    /// Input for a coalition given as a bitmask over active players.
    fn input(&self, coalition: u64) -> Vec<f64> {
        let mut z = self.baseline.to_vec();
        for (bit, &g) in self.active.iter().enumerate() {
            if coalition >> bit & 1 == 1 {
                for &i in &self.groups[g] {
                    z[i] = self.x[i];
                }
            }
        }
        z
    }
}

/// Shapley values of `groups` (a partition of the input coordinates).
pub fn shapley(
    f: &(impl ScalarFunction + ?Sized),
    x: &[f64],
    groups: &[Vec<usize>],
    baseline: &[f64],
    cfg: &ShapleyConfig,
) -> Result<AttributionResult> {
    let d = f.dim();
    if x.len() != d || baseline.len() != d {
        return Err(TrimError::dim(
            "shapley input",
            d,
            x.len().max(baseline.len()),
        ));
    }
    let mut seen = vec![false; d];
    for g in groups {
        if g.is_empty() {
            return Err(TrimError::InvalidArgument("empty Shapley group".into()));
        }
        for &i in g {
            if i >= d || seen[i] {
                return Err(TrimError::InvalidArgument(
                    "Shapley groups must partition the input coordinates".into(),
                ));
            }
            seen[i] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(TrimError::InvalidArgument(
            "Shapley groups must cover every input coordinate".into(),
        ));
    }
    if cfg.mode == ShapleyMode::Exact && groups.len() > MAX_EXACT_GROUPS {
        return Err(TrimError::ShapleyGroupCap {
            groups: groups.len(),
            max: MAX_EXACT_GROUPS,
        });
    }
    if cfg.mode == ShapleyMode::Sampled && cfg.permutations == 0 {
        return Err(TrimError::InvalidArgument(
            "sampled Shapley needs permutations >= 1".into(),
        ));
    }

    let active: Vec<usize> = (0..groups.len())
        .filter(|&g| groups[g].iter().any(|&i| x[i] != baseline[i]))
        .collect();
    if active.len() > 63 {
        return Err(TrimError::InvalidArgument(
            "at most 63 groups may differ from the baseline".into(),
        ));
    }
    let game = Game {
        f,
        x,
        baseline,
        groups,
        active,
    };
    let output = f.value(x);
    let baseline_output = f.value(baseline);

    let (scores, standard_errors) = match cfg.mode {
        ShapleyMode::Exact => (exact(&game, groups.len()), None),
        ShapleyMode::Sampled => {
            let (s, e) = sampled(&game, groups.len(), cfg);
            (s, Some(e))
        }
    };
    let gap = (scores.iter().sum::<f64>() - (output - baseline_output)).abs();
    Ok(AttributionResult {
        method: MethodKind::Shapley,
        scores,
        completeness_gap: Some(gap),
        output,
        baseline_output,
        standard_errors,
    })
}

fn exact<F: ScalarFunction + ?Sized>(game: &Game<'_, F>, n_groups: usize) -> Vec<f64> {
    let p = game.active.len();
    let n_coalitions = 1usize << p;
    let mut inputs = Vec::with_capacity(n_coalitions * game.x.len());
    for c in 0..n_coalitions {
        inputs.extend(game.input(c as u64));
    }
    let values = game.f.values(&inputs);

    // weight(s) = s!(p-s-1)!/p!
    let mut weight = vec![0.0; p.max(1)];
    for (s, w) in weight.iter_mut().enumerate().take(p) {
        *w = 1.0 / (p as f64 * binomial(p - 1, s));
    }
    let mut scores = vec![0.0; n_groups];
    for (bit, &g) in game.active.iter().enumerate() {
        let mut phi = 0.0;
        for c in 0..n_coalitions {
            if c >> bit & 1 == 0 {
                let s = (c as u64).count_ones() as usize;
                phi += weight[s] * (values[c | 1 << bit] - values[c]);
            }
        }
        scores[g] = phi;
    }
    scores
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn sampled<F: ScalarFunction + ?Sized>(
    game: &Game<'_, F>,
    n_groups: usize,
    cfg: &ShapleyConfig,
) -> (Vec<f64>, Vec<f64>) {
    let p = game.active.len();
    let mut rng = SeededRng::new(cfg.seed);
    let mut memo: HashMap<u64, f64> = HashMap::new();
    let mut value = |c: u64| -> f64 {
        *memo
            .entry(c)
            .or_insert_with(|| game.f.value(&game.input(c)))
    };
    let mut sum = vec![0.0; p];
    let mut sum_sq = vec![0.0; p];
    let mut order: Vec<usize> = (0..p).collect();
    for _ in 0..cfg.permutations {
        rng.shuffle(&mut order);
        let mut coalition = 0u64;
        let mut prev = value(coalition);
        for &bit in &order {
            coalition |= 1 << bit;
            let v = value(coalition);
            let m = v - prev;
            sum[bit] += m;
            sum_sq[bit] += m * m;
            prev = v;
        }
    }
    let n = cfg.permutations as f64;
    let mut scores = vec![0.0; n_groups];
    let mut errors = vec![0.0; n_groups];
    for (bit, &g) in game.active.iter().enumerate() {
        let mean = sum[bit] / n;
        scores[g] = mean;
        if cfg.permutations > 1 {
            let var = ((sum_sq[bit] - n * mean * mean) / (n - 1.0)).max(0.0);
            errors[g] = (var / n).sqrt();
        }
    }
    (scores, errors)
}
