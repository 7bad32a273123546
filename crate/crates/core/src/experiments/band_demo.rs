//! Band importance on synthetic signals whose energy sits in one known band.

use serde::{Deserialize, Serialize};

use crate::attribution::MethodKind;
use crate::engine::{argmax, band_sweep, BandCurve, MethodOptions};
use crate::error::{Result, TrimError};
use crate::model::{train, MlpModel, MlpSpec, OutputHead, TrainConfig};
use crate::numeric::{NdArray, SeededRng};
use crate::transforms::{label_end, tile_bands, BandSpec, Transform};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandDemoConfig {
    pub d: usize,
    /// Band width in frequency indices.
    pub width: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub hidden: Vec<usize>,
    pub train: TrainConfig,
    /// Standard deviation of the white noise added to every coefficient.
    pub noise: f64,
    pub method: MethodKind,
    pub options: MethodOptions,
    /// Band index to inject into the test signals; drawn from the seed when
    /// absent.
    pub injected_band: Option<usize>,
}

impl Default for BandDemoConfig {
    fn default() -> Self {
        Self {
            d: 32,
            width: 4,
            n_train: 2000,
            n_test: 20,
            hidden: vec![64, 64],
            train: TrainConfig {
                epochs: 40,
                ..TrainConfig::default()
            },
            noise: 0.1,
            method: MethodKind::Cd,
            options: MethodOptions::default(),
            injected_band: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BandDemoOutcome {
    pub injected_band: usize,
    pub bands: Vec<BandSpec>,
    /// One curve per test signal.
    pub curves: Vec<BandCurve>,
    pub mean_normalized: Vec<f64>,
    pub model: MlpModel,
    /// Test signals, one per row.
    pub inputs: NdArray,
}

impl BandDemoOutcome {
    pub fn argmax_band(&self) -> usize {
        argmax(&self.mean_normalized)
    }
}

/// Bands that may receive injected energy: every full-width band.
fn candidate_bands(bands: &[BandSpec], width: usize) -> Vec<usize> {
    (0..bands.len())
        .filter(|&i| bands[i].width() == width)
        .collect()
}

/// A signal whose Fourier coefficients are standard normal inside `band` and
/// `noise`-scaled standard normal elsewhere.
pub fn band_signal(
    t: &Transform,
    band: BandSpec,
    noise: f64,
    rng: &mut SeededRng,
) -> Result<Vec<f64>> {
    let mut s = vec![0.0; t.coef_len()];
    for g in t.groups() {
        let scale = if band.contains(g.label) { 1.0 } else { noise };
        for i in g.indices {
            s[i] = scale * rng.normal();
        }
    }
    Ok(t.inverse_raw(&s))
}

/// Band demo with default settings.
pub fn band_demo(seed: u64) -> Result<BandDemoOutcome> {
    band_demo_with(&BandDemoConfig::default(), seed)
}

/// Trains a regressor for total signal energy on signals with energy in
/// random bands, then sweeps bands on test signals injected into one band.
pub fn band_demo_with(cfg: &BandDemoConfig, seed: u64) -> Result<BandDemoOutcome> {
    let t = Transform::dft1d(cfg.d)?;
    let bands = tile_bands(label_end(&t)?, cfg.width)?;
    let candidates = candidate_bands(&bands, cfg.width);
    if candidates.is_empty() {
        return Err(TrimError::InvalidArgument(format!(
            "band width {} leaves no full band in a length-{} spectrum",
            cfg.width, cfg.d
        )));
    }
    let rng = SeededRng::new(seed);
    let injected = match cfg.injected_band {
        Some(b) if b < bands.len() => b,
        Some(b) => {
            return Err(TrimError::InvalidArgument(format!(
                "injected band {b} out of range (have {} bands)",
                bands.len()
            )))
        }
        None => candidates[rng.child("band").range(0, candidates.len())],
    };

    let mut data_rng = rng.child("train-data");
    let mut x = Vec::with_capacity(cfg.n_train * cfg.d);
    let mut y = Vec::with_capacity(cfg.n_train);
    for _ in 0..cfg.n_train {
        let b = candidates[data_rng.range(0, candidates.len())];
        let signal = band_signal(&t, bands[b], cfg.noise, &mut data_rng)?;
        y.push(signal.iter().map(|v| v * v).sum());
        x.extend(signal);
    }
    let mut widths = vec![cfg.d];
    widths.extend(&cfg.hidden);
    widths.push(1);
    let spec = MlpSpec::new(widths, OutputHead::Identity)?;
    let train_cfg = TrainConfig {
        seed: rng.child("train").next_u64(),
        ..cfg.train.clone()
    };
    let model = train(
        &spec,
        &NdArray::new(vec![cfg.n_train, cfg.d], x)?,
        &NdArray::from_vec(y),
        &train_cfg,
    )?
    .model;

    let mut test_rng = rng.child("test-data");
    let mut inputs = Vec::with_capacity(cfg.n_test * cfg.d);
    let mut curves = Vec::with_capacity(cfg.n_test);
    for _ in 0..cfg.n_test {
        let signal = band_signal(&t, bands[injected], cfg.noise, &mut test_rng)?;
        let xi = NdArray::from_vec(signal);
        curves.push(band_sweep(
            &model,
            &xi,
            &t,
            cfg.width,
            cfg.method,
            &cfg.options,
        )?);
        inputs.extend(xi.into_data());
    }
    let mut mean_normalized = vec![0.0; bands.len()];
    for c in &curves {
        mean_normalized
            .iter_mut()
            .zip(&c.normalized)
            .for_each(|(m, v)| *m += v);
    }
    mean_normalized
        .iter_mut()
        .for_each(|m| *m /= curves.len().max(1) as f64);

    Ok(BandDemoOutcome {
        injected_band: injected,
        bands,
        curves,
        mean_normalized,
        model,
        inputs: NdArray::new(vec![cfg.n_test, cfg.d], inputs)?,
    })
}
