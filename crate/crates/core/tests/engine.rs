mod common;

use common::{dense_bandpass, dot, linear_model, max_abs_diff, normals, random_net};
use trim::attribution::{
    cd_forward, integrated_gradients, shapley, Decomposition, ModelOutput, ScalarFunction,
};
use trim::engine::Reparametrized;
use trim::model::{train, TrainConfig};
use trim::transforms::{band_mask, label_end, tile_bands, Mask};
use trim::{
    band_sweep, group_scores, trim_score, BandSpec, MethodKind, MethodOptions, MlpModel, MlpSpec,
    NdArray, OutputHead, SeededRng, ShapleyConfig, Transform, TrimError, TrimQuery,
};

fn exact_options() -> MethodOptions {
    MethodOptions {
        ig_steps: 256,
        shapley: ShapleyConfig::exact(),
    }
}

/// Regressor for total signal energy, trained on white noise.
fn energy_net(n: usize, seed: u64) -> MlpModel {
    let mut rng = SeededRng::new(seed);
    let rows = 2000;
    let x = normals(&mut rng, rows * n);
    let y: Vec<f64> = x.chunks(n).map(|r| r.iter().map(|v| v * v).sum()).collect();
    let spec = MlpSpec::new(vec![n, 64, 1], OutputHead::Identity).unwrap();
    let cfg = TrainConfig {
        epochs: 60,
        learning_rate: 3e-3,
        seed,
        ..TrainConfig::default()
    };
    train(
        &spec,
        &NdArray::new(vec![rows, n], x).unwrap(),
        &NdArray::from_vec(y),
        &cfg,
    )
    .unwrap()
    .model
}

#[test]
fn identity_transform_with_full_mask_is_plain_attribution() {
    let mut rng = SeededRng::new(1);
    for _ in 0..10 {
        let m = random_net(&[6, 10, 1], &mut rng);
        let x = NdArray::from_vec(normals(&mut rng, 6));
        let t = Transform::identity(6);
        let f = ModelOutput::new(&m);
        let zero = [0.0; 6];
        let singletons: Vec<Vec<usize>> = (0..6).map(|i| vec![i]).collect();
        let expected = [
            (
                MethodKind::Cd,
                cd_forward(&m, &Decomposition::masked(&x, &[true; 6]).unwrap(), 0)
                    .unwrap()
                    .0,
            ),
            (
                MethodKind::Ig,
                integrated_gradients(&f, x.data(), &zero, 256)
                    .unwrap()
                    .total(),
            ),
            (
                MethodKind::Shapley,
                shapley(&f, x.data(), &singletons, &zero, &ShapleyConfig::exact())
                    .unwrap()
                    .total(),
            ),
        ];
        for (method, want) in expected {
            let q = TrimQuery::new(t.clone(), Mask::ones(6), method).with_options(exact_options());
            let got = trim_score(&m, &x, &q).unwrap().score;
            assert!((got - want).abs() < 1e-9, "{method:?}");
        }
    }
}

#[test]
fn cd_band_score_of_linear_model_is_w_dot_bandpass() {
    let mut rng = SeededRng::new(2);
    let n = 32;
    let t = Transform::dft1d(n).unwrap();
    for (lo, hi) in [(0, 3), (4, 9), (12, 17)] {
        let w = normals(&mut rng, n);
        let x = normals(&mut rng, n);
        let q = TrimQuery::new(
            t.clone(),
            band_mask(&t, BandSpec::new(lo, hi).unwrap()).unwrap(),
            MethodKind::Cd,
        );
        let got = trim_score(&linear_model(&w, 0.0), &NdArray::from_vec(x.clone()), &q).unwrap();
        assert!((got.score - dot(&w, &dense_bandpass(&x, lo, hi))).abs() < 1e-9);
    }
}

#[test]
fn zero_mask_gives_zero_for_bias_free_nets() {
    let mut rng = SeededRng::new(3);
    let mut m = random_net(&[16, 12, 1], &mut rng);
    m.layers
        .iter_mut()
        .for_each(|l| l.bias.iter_mut().for_each(|b| *b = 0.0));
    let x = NdArray::from_vec(normals(&mut rng, 16));
    let q = TrimQuery::new(
        Transform::dft1d(16).unwrap(),
        Mask::zeros(16),
        MethodKind::Cd,
    );
    assert_eq!(trim_score(&m, &x, &q).unwrap().score, 0.0);
}

#[test]
fn pure_cosine_peaks_at_its_frequency() {
    let n = 16;
    let model = energy_net(n, 4);
    let x: Vec<f64> = (0..n)
        .map(|j| 2f64.sqrt() * (2.0 * std::f64::consts::PI * 5.0 * j as f64 / n as f64).cos())
        .collect();
    let t = Transform::dft1d(n).unwrap();
    for method in [MethodKind::Cd, MethodKind::Ig, MethodKind::Shapley] {
        let gs = group_scores(
            &model,
            &NdArray::from_vec(x.clone()),
            &t,
            method,
            &exact_options(),
        )
        .unwrap();
        assert_eq!(gs.labels, (0..=n / 2).collect::<Vec<_>>());
        assert_eq!(gs.argmax_label(), 5, "{method:?}");
    }
}

#[test]
fn linear_group_and_band_scores_add_up_to_prediction() {
    let mut rng = SeededRng::new(5);
    let n = 32;
    let w = normals(&mut rng, n);
    let m = linear_model(&w, 0.0);
    let x = NdArray::from_vec(normals(&mut rng, n));
    let t = Transform::dft1d(n).unwrap();
    let fx = m.predict_one(x.data(), 0).unwrap();
    let gs = group_scores(&m, &x, &t, MethodKind::Cd, &MethodOptions::default()).unwrap();
    assert!((gs.scores.iter().sum::<f64>() - fx).abs() < 1e-9);
    for width in [1, 3, 5, 17] {
        let c = band_sweep(&m, &x, &t, width, MethodKind::Cd, &MethodOptions::default()).unwrap();
        assert!((c.scores.iter().sum::<f64>() - fx).abs() < 1e-9);
        assert_eq!(c.centers.len(), c.normalized.len());
    }
    let single = band_sweep(
        &m,
        &x,
        &t,
        n / 2 + 1,
        MethodKind::Cd,
        &MethodOptions::default(),
    )
    .unwrap();
    assert_eq!(single.bands.len(), 1);
    assert!((single.normalized[0] - 1.0).abs() < 1e-9);
}

#[test]
fn bands_tile_the_spectrum() {
    let t = Transform::dft1d(64).unwrap();
    for width in 1..=33 {
        let bands = tile_bands(label_end(&t).unwrap(), width).unwrap();
        assert_eq!(bands[0].lo, 0);
        assert_eq!(bands.last().unwrap().hi, 33);
        for pair in bands.windows(2) {
            assert_eq!(pair[0].hi, pair[1].lo);
        }
    }
}

#[test]
fn band_energy_curve_peaks_at_the_energetic_band() {
    let n = 16;
    let model = energy_net(n, 6);
    let t = Transform::dft1d(n).unwrap();
    let mut rng = SeededRng::new(7);
    // Energy only in frequencies 4..6 (band 2 for width 2).
    let mut s = vec![0.0; n];
    for g in t.groups().iter().filter(|g| (4..6).contains(&g.label)) {
        for &i in &g.indices {
            s[i] = 1.5 * rng.normal();
        }
    }
    let x = t
        .invert(&trim::CoefficientVector::new(s, t.layout()))
        .unwrap();
    let c = band_sweep(&model, &x, &t, 2, MethodKind::Cd, &MethodOptions::default()).unwrap();
    assert_eq!(c.argmax_band(), 2);
}

#[test]
fn cd_band_decompositions_are_complementary() {
    let mut rng = SeededRng::new(8);
    let n = 32;
    let t = Transform::dft1d(n).unwrap();
    let x = NdArray::from_vec(normals(&mut rng, n));
    let s = t.apply(&x).unwrap();
    for band in tile_bands(label_end(&t).unwrap(), 4).unwrap() {
        let m = band_mask(&t, band).unwrap();
        let beta = t.invert(&s.masked(&m)).unwrap();
        let gamma = x.sub(&beta).unwrap();
        assert!(max_abs_diff(beta.add(&gamma).unwrap().data(), x.data()) < 1e-12);
        let also_gamma = t.invert(&s.masked(&m.complement())).unwrap();
        assert!(max_abs_diff(gamma.data(), also_gamma.data()) < 1e-12);
    }
}

#[test]
fn group_mask_equals_union_of_its_coefficients() {
    let t = Transform::dft1d(16).unwrap();
    for g in t.groups() {
        let by_group = Mask::from_groups(16, [&g]);
        let mut entries = vec![false; 16];
        g.indices.iter().for_each(|&i| entries[i] = true);
        assert_eq!(by_group, Mask::new(entries));
    }
}

#[test]
fn residual_is_reattached_for_dictionaries() {
    let mut rng = SeededRng::new(9);
    let analysis = NdArray::new(vec![5, 8], normals(&mut rng, 40)).unwrap();
    let t = Transform::dictionary(analysis).unwrap();
    let m = random_net(&[8, 10, 1], &mut rng);
    for _ in 0..10 {
        let x = NdArray::from_vec(normals(&mut rng, 8));
        let f = Reparametrized::around(&m, &t, &x).unwrap();
        let s = t.apply(&x).unwrap();
        assert!((f.value(&s.values) - m.predict_one(x.data(), 0).unwrap()).abs() < 1e-10);
        assert!(f.residual().iter().any(|r| r.abs() > 1e-6));
    }
}

#[test]
fn dictionary_cd_puts_residual_in_gamma() {
    let mut rng = SeededRng::new(10);
    let t =
        Transform::dictionary(NdArray::new(vec![3, 6], normals(&mut rng, 18)).unwrap()).unwrap();
    let m = random_net(&[6, 8, 1], &mut rng);
    let x = NdArray::from_vec(normals(&mut rng, 6));
    let q = TrimQuery::new(t, Mask::ones(3), MethodKind::Cd);
    let r = trim_score(&m, &x, &q).unwrap();
    assert!((r.score + r.complement - r.prediction).abs() < 1e-9);
    assert!(r.complement.abs() > 0.0);
}

#[test]
fn split_frequency_group_is_rejected() {
    let m = linear_model(&[1.0; 8], 0.0);
    let mut entries = vec![false; 8];
    entries[1] = true;
    for method in MethodKind::ALL {
        let q = TrimQuery::new(
            Transform::dft1d(8).unwrap(),
            Mask::new(entries.clone()),
            method,
        );
        assert!(matches!(
            trim_score(&m, &NdArray::from_vec(vec![1.0; 8]), &q),
            Err(TrimError::Contract(_))
        ));
    }
}
