mod common;

use common::{
    finite_difference, max_abs_diff, naive_matmul, normals, random_net, random_widths,
    reference_forward,
};
use trim::model::{grad_input, load_model, save_model, train, TrainConfig};
use trim::{MlpSpec, NdArray, OutputHead, SeededRng};

#[test]
fn matmul_matches_triple_loop() {
    let mut rng = SeededRng::new(1);
    for (m, k, n) in [(1, 1, 1), (3, 5, 2), (17, 9, 13)] {
        let a = normals(&mut rng, m * k);
        let b = normals(&mut rng, k * n);
        let got = NdArray::new(vec![m, k], a.clone())
            .unwrap()
            .matmul(&NdArray::new(vec![k, n], b.clone()).unwrap())
            .unwrap();
        assert!(max_abs_diff(got.data(), &naive_matmul(&a, &b, m, k, n)) < 1e-12);
    }
}

#[test]
fn forward_matches_reference() {
    let mut rng = SeededRng::new(2);
    for _ in 0..20 {
        let d = rng.range(2, 12);
        let m = random_net(&random_widths(d, &mut rng), &mut rng);
        let x = normals(&mut rng, d);
        let got = m.predict_one(&x, 0).unwrap();
        assert!((got - reference_forward(&m, &x)[0]).abs() < 1e-12);
    }
}

#[test]
fn batched_forward_matches_rows() {
    let mut rng = SeededRng::new(3);
    let m = random_net(&[6, 10, 7, 1], &mut rng);
    let x = NdArray::new(vec![5, 6], normals(&mut rng, 30)).unwrap();
    let (y, _) = m.forward(&x).unwrap();
    for r in 0..5 {
        assert!((y.data()[r] - reference_forward(&m, x.row(r))[0]).abs() < 1e-12);
    }
}

#[test]
fn backprop_matches_finite_differences() {
    let mut rng = SeededRng::new(4);
    for _ in 0..30 {
        let d = rng.range(2, 10);
        let m = random_net(&random_widths(d, &mut rng), &mut rng);
        let x = normals(&mut rng, d);
        let g = grad_input(&m, &NdArray::from_vec(x.clone()), 0).unwrap();
        let fd = finite_difference(|z| reference_forward(&m, z)[0], &x, 1e-6);
        let scale = g.data().iter().chain(&fd).fold(1e-8, |a, v| a + v.abs());
        assert!(max_abs_diff(g.data(), &fd) / scale < 1e-5);
    }
}

#[test]
fn checkpoint_round_trip_preserves_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = SeededRng::new(5);
    let m = random_net(&[8, 16, 1], &mut rng);
    let path = dir.path().join("m.json");
    save_model(&m, &path).unwrap();
    let back = load_model(&path).unwrap();
    for _ in 0..10 {
        let x = normals(&mut rng, 8);
        assert_eq!(
            m.predict_one(&x, 0).unwrap(),
            back.predict_one(&x, 0).unwrap()
        );
    }
}

#[test]
fn checkpoint_rejects_unknown_fields() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    save_model(&random_net(&[2, 2, 1], &mut SeededRng::new(0)), &path).unwrap();
    let text = std::fs::read_to_string(&path)
        .unwrap()
        .replacen('{', "{\"extra\": 1, ", 1);
    std::fs::write(&path, text).unwrap();
    assert!(load_model(&path).is_err());
}

#[test]
fn regression_fits_a_linear_target() {
    let mut rng = SeededRng::new(6);
    let n = 400;
    let x = NdArray::new(vec![n, 3], normals(&mut rng, 3 * n)).unwrap();
    let y: Vec<f64> = (0..n)
        .map(|r| 2.0 * x.row(r)[0] - x.row(r)[2] + 0.5)
        .collect();
    let spec = MlpSpec::new(vec![3, 16, 1], OutputHead::Identity).unwrap();
    let cfg = TrainConfig {
        epochs: 200,
        learning_rate: 1e-2,
        batch_size: 32,
        ..TrainConfig::default()
    };
    let out = train(&spec, &x, &NdArray::from_vec(y), &cfg).unwrap();
    assert!(*out.loss_history.last().unwrap() < 0.01 * out.loss_history[0]);
}
