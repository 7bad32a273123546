mod common;

use common::{dense_packed, finite_difference, max_abs_diff, normals, random_net, random_widths};
use proptest::prelude::*;
use trim::attribution::{cd_forward, shapley, Decomposition, ModelOutput, ScalarFunction};
use trim::engine::Reparametrized;
use trim::transforms::{tile_bands, Mask};
use trim::{
    trim_score, MethodKind, MethodOptions, NdArray, SeededRng, ShapleyConfig, Transform, TrimQuery,
};

fn bools(rng: &mut SeededRng, n: usize) -> Vec<bool> {
    (0..n).map(|_| rng.uniform() < 0.5).collect()
}

fn dft_len() -> impl Strategy<Value = usize> {
    (1u32..8).prop_map(|p| 1usize << p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cd_parts_sum_to_prediction(seed in any::<u64>(), d in 1usize..12) {
        let mut rng = SeededRng::new(seed);
        let m = random_net(&random_widths(d, &mut rng), &mut rng);
        let x = NdArray::from_vec(normals(&mut rng, d));
        let dec = Decomposition::masked(&x, &bools(&mut rng, d)).unwrap();
        let (beta, gamma) = cd_forward(&m, &dec, 0).unwrap();
        let y = m.predict_one(x.data(), 0).unwrap();
        prop_assert!((beta + gamma - y).abs() <= 1e-9 * (1.0 + y.abs()));
    }

    #[test]
    fn exact_shapley_is_efficient(seed in any::<u64>(), d in 1usize..9) {
        let mut rng = SeededRng::new(seed);
        let m = random_net(&random_widths(d, &mut rng), &mut rng);
        let f = ModelOutput::new(&m);
        let x = normals(&mut rng, d);
        let b = normals(&mut rng, d);
        let groups: Vec<Vec<usize>> = (0..d).map(|i| vec![i]).collect();
        let r = shapley(&f, &x, &groups, &b, &ShapleyConfig::exact()).unwrap();
        let gap = r.total() - (f.value(&x) - f.value(&b));
        prop_assert!(gap.abs() < 1e-9, "gap {gap}");
    }

    #[test]
    fn dft_round_trips_and_matches_dense(seed in any::<u64>(), n in dft_len()) {
        let mut rng = SeededRng::new(seed);
        let x = NdArray::from_vec(normals(&mut rng, n));
        let t = Transform::dft1d(n).unwrap();
        let s = t.apply(&x).unwrap();
        prop_assert!(max_abs_diff(&s.values, &dense_packed(x.data())) < 1e-10);
        let back = t.invert(&s).unwrap();
        prop_assert!(max_abs_diff(back.data(), x.data()) < 1e-10);
        let ex: f64 = x.data().iter().map(|v| v * v).sum();
        let es: f64 = s.values.iter().map(|v| v * v).sum();
        prop_assert!((ex - es).abs() < 1e-9 * ex.max(1.0));
    }

    #[test]
    fn mask_and_complement_partition_coefficients(seed in any::<u64>(), n in 0usize..40) {
        let mut rng = SeededRng::new(seed);
        let mask = Mask::new(bools(&mut rng, n));
        let s = normals(&mut rng, n);
        let kept = mask.apply(&s);
        let rest = mask.complement().apply(&s);
        for i in 0..n {
            prop_assert_eq!(kept[i] + rest[i], s[i]);
            prop_assert!(kept[i] == 0.0 || rest[i] == 0.0);
        }
        prop_assert_eq!(mask.count() + mask.complement().count(), n);
        prop_assert_eq!(mask.complement().complement(), mask);
    }

    #[test]
    fn bands_tile_labels(end in 1usize..100, width in 1usize..20) {
        let bands = tile_bands(end, width).unwrap();
        let mut next = 0;
        for b in &bands {
            prop_assert_eq!(b.lo, next);
            prop_assert!(b.hi > b.lo && b.width() <= width);
            next = b.hi;
        }
        prop_assert_eq!(next, end);
    }

    #[test]
    fn trim_cd_splits_prediction(seed in any::<u64>(), n in dft_len()) {
        let mut rng = SeededRng::new(seed);
        let t = Transform::dft1d(n).unwrap();
        let m = random_net(&random_widths(n, &mut rng), &mut rng);
        let x = NdArray::from_vec(normals(&mut rng, n));
        let groups = t.groups();
        let chosen: Vec<_> = groups.iter().filter(|_| rng.uniform() < 0.5).collect();
        let mask = Mask::from_groups(t.coef_len(), chosen);
        let r = trim_score(&m, &x, &TrimQuery::new(t, mask, MethodKind::Cd)).unwrap();
        prop_assert!((r.score + r.complement - r.prediction).abs() <= 1e-9 * (1.0 + r.prediction.abs()));
    }

    #[test]
    fn trim_shapley_of_everything_is_output_difference(seed in any::<u64>(), n in (1u32..4).prop_map(|p| 1usize << p)) {
        let mut rng = SeededRng::new(seed);
        let t = Transform::dft1d(n).unwrap();
        let m = random_net(&random_widths(n, &mut rng), &mut rng);
        let x = NdArray::from_vec(normals(&mut rng, n));
        let q = TrimQuery::new(t.clone(), Mask::ones(t.coef_len()), MethodKind::Shapley).with_options(MethodOptions {
            ig_steps: 16,
            shapley: ShapleyConfig::exact(),
        });
        let r = trim_score(&m, &x, &q).unwrap();
        let f = Reparametrized::around(&m, &t, &x).unwrap();
        let zero = vec![0.0; t.coef_len()];
        let expected = r.prediction - f.value(&zero);
        prop_assert!((r.score - expected).abs() < 1e-9, "{} vs {}", r.score, expected);
    }

    #[test]
    fn reparametrized_gradient_matches_finite_differences(seed in any::<u64>(), n in dft_len()) {
        let mut rng = SeededRng::new(seed);
        let t = Transform::dft1d(n).unwrap();
        let m = random_net(&random_widths(n, &mut rng), &mut rng);
        let x = NdArray::from_vec(normals(&mut rng, n));
        let f = Reparametrized::around(&m, &t, &x).unwrap();
        let s = t.apply(&x).unwrap().values;
        // A stencil that straddles a ReLU kink is off by O(1); such draws are
        // discarded.
        let g = f.gradient(&s);
        let fd = finite_difference(|v| f.value(v), &s, 1e-6);
        let scale = g.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        let err = max_abs_diff(&g, &fd) / scale;
        prop_assume!(err < 1e-2);
        prop_assert!(err < 1e-5, "relative error {err}");
    }
}
