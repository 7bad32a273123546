//! TRIM on a trained network: score every Fourier frequency of one input
//! with each method, then score a band of frequencies jointly.
//!
//! ```text
//! cargo run --release --example trim_frequency_scores
//! ```

use trim::experiments::generate_dataset;
use trim::model::{train, TrainConfig};
use trim::transforms::{band_mask, BandSpec};
use trim::{
    group_scores, trim_score, MethodKind, MethodOptions, MlpSpec, NdArray, OutputHead, SeededRng,
    Transform, TrimQuery,
};

fn main() -> trim::Result<()> {
    let d = 32;
    let data = generate_dataset(d, 2000, &mut SeededRng::new(8))?;
    let x_train = NdArray::new(vec![1600, d], data.x.data()[..1600 * d].to_vec())?;
    let y_train = NdArray::from_vec(data.y.data()[..1600].to_vec());
    let spec = MlpSpec::new(vec![d, 128, 128, 1], OutputHead::Logit)?;
    let model = train(&spec, &x_train, &y_train, &TrainConfig::default())?.model;

    // A positive test point.
    let i = (1600..2000)
        .find(|&i| data.y.data()[i] == 1.0)
        .expect("some positive point");
    let x = NdArray::from_vec(data.x.row(i).to_vec());
    let t = Transform::dft1d(d)?;
    let options = MethodOptions::default();

    println!("label-defining frequency: {}", data.target_group);
    for method in MethodKind::ALL {
        let gs = group_scores(&model, &x, &t, method, &options)?;
        let top = gs.argmax_label();
        println!(
            "{:<17} top frequency {top:2} (score {:.3}, f(x) {:.3})",
            method.as_str(),
            gs.scores[top],
            gs.prediction
        );
    }

    let k = data.target_group;
    let band = BandSpec::new(k.saturating_sub(1).max(1), k + 2)?;
    let query = TrimQuery::new(t.clone(), band_mask(&t, band)?, MethodKind::Cd);
    let s = trim_score(&model, &x, &query)?;
    println!(
        "CD on band [{}, {}): relevant {:.3} + irrelevant {:.3} = f(x) {:.3}",
        band.lo, band.hi, s.score, s.complement, s.prediction
    );
    Ok(())
}
