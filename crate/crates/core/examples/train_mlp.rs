//! Train a ReLU classifier on the synthetic frequency task, save the
//! checkpoint and reload it.
//!
//! ```text
//! cargo run --release --example train_mlp
//! ```

use trim::experiments::generate_dataset;
use trim::model::{load_model, save_model, train, TrainConfig};
use trim::{MlpSpec, NdArray, OutputHead, SeededRng};

fn main() -> trim::Result<()> {
    let (d, n) = (32, 2000);
    let data = generate_dataset(d, n, &mut SeededRng::new(3))?;
    let n_train = 1600;
    let x_train = NdArray::new(vec![n_train, d], data.x.data()[..n_train * d].to_vec())?;
    let y_train = NdArray::from_vec(data.y.data()[..n_train].to_vec());

    let spec = MlpSpec::new(vec![d, 128, 128, 1], OutputHead::Logit)?;
    let outcome = train(&spec, &x_train, &y_train, &TrainConfig::default())?;
    for (epoch, loss) in outcome.loss_history.iter().enumerate().step_by(5) {
        println!("epoch {:2}  loss {loss:.4}", epoch + 1);
    }

    let model = outcome.model;
    let hits = (n_train..n)
        .filter(|&i| {
            (model.predict_one(data.x.row(i), 0).unwrap() > 0.0) == (data.y.data()[i] == 1.0)
        })
        .count();
    println!(
        "target frequency {}, test accuracy {:.3}",
        data.target_group,
        hits as f64 / (n - n_train) as f64
    );

    let path = std::env::temp_dir().join("trim-example-model.json");
    save_model(&model, &path)?;
    let reloaded = load_model(&path)?;
    println!(
        "checkpoint {} reloads identically: {}",
        path.display(),
        reloaded == model
    );
    Ok(())
}
