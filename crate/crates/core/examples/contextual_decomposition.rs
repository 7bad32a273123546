//! Contextual decomposition of a random ReLU net: split an input into a
//! relevant part and the rest, and propagate both through the network.
//!
//! ```text
//! cargo run --example contextual_decomposition
//! ```

use trim::attribution::{cd_forward, cd_group_scores, Decomposition};
use trim::model::init_params;
use trim::numeric::standard_normal;
use trim::{MlpSpec, OutputHead, SeededRng};

fn main() -> trim::Result<()> {
    let spec = MlpSpec::new(vec![6, 16, 16, 1], OutputHead::Identity)?;
    let mut rng = SeededRng::new(5);
    let model = init_params(&spec, &mut rng)?;
    let x = standard_normal(&mut rng, 6);
    let prediction = model.predict_one(x.data(), 0)?;

    let d = Decomposition::masked(&x, &[true, true, false, false, false, false])?;
    let (beta, gamma) = cd_forward(&model, &d, 0)?;
    println!(
        "features 0-1: beta {beta:.4}, gamma {gamma:.4}, sum {:.4}, f(x) {prediction:.4}",
        beta + gamma
    );

    let groups = vec![vec![0, 1], vec![2, 3], vec![4, 5]];
    let r = cd_group_scores(&model, &x, &groups)?;
    for (g, s) in groups.iter().zip(&r.scores) {
        println!("group {g:?}: {s:.4}");
    }
    println!(
        "group scores need not add up to f(x): total {:.4}",
        r.total()
    );
    Ok(())
}
