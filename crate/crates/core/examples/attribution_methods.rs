//! The four attribution backends on raw features of one small network.
//!
//! ```text
//! cargo run --example attribution_methods
//! ```

use trim::attribution::{
    cd_group_scores, input_x_gradient, integrated_gradients, shapley, ModelOutput, ShapleyConfig,
};
use trim::model::init_params;
use trim::numeric::standard_normal;
use trim::{MlpSpec, OutputHead, SeededRng};

fn main() -> trim::Result<()> {
    let spec = MlpSpec::new(vec![5, 12, 1], OutputHead::Identity)?;
    let mut rng = SeededRng::new(21);
    let model = init_params(&spec, &mut rng)?;
    let x = standard_normal(&mut rng, 5).into_data();
    let baseline = vec![0.0; 5];
    let f = ModelOutput::new(&model);
    let singletons: Vec<Vec<usize>> = (0..5).map(|i| vec![i]).collect();

    let cd = cd_group_scores(&model, &trim::NdArray::from_vec(x.clone()), &singletons)?;
    let ig = integrated_gradients(&f, &x, &baseline, 256)?;
    let ixg = input_x_gradient(&f, &x, &baseline)?;
    let exact = shapley(&f, &x, &singletons, &baseline, &ShapleyConfig::exact())?;
    let sampled = shapley(
        &f,
        &x,
        &singletons,
        &baseline,
        &ShapleyConfig::sampled(2000, 1),
    )?;

    println!(
        "{:>7} {:>9} {:>9} {:>9} {:>9} {:>15}",
        "feature", "cd", "ig", "ixg", "shap", "shap sampled"
    );
    for i in 0..5 {
        let se = sampled.standard_errors.as_ref().map_or(0.0, |e| e[i]);
        println!(
            "{i:>7} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>8.4}±{se:.4}",
            cd.scores[i], ig.scores[i], ixg.scores[i], exact.scores[i], sampled.scores[i]
        );
    }
    println!(
        "f(x) - f(0) = {:.4}; IG gap {:.1e}, exact Shapley gap {:.1e}",
        ig.output - ig.baseline_output,
        ig.completeness_gap.unwrap_or(0.0),
        exact.completeness_gap.unwrap_or(0.0)
    );
    Ok(())
}
