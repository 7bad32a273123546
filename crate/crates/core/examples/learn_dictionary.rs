//! Learn an analysis/synthesis dictionary on the sparse-synthetic fixture
//! and use it as a TRIM transform.
//!
//! ```text
//! cargo run --release --example learn_dictionary
//! ```

use std::path::Path;

use trim::io::read_csv_matrix;
use trim::transforms::{learn_dictionary, DictionaryConfig};
use trim::SeededRng;

fn main() -> trim::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/sparse_synthetic.csv");
    let x = read_csv_matrix(&path)?;
    let cfg = DictionaryConfig::default();
    let learned = learn_dictionary(&x, &cfg, None, &mut SeededRng::new(0))?;

    for (step, t) in learned.trace.iter().enumerate().step_by(100) {
        println!(
            "step {step:4}  l1 {:.4}  reconstruction {:.5}  total {:.5}",
            t.l1, t.reconstruction, t.total
        );
    }
    let (first, last) = (learned.trace[0], learned.trace[cfg.steps]);
    println!(
        "reconstruction {:.1}% of initial, mean l1 {:.3} -> {:.3}",
        100.0 * last.reconstruction / first.reconstruction,
        first.l1,
        last.l1
    );

    let t = &learned.transform;
    let sample = trim::NdArray::from_vec(x.row(0).to_vec());
    let coefficients = t.apply(&sample)?;
    let residual = t.residual(&sample)?;
    println!(
        "{} atoms for {}-dim samples; first sample coefficients {:.3?}, residual norm {:.2e}",
        t.coef_len(),
        t.raw_len(),
        coefficients.values,
        residual.data().iter().map(|v| v * v).sum::<f64>().sqrt()
    );
    Ok(())
}
