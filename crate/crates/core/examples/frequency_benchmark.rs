//! Synthetic frequency-recovery benchmark: how often does each attribution
//! method give the label-defining frequency the top score?
//!
//! ```text
//! cargo run --release --example frequency_benchmark -- [n_datasets] [seed]
//! ```

use trim::experiments::{run_benchmark, SyntheticConfig};

fn main() -> trim::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_datasets = args.next().map_or(20, |a| a.parse().expect("n_datasets"));
    let master_seed = args.next().map_or(0, |a| a.parse().expect("seed"));
    let cfg = SyntheticConfig {
        n_datasets,
        master_seed,
        ..SyntheticConfig::default()
    };
    let report = run_benchmark(&cfg)?;

    println!("{:<18} {:>9} {:>9}", "method", "error_%", "stderr_%");
    for m in &report.methods {
        println!(
            "{:<18} {:>9.1} {:>9.2}",
            m.method.as_str(),
            m.error_pct,
            m.stderr_pct
        );
    }
    println!(
        "mean test accuracy {:.3}, {} diverged, {:.1?}",
        report.mean_test_accuracy, report.diverged_trials, report.runtime
    );
    Ok(())
}
