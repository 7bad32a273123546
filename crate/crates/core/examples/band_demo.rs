//! Band-importance curves: a network trained to predict signal energy
//! attributes most of its prediction to the band holding the energy.
//!
//! ```text
//! cargo run --release --example band_demo -- [seed]
//! ```

use trim::experiments::band_demo;

fn main() -> trim::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(0, |a| a.parse().expect("seed"));
    let out = band_demo(seed)?;
    println!("energy injected into band {}", out.injected_band);
    for (i, band) in out.bands.iter().enumerate() {
        let bar = "#".repeat((40.0 * out.mean_normalized[i].max(0.0)).round() as usize);
        println!(
            "[{:2}, {:2})  {:7.3}  {bar}",
            band.lo, band.hi, out.mean_normalized[i]
        );
    }
    println!("argmax band {}", out.argmax_band());
    Ok(())
}
