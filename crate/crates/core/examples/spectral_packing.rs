//! Unitary FFT, the packed real spectrum and its frequency groups.
//!
//! ```text
//! cargo run --example spectral_packing
//! ```

use trim::numeric::{fft, ComplexSeq};
use trim::transforms::frequency_groups;
use trim::{NdArray, Transform};

fn main() -> trim::Result<()> {
    let n = 16;
    // Two tones: frequency 2 and frequency 5.
    let x: Vec<f64> = (0..n)
        .map(|j| {
            let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            (2.0 * t).cos() + 0.5 * (5.0 * t).sin()
        })
        .collect();

    let spectrum = fft(&ComplexSeq::from_real(x.clone()), false)?;
    println!("|X_k| for k = 0..{}", n / 2);
    for k in 0..=n / 2 {
        println!("  {k:2}  {:.4}", spectrum.re[k].hypot(spectrum.im[k]));
    }

    let t = Transform::dft1d(n)?;
    let s = t.apply(&NdArray::from_vec(x.clone()))?;
    let energy_x: f64 = x.iter().map(|v| v * v).sum();
    let energy_s: f64 = s.values.iter().map(|v| v * v).sum();
    println!("energy: signal {energy_x:.6}, packed spectrum {energy_s:.6}");

    println!("groups:");
    for g in frequency_groups(&t)? {
        let e: f64 = g.indices.iter().map(|&i| s.values[i] * s.values[i]).sum();
        println!(
            "  k={:2} coefficients {:?} energy {e:.4}",
            g.label, g.indices
        );
    }

    let back = t.invert(&s)?;
    println!(
        "round-trip error {:.2e}",
        back.max_abs_diff(&NdArray::from_vec(x))?
    );
    Ok(())
}
