//! Band masks on the packed spectrum: keep one band of a signal and check
//! that the kept and dropped parts add back up to the signal.
//!
//! ```text
//! cargo run --example band_masks
//! ```

use trim::numeric::standard_normal;
use trim::transforms::{band_mask, label_end, tile_bands};
use trim::{SeededRng, Transform};

fn main() -> trim::Result<()> {
    let n = 32;
    let t = Transform::dft1d(n)?;
    let x = standard_normal(&mut SeededRng::new(11), n);
    let s = t.apply(&x)?;

    for band in tile_bands(label_end(&t)?, 4)? {
        let mask = band_mask(&t, band)?;
        let kept = t.invert(&s.masked(&mask))?;
        let dropped = t.invert(&s.masked(&mask.complement()))?;
        let energy: f64 = kept.data().iter().map(|v| v * v).sum();
        let gap = kept.add(&dropped)?.max_abs_diff(&x)?;
        println!(
            "band [{:2}, {:2})  {:2} coefficients  energy {energy:7.3}  |kept + dropped - x| {gap:.1e}",
            band.lo,
            band.hi,
            mask.count()
        );
    }
    let total: f64 = x.data().iter().map(|v| v * v).sum();
    println!("signal energy {total:.3}");
    Ok(())
}
